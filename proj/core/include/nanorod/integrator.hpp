#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nanorod/model.hpp"
#include "nanorod/observables.hpp"
#include "nanorod/state.hpp"

namespace nanorod {

/// Right-hand side of y' = f(t, y) on a flat real state vector.
using Derivative = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

/// A stage produced a NaN or infinity. `index` is the first offending entry
/// of the flat state vector; `stage` is 1..6, or 0 for the combined solution.
class NonFiniteState : public std::runtime_error {
public:
    NonFiniteState(std::size_t index, int stage);
    std::size_t index;
    int stage;
};

/// Cash-Karp embedded Runge-Kutta 5(4) stepper over a flat real vector.
/// Holds its stage buffers, so one instance serves a whole integration.
class CashKarpStepper {
public:
    explicit CashKarpStepper(std::size_t n);

    std::size_t size() const { return k_[0].size(); }

    /// One step of length dt from (t, y). Writes the fifth-order solution to
    /// `y_next` (which must not alias `y`) and returns the max-norm of the
    /// difference between the embedded fifth- and fourth-order solutions.
    /// Throws NonFiniteState if any stage or the result is not finite.
    double step(std::span<const double> y, double t, double dt, const Derivative& f,
                std::span<double> y_next);

private:
    [[noreturn]] void report_non_finite(std::span<const double> y_next) const;

    std::vector<double> k_[6];
    std::vector<double> stage_;
};

class Liouvillian;

/// Cash-Karp step of the phase-space field, evaluated as a pipeline over R
/// rows: stage s works two rows behind stage s - 1, so intermediate slopes
/// live in small ring buffers instead of full-size fields. Produces results
/// bitwise identical to CashKarpStepper driven by Liouvillian::apply, at a
/// fraction of the memory traffic. sigma_z basis only.
class FieldStepper {
public:
    explicit FieldStepper(Liouvillian& rhs);

    /// Same contract as CashKarpStepper::step, for flat field buffers.
    double step(std::span<const double> y, double dt, std::span<double> y_next);

private:
    Liouvillian& rhs_;
    std::size_t n_r_;
    std::size_t line_;
    std::size_t block_;
    std::vector<double> slopes_[6];  // ring of 11 - 2s rows for slope s
    std::vector<double> inputs_[6];  // ring of 5 rows for stage inputs 2..6
};

enum class StepControl { fixed, adaptive };

std::string_view to_string(StepControl c);
StepControl parse_step_control(std::string_view text);

struct IntegratorConfig {
    double dt = 1e-4;
    double t_end = 10.0;
    StepControl control = StepControl::fixed;
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    std::uint64_t max_steps = 1'000'000'000;
    std::uint64_t observe_every = 100;
    /// Time between stored Prob(R) snapshots; 0 disables them.
    double snapshot_interval = 0.0;
    /// Integration aborts when |norm - norm(0)| exceeds this.
    double norm_drift_limit = 1e-3;

    /// Throws std::invalid_argument listing every violated constraint.
    void validate() const;
};

/// Everything needed to continue an integration exactly where it stopped.
struct Checkpoint {
    double t = 0.0;
    std::uint64_t step = 0;
    std::uint64_t config_hash = 0;
    double dt_next = 0.0;
    double norm0 = 0.0;
    std::uint64_t next_snapshot = 0;
    TimeSeries series;
    SpinPhaseField field;
};

void write_checkpoint(std::ostream& out, const Checkpoint& c);
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::filesystem::path& path);

struct Observation {
    double t;
    std::uint64_t step;
    const SpinPhaseField& field;
};

using Observer = std::function<void(const Observation&)>;

struct EvolveOptions {
    /// Called on the initial state and every observe_every accepted steps.
    std::vector<Observer> observers;
    /// Write a checkpoint every this many accepted steps (0 = never).
    std::uint64_t checkpoint_every = 0;
    std::filesystem::path checkpoint_path;
    /// Stored in checkpoints and checked on resume when non-zero.
    std::uint64_t config_hash = 0;
    /// Continue from this state instead of the initial field.
    std::optional<Checkpoint> resume;
};

/// Integration stopped early; `partial` holds everything recorded so far.
class SolverAbort : public std::runtime_error {
public:
    SolverAbort(const std::string& what, TimeSeries partial);
    TimeSeries partial;
};

/// Advances w0 from t = 0 to config.t_end with the Cash-Karp scheme.
///
/// Fixed mode takes steps of exactly config.dt (time of step n is n * dt)
/// plus one shorter final step if t_end is not a multiple of dt. Adaptive mode
/// starts from config.dt and keeps max|y5 - y4| <= abs_tol + rel_tol * max|y|.
/// A record is taken at t = 0, every observe_every accepted steps and at
/// t_end. Throws SolverAbort on non-finite values, norm drift beyond the
/// limit, or max_steps.
TimeSeries evolve(const SpinPhaseField& w0, const ModelParams& params,
                  const IntegratorConfig& config, const EvolveOptions& options = {});

}  // namespace nanorod
