#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nanorod/model.hpp"
#include "nanorod/state.hpp"

namespace nanorod {

/// Prob(R): the momentum marginal of the spin trace at each R node.
struct PositionProbability {
    PhaseGrid grid;
    std::vector<double> values;  ///< one per R node
};

/// One row of a time series.
struct Record {
    double t = 0.0;
    double sigma_z = 0.0;
    double prob_left = 0.0;
    double norm = 0.0;
    double energy = 0.0;
    double hermiticity_defect = 0.0;
    double boundary_mass = 0.0;

    friend bool operator==(const Record&, const Record&) = default;
};

struct ProbSnapshot {
    double t = 0.0;
    PositionProbability prob;
};

/// Observations in strictly increasing time, starting at t = 0.
struct TimeSeries {
    std::vector<Record> records;
    std::vector<ProbSnapshot> snapshots;
};

bool operator==(const PositionProbability& a, const PositionProbability& b);
bool operator==(const ProbSnapshot& a, const ProbSnapshot& b);
bool operator==(const TimeSeries& a, const TimeSeries& b);

/// Integral of W00 - W11 (after rotating to the sigma_z basis if needed).
/// The imaginary part is a round-off diagnostic.
complex sigma_z_integral(const SpinPhaseField& w);
double sigma_z_expectation(const SpinPhaseField& w);

/// Probability mass at R < 0. A node sitting exactly on R = 0 contributes half
/// its weight, so left and right masses partition the norm.
/// Throws std::invalid_argument if the grid does not straddle R = 0.
double prob_left(const SpinPhaseField& w);

PositionProbability position_probability(const SpinPhaseField& w);
/// Uniform average of stored snapshots. Throws std::invalid_argument when empty.
PositionProbability time_averaged_position_probability(std::span<const PositionProbability> snaps);
PositionProbability time_averaged_position_probability(std::span<const ProbSnapshot> snaps);

/// |mass(R<0) - mass(R>0)| / total mass. Throws std::domain_error for zero total mass.
double asymmetry(const PositionProbability& p);

/// Phase-space integral of Tr[H_W W] with the partially Wigner-transformed Hamiltonian.
double energy_expectation(const SpinPhaseField& w, const ModelParams& params);

/// Absolute trace mass on the outermost three-node frame as a fraction of the norm.
/// Returns 0 for a field with zero norm.
double boundary_mass(const SpinPhaseField& w);

Record observe(double t, const SpinPhaseField& w, const ModelParams& params);

/// Mean peak-to-peak swing of sigma_z over sliding windows of length `window`
/// whose start lies in [t_from, t_to - window]. A single window is used when the
/// interval is shorter than `window`. Throws std::invalid_argument if no record
/// falls inside the interval.
double rabi_envelope(const TimeSeries& series, double t_from, double t_to, double window);

// CSV output. Columns: t, sigma_z, prob_left, norm, energy,
// hermiticity_defect, boundary_mass, and an optional trailing `source`
// column naming the producer. Values use 17 significant digits.
void write_csv(std::ostream& out, const TimeSeries& series,
               const std::optional<std::string>& source = std::nullopt);
/// Reads what write_csv produced; the `source` column, if present, is ignored.
TimeSeries read_csv(std::istream& in);
/// Two columns: R, value.
void write_position_csv(std::ostream& out, const PositionProbability& p);

}  // namespace nanorod
