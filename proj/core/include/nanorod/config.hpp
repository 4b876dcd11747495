#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nanorod/grid.hpp"
#include "nanorod/integrator.hpp"
#include "nanorod/model.hpp"

namespace nanorod {

enum class RunMode { classical, quantum, both };

std::string_view to_string(RunMode m);
RunMode parse_run_mode(std::string_view text);
/// The dynamics a run in this mode performs, in output order.
std::vector<Dynamics> dynamics_of(RunMode m);

struct GridSpec {
    double r_min = -8.0;
    double r_max = 8.0;
    double p_min = -8.0;
    double p_max = 8.0;
    std::size_t n_r = 120;
    std::size_t n_p = 120;

    PhaseGrid build() const { return build_grid(r_min, r_max, p_min, p_max, n_r, n_p); }
};

struct InitialStateSpec {
    double r0 = -1.6;
    double p0 = 0.0;
    double delta_r = 0.6071;
};

struct OracleSpec {
    std::size_t fock_levels = 60;
    double fock_dt = 1e-3;
    std::size_t trajectory_samples = 100'000;
    double trajectory_dt = 5e-3;
};

/// A complete, self-contained experiment description.
///
/// The text form is one `key = value` per line, `#` starts a comment. A
/// `preset` line loads that preset's values first; every other key then
/// overrides, regardless of order. Keys:
///
///   preset                     set1 | set2 (optional)
///   omega c b2 b4              model parameters
///   mode                       classical | quantum | both
///   r_min r_max p_min p_max n_r n_p
///   r0 p0 delta_r              initial Gaussian
///   dt t_end step_control abs_tol rel_tol max_steps observe_every
///   norm_drift_limit
///   snapshot_interval          Prob(R) snapshot spacing, 0 disables
///   average_t_min average_t_max  time-average window (max defaults to t_end)
///   checkpoint_every           steps between checkpoints, 0 disables
///   seed                       trajectory-oracle random seed
///   oracle_levels oracle_dt trajectory_samples trajectory_dt
struct RunConfig {
    std::string preset;
    ModelParams params;
    RunMode mode = RunMode::both;
    GridSpec grid;
    InitialStateSpec initial;
    IntegratorConfig integrator;
    double average_t_min = 0.0;
    std::optional<double> average_t_max;
    std::uint64_t checkpoint_every = 0;
    std::uint64_t seed = 12345;
    OracleSpec oracle;

    double average_end() const { return average_t_max.value_or(integrator.t_end); }

    /// Throws ConfigError listing every violated constraint.
    void validate() const;

    /// Stable 64-bit digest of everything that influences the numbers of a
    /// run in the given dynamics (the output location is not included).
    std::uint64_t hash(Dynamics d) const;
};

/// Parse or validation failure. `problems` holds one message per issue,
/// prefixed with the line number where one applies.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> problems);
    std::vector<std::string> problems;
};

std::vector<std::string> preset_names();
/// Throws ConfigError for an unknown name.
RunConfig preset(std::string_view name);

/// Parses the text form and validates the result.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);
/// Every key, values with 17 significant digits; parse_config(emit_config(c)) == c.
std::string emit_config(const RunConfig& c);

/// Applies one `key=value` override, throwing ConfigError for an unknown key
/// or unparsable value. The result is not validated.
void apply_override(RunConfig& c, std::string_view assignment);

bool operator==(const RunConfig& a, const RunConfig& b);

}  // namespace nanorod
