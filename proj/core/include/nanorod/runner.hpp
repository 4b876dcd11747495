#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nanorod/config.hpp"
#include "nanorod/observables.hpp"

namespace nanorod {

struct RunOptions {
    std::filesystem::path out_dir;
    /// Replace existing artifacts in out_dir.
    bool force = false;
    /// Continue each dynamics from its checkpoint in out_dir when one exists.
    bool resume = false;
    /// Progress messages go here when non-null.
    std::ostream* log = nullptr;
};

struct ModeOutcome {
    Dynamics dynamics = Dynamics::quantum;
    bool completed = false;
    std::string error;        ///< solver abort message when !completed
    TimeSeries series;        ///< full or partial
    double wall_seconds = 0.0;
    /// Mean peak-to-peak sigma_z swing over the second half of the run, NaN if unavailable.
    double envelope = 0.0;
    /// Asymmetry of the time-averaged Prob(R), NaN without snapshots.
    double asymmetry = 0.0;
};

struct RunResult {
    std::vector<ModeOutcome> modes;
    bool ok() const;
};

/// Integrates the configured dynamics and writes, into out_dir:
///   config.txt                      the configuration, re-loadable as is
///   timeseries_<mode>.csv           observables
///   prob/prob_<mode>_t<time>.csv    Prob(R) snapshots
///   prob_avg_<mode>.csv             time-averaged Prob(R)
///   manifest.json                   parameters, build, timing, final diagnostics
///   plot.py                         matplotlib script for the standard figures
///   checkpoint_<mode>.bin           when checkpoint_every > 0, removed once
///                                   that dynamics completes
/// Throws std::runtime_error if out_dir already holds a run and neither
/// force nor resume is set. Solver aborts do not throw; they are recorded in
/// the result and the manifest, with partial outputs kept.
RunResult run(const RunConfig& config, const RunOptions& options);

/// One run per coupling value in out_dir/c_<value>/, plus out_dir/summary.csv
/// with the envelope and asymmetry per mode. A failing value is recorded in
/// the summary and does not stop the others. Throws std::invalid_argument for
/// an empty list.
std::vector<RunResult> sweep(const RunConfig& config, const std::vector<double>& c_values,
                             const RunOptions& options);

/// Runs the Fock-basis oracle (and the trajectory oracle when c = 0) for the
/// configuration and writes oracle_fock.csv / oracle_trajectory.csv with a
/// `source` column. Returns false if an oracle aborted.
bool run_oracles(const RunConfig& config, const RunOptions& options);

/// Identifier of this build: version, compiler and build type.
std::string build_id();

/// `prob_<mode>_t<time>.csv` with the time printed to six decimals.
std::string snapshot_filename(Dynamics d, double t);

}  // namespace nanorod
