#include "nanorod/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "nanorod/integrator.hpp"
#include "nanorod/oracle.hpp"
#include "nanorod/state.hpp"

#ifndef NANOROD_VERSION
#define NANOROD_VERSION "unknown"
#endif
#ifndef NANOROD_BUILD_TYPE
#define NANOROD_BUILD_TYPE "unknown"
#endif

namespace nanorod {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void log_line(const RunOptions& o, const std::string& msg) {
    if (o.log != nullptr) *o.log << msg << std::endl;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

template <class F>
void write_with(const fs::path& path, F&& f) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    f(out);
    if (!out) throw std::runtime_error("error writing " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json record_json(const Record& r) {
    const auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    return {{"t", num(r.t)},
            {"sigma_z", num(r.sigma_z)},
            {"prob_left", num(r.prob_left)},
            {"norm", num(r.norm)},
            {"energy", num(r.energy)},
            {"hermiticity_defect", num(r.hermiticity_defect)},
            {"boundary_mass", num(r.boundary_mass)}};
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json config_json(const RunConfig& c) {
    return {
        {"preset", c.preset},
        {"params", {{"omega", c.params.omega}, {"c", c.params.c}, {"b2", c.params.b2},
                    {"b4", c.params.b4}, {"hbar", ModelParams::hbar}}},
        {"mode", std::string(to_string(c.mode))},
        {"grid", {{"r_min", c.grid.r_min}, {"r_max", c.grid.r_max}, {"p_min", c.grid.p_min},
                  {"p_max", c.grid.p_max}, {"n_r", c.grid.n_r}, {"n_p", c.grid.n_p}}},
        {"initial_state", {{"r0", c.initial.r0}, {"p0", c.initial.p0}, {"delta_r", c.initial.delta_r}}},
        {"integrator",
         {{"dt", c.integrator.dt}, {"t_end", c.integrator.t_end},
          {"step_control", std::string(to_string(c.integrator.control))},
          {"abs_tol", c.integrator.abs_tol}, {"rel_tol", c.integrator.rel_tol},
          {"max_steps", c.integrator.max_steps}, {"observe_every", c.integrator.observe_every},
          {"norm_drift_limit", c.integrator.norm_drift_limit},
          {"snapshot_interval", c.integrator.snapshot_interval}}},
        {"average_window", {c.average_t_min, c.average_end()}},
        {"checkpoint_every", c.checkpoint_every},
        {"seed", c.seed},
        {"oracle", {{"levels", c.oracle.fock_levels}, {"dt", c.oracle.fock_dt},
                    {"trajectory_samples", c.oracle.trajectory_samples},
                    {"trajectory_dt", c.oracle.trajectory_dt}}},
    };
}

std::string plot_script(const RunConfig& c) {
    std::ostringstream py;
    py << R"PY(#!/usr/bin/env python3
"""Standard figures for this run: sigma_z(t), Prob_L(t) and the time-averaged Prob(R)."""
import csv
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
MODES = [)PY";
    for (const Dynamics d : dynamics_of(c.mode)) py << '"' << to_string(d) << "\", ";
    py << R"PY(]
STYLE = {"classical": dict(ls=":", color="tab:blue"), "quantum": dict(ls="-", color="tab:red")}


def columns(name):
    path = os.path.join(HERE, name)
    if not os.path.exists(path):
        return None
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    return {k: [float(r[k]) for r in rows] for k in rows[0]} if rows else None


def main():
    fig, axes = plt.subplots(3, 1, figsize=(7, 10))
    for mode in MODES:
        ts = columns(f"timeseries_{mode}.csv")
        if ts:
            axes[0].plot(ts["t"], ts["sigma_z"], label=mode, **STYLE[mode])
            axes[1].plot(ts["t"], ts["prob_left"], label=mode, **STYLE[mode])
        avg = columns(f"prob_avg_{mode}.csv")
        if avg:
            axes[2].plot(avg["R"], avg["value"], label=mode, **STYLE[mode])
    axes[0].set(xlabel="t", ylabel="<sigma_z>", title="population difference")
    axes[1].set(xlabel="t", ylabel="Prob_L", title="left-well occupation")
    axes[2].set(xlabel="R", ylabel="Prob(R)", title="time-averaged position probability")
    for ax in axes:
        ax.legend()
    fig.tight_layout()
    out = sys.argv[1] if len(sys.argv) > 1 else os.path.join(HERE, "figures.png")
    fig.savefig(out, dpi=150)
    print(out)


if __name__ == "__main__":
    main()
)PY";
    return py.str();
}

double second_half_envelope(const TimeSeries& s, const ModelParams& p, double t_end) {
    if (s.records.empty() || p.omega <= 0.0) return kNaN;
    const double t_to = std::min(t_end, s.records.back().t);
    return rabi_envelope(s, 0.5 * t_to, t_to, std::numbers::pi / p.omega);
}

double averaged_asymmetry(const TimeSeries& s, const RunConfig& c, PositionProbability* avg) {
    std::vector<PositionProbability> in;
    const double tol = 1e-9 * std::max(1.0, c.integrator.t_end);
    for (const auto& snap : s.snapshots) {
        if (snap.t >= c.average_t_min - tol && snap.t <= c.average_end() + tol) in.push_back(snap.prob);
    }
    if (in.empty()) return kNaN;
    *avg = time_averaged_position_probability(std::span<const PositionProbability>(in));
    return asymmetry(*avg);
}

bool has_run_artifacts(const fs::path& dir) {
    return fs::exists(dir / "manifest.json") || fs::exists(dir / "config.txt");
}

}  // namespace

bool RunResult::ok() const {
    for (const auto& m : modes) {
        if (!m.completed) return false;
    }
    return true;
}

std::string build_id() {
    std::ostringstream os;
    os << "nanorod " << NANOROD_VERSION << " (" << NANOROD_BUILD_TYPE << ", ";
#if defined(__clang__)
    os << "clang " << __clang_major__ << '.' << __clang_minor__;
#elif defined(__GNUC__)
    os << "gcc " << __GNUC__ << '.' << __GNUC_MINOR__;
#else
    os << "unknown compiler";
#endif
    os << ")";
    return os.str();
}

std::string snapshot_filename(Dynamics d, double t) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "prob_%s_t%.6f.csv", std::string(to_string(d)).c_str(), t);
    return buf;
}

RunResult run(const RunConfig& config, const RunOptions& options) {
    config.validate();
    const fs::path& dir = options.out_dir;
    if (dir.empty()) throw std::invalid_argument("run: output directory not set");
    const std::string config_text = emit_config(config);
    if (has_run_artifacts(dir)) {
        if (options.resume) {
            if (fs::exists(dir / "config.txt") && read_text(dir / "config.txt") != config_text) {
                throw std::runtime_error("cannot resume: " + (dir / "config.txt").string() +
                                         " differs from the requested configuration");
            }
        } else if (!options.force) {
            throw std::runtime_error(dir.string() +
                                     " already holds a run; pass --force to overwrite or --resume");
        }
    }
    fs::create_directories(dir / "prob");
    write_text(dir / "config.txt", config_text);
    write_text(dir / "plot.py", plot_script(config));
    fs::permissions(dir / "plot.py", fs::perms::owner_exec, fs::perm_options::add);

    const PhaseGrid grid = config.grid.build();
    // Built once so every dynamics starts from the identical field.
    const SpinPhaseField w0 =
        init_coherent_excited(grid, config.initial.r0, config.initial.p0, config.initial.delta_r);

    RunResult result;
    json modes = json::object();
    for (const Dynamics d : dynamics_of(config.mode)) {
        ModelParams params = config.params;
        params.mode = d;
        const std::string name(to_string(d));
        const fs::path ckpt = dir / ("checkpoint_" + name + ".bin");

        EvolveOptions eo;
        eo.config_hash = config.hash(d);
        eo.checkpoint_every = config.checkpoint_every;
        eo.checkpoint_path = ckpt;
        if (options.resume && fs::exists(ckpt)) {
            eo.resume = load_checkpoint(ckpt);
            if (eo.resume->config_hash != eo.config_hash) {
                throw std::runtime_error("checkpoint " + ckpt.string() +
                                         " belongs to a different configuration");
            }
            log_line(options, name + ": resuming at t = " + std::to_string(eo.resume->t));
        } else {
            log_line(options, name + ": integrating to t = " + std::to_string(config.integrator.t_end));
        }

        ModeOutcome outcome;
        outcome.dynamics = d;
        const auto start = std::chrono::steady_clock::now();
        try {
            outcome.series = evolve(w0, params, config.integrator, eo);
            outcome.completed = true;
        } catch (const SolverAbort& e) {
            outcome.series = e.partial;
            outcome.error = e.what();
            log_line(options, name + ": aborted: " + outcome.error);
        }
        outcome.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (outcome.completed && fs::exists(ckpt)) fs::remove(ckpt);

        write_with(dir / ("timeseries_" + name + ".csv"),
                   [&](std::ostream& o) { write_csv(o, outcome.series); });
        for (const auto& snap : outcome.series.snapshots) {
            write_with(dir / "prob" / snapshot_filename(d, snap.t),
                       [&](std::ostream& o) { write_position_csv(o, snap.prob); });
        }
        PositionProbability avg;
        outcome.asymmetry = averaged_asymmetry(outcome.series, config, &avg);
        if (std::isfinite(outcome.asymmetry)) {
            write_with(dir / ("prob_avg_" + name + ".csv"),
                       [&](std::ostream& o) { write_position_csv(o, avg); });
        }
        outcome.envelope = second_half_envelope(outcome.series, params, config.integrator.t_end);

        json m = {{"status", outcome.completed ? "completed" : "aborted"},
                  {"wall_seconds", outcome.wall_seconds},
                  {"config_hash", eo.config_hash},
                  {"records", outcome.series.records.size()},
                  {"snapshots", outcome.series.snapshots.size()},
                  {"rabi_envelope_second_half", number_or_null(outcome.envelope)},
                  {"time_averaged_asymmetry", number_or_null(outcome.asymmetry)},
                  {"timeseries", "timeseries_" + name + ".csv"}};
        if (!outcome.completed) m["error"] = outcome.error;
        if (!outcome.series.records.empty()) {
            m["initial"] = record_json(outcome.series.records.front());
            m["final"] = record_json(outcome.series.records.back());
            double max_drift = 0.0;
            double max_energy_drift = 0.0;
            double max_herm = 0.0;
            double max_boundary = 0.0;
            const Record& first = outcome.series.records.front();
            for (const auto& r : outcome.series.records) {
                max_drift = std::max(max_drift, std::abs(r.norm - first.norm));
                max_energy_drift = std::max(max_energy_drift, std::abs(r.energy - first.energy));
                max_herm = std::max(max_herm, r.hermiticity_defect);
                max_boundary = std::max(max_boundary, r.boundary_mass);
            }
            m["max_norm_drift"] = max_drift;
            m["max_energy_drift"] = max_energy_drift;
            m["max_hermiticity_defect"] = max_herm;
            m["max_boundary_mass"] = max_boundary;
        }
        modes[name] = m;
        result.modes.push_back(std::move(outcome));
    }

    const json manifest = {{"build", build_id()},
                           {"config", config_json(config)},
                           {"config_file", "config.txt"},
                           {"plot_script", "plot.py"},
                           {"modes", modes},
                           {"ok", result.ok()}};
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
    return result;
}

std::vector<RunResult> sweep(const RunConfig& config, const std::vector<double>& c_values,
                             const RunOptions& options) {
    if (c_values.empty()) throw std::invalid_argument("sweep: no coupling values given");
    std::vector<RunConfig> configs;
    for (const double c : c_values) {
        RunConfig rc = config;
        rc.params.c = c;
        rc.validate();
        configs.push_back(rc);
    }
    fs::create_directories(options.out_dir);
    const fs::path summary_path = options.out_dir / "summary.csv";
    if (fs::exists(summary_path) && !options.force && !options.resume) {
        throw std::runtime_error(summary_path.string() + " exists; pass --force to overwrite");
    }
    std::ostringstream summary;
    summary << "c,status";
    for (const Dynamics d : dynamics_of(config.mode)) {
        summary << ",envelope_" << to_string(d) << ",asymmetry_" << to_string(d);
    }
    summary << ",error\n";

    std::vector<RunResult> results;
    for (std::size_t k = 0; k < configs.size(); ++k) {
        char tag[48];
        std::snprintf(tag, sizeof tag, "c_%g", c_values[k]);
        RunOptions sub = options;
        sub.out_dir = options.out_dir / tag;
        char cval[40];
        std::snprintf(cval, sizeof cval, "%.17g", c_values[k]);
        summary << cval;
        RunResult r;
        std::string error;
        try {
            r = run(configs[k], sub);
        } catch (const std::exception& e) {
            error = e.what();
        }
        for (const auto& m : r.modes) {
            if (!m.completed && error.empty()) error = m.error;
        }
        summary << ',' << (error.empty() ? "ok" : "failed");
        const auto modes = dynamics_of(config.mode);
        for (std::size_t i = 0; i < modes.size(); ++i) {
            char buf[96];
            if (i < r.modes.size()) {
                std::snprintf(buf, sizeof buf, ",%.17g,%.17g", r.modes[i].envelope, r.modes[i].asymmetry);
            } else {
                std::snprintf(buf, sizeof buf, ",nan,nan");
            }
            summary << buf;
        }
        // Commas would break the CSV layout.
        for (char& ch : error) {
            if (ch == ',' || ch == '\n') ch = ';';
        }
        summary << ',' << error << '\n';
        if (!error.empty()) log_line(options, std::string(tag) + ": " + error);
        results.push_back(std::move(r));
    }
    write_text(summary_path, summary.str());
    return results;
}

bool run_oracles(const RunConfig& config, const RunOptions& options) {
    config.validate();
    const fs::path& dir = options.out_dir;
    fs::create_directories(dir);
    const fs::path fock_path = dir / "oracle_fock.csv";
    const fs::path traj_path = dir / "oracle_trajectory.csv";
    if ((fs::exists(fock_path) || fs::exists(traj_path)) && !options.force) {
        throw std::runtime_error("oracle outputs already exist in " + dir.string() +
                                 "; pass --force to overwrite");
    }
    bool ok = true;
    ModelParams params = config.params;
    params.mode = Dynamics::quantum;
    const oracle::FockSpec spec{config.oracle.fock_levels};
    log_line(options, "fock oracle: " + std::to_string(spec.n_levels) + " levels");
    const auto rho0 =
        oracle::initial_state(config.initial.r0, config.initial.p0, config.initial.delta_r, spec);
    oracle::EvolveSettings es;
    es.dt = config.oracle.fock_dt;
    es.t_end = config.integrator.t_end;
    es.observe_every = std::max<std::uint64_t>(
        1, static_cast<std::uint64_t>(std::llround(config.integrator.dt *
                                                   static_cast<double>(config.integrator.observe_every) /
                                                   es.dt)));
    TimeSeries fock;
    try {
        fock = oracle::evolve(rho0, params, es);
    } catch (const SolverAbort& e) {
        fock = e.partial;
        ok = false;
        log_line(options, std::string("fock oracle aborted: ") + e.what());
    }
    write_with(fock_path, [&](std::ostream& o) { write_csv(o, fock, "fock"); });

    if (config.params.c == 0.0) {
        oracle::TrajectorySettings ts;
        ts.n_samples = config.oracle.trajectory_samples;
        ts.dt = config.oracle.trajectory_dt;
        ts.t_end = config.integrator.t_end;
        ts.seed = config.seed;
        ts.observe_every = std::max<std::uint64_t>(
            1, static_cast<std::uint64_t>(std::llround(
                   config.integrator.dt * static_cast<double>(config.integrator.observe_every) / ts.dt)));
        log_line(options, "trajectory oracle: " + std::to_string(ts.n_samples) + " samples");
        const auto traj = oracle::classical_trajectories(config.initial.r0, config.initial.p0,
                                                         config.initial.delta_r, params, ts);
        write_with(traj_path, [&](std::ostream& o) { write_csv(o, traj.series, "trajectory"); });
        write_with(dir / "oracle_trajectory_stderr.csv", [&](std::ostream& o) {
            o << "t,prob_left_stderr\n";
            char buf[64];
            for (std::size_t k = 0; k < traj.series.records.size(); ++k) {
                std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", traj.series.records[k].t,
                              traj.prob_left_stderr[k]);
                o << buf;
            }
        });
    } else {
        log_line(options, "trajectory oracle skipped: it applies only to c = 0");
    }
    return ok;
}

}  // namespace nanorod
