#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nanorod/config.hpp"
#include "nanorod/runner.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kRunFailed = 1;
constexpr int kUsage = 2;

struct Common {
    std::string config_path;
    std::string preset;
    std::string mode;
    std::string out = "out";
    std::optional<std::uint64_t> checkpoint_every;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> overrides;
    bool resume = false;
    bool force = false;
    bool quiet = false;
};

void add_common(CLI::App& cmd, Common& o, bool with_outputs) {
    cmd.add_option("--config", o.config_path, "Configuration file (key = value lines)");
    cmd.add_option("--preset", o.preset, "Start from a preset")
        ->check(CLI::IsMember(nanorod::preset_names()));
    cmd.add_option("--mode", o.mode, "Dynamics to integrate")
        ->check(CLI::IsMember({"classical", "quantum", "both"}));
    cmd.add_option("--set", o.overrides, "Override one key, e.g. --set n_r=180")
        ->allow_extra_args(false);
    cmd.add_option("--seed", o.seed, "Random seed for the trajectory oracle");
    if (with_outputs) {
        cmd.add_option("--out", o.out, "Output directory")->capture_default_str();
        cmd.add_option("--checkpoint-every", o.checkpoint_every, "Steps between checkpoints");
        cmd.add_flag("--resume", o.resume, "Continue from checkpoints in --out");
        cmd.add_flag("--force", o.force, "Overwrite an existing run in --out");
        cmd.add_flag("-q,--quiet", o.quiet, "No progress messages");
    }
}

nanorod::RunConfig build_config(const Common& o, const std::optional<double>& c) {
    nanorod::RunConfig cfg;
    if (!o.config_path.empty()) {
        cfg = nanorod::load_config(o.config_path);
        if (!o.preset.empty()) {
            throw nanorod::ConfigError(
                {"--preset and --config are exclusive; put `preset = ...` in the file"});
        }
    } else if (!o.preset.empty()) {
        cfg = nanorod::preset(o.preset);
    } else {
        cfg = nanorod::preset("set1");
    }
    for (const auto& kv : o.overrides) nanorod::apply_override(cfg, kv);
    if (c) cfg.params.c = *c;
    if (!o.mode.empty()) cfg.mode = nanorod::parse_run_mode(o.mode);
    if (o.checkpoint_every) cfg.checkpoint_every = *o.checkpoint_every;
    if (o.seed) cfg.seed = *o.seed;
    cfg.validate();
    return cfg;
}

nanorod::RunOptions run_options(const Common& o) {
    nanorod::RunOptions opts;
    opts.out_dir = o.out;
    opts.force = o.force;
    opts.resume = o.resume;
    opts.log = o.quiet ? nullptr : &std::cerr;
    return opts;
}

std::vector<double> parse_c_list(const std::string& text) {
    std::vector<double> values;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size()) {
            throw nanorod::ConfigError({"--c: cannot parse '" + item + "' as a number"});
        }
        values.push_back(v);
    }
    if (values.empty()) throw nanorod::ConfigError({"--c: empty list"});
    return values;
}

void report(const nanorod::RunResult& r) {
    for (const auto& m : r.modes) {
        std::cout << nanorod::to_string(m.dynamics) << ": "
                  << (m.completed ? "completed" : "aborted: " + m.error) << " in "
                  << m.wall_seconds << " s, envelope " << m.envelope << ", asymmetry "
                  << m.asymmetry << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nano-rod double-well simulator in the partial Wigner representation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", nanorod::build_id());

    Common run_o;
    std::optional<double> run_c;
    auto* run_cmd = app.add_subcommand("run", "Integrate one configuration");
    add_common(*run_cmd, run_o, true);
    run_cmd->add_option("--c", run_c, "Coupling constant");

    Common sweep_o;
    std::string sweep_c;
    auto* sweep_cmd = app.add_subcommand("sweep", "One run per coupling value");
    add_common(*sweep_cmd, sweep_o, true);
    sweep_cmd->add_option("--c", sweep_c, "Comma-separated coupling values")->required();

    Common oracle_o;
    std::optional<double> oracle_c;
    auto* oracle_cmd = app.add_subcommand("oracle", "Fock-basis and trajectory reference runs");
    add_common(*oracle_cmd, oracle_o, true);
    oracle_cmd->add_option("--c", oracle_c, "Coupling constant");

    Common check_o;
    std::optional<double> check_c;
    bool emit = false;
    auto* check_cmd = app.add_subcommand("validate-config", "Check a configuration and exit");
    add_common(*check_cmd, check_o, false);
    check_cmd->add_option("--c", check_c, "Coupling constant");
    check_cmd->add_flag("--emit", emit, "Print the complete resolved configuration");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*run_cmd) {
            const auto cfg = build_config(run_o, run_c);
            const auto result = nanorod::run(cfg, run_options(run_o));
            report(result);
            return result.ok() ? kOk : kRunFailed;
        }
        if (*sweep_cmd) {
            const auto values = parse_c_list(sweep_c);
            const auto cfg = build_config(sweep_o, std::nullopt);
            const auto results = nanorod::sweep(cfg, values, run_options(sweep_o));
            bool ok = true;
            for (std::size_t i = 0; i < results.size(); ++i) {
                std::cout << "c = " << values[i] << '\n';
                report(results[i]);
                ok = ok && results[i].ok();
            }
            return ok ? kOk : kRunFailed;
        }
        if (*oracle_cmd) {
            const auto cfg = build_config(oracle_o, oracle_c);
            return nanorod::run_oracles(cfg, run_options(oracle_o)) ? kOk : kRunFailed;
        }
        if (*check_cmd) {
            const auto cfg = build_config(check_o, check_c);
            if (emit) {
                std::cout << nanorod::emit_config(cfg);
            } else {
                std::cout << "ok\n";
            }
            return kOk;
        }
    } catch (const nanorod::ConfigError& e) {
        for (const auto& p : e.problems) std::cerr << "config: " << p << '\n';
        return kUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRunFailed;
    }
    return kUsage;
}
