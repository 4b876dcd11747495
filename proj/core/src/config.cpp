#include "nanorod/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace nanorod {

std::string_view to_string(RunMode m) {
    switch (m) {
        case RunMode::classical: return "classical";
        case RunMode::quantum: return "quantum";
        case RunMode::both: return "both";
    }
    return "?";
}

RunMode parse_run_mode(std::string_view text) {
    if (text == "classical") return RunMode::classical;
    if (text == "quantum") return RunMode::quantum;
    if (text == "both") return RunMode::both;
    throw std::invalid_argument("unknown mode '" + std::string(text) +
                                "' (expected classical, quantum or both)");
}

std::vector<Dynamics> dynamics_of(RunMode m) {
    switch (m) {
        case RunMode::classical: return {Dynamics::classical};
        case RunMode::quantum: return {Dynamics::quantum};
        case RunMode::both: return {Dynamics::classical, Dynamics::quantum};
    }
    return {};
}

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
    std::string msg = "configuration error";
    if (problems.size() > 1) msg += "s";
    msg += ":";
    for (const auto& p : problems) msg += "\n  " + p;
    return msg;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(std::string_view v) {
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
        throw std::invalid_argument("expected a number, got '" + std::string(v) + "'");
    }
    return out;
}

std::uint64_t to_uint(std::string_view v) {
    std::uint64_t out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec == std::errc() && res.ptr == v.data() + v.size()) return out;
    // Accept integral values written in floating-point notation, such as 1e5.
    const double d = to_double(v);
    if (d < 0.0 || d != std::floor(d) || d > 1.8e19) {
        throw std::invalid_argument("expected a non-negative integer, got '" + std::string(v) + "'");
    }
    return static_cast<std::uint64_t>(d);
}

struct Key {
    std::function<void(RunConfig&, std::string_view)> set;
    std::function<std::optional<std::string>(const RunConfig&)> get;
};

template <class Member>
Key real_key(Member member) {
    return {[member](RunConfig& c, std::string_view v) { std::invoke(member, c) = to_double(v); },
            [member](const RunConfig& c) {
                return std::optional<std::string>(fmt(std::invoke(member, const_cast<RunConfig&>(c))));
            }};
}

template <class Member>
Key count_key(Member member) {
    return {[member](RunConfig& c, std::string_view v) {
                std::invoke(member, c) =
                    static_cast<std::remove_reference_t<decltype(std::invoke(member, c))>>(to_uint(v));
            },
            [member](const RunConfig& c) {
                return std::optional<std::string>(std::to_string(std::invoke(member, const_cast<RunConfig&>(c))));
            }};
}

// Ordered as emitted. `preset` is handled separately since it must apply first.
const std::vector<std::pair<std::string, Key>>& keys() {
    static const std::vector<std::pair<std::string, Key>> table = [] {
        std::vector<std::pair<std::string, Key>> t;
        t.emplace_back("omega", real_key([](RunConfig& c) -> double& { return c.params.omega; }));
        t.emplace_back("c", real_key([](RunConfig& c) -> double& { return c.params.c; }));
        t.emplace_back("b2", real_key([](RunConfig& c) -> double& { return c.params.b2; }));
        t.emplace_back("b4", real_key([](RunConfig& c) -> double& { return c.params.b4; }));
        t.emplace_back("mode", Key{[](RunConfig& c, std::string_view v) { c.mode = parse_run_mode(v); },
                                   [](const RunConfig& c) {
                                       return std::optional<std::string>(std::string(to_string(c.mode)));
                                   }});
        t.emplace_back("r_min", real_key([](RunConfig& c) -> double& { return c.grid.r_min; }));
        t.emplace_back("r_max", real_key([](RunConfig& c) -> double& { return c.grid.r_max; }));
        t.emplace_back("p_min", real_key([](RunConfig& c) -> double& { return c.grid.p_min; }));
        t.emplace_back("p_max", real_key([](RunConfig& c) -> double& { return c.grid.p_max; }));
        t.emplace_back("n_r", count_key([](RunConfig& c) -> std::size_t& { return c.grid.n_r; }));
        t.emplace_back("n_p", count_key([](RunConfig& c) -> std::size_t& { return c.grid.n_p; }));
        t.emplace_back("r0", real_key([](RunConfig& c) -> double& { return c.initial.r0; }));
        t.emplace_back("p0", real_key([](RunConfig& c) -> double& { return c.initial.p0; }));
        t.emplace_back("delta_r", real_key([](RunConfig& c) -> double& { return c.initial.delta_r; }));
        t.emplace_back("dt", real_key([](RunConfig& c) -> double& { return c.integrator.dt; }));
        t.emplace_back("t_end", real_key([](RunConfig& c) -> double& { return c.integrator.t_end; }));
        t.emplace_back("step_control",
                       Key{[](RunConfig& c, std::string_view v) {
                               c.integrator.control = parse_step_control(v);
                           },
                           [](const RunConfig& c) {
                               return std::optional<std::string>(
                                   std::string(to_string(c.integrator.control)));
                           }});
        t.emplace_back("abs_tol", real_key([](RunConfig& c) -> double& { return c.integrator.abs_tol; }));
        t.emplace_back("rel_tol", real_key([](RunConfig& c) -> double& { return c.integrator.rel_tol; }));
        t.emplace_back("max_steps",
                       count_key([](RunConfig& c) -> std::uint64_t& { return c.integrator.max_steps; }));
        t.emplace_back("observe_every",
                       count_key([](RunConfig& c) -> std::uint64_t& { return c.integrator.observe_every; }));
        t.emplace_back("norm_drift_limit",
                       real_key([](RunConfig& c) -> double& { return c.integrator.norm_drift_limit; }));
        t.emplace_back("snapshot_interval",
                       real_key([](RunConfig& c) -> double& { return c.integrator.snapshot_interval; }));
        t.emplace_back("average_t_min", real_key([](RunConfig& c) -> double& { return c.average_t_min; }));
        t.emplace_back("average_t_max",
                       Key{[](RunConfig& c, std::string_view v) { c.average_t_max = to_double(v); },
                           [](const RunConfig& c) -> std::optional<std::string> {
                               if (!c.average_t_max) return std::nullopt;
                               return fmt(*c.average_t_max);
                           }});
        t.emplace_back("checkpoint_every",
                       count_key([](RunConfig& c) -> std::uint64_t& { return c.checkpoint_every; }));
        t.emplace_back("seed", count_key([](RunConfig& c) -> std::uint64_t& { return c.seed; }));
        t.emplace_back("oracle_levels",
                       count_key([](RunConfig& c) -> std::size_t& { return c.oracle.fock_levels; }));
        t.emplace_back("oracle_dt", real_key([](RunConfig& c) -> double& { return c.oracle.fock_dt; }));
        t.emplace_back("trajectory_samples",
                       count_key([](RunConfig& c) -> std::size_t& { return c.oracle.trajectory_samples; }));
        t.emplace_back("trajectory_dt",
                       real_key([](RunConfig& c) -> double& { return c.oracle.trajectory_dt; }));
        return t;
    }();
    return table;
}

const Key* find_key(std::string_view name) {
    for (const auto& [k, v] : keys()) {
        if (k == name) return &v;
    }
    return nullptr;
}

RunConfig set1() {
    RunConfig c;
    c.preset = "set1";
    c.params = {0.6, 0.4, -1.0, 0.5, Dynamics::quantum};
    c.mode = RunMode::both;
    c.grid = {-8.0, 8.0, -8.0, 8.0, 120, 120};
    c.initial = {-1.6, 0.0, 0.6071};
    c.integrator.dt = 1e-4;
    c.integrator.t_end = 10.0;
    c.integrator.observe_every = 100;
    c.integrator.snapshot_interval = 0.05;
    c.oracle.fock_levels = 60;
    return c;
}

RunConfig set2() {
    RunConfig c = set1();
    c.preset = "set2";
    c.params = {0.6, 0.1, -0.01, 0.0004, Dynamics::quantum};
    c.grid = {-12.0, 12.0, -3.0, 3.0, 120, 120};
    c.initial = {-7.0, 0.0, 0.6071};
    c.integrator.t_end = 18.0;
    c.oracle.fock_levels = 120;
    return c;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems_)
    : std::runtime_error(join_problems(problems_)), problems(std::move(problems_)) {}

std::vector<std::string> preset_names() { return {"set1", "set2"}; }

RunConfig preset(std::string_view name) {
    if (name == "set1") return set1();
    if (name == "set2") return set2();
    throw ConfigError({"unknown preset '" + std::string(name) + "' (known: set1, set2)"});
}

void RunConfig::validate() const {
    std::vector<std::string> problems;
    const auto check = [&](const std::function<void()>& f) {
        try {
            f();
        } catch (const std::invalid_argument& e) {
            std::istringstream lines(e.what());
            std::string line;
            while (std::getline(lines, line)) {
                const auto t = trim(line);
                if (t.empty() || t.back() == ':') continue;
                problems.emplace_back(t);
            }
        }
    };
    check([&] { params.validate(); });
    check([&] { integrator.validate(); });
    if (!preset.empty() && preset != "set1" && preset != "set2") {
        problems.push_back("unknown preset '" + preset + "'");
    }
    bool grid_ok = true;
    try {
        (void)grid.build();
    } catch (const std::invalid_argument& e) {
        problems.emplace_back(e.what());
        grid_ok = false;
    }
    if (grid_ok) {
        if (!(grid.r_min < 0.0 && grid.r_max > 0.0)) {
            problems.emplace_back("the R axis must straddle 0 (left-well occupation is undefined otherwise)");
        }
        if (grid.n_p < 7) problems.emplace_back("n_p must be at least 7 for the third-derivative stencil");
    }
    if (!(initial.delta_r > 0.0) || !std::isfinite(initial.delta_r)) {
        problems.emplace_back("delta_r must be positive");
    } else if (grid_ok) {
        const double m = 4.0 * initial.delta_r;
        if (!(initial.r0 - m >= grid.r_min && initial.r0 + m <= grid.r_max)) {
            problems.emplace_back("r0 must lie at least 4 * delta_r inside [r_min, r_max]");
        }
        if (!(initial.p0 - m >= grid.p_min && initial.p0 + m <= grid.p_max)) {
            problems.emplace_back("p0 must lie at least 4 * delta_r inside [p_min, p_max]");
        }
    }
    if (integrator.snapshot_interval > integrator.t_end && integrator.t_end > 0.0) {
        problems.emplace_back("snapshot_interval must not exceed t_end");
    }
    if (!(average_t_min >= 0.0)) problems.emplace_back("average_t_min must be >= 0");
    if (average_t_max) {
        if (!(*average_t_max >= average_t_min)) {
            problems.emplace_back("average_t_max must be >= average_t_min");
        }
        if (*average_t_max > integrator.t_end) problems.emplace_back("average_t_max must not exceed t_end");
    } else if (average_t_min > integrator.t_end) {
        problems.emplace_back("average_t_min must not exceed t_end");
    }
    if (oracle.fock_levels < 8) problems.emplace_back("oracle_levels must be at least 8");
    if (!(oracle.fock_dt > 0.0)) problems.emplace_back("oracle_dt must be positive");
    if (oracle.trajectory_samples < 10'000) problems.emplace_back("trajectory_samples must be at least 10000");
    if (!(oracle.trajectory_dt > 0.0)) problems.emplace_back("trajectory_dt must be positive");
    if (!problems.empty()) throw ConfigError(std::move(problems));
}

std::uint64_t RunConfig::hash(Dynamics d) const {
    RunConfig c = *this;
    c.checkpoint_every = 0;
    const std::string text = emit_config(c) + "dynamics = " + std::string(to_string(d)) + "\n";
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void apply_override(RunConfig& c, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) {
        throw ConfigError({"expected key=value, got '" + std::string(assignment) + "'"});
    }
    const auto key = trim(assignment.substr(0, eq));
    const auto value = trim(assignment.substr(eq + 1));
    if (key == "preset") {
        throw ConfigError({"'preset' cannot be overridden; pass it as the base configuration"});
    }
    const Key* k = find_key(key);
    if (k == nullptr) throw ConfigError({"unknown key '" + std::string(key) + "'"});
    try {
        k->set(c, value);
    } catch (const std::invalid_argument& e) {
        throw ConfigError({"key '" + std::string(key) + "': " + e.what()});
    }
}

RunConfig parse_config(std::string_view text) {
    std::vector<std::string> problems;
    std::optional<std::string> preset_name;
    std::vector<std::tuple<std::size_t, std::string, std::string>> assignments;
    std::map<std::string, std::size_t> seen;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = text.find('\n', pos);
        std::string_view line = text.substr(pos, end == std::string_view::npos ? text.npos : end - pos);
        pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = "line " + std::to_string(line_no) + ": ";
        if (eq == std::string_view::npos) {
            problems.push_back(where + "expected 'key = value'");
            continue;
        }
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key.empty() || value.empty()) {
            problems.push_back(where + "empty key or value");
            continue;
        }
        if (const auto it = seen.find(key); it != seen.end()) {
            problems.push_back(where + "key '" + key + "' already set on line " +
                               std::to_string(it->second));
            continue;
        }
        seen.emplace(key, line_no);
        if (key == "preset") {
            preset_name = value;
        } else if (find_key(key) == nullptr) {
            problems.push_back(where + "unknown key '" + key + "'");
        } else {
            assignments.emplace_back(line_no, key, value);
        }
    }

    RunConfig c;
    if (preset_name) {
        try {
            c = preset(*preset_name);
        } catch (const ConfigError& e) {
            problems.push_back("line " + std::to_string(seen[std::string("preset")]) + ": " +
                               e.problems.front());
        }
    }
    for (const auto& [ln, key, value] : assignments) {
        try {
            find_key(key)->set(c, value);
        } catch (const std::invalid_argument& e) {
            problems.push_back("line " + std::to_string(ln) + ": key '" + key + "': " + e.what());
        }
    }
    if (!problems.empty()) throw ConfigError(std::move(problems));
    c.validate();
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot open config file " + path.string()});
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string emit_config(const RunConfig& c) {
    std::string out;
    if (!c.preset.empty()) out += "preset = " + c.preset + "\n";
    for (const auto& [name, key] : keys()) {
        if (const auto v = key.get(c)) out += name + " = " + *v + "\n";
    }
    return out;
}

bool operator==(const RunConfig& a, const RunConfig& b) {
    const auto& x = a.integrator;
    const auto& y = b.integrator;
    const bool integrators = x.dt == y.dt && x.t_end == y.t_end && x.control == y.control &&
                             x.abs_tol == y.abs_tol && x.rel_tol == y.rel_tol &&
                             x.max_steps == y.max_steps && x.observe_every == y.observe_every &&
                             x.snapshot_interval == y.snapshot_interval &&
                             x.norm_drift_limit == y.norm_drift_limit;
    const auto& g = a.grid;
    const auto& h = b.grid;
    const bool grids = g.r_min == h.r_min && g.r_max == h.r_max && g.p_min == h.p_min &&
                       g.p_max == h.p_max && g.n_r == h.n_r && g.n_p == h.n_p;
    return a.preset == b.preset && a.params.omega == b.params.omega && a.params.c == b.params.c &&
           a.params.b2 == b.params.b2 && a.params.b4 == b.params.b4 && a.mode == b.mode && grids &&
           a.initial.r0 == b.initial.r0 && a.initial.p0 == b.initial.p0 &&
           a.initial.delta_r == b.initial.delta_r && integrators &&
           a.average_t_min == b.average_t_min && a.average_t_max == b.average_t_max &&
           a.checkpoint_every == b.checkpoint_every && a.seed == b.seed &&
           a.oracle.fock_levels == b.oracle.fock_levels && a.oracle.fock_dt == b.oracle.fock_dt &&
           a.oracle.trajectory_samples == b.oracle.trajectory_samples &&
           a.oracle.trajectory_dt == b.oracle.trajectory_dt;
}

}  // namespace nanorod
