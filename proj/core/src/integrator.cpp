#include "nanorod/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "cash_karp.hpp"
#include "nanorod/liouvillian.hpp"

namespace nanorod {

namespace {

bool all_finite(const double* v, std::size_t n) {
    // Any NaN or infinity makes the product with zero NaN.
    double acc = 0.0;
    for (std::size_t x = 0; x < n; ++x) acc += v[x] * 0.0;
    return acc == 0.0;
}

}  // namespace

NonFiniteState::NonFiniteState(std::size_t index_, int stage_)
    : std::runtime_error("non-finite value at state index " + std::to_string(index_) +
                         (stage_ > 0 ? " in stage " + std::to_string(stage_) : std::string())),
      index(index_),
      stage(stage_) {}

CashKarpStepper::CashKarpStepper(std::size_t n) : stage_(n) {
    for (auto& k : k_) k.assign(n, 0.0);
}

namespace {

template <int S>
void combine(const double* __restrict y, double dt, const double* const k[6], double* __restrict out,
             std::size_t n) {
    for (std::size_t x = 0; x < n; ++x) out[x] = cash_karp::stage_input<S>(y[x], dt, k, x);
}

}  // namespace

double CashKarpStepper::step(std::span<const double> y, double t, double dt, const Derivative& f,
                             std::span<double> y_next) {
    using namespace cash_karp;
    const std::size_t n = size();
    if (y.size() != n || y_next.size() != n) {
        throw std::invalid_argument("CashKarpStepper::step: state size mismatch");
    }
    const double* y0 = y.data();
    double* s = stage_.data();
    const double* const k[6] = {k_[0].data(), k_[1].data(), k_[2].data(),
                                k_[3].data(), k_[4].data(), k_[5].data()};

    f(t, y, k_[0]);
    combine<1>(y0, dt, k, s, n);
    f(t + c2 * dt, stage_, k_[1]);
    combine<2>(y0, dt, k, s, n);
    f(t + c3 * dt, stage_, k_[2]);
    combine<3>(y0, dt, k, s, n);
    f(t + c4 * dt, stage_, k_[3]);
    combine<4>(y0, dt, k, s, n);
    f(t + c5 * dt, stage_, k_[4]);
    combine<5>(y0, dt, k, s, n);
    f(t + c6 * dt, stage_, k_[5]);

    double* out = y_next.data();
    double err = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
        out[x] = solution(y0[x], dt, k, x);
        err = std::max(err, std::abs(error(dt, k, x)));
    }
    if (!all_finite(out, n)) report_non_finite(y_next);
    return err;
}

void CashKarpStepper::report_non_finite(std::span<const double> y_next) const {
    for (int st = 0; st < 6; ++st) {
        const auto& k = k_[st];
        for (std::size_t x = 0; x < k.size(); ++x) {
            if (!std::isfinite(k[x])) throw NonFiniteState(x, st + 1);
        }
    }
    for (std::size_t x = 0; x < y_next.size(); ++x) {
        if (!std::isfinite(y_next[x])) throw NonFiniteState(x, 0);
    }
    throw NonFiniteState(0, 0);
}

namespace {

constexpr std::size_t slope_ring(int s) { return static_cast<std::size_t>(11 - 2 * s); }
constexpr std::size_t input_ring = 5;

}  // namespace

FieldStepper::FieldStepper(Liouvillian& rhs)
    : rhs_(rhs),
      n_r_(rhs.grid().n_r()),
      line_(2 * rhs.grid().n_p()),
      block_(2 * rhs.grid().size()) {
    if (rhs.basis() != SpinBasis::sigma_z) {
        throw std::invalid_argument("FieldStepper works in the sigma_z basis only");
    }
    for (int s = 0; s < 6; ++s) {
        slopes_[s].assign(slope_ring(s) * 4 * line_, 0.0);
        if (s > 0) inputs_[s].assign(input_ring * 4 * line_, 0.0);
    }
}

double FieldStepper::step(std::span<const double> y, double dt, std::span<double> y_next) {
    using namespace cash_karp;
    if (y.size() != 4 * block_ || y_next.size() != 4 * block_) {
        throw std::invalid_argument("FieldStepper::step: state size mismatch");
    }
    const std::size_t line = line_;
    const auto n_r = static_cast<long>(n_r_);
    // Component k of row r in each buffer.
    const auto y_row = [&](long r, std::size_t k) {
        return y.data() + k * block_ + static_cast<std::size_t>(r) * line;
    };
    const auto slope_row = [&](int s, long r, std::size_t k) {
        return slopes_[s].data() + ((static_cast<std::size_t>(r) % slope_ring(s)) * 4 + k) * line;
    };
    const auto input_row = [&](int s, long r, std::size_t k) {
        return inputs_[s].data() + ((static_cast<std::size_t>(r) % input_ring) * 4 + k) * line;
    };

    double err = 0.0;
    bool finite = true;
    for (long it = 0; it < n_r + 10; ++it) {
        for (int s = 0; s < 6; ++s) {
            const long r = it - 2 * s;
            if (r < 0 || r >= n_r) continue;
            Liouvillian::RowInputs rows;
            for (int d = 0; d < 5; ++d) {
                const long q = r + d - 2;
                for (std::size_t k = 0; k < 4; ++k) {
                    if (q < 0 || q >= n_r) {
                        rows[d][k] = nullptr;
                    } else {
                        rows[d][k] = s == 0 ? y_row(q, k) : input_row(s, q, k);
                    }
                }
            }
            double* out[4];
            for (std::size_t k = 0; k < 4; ++k) out[k] = slope_row(s, r, k);
            rhs_.apply_row(static_cast<std::size_t>(r), rows, out);

            for (std::size_t k = 0; k < 4; ++k) {
                const double* k_rows[6] = {};
                for (int q = 0; q <= s; ++q) k_rows[q] = slope_row(q, r, k);
                const double* y0 = y_row(r, k);
                if (s < 5) {
                    double* dst = input_row(s + 1, r, k);
                    switch (s) {
                        case 0:
                            for (std::size_t x = 0; x < line; ++x) dst[x] = stage_input<1>(y0[x], dt, k_rows, x);
                            break;
                        case 1:
                            for (std::size_t x = 0; x < line; ++x) dst[x] = stage_input<2>(y0[x], dt, k_rows, x);
                            break;
                        case 2:
                            for (std::size_t x = 0; x < line; ++x) dst[x] = stage_input<3>(y0[x], dt, k_rows, x);
                            break;
                        case 3:
                            for (std::size_t x = 0; x < line; ++x) dst[x] = stage_input<4>(y0[x], dt, k_rows, x);
                            break;
                        default:
                            for (std::size_t x = 0; x < line; ++x) dst[x] = stage_input<5>(y0[x], dt, k_rows, x);
                            break;
                    }
                } else {
                    double* dst = y_next.data() + k * block_ + static_cast<std::size_t>(r) * line;
                    for (std::size_t x = 0; x < line; ++x) {
                        dst[x] = solution(y0[x], dt, k_rows, x);
                        err = std::max(err, std::abs(error(dt, k_rows, x)));
                    }
                    finite = finite && all_finite(dst, line);
                }
            }
        }
    }
    if (!finite) {
        for (std::size_t x = 0; x < y_next.size(); ++x) {
            if (!std::isfinite(y_next[x])) throw NonFiniteState(x, 0);
        }
    }
    return err;
}

std::string_view to_string(StepControl c) { return c == StepControl::fixed ? "fixed" : "adaptive"; }

StepControl parse_step_control(std::string_view text) {
    if (text == "fixed") return StepControl::fixed;
    if (text == "adaptive") return StepControl::adaptive;
    throw std::invalid_argument("unknown step control '" + std::string(text) +
                                "' (expected fixed or adaptive)");
}

void IntegratorConfig::validate() const {
    std::vector<std::string> problems;
    if (!(dt > 0.0) || !std::isfinite(dt)) problems.emplace_back("dt must be positive");
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) problems.emplace_back("t_end must be >= 0");
    if (control == StepControl::adaptive && (!(abs_tol > 0.0) || !(rel_tol > 0.0))) {
        problems.emplace_back("adaptive stepping needs abs_tol > 0 and rel_tol > 0");
    }
    if (observe_every < 1) problems.emplace_back("observe_every must be >= 1");
    if (max_steps < 1) problems.emplace_back("max_steps must be >= 1");
    if (!(snapshot_interval >= 0.0)) problems.emplace_back("snapshot_interval must be >= 0");
    if (!(norm_drift_limit > 0.0)) problems.emplace_back("norm_drift_limit must be positive");
    if (problems.empty()) return;
    std::string msg = "invalid integrator config:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw std::invalid_argument(msg);
}

SolverAbort::SolverAbort(const std::string& what, TimeSeries partial_)
    : std::runtime_error(what), partial(std::move(partial_)) {}

namespace {

constexpr char kCheckpointMagic[4] = {'N', 'R', 'C', 'K'};

template <class T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("checkpoint truncated");
    return v;
}

void put_grid_free_prob(std::ostream& out, const PositionProbability& p) {
    put<std::uint64_t>(out, p.values.size());
    out.write(reinterpret_cast<const char*>(p.values.data()),
              static_cast<std::streamsize>(p.values.size() * sizeof(double)));
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& c) {
    out.write(kCheckpointMagic, 4);
    put(out, c.t);
    put(out, c.step);
    put(out, c.config_hash);
    put(out, c.dt_next);
    put(out, c.norm0);
    put(out, c.next_snapshot);
    put<std::uint64_t>(out, c.series.records.size());
    for (const auto& r : c.series.records) put(out, r);
    put<std::uint64_t>(out, c.series.snapshots.size());
    for (const auto& s : c.series.snapshots) {
        put(out, s.t);
        put_grid_free_prob(out, s.prob);
    }
    write_field(out, c.field);
    if (!out) throw std::runtime_error("failed to write checkpoint");
}

Checkpoint read_checkpoint(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kCheckpointMagic, 4) != 0) {
        throw std::runtime_error("not a checkpoint file (bad magic)");
    }
    Checkpoint c;
    c.t = get<double>(in);
    c.step = get<std::uint64_t>(in);
    c.config_hash = get<std::uint64_t>(in);
    c.dt_next = get<double>(in);
    c.norm0 = get<double>(in);
    c.next_snapshot = get<std::uint64_t>(in);
    const auto n_records = get<std::uint64_t>(in);
    c.series.records.reserve(n_records);
    for (std::uint64_t k = 0; k < n_records; ++k) c.series.records.push_back(get<Record>(in));
    const auto n_snaps = get<std::uint64_t>(in);
    std::vector<std::pair<double, std::vector<double>>> raw;
    for (std::uint64_t k = 0; k < n_snaps; ++k) {
        const double t = get<double>(in);
        std::vector<double> v(get<std::uint64_t>(in));
        in.read(reinterpret_cast<char*>(v.data()),
                static_cast<std::streamsize>(v.size() * sizeof(double)));
        if (!in) throw std::runtime_error("checkpoint truncated");
        raw.emplace_back(t, std::move(v));
    }
    c.field = read_field(in);
    for (auto& [t, v] : raw) {
        if (v.size() != c.field.grid().n_r()) {
            throw std::runtime_error("checkpoint snapshot does not match the field grid");
        }
        c.series.snapshots.push_back({t, {c.field.grid(), std::move(v)}});
    }
    return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
    const auto tmp = std::filesystem::path(path).concat(".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        write_checkpoint(out, c);
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
    return read_checkpoint(in);
}

namespace {

std::string describe_index(const PhaseGrid& g, std::size_t flat_index) {
    static constexpr const char* names[] = {"W00", "W01", "W10", "W11"};
    const std::size_t block = 2 * g.size();
    const std::size_t k = flat_index / block;
    const std::size_t node = (flat_index % block) / 2;
    const std::size_t i = node / g.n_p();
    const std::size_t j = node % g.n_p();
    std::ostringstream os;
    os << names[k] << (flat_index % 2 == 0 ? ".re" : ".im") << " at node (" << i << ", " << j
       << "), R = " << g.r(i) << ", P = " << g.p(j);
    return os.str();
}

}  // namespace

TimeSeries evolve(const SpinPhaseField& w0, const ModelParams& params,
                  const IntegratorConfig& config, const EvolveOptions& options) {
    config.validate();
    params.validate();

    const bool resuming = options.resume.has_value();
    if (resuming && options.config_hash != 0 && options.resume->config_hash != options.config_hash) {
        throw std::invalid_argument("checkpoint was written for a different configuration");
    }
    SpinPhaseField w = resuming ? options.resume->field : w0;
    SpinPhaseField next(w.grid(), w.basis());
    const PhaseGrid grid = w.grid();

    Liouvillian liouvillian(grid, w.basis(), params);
    const Derivative f = [&liouvillian](double, std::span<const double> y, std::span<double> dy) {
        liouvillian.apply(y, dy);
    };
    std::optional<FieldStepper> field_stepper;
    if (w.basis() == SpinBasis::sigma_z) field_stepper.emplace(liouvillian);
    CashKarpStepper stepper(field_stepper ? 0 : w.flat().size());

    TimeSeries series;
    double t = 0.0;
    std::uint64_t step = 0;
    double dt = config.dt;
    double norm0 = 0.0;
    std::uint64_t next_snapshot = 0;

    const auto notify = [&](double time) {
        const Observation obs{time, step, w};
        for (const auto& o : options.observers) o(obs);
    };
    const auto record = [&](double time) {
        series.records.push_back(observe(time, w, params));
        notify(time);
        const double drift = std::abs(series.records.back().norm - norm0);
        if (!(drift <= config.norm_drift_limit)) {
            std::ostringstream os;
            os << "norm drift " << drift << " exceeds " << config.norm_drift_limit << " at t = "
               << time;
            throw SolverAbort(os.str(), series);
        }
    };
    const auto maybe_snapshot = [&](double time, double step_dt) {
        if (config.snapshot_interval <= 0.0) return;
        const double mark = static_cast<double>(next_snapshot) * config.snapshot_interval;
        if (time < mark - 1e-6 * std::min(step_dt, config.snapshot_interval)) return;
        series.snapshots.push_back({time, position_probability(w)});
        while (static_cast<double>(next_snapshot) * config.snapshot_interval <=
               time + 1e-6 * std::min(step_dt, config.snapshot_interval)) {
            ++next_snapshot;
        }
    };

    if (resuming) {
        const Checkpoint& c = *options.resume;
        t = c.t;
        step = c.step;
        dt = c.dt_next;
        norm0 = c.norm0;
        next_snapshot = c.next_snapshot;
        series = c.series;
    } else {
        const auto flat = w.flat();
        const auto bad = std::find_if(flat.begin(), flat.end(), [](double v) { return !std::isfinite(v); });
        if (bad != flat.end()) {
            throw SolverAbort("non-finite field at t = 0: " +
                                  describe_index(grid, static_cast<std::size_t>(bad - flat.begin())),
                              series);
        }
        norm0 = norm(w);
        record(0.0);
        maybe_snapshot(0.0, dt);
    }

    const bool fixed = config.control == StepControl::fixed;
    const double t_end = config.t_end;
    // Fixed mode: full steps land on n * dt; a remainder below this is dropped.
    const double slack = 1e-9 * config.dt;
    const auto full_steps = static_cast<std::uint64_t>(std::floor((t_end + slack) / config.dt));
    const bool partial_last = fixed && t_end - static_cast<double>(full_steps) * config.dt > slack;
    const std::uint64_t fixed_total = full_steps + (partial_last ? 1 : 0);

    std::uint64_t attempts = 0;
    const auto finished = [&] { return fixed ? step >= fixed_total : t >= t_end - slack; };

    while (!finished()) {
        if (++attempts > config.max_steps) {
            throw SolverAbort("max_steps (" + std::to_string(config.max_steps) + ") exceeded at t = " +
                                  std::to_string(t),
                              series);
        }
        double h = dt;
        if (fixed) {
            if (step + 1 == fixed_total && partial_last) {
                h = t_end - static_cast<double>(full_steps) * config.dt;
            }
        } else {
            h = std::min(dt, t_end - t);
        }
        double err = 0.0;
        try {
            err = field_stepper ? field_stepper->step(w.flat(), h, next.flat())
                                : stepper.step(w.flat(), t, h, f, next.flat());
        } catch (const NonFiniteState& e) {
            throw SolverAbort("non-finite field at t = " + std::to_string(t) + ": " +
                                  describe_index(grid, e.index) +
                                  (e.stage > 0 ? " (stage " + std::to_string(e.stage) + ")" : ""),
                              series);
        }
        if (!fixed) {
            double scale = 0.0;
            for (const double v : w.flat()) scale = std::max(scale, std::abs(v));
            const double tol = config.abs_tol + config.rel_tol * scale;
            const double ratio = err / tol;
            if (ratio > 1.0) {
                dt = h * std::max(0.2, 0.9 * std::pow(ratio, -0.25));
                continue;
            }
            dt = h * (ratio > 0.0 ? std::min(5.0, 0.9 * std::pow(ratio, -0.2)) : 5.0);
        }
        std::swap(w, next);
        ++step;
        if (fixed) {
            t = (step == fixed_total && partial_last) ? t_end
                                                      : static_cast<double>(step) * config.dt;
        } else {
            t += h;
        }
        const bool last = finished();
        maybe_snapshot(t, h);
        if (step % config.observe_every == 0 || last) record(t);
        if (options.checkpoint_every > 0 && step % options.checkpoint_every == 0 && !last) {
            save_checkpoint(options.checkpoint_path,
                            {t, step, options.config_hash, dt, norm0, next_snapshot, series, w});
        }
    }
    return series;
}

}  // namespace nanorod
