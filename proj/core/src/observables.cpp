#include "nanorod/observables.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace nanorod {

bool operator==(const PositionProbability& a, const PositionProbability& b) {
    return a.grid == b.grid && a.values == b.values;
}

bool operator==(const ProbSnapshot& a, const ProbSnapshot& b) {
    return a.t == b.t && a.prob == b.prob;
}

bool operator==(const TimeSeries& a, const TimeSeries& b) {
    return a.records == b.records && a.snapshots == b.snapshots;
}

namespace {

// Weight of R node i on the left of R = 0, as a fraction of its trapezoid weight.
double left_fraction(const PhaseGrid& g, std::size_t i) {
    const double r = g.r(i);
    if (std::abs(r) <= 1e-12 * g.dr()) return 0.5;
    return r < 0.0 ? 1.0 : 0.0;
}

void require_straddle(const PhaseGrid& g, const char* what) {
    if (!(g.r_min() < 0.0 && g.r_max() > 0.0)) {
        throw std::invalid_argument(std::string(what) + ": grid does not straddle R = 0");
    }
}

const SpinPhaseField& in_sigma_z(const SpinPhaseField& w, SpinPhaseField& scratch) {
    if (w.basis() == SpinBasis::sigma_z) return w;
    scratch = to_basis(w, SpinBasis::sigma_z);
    return scratch;
}

}  // namespace

complex sigma_z_integral(const SpinPhaseField& w) {
    SpinPhaseField scratch;
    const SpinPhaseField& z = in_sigma_z(w, scratch);
    ScalarField diff(z.grid());
    const auto a = z.component(0);
    const auto d = z.component(3);
    for (std::size_t n = 0; n < diff.values.size(); ++n) diff.values[n] = a[n] - d[n];
    return integrate_phase_space(diff);
}

double sigma_z_expectation(const SpinPhaseField& w) { return sigma_z_integral(w).real(); }

PositionProbability position_probability(const SpinPhaseField& w) {
    const PhaseGrid& g = w.grid();
    PositionProbability out{g, std::vector<double>(g.n_r())};
    const auto a = w.component(0);
    const auto d = w.component(3);
    for (std::size_t i = 0; i < g.n_r(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < g.n_p(); ++j) {
            const std::size_t n = g.index(i, j);
            s += g.p_weight(j) * (a[n].real() + d[n].real());
        }
        out.values[i] = s;
    }
    return out;
}

double prob_left(const SpinPhaseField& w) {
    require_straddle(w.grid(), "prob_left");
    const PositionProbability p = position_probability(w);
    double s = 0.0;
    for (std::size_t i = 0; i < p.values.size(); ++i) {
        s += left_fraction(p.grid, i) * p.grid.r_weight(i) * p.values[i];
    }
    return s;
}

PositionProbability time_averaged_position_probability(std::span<const PositionProbability> snaps) {
    if (snaps.empty()) throw std::invalid_argument("time average needs at least one snapshot");
    PositionProbability out{snaps.front().grid, std::vector<double>(snaps.front().values.size())};
    for (const auto& s : snaps) {
        if (!(s.grid == out.grid)) throw std::invalid_argument("snapshots on different grids");
        for (std::size_t i = 0; i < s.values.size(); ++i) out.values[i] += s.values[i];
    }
    const double inv = 1.0 / static_cast<double>(snaps.size());
    for (auto& v : out.values) v *= inv;
    return out;
}

PositionProbability time_averaged_position_probability(std::span<const ProbSnapshot> snaps) {
    std::vector<PositionProbability> probs;
    probs.reserve(snaps.size());
    for (const auto& s : snaps) probs.push_back(s.prob);
    return time_averaged_position_probability(std::span<const PositionProbability>(probs));
}

double asymmetry(const PositionProbability& p) {
    require_straddle(p.grid, "asymmetry");
    double left = 0.0;
    double right = 0.0;
    for (std::size_t i = 0; i < p.values.size(); ++i) {
        const double m = p.grid.r_weight(i) * p.values[i];
        const double f = left_fraction(p.grid, i);
        left += f * m;
        right += (1.0 - f) * m;
    }
    const double total = left + right;
    if (total == 0.0) throw std::domain_error("asymmetry: zero total mass");
    return std::abs(left - right) / total;
}

double energy_expectation(const SpinPhaseField& w, const ModelParams& params) {
    const PhaseGrid& g = w.grid();
    const auto a = w.component(0);
    const auto b = w.component(1);
    const auto c = w.component(2);
    const auto d = w.component(3);
    const bool z = w.basis() == SpinBasis::sigma_z;
    double total = 0.0;
    for (std::size_t i = 0; i < g.n_r(); ++i) {
        const double r = g.r(i);
        const double v = potential(r, params);
        const double cr = params.c * r;
        // H = h 1 + [[-s, -o], [-o, s]] with (s, o) = (cR, omega) in the sigma_z basis.
        const double s = z ? cr : params.omega;
        const double o = z ? params.omega : cr;
        double row = 0.0;
        for (std::size_t j = 0; j < g.n_p(); ++j) {
            const std::size_t n = g.index(i, j);
            const double p = g.p(j);
            const double h = 0.5 * p * p + v;
            const double tr = (h - s) * a[n].real() + (h + s) * d[n].real() -
                              o * (b[n].real() + c[n].real());
            row += g.p_weight(j) * tr;
        }
        total += g.r_weight(i) * row;
    }
    return total;
}

double boundary_mass(const SpinPhaseField& w) {
    const PhaseGrid& g = w.grid();
    const double total = norm(w);
    if (total == 0.0) return 0.0;
    const auto a = w.component(0);
    const auto d = w.component(3);
    const std::size_t frame = 3;
    double edge = 0.0;
    for (std::size_t i = 0; i < g.n_r(); ++i) {
        const bool edge_row = i < frame || i + frame >= g.n_r();
        for (std::size_t j = 0; j < g.n_p(); ++j) {
            if (!edge_row && j >= frame && j + frame < g.n_p()) continue;
            const std::size_t n = g.index(i, j);
            edge += g.weight(i, j) * std::abs(a[n].real() + d[n].real());
        }
    }
    return edge / std::abs(total);
}

Record observe(double t, const SpinPhaseField& w, const ModelParams& params) {
    Record r;
    r.t = t;
    r.sigma_z = sigma_z_expectation(w);
    r.prob_left = prob_left(w);
    r.norm = norm(w);
    r.energy = energy_expectation(w, params);
    r.hermiticity_defect = hermiticity_defect(w);
    r.boundary_mass = boundary_mass(w);
    return r;
}

double rabi_envelope(const TimeSeries& series, double t_from, double t_to, double window) {
    std::vector<const Record*> in;
    for (const auto& r : series.records) {
        if (r.t >= t_from && r.t <= t_to) in.push_back(&r);
    }
    if (in.empty()) throw std::invalid_argument("rabi_envelope: no records in the interval");
    const auto swing = [&](double lo, double hi) {
        double mn = INFINITY;
        double mx = -INFINITY;
        for (const Record* r : in) {
            if (r->t < lo || r->t > hi) continue;
            mn = std::min(mn, r->sigma_z);
            mx = std::max(mx, r->sigma_z);
        }
        return mx - mn;
    };
    const double last_start = t_to - window;
    if (last_start <= t_from) return swing(t_from, t_to);
    double sum = 0.0;
    std::size_t count = 0;
    for (const Record* r : in) {
        if (r->t > last_start) break;
        sum += swing(r->t, r->t + window);
        ++count;
    }
    return sum / static_cast<double>(count);
}

namespace {

constexpr const char* kHeader = "t,sigma_z,prob_left,norm,energy,hermiticity_defect,boundary_mass";

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_csv(std::ostream& out, const TimeSeries& series, const std::optional<std::string>& source) {
    out << kHeader << (source ? ",source" : "") << '\n';
    for (const auto& r : series.records) {
        out << fmt(r.t) << ',' << fmt(r.sigma_z) << ',' << fmt(r.prob_left) << ',' << fmt(r.norm)
            << ',' << fmt(r.energy) << ',' << fmt(r.hermiticity_defect) << ','
            << fmt(r.boundary_mass);
        if (source) out << ',' << *source;
        out << '\n';
    }
}

TimeSeries read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind(kHeader, 0) != 0) {
        throw std::runtime_error("time series CSV: unexpected header");
    }
    TimeSeries s;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        double v[7];
        for (int k = 0; k < 7; ++k) {
            if (!std::getline(ss, cell, ',')) {
                throw std::runtime_error("time series CSV: short row at line " +
                                         std::to_string(line_no));
            }
            v[k] = std::stod(cell);
        }
        s.records.push_back({v[0], v[1], v[2], v[3], v[4], v[5], v[6]});
    }
    return s;
}

void write_position_csv(std::ostream& out, const PositionProbability& p) {
    out << "R,value\n";
    for (std::size_t i = 0; i < p.values.size(); ++i) {
        out << fmt(p.grid.r(i)) << ',' << fmt(p.values[i]) << '\n';
    }
}

}  // namespace nanorod
