#include "nanorod/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nanorod {

PhaseGrid build_grid(double r_min, double r_max, double p_min, double p_max, std::size_t n_r,
                     std::size_t n_p) {
    if (!std::isfinite(r_min) || !std::isfinite(r_max) || !std::isfinite(p_min) ||
        !std::isfinite(p_max)) {
        throw std::invalid_argument("grid bounds must be finite");
    }
    if (!(r_min < r_max) || !(p_min < p_max)) {
        throw std::invalid_argument("grid bounds must satisfy min < max on both axes");
    }
    if (n_r < 8 || n_p < 8) {
        throw std::invalid_argument("grid needs at least 8 nodes per axis (got " +
                                    std::to_string(n_r) + " x " + std::to_string(n_p) + ")");
    }
    PhaseGrid g;
    g.r_min_ = r_min;
    g.r_max_ = r_max;
    g.p_min_ = p_min;
    g.p_max_ = p_max;
    g.n_r_ = n_r;
    g.n_p_ = n_p;
    g.dr_ = (r_max - r_min) / static_cast<double>(n_r - 1);
    g.dp_ = (p_max - p_min) / static_cast<double>(n_p - 1);
    return g;
}

namespace stencil {

namespace {

// Signed node offsets inside [lo, hi] are on-grid; everything else reads zero.
struct Window {
    long lo;
    long hi;
    bool contains(long k) const { return k >= lo && k <= hi; }
};

}  // namespace

void row_d_dr(const double* const rows[5], std::size_t line, double inv_12h, double* out) {
    if (rows[0] != nullptr && rows[4] != nullptr) {
        const double* m2 = rows[0];
        const double* m1 = rows[1];
        const double* p1 = rows[3];
        const double* p2 = rows[4];
        for (std::size_t x = 0; x < line; ++x) {
            const double v[5] = {m2[x], m1[x], 0.0, p1[x], p2[x]};
            out[x] = first([&v](int k) { return v[k + 2]; }, inv_12h);
        }
        return;
    }
    for (std::size_t x = 0; x < line; ++x) {
        out[x] = first([rows, x](int k) { return rows[k + 2] != nullptr ? rows[k + 2][x] : 0.0; },
                       inv_12h);
    }
}

void row_d_dr(const double* f, const PhaseGrid& g, std::size_t i, double* out) {
    const std::size_t line = 2 * g.n_p();
    const double* rows[5];
    for (int k = -2; k <= 2; ++k) {
        const long r = static_cast<long>(i) + k;
        rows[k + 2] = (r >= 0 && r < static_cast<long>(g.n_r())) ? f + static_cast<std::size_t>(r) * line
                                                                : nullptr;
    }
    row_d_dr(rows, line, 1.0 / (12.0 * g.dr()), out);
}

namespace {

template <class Kernel>
void along_p(const double* base, std::size_t n_p_nodes, double* out, long reach, Kernel&& kernel) {
    const long n_p = static_cast<long>(n_p_nodes);
    const auto edge = [&](long j) {
        const Window w{-j, n_p - 1 - j};
        for (int r = 0; r < 2; ++r) {
            const double* c = base + 2 * j + r;
            out[2 * j + r] = kernel([c, w](int k) { return w.contains(k) ? c[2 * k] : 0.0; });
        }
    };
    const long lo = std::min(reach, n_p);
    const long hi = std::max(lo, n_p - reach);
    for (long j = 0; j < lo; ++j) edge(j);
    for (long x = 2 * lo; x < 2 * hi; ++x) {
        const double* c = base + x;
        out[x] = kernel([c](int k) { return c[2 * k]; });
    }
    for (long j = hi; j < n_p; ++j) edge(j);
}

}  // namespace

void row_d_dp(const double* row, std::size_t n_p, double inv_12h, double* out) {
    along_p(row, n_p, out, 2, [inv_12h](auto&& load) { return first(load, inv_12h); });
}

void row_d3_dp3(const double* row, std::size_t n_p, double inv_8h3, double* out) {
    along_p(row, n_p, out, 3, [inv_8h3](auto&& load) { return third(load, inv_8h3); });
}

void row_d_dp(const double* f, const PhaseGrid& g, std::size_t i, double* out) {
    row_d_dp(f + i * 2 * g.n_p(), g.n_p(), 1.0 / (12.0 * g.dp()), out);
}

void row_d3_dp3(const double* f, const PhaseGrid& g, std::size_t i, double* out) {
    const double h = g.dp();
    row_d3_dp3(f + i * 2 * g.n_p(), g.n_p(), 1.0 / (8.0 * h * h * h), out);
}

}  // namespace stencil

namespace {

template <class Row>
ScalarField apply_rows(const ScalarField& f, std::size_t min_nodes, std::size_t axis_nodes,
                       const char* name, Row&& row) {
    if (f.values.size() != f.grid.size()) {
        throw std::invalid_argument(std::string(name) + ": field size does not match its grid");
    }
    if (axis_nodes < min_nodes) {
        throw std::invalid_argument(std::string(name) + ": grid too small for stencil");
    }
    ScalarField out(f.grid);
    const auto* in = reinterpret_cast<const double*>(f.values.data());
    auto* dst = reinterpret_cast<double*>(out.values.data());
    for (std::size_t i = 0; i < f.grid.n_r(); ++i) {
        row(in, f.grid, i, dst + i * 2 * f.grid.n_p());
    }
    return out;
}

}  // namespace

ScalarField d_dr(const ScalarField& f) {
    return apply_rows(f, 5, f.grid.n_r(), "d_dr",
                      [](const double* f_, const PhaseGrid& g, std::size_t i, double* o) {
                          stencil::row_d_dr(f_, g, i, o);
                      });
}

ScalarField d_dp(const ScalarField& f) {
    return apply_rows(f, 5, f.grid.n_p(), "d_dp",
                      [](const double* f_, const PhaseGrid& g, std::size_t i, double* o) {
                          stencil::row_d_dp(f_, g, i, o);
                      });
}

ScalarField d3_dp3(const ScalarField& f) {
    return apply_rows(f, 7, f.grid.n_p(), "d3_dp3",
                      [](const double* f_, const PhaseGrid& g, std::size_t i, double* o) {
                          stencil::row_d3_dp3(f_, g, i, o);
                      });
}

complex integrate_phase_space(const ScalarField& f) {
    const PhaseGrid& g = f.grid;
    if (f.values.size() != g.size()) {
        throw std::invalid_argument("integrate_phase_space: field size does not match its grid");
    }
    complex total{};
    for (std::size_t i = 0; i < g.n_r(); ++i) {
        complex row{};
        for (std::size_t j = 0; j < g.n_p(); ++j) {
            const complex v = f.at(i, j);
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
                throw std::domain_error("integrate_phase_space: non-finite value");
            }
            row += g.p_weight(j) * v;
        }
        total += g.r_weight(i) * row;
    }
    return total;
}

}  // namespace nanorod
