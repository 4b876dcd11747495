#include "nanorod/liouvillian.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

namespace nanorod {

namespace {

// Spin Hamiltonian at fixed R written as [[-a, -b], [-b, a]] in the storage
// basis: a = cR, b = omega in the sigma_z basis; the two swap in sigma_x.
struct SpinCoupling {
    double a;
    double b;
};

SpinCoupling spin_coupling(SpinBasis basis, const ModelParams& p, double r) {
    return basis == SpinBasis::sigma_z ? SpinCoupling{p.c * r, p.omega}
                                       : SpinCoupling{p.omega, p.c * r};
}

// -i [Hs, W] at one node, added to (or stored in) out[0..3].
template <bool Accumulate>
inline void commutator_node(SpinCoupling h, const complex& wa, const complex& wb,
                            const complex& wc, const complex& wd, complex* oa, complex* ob,
                            complex* oc, complex* od) {
    const double a2 = 2.0 * h.a;
    const double b = h.b;
    const double xr = wb.real() - wc.real();
    const double xi = wb.imag() - wc.imag();
    const double ur = wa.real() - wd.real();
    const double ui = wa.imag() - wd.imag();
    const complex da(b * xi, -(b * xr));
    const complex db(b * ui - a2 * wb.imag(), a2 * wb.real() - b * ur);
    const complex dc(a2 * wc.imag() - b * ui, b * ur - a2 * wc.real());
    const complex dd(-(b * xi), b * xr);
    if constexpr (Accumulate) {
        *oa += da;
        *ob += db;
        *oc += dc;
        *od += dd;
    } else {
        *oa = da;
        *ob = db;
        *oc = dc;
        *od = dd;
    }
}

// commutator_node<true> over one row, spelled out on (re, im) doubles so the
// compiler can vectorize it. Each output element sees the same operations.
void commutator_row(double a2, double b, const double* __restrict wa,
                    const double* __restrict wb, const double* __restrict wc,
                    const double* __restrict wd, double* __restrict oa, double* __restrict ob,
                    double* __restrict oc, double* __restrict od, std::size_t n_p) {
    for (std::size_t j = 0; j < n_p; ++j) {
        const std::size_t re = 2 * j;
        const std::size_t im = 2 * j + 1;
        const double xr = wb[re] - wc[re];
        const double xi = wb[im] - wc[im];
        const double ur = wa[re] - wd[re];
        const double ui = wa[im] - wd[im];
        oa[re] += b * xi;
        oa[im] += -(b * xr);
        ob[re] += b * ui - a2 * wb[im];
        ob[im] += a2 * wb[re] - b * ur;
        oc[re] += a2 * wc[im] - b * ui;
        oc[im] += b * ur - a2 * wc[re];
        od[re] += -(b * xi);
        od[im] += b * xr;
    }
}

inline double drift(double minus_p, double coef, double d_r, double d_p) {
    return minus_p * d_r + coef * d_p;
}

inline double quantum_coefficient(double r, const ModelParams& p) {
    return -potential_derivs(r, p).third / 24.0;
}

bool has_quantum(const ModelParams& p) { return p.mode == Dynamics::quantum && p.b4 != 0.0; }

// Momentum-force coefficient of component k in the sigma_z basis, where the
// anticommutator with sz shifts the diagonal force by -+c.
inline double sigma_z_force(std::size_t k, double force, double c) {
    if (k == 0) return force - c;
    if (k == 3) return force + c;
    return force;
}

}  // namespace

SpinPhaseField commutator_term(const SpinPhaseField& w, const ModelParams& params) {
    const PhaseGrid& g = w.grid();
    SpinPhaseField out(g, w.basis());
    const auto a = w.component(0);
    const auto b = w.component(1);
    const auto c = w.component(2);
    const auto d = w.component(3);
    auto oa = out.component(0);
    auto ob = out.component(1);
    auto oc = out.component(2);
    auto od = out.component(3);
    for (std::size_t i = 0; i < g.n_r(); ++i) {
        const SpinCoupling h = spin_coupling(w.basis(), params, g.r(i));
        for (std::size_t j = 0; j < g.n_p(); ++j) {
            const std::size_t n = g.index(i, j);
            commutator_node<false>(h, a[n], b[n], c[n], d[n], &oa[n], &ob[n], &oc[n], &od[n]);
        }
    }
    return out;
}

SpinPhaseField transport_term(const SpinPhaseField& w, const ModelParams& params) {
    const PhaseGrid& g = w.grid();
    SpinPhaseField out(g, w.basis());
    std::array<ScalarField, 4> d_p;
    for (std::size_t k = 0; k < 4; ++k) {
        const ScalarField f = w.scalar(k);
        const ScalarField d_r = d_dr(f);
        d_p[k] = d_dp(f);
        auto o = out.component(k);
        for (std::size_t i = 0; i < g.n_r(); ++i) {
            const double force = potential_derivs(g.r(i), params).first;
            const double coef =
                w.basis() == SpinBasis::sigma_z ? sigma_z_force(k, force, params.c) : force;
            for (std::size_t j = 0; j < g.n_p(); ++j) {
                const std::size_t n = g.index(i, j);
                const double mp = -g.p(j);
                o[n] = complex(drift(mp, coef, d_r.values[n].real(), d_p[k].values[n].real()),
                               drift(mp, coef, d_r.values[n].imag(), d_p[k].values[n].imag()));
            }
        }
    }
    if (w.basis() == SpinBasis::sigma_x) {
        // -(c/2) {sx, dW/dP} mixes diagonal and off-diagonal blocks.
        const double half_c = 0.5 * params.c;
        for (std::size_t n = 0; n < g.size(); ++n) {
            const complex off = d_p[1].values[n] + d_p[2].values[n];
            const complex diag = d_p[0].values[n] + d_p[3].values[n];
            out.component(0)[n] -= half_c * off;
            out.component(3)[n] -= half_c * off;
            out.component(1)[n] -= half_c * diag;
            out.component(2)[n] -= half_c * diag;
        }
    }
    return out;
}

SpinPhaseField quantum_correction_term(const SpinPhaseField& w, const ModelParams& params) {
    const PhaseGrid& g = w.grid();
    SpinPhaseField out(g, w.basis());
    if (params.b4 == 0.0) return out;
    if (g.n_p() < 7) throw std::invalid_argument("quantum correction needs n_p >= 7");
    for (std::size_t k = 0; k < 4; ++k) {
        const ScalarField d3 = d3_dp3(w.scalar(k));
        auto o = out.component(k);
        for (std::size_t i = 0; i < g.n_r(); ++i) {
            const double q = quantum_coefficient(g.r(i), params);
            for (std::size_t j = 0; j < g.n_p(); ++j) {
                const std::size_t n = g.index(i, j);
                o[n] = complex(q * d3.values[n].real(), q * d3.values[n].imag());
            }
        }
    }
    return out;
}

RhsTerms rhs_terms(const SpinPhaseField& w, const ModelParams& params) {
    const PhaseGrid& g = w.grid();
    RhsTerms t{commutator_term(w, params), transport_term(w, params),
               SpinPhaseField(g, w.basis()), SpinPhaseField(g, w.basis())};
    const bool quantum = has_quantum(params);
    if (quantum) t.quantum_part = quantum_correction_term(w, params);
    auto out = t.total.flat();
    const auto tr = t.transport_part.flat();
    const auto qu = t.quantum_part.flat();
    const auto cm = t.commutator_part.flat();
    for (std::size_t x = 0; x < out.size(); ++x) {
        out[x] = quantum ? (tr[x] + qu[x]) + cm[x] : tr[x] + cm[x];
    }
    return t;
}

Liouvillian::Liouvillian(const PhaseGrid& grid, SpinBasis basis, const ModelParams& params)
    : grid_(grid),
      basis_(basis),
      params_(params),
      with_quantum_(has_quantum(params)),
      minus_p_(2 * grid.n_p()),
      force_(grid.n_r()),
      q_coef_(grid.n_r()),
      row_r_(2 * grid.n_p()),
      row_p_(2 * grid.n_p()),
      row_3_(2 * grid.n_p()) {
    params.validate();
    if (grid.n_p() < 7) throw std::invalid_argument("Liouvillian needs n_p >= 7");
    for (std::size_t j = 0; j < grid.n_p(); ++j) {
        minus_p_[2 * j] = minus_p_[2 * j + 1] = -grid.p(j);
    }
    for (std::size_t i = 0; i < grid.n_r(); ++i) {
        force_[i] = potential_derivs(grid.r(i), params).first;
        q_coef_[i] = quantum_coefficient(grid.r(i), params);
    }
}

void Liouvillian::apply_row(std::size_t i, const RowInputs& in, double* const out[4]) {
    const std::size_t line = 2 * grid_.n_p();
    const double inv_r = 1.0 / (12.0 * grid_.dr());
    const double inv_p = 1.0 / (12.0 * grid_.dp());
    const double h = grid_.dp();
    const double inv_3 = 1.0 / (8.0 * h * h * h);
    for (std::size_t k = 0; k < 4; ++k) {
        const double* rows[5] = {in[0][k], in[1][k], in[2][k], in[3][k], in[4][k]};
        stencil::row_d_dr(rows, line, inv_r, row_r_.data());
        stencil::row_d_dp(in[2][k], grid_.n_p(), inv_p, row_p_.data());
        const double coef = sigma_z_force(k, force_[i], params_.c);
        double* __restrict dst = out[k];
        const double* __restrict mp = minus_p_.data();
        const double* __restrict dr = row_r_.data();
        const double* __restrict dp = row_p_.data();
        if (with_quantum_) {
            stencil::row_d3_dp3(in[2][k], grid_.n_p(), inv_3, row_3_.data());
            const double q = q_coef_[i];
            const double* __restrict d3 = row_3_.data();
            for (std::size_t x = 0; x < line; ++x) {
                dst[x] = drift(mp[x], coef, dr[x], dp[x]) + q * d3[x];
            }
        } else {
            for (std::size_t x = 0; x < line; ++x) {
                dst[x] = drift(mp[x], coef, dr[x], dp[x]);
            }
        }
    }
    const SpinCoupling hs = spin_coupling(basis_, params_, grid_.r(i));
    const auto& w = in[2];
    commutator_row(2.0 * hs.a, hs.b, w[0], w[1], w[2], w[3], out[0], out[1], out[2], out[3],
                   grid_.n_p());
}

void Liouvillian::apply(std::span<const double> in, std::span<double> out) {
    const std::size_t block = 2 * grid_.size();
    if (in.size() != 4 * block || out.size() != 4 * block) {
        throw std::invalid_argument("Liouvillian::apply: buffer size mismatch");
    }
    if (basis_ != SpinBasis::sigma_z) {
        SpinPhaseField w(grid_, basis_);
        std::copy(in.begin(), in.end(), w.flat().begin());
        const SpinPhaseField total = rhs_terms(w, params_).total;
        std::copy(total.flat().begin(), total.flat().end(), out.begin());
        return;
    }
    const std::size_t line = 2 * grid_.n_p();
    const auto n_r = static_cast<long>(grid_.n_r());
    for (std::size_t i = 0; i < grid_.n_r(); ++i) {
        RowInputs rows;
        for (int d = 0; d < 5; ++d) {
            const long r = static_cast<long>(i) + d - 2;
            for (std::size_t k = 0; k < 4; ++k) {
                rows[d][k] = (r >= 0 && r < n_r)
                                 ? in.data() + k * block + static_cast<std::size_t>(r) * line
                                 : nullptr;
            }
        }
        double* dst[4];
        for (std::size_t k = 0; k < 4; ++k) dst[k] = out.data() + k * block + i * line;
        apply_row(i, rows, dst);
    }
}

SpinPhaseField rhs(const SpinPhaseField& w, const ModelParams& params) {
    Liouvillian l(w.grid(), w.basis(), params);
    SpinPhaseField out(w.grid(), w.basis());
    l.apply(w.flat(), out.flat());
    return out;
}

}  // namespace nanorod
