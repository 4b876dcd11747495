#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstring>
#include <random>

#include "nanorod/liouvillian.hpp"
#include "nanorod/oracle.hpp"
#include "nanorod/state.hpp"

using namespace nanorod;

namespace {

ModelParams set1(double c = 0.4, Dynamics d = Dynamics::quantum) {
    return {0.6, c, -1.0, 0.5, d};
}

// Smooth Hermitian field with all four components populated and negligible
// mass near the edges of [-8, 8]^2.
SpinPhaseField busy_field(const PhaseGrid& g, unsigned seed = 7) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double a = u(gen), b = u(gen), c = u(gen), d = u(gen);
    SpinPhaseField w(g);
    for (std::size_t i = 0; i < g.n_r(); ++i) {
        for (std::size_t j = 0; j < g.n_p(); ++j) {
            const double r = g.r(i);
            const double p = g.p(j);
            const double env = std::exp(-0.5 * (r + 1) * (r + 1) - 0.4 * (p - 0.3) * (p - 0.3));
            w.at(0, i, j) = env * (1.0 + 0.3 * std::sin(a * r + p));
            w.at(3, i, j) = env * (0.4 + 0.2 * std::cos(b * p - r));
            const complex z = env * complex(0.2 * std::cos(c * r * p), 0.3 * std::sin(d * r + 0.5 * p));
            w.at(1, i, j) = z;
            w.at(2, i, j) = std::conj(z);
        }
    }
    return w;
}

PhaseGrid default_grid() { return build_grid(-8, 8, -8, 8, 120, 120); }

bool bitwise_equal(const SpinPhaseField& a, const SpinPhaseField& b) {
    const auto x = a.flat();
    const auto y = b.flat();
    return x.size() == y.size() &&
           std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) == 0;
}

double max_abs(const SpinPhaseField& w) {
    double m = 0.0;
    for (double v : w.flat()) m = std::max(m, std::abs(v));
    return m;
}

double max_diff(const SpinPhaseField& a, const SpinPhaseField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.flat().size(); ++i) {
        m = std::max(m, std::abs(a.flat()[i] - b.flat()[i]));
    }
    return m;
}

Eigen::Matrix2cd node(const SpinPhaseField& w, std::size_t n) {
    Eigen::Matrix2cd m;
    m << w.component(0)[n], w.component(1)[n], w.component(2)[n], w.component(3)[n];
    return m;
}

}  // namespace

TEST(Commutator, MatchesTwoByTwoMatrixAlgebra) {
    const PhaseGrid g = build_grid(-3, 3, -3, 3, 16, 16);
    const SpinPhaseField w = busy_field(g);
    const ModelParams p = set1();
    const SpinPhaseField out = commutator_term(w, p);
    Eigen::Matrix2cd sx, sz;
    sx << 0, 1, 1, 0;
    sz << 1, 0, 0, -1;
    const std::complex<double> i(0, 1);
    for (std::size_t a = 0; a < g.n_r(); ++a) {
        const Eigen::Matrix2cd h = -p.omega * sx - p.c * g.r(a) * sz;
        for (std::size_t b = 0; b < g.n_p(); ++b) {
            const std::size_t n = g.index(a, b);
            const Eigen::Matrix2cd wn = node(w, n);
            const Eigen::Matrix2cd expect = -i * (h * wn - wn * h);
            EXPECT_LT((node(out, n) - expect).cwiseAbs().maxCoeff(), 1e-15);
        }
    }
}

TEST(Commutator, ExcitedProjectorGainsCoherences) {
    const PhaseGrid g = default_grid();
    const SpinPhaseField w = init_coherent_excited(g, -1.6, 0.0, 0.6071);
    const SpinPhaseField out = commutator_term(w, set1(0.0));
    for (std::size_t n = 0; n < g.size(); ++n) {
        const complex gval = w.component(0)[n];
        EXPECT_EQ(out.component(0)[n], complex(0.0));
        EXPECT_EQ(out.component(3)[n], complex(0.0));
        EXPECT_NEAR(std::abs(out.component(1)[n] - complex(0, -0.6) * gval), 0.0, 1e-16);
        EXPECT_NEAR(std::abs(out.component(2)[n] - complex(0, 0.6) * gval), 0.0, 1e-16);
    }
}

TEST(Commutator, VanishesForIdentityOrFreeSpin) {
    const PhaseGrid g = build_grid(-3, 3, -3, 3, 12, 12);
    SpinPhaseField id(g);
    for (std::size_t n = 0; n < g.size(); ++n) {
        id.component(0)[n] = id.component(3)[n] = std::exp(-double(n) * 0.01);
    }
    EXPECT_EQ(max_abs(commutator_term(id, set1())), 0.0);
    EXPECT_EQ(max_abs(commutator_term(busy_field(g), {0.0, 0.0, -1.0, 0.5, Dynamics::quantum})),
              0.0);
}

TEST(Transport, ConstantFieldHasNoInteriorDrift) {
    const PhaseGrid g = build_grid(-3, 3, -3, 3, 20, 20);
    SpinPhaseField w(g);
    for (std::size_t k = 0; k < 4; ++k) {
        for (auto& v : w.component(k)) v = complex(0.7, k == 1 ? 0.1 : (k == 2 ? -0.1 : 0.0));
    }
    const SpinPhaseField out = transport_term(w, set1());
    for (std::size_t k = 0; k < 4; ++k) {
        for (std::size_t i = 2; i + 2 < g.n_r(); ++i) {
            for (std::size_t j = 2; j + 2 < g.n_p(); ++j) {
                EXPECT_EQ(out.at(k, i, j), complex(0.0));
            }
        }
    }
}

TEST(Transport, HarmonicCentroidMovesClassically) {
    const PhaseGrid g = default_grid();
    const ModelParams p{0.0, 0.0, 1.0, 0.0, Dynamics::classical};
    const double r0 = 1.2;
    const double p0 = 0.5;
    const SpinPhaseField w = init_coherent_excited(g, r0, p0, 0.6071);
    const SpinPhaseField d = transport_term(w, p);
    double dr = 0.0;
    double dp = 0.0;
    for (std::size_t i = 0; i < g.n_r(); ++i) {
        for (std::size_t j = 0; j < g.n_p(); ++j) {
            const double tr = (d.at(0, i, j) + d.at(3, i, j)).real();
            dr += g.weight(i, j) * g.r(i) * tr;
            dp += g.weight(i, j) * g.p(j) * tr;
        }
    }
    EXPECT_NEAR(dr, p0, 1e-6);
    EXPECT_NEAR(dp, -r0, 1e-6);
}

TEST(Transport, FunctionsOfTheEnergyAreStationary) {
    // The residual is pure stencil error and must fall at fourth order.
    const ModelParams p = set1(0.0, Dynamics::classical);
    double previous = 0.0;
    for (std::size_t n : {120u, 240u}) {
        const PhaseGrid g = build_grid(-5, 5, -5, 5, n, n);
        SpinPhaseField w(g);
        for (std::size_t i = 0; i < g.n_r(); ++i) {
            for (std::size_t j = 0; j < g.n_p(); ++j) {
                const double e = potential(g.r(i), p) + 0.5 * g.p(j) * g.p(j);
                w.at(0, i, j) = std::exp(-2.0 * e);
            }
        }
        const double residual = max_abs(transport_term(w, p));
        EXPECT_LT(residual, 5e-3) << n;
        if (previous > 0.0) {
            EXPECT_GT(previous / residual, 12.0) << n;
        }
        previous = residual;
    }
}

TEST(QuantumCorrection, ZeroWithoutQuartic) {
    const PhaseGrid g = default_grid();
    ModelParams p = set1();
    p.b4 = 0.0;
    EXPECT_EQ(max_abs(quantum_correction_term(busy_field(g), p)), 0.0);
}

TEST(QuantumCorrection, QuadraticMomentumDependenceIsAnnihilated) {
    const PhaseGrid g = build_grid(-4, 4, -4, 4, 40, 40);
    SpinPhaseField w(g);
    for (std::size_t i = 0; i < g.n_r(); ++i) {
        for (std::size_t j = 0; j < g.n_p(); ++j) {
            const double q = 1.0 + g.p(j) - 0.5 * g.p(j) * g.p(j);
            for (std::size_t k = 0; k < 4; ++k) w.at(k, i, j) = q * (1.0 + g.r(i));
        }
    }
    const SpinPhaseField out = quantum_correction_term(w, set1());
    for (std::size_t k = 0; k < 4; ++k) {
        for (std::size_t i = 0; i < g.n_r(); ++i) {
            for (std::size_t j = 3; j + 3 < g.n_p(); ++j) {
                EXPECT_NEAR(std::abs(out.at(k, i, j)), 0.0, 1e-9);
            }
        }
    }
}

TEST(QuantumCorrection, GaussianExample) {
    // dr = dp = 0.05 puts nodes exactly at R = 2, P = 0 and P = 1.
    const PhaseGrid g = build_grid(-4, 4, -4, 4, 161, 161);
    SpinPhaseField w(g);
    for (std::size_t i = 0; i < g.n_r(); ++i) {
        for (std::size_t j = 0; j < g.n_p(); ++j) {
            const double v = std::exp(-g.p(j) * g.p(j)) * std::exp(-g.r(i) * g.r(i));
            for (std::size_t k = 0; k < 4; ++k) w.at(k, i, j) = v;
        }
    }
    const SpinPhaseField out = quantum_correction_term(w, set1());
    ASSERT_NEAR(g.r(120), 2.0, 1e-12);
    ASSERT_NEAR(g.p(80), 0.0, 1e-12);
    ASSERT_NEAR(g.p(100), 1.0, 1e-12);
    const double at_one = -0.25 * 4.0 * std::exp(-1.0) * std::exp(-4.0);
    for (std::size_t k = 0; k < 4; ++k) {
        EXPECT_NEAR(out.at(k, 120, 80).real(), 0.0, 1e-4);
        EXPECT_NEAR(out.at(k, 120, 100).real(), at_one, 1e-4);
    }
}

TEST(QuantumCorrection, SignAgreesWithTheFockOracle) {
    // d<P^3>/dt picks up +<V'''>/4 from the third-order term. Compare the
    // phase-space rate with i<[H, P^3]> in the Fock basis for the same state.
    const PhaseGrid g = default_grid();
    const ModelParams p = set1(0.0);
    const SpinPhaseField w = init_coherent_excited(g, -1.6, 0.0, 0.6071);
    ModelParams classical = p;
    classical.mode = Dynamics::classical;
    const SpinPhaseField dq = rhs(w, p);
    const SpinPhaseField dc = rhs(w, classical);
    const auto p3_rate = [&](const SpinPhaseField& d) {
        double s = 0.0;
        for (std::size_t i = 0; i < g.n_r(); ++i) {
            for (std::size_t j = 0; j < g.n_p(); ++j) {
                s += g.weight(i, j) * std::pow(g.p(j), 3) * (d.at(0, i, j) + d.at(3, i, j)).real();
            }
        }
        return s;
    };
    const double quantum_rate = p3_rate(dq);
    const double quantum_shift = quantum_rate - p3_rate(dc);
    EXPECT_NEAR(quantum_shift, 0.25 * 6.0 * p.b4 * (-1.6), 1e-4);

    const oracle::FockSpec spec{60};
    const auto ops = oracle::build_operators(spec);
    const auto rho = oracle::initial_state(-1.6, 0.0, 0.6071, spec);
    const std::size_t n = spec.n_levels;
    const auto to_eigen = [](const oracle::Matrix& m) {
        return Eigen::Map<const Eigen::MatrixXcd>(m.data.data(), m.rows, m.cols);
    };
    const Eigen::MatrixXcd h = to_eigen(oracle::hamiltonian(ops, p));
    const Eigen::MatrixXcd pp = to_eigen(ops.p);
    const Eigen::MatrixXcd p3 = pp * pp * pp;
    Eigen::MatrixXcd p3_joint = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
    p3_joint.topLeftCorner(n, n) = p3;
    p3_joint.bottomRightCorner(n, n) = p3;
    const Eigen::MatrixXcd r = to_eigen(rho.rho);
    const std::complex<double> i(0, 1);
    const double fock_rate = (i * (h * p3_joint - p3_joint * h) * r).trace().real();
    EXPECT_NEAR(quantum_rate, fock_rate, 2e-3);
}

TEST(Rhs, HarmonicModesAreBitwiseIdentical) {
    const PhaseGrid g = default_grid();
    ModelParams q = set1();
    q.b4 = 0.0;
    ModelParams c = q;
    c.mode = Dynamics::classical;
    const SpinPhaseField w = busy_field(g);
    EXPECT_TRUE(bitwise_equal(rhs(w, q), rhs(w, c)));
    EXPECT_TRUE(bitwise_equal(rhs_terms(w, q).total, rhs_terms(w, c).total));
}

TEST(Rhs, ZeroAndLinearity) {
    const PhaseGrid g = default_grid();
    EXPECT_EQ(max_abs(rhs(SpinPhaseField(g), set1())), 0.0);
    const SpinPhaseField a = busy_field(g, 1);
    const SpinPhaseField b = busy_field(g, 2);
    const SpinPhaseField lhs = rhs(2.0 * a + (-0.5) * b, set1());
    const SpinPhaseField sum = 2.0 * rhs(a, set1()) + (-0.5) * rhs(b, set1());
    EXPECT_LT(max_diff(lhs, sum), 1e-12 * max_abs(sum));
}

TEST(Rhs, TraceIsConservedInstantaneously) {
    const PhaseGrid g = default_grid();
    for (Dynamics d : {Dynamics::classical, Dynamics::quantum}) {
        const SpinPhaseField out = rhs(busy_field(g), set1(0.4, d));
        EXPECT_LT(std::abs(trace_integral(out)), 1e-8);
    }
}

TEST(Rhs, HermiticityIsPreserved) {
    const PhaseGrid g = default_grid();
    const SpinPhaseField w = busy_field(g);
    ASSERT_LT(hermiticity_defect(w), 1e-300);
    const SpinPhaseField step = w + 1e-4 * rhs(w, set1());
    EXPECT_LE(hermiticity_defect(step), 1e-12);
    for (const auto& part : {rhs_terms(w, set1()).commutator_part,
                             rhs_terms(w, set1()).transport_part,
                             rhs_terms(w, set1()).quantum_part}) {
        EXPECT_LE(hermiticity_defect(part), 1e-15);
    }
}

TEST(Rhs, BasisCovariance) {
    const PhaseGrid g = default_grid();
    const SpinPhaseField w = busy_field(g);
    for (Dynamics d : {Dynamics::classical, Dynamics::quantum}) {
        const SpinPhaseField direct = to_basis(rhs(w, set1(0.4, d)), SpinBasis::sigma_x);
        const SpinPhaseField rotated = rhs(to_basis(w, SpinBasis::sigma_x), set1(0.4, d));
        EXPECT_EQ(rotated.basis(), SpinBasis::sigma_x);
        EXPECT_LT(max_diff(direct, rotated), 1e-13 * max_abs(direct));
    }
}

TEST(Rhs, TermsAddUp) {
    const PhaseGrid g = default_grid();
    const RhsTerms t = rhs_terms(busy_field(g), set1());
    const SpinPhaseField sum = (t.transport_part + t.quantum_part) + t.commutator_part;
    EXPECT_TRUE(bitwise_equal(sum, t.total));
}

TEST(Liouvillian, FusedPathIsBitwiseEqualToComposedTerms) {
    for (std::size_t n : {16u, 120u}) {
        const PhaseGrid g = build_grid(-8, 8, -8, 8, n, n + 3);
        const SpinPhaseField w = busy_field(g, 11);
        for (Dynamics d : {Dynamics::classical, Dynamics::quantum}) {
            for (double c : {0.0, 0.4}) {
                const ModelParams p = set1(c, d);
                EXPECT_TRUE(bitwise_equal(rhs(w, p), rhs_terms(w, p).total))
                    << n << " " << to_string(d) << " c=" << c;
                const SpinPhaseField x = to_basis(w, SpinBasis::sigma_x);
                EXPECT_TRUE(bitwise_equal(rhs(x, p), rhs_terms(x, p).total));
            }
        }
    }
}

TEST(Liouvillian, RejectsMismatchedBuffers) {
    const PhaseGrid g = build_grid(-1, 1, -1, 1, 8, 8);
    Liouvillian l(g, SpinBasis::sigma_z, set1());
    std::vector<double> in(8 * g.size()), out(8 * g.size() - 2);
    EXPECT_THROW(l.apply(in, out), std::invalid_argument);
}
