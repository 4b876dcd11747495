#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "nanorod/integrator.hpp"
#include "nanorod/observables.hpp"

using namespace nanorod;

namespace {

constexpr double kDeltaR = 0.6071;

PhaseGrid default_grid() { return build_grid(-8, 8, -8, 8, 120, 120); }
// 161 nodes put one exactly on R = 0.
PhaseGrid centred_grid() { return build_grid(-8, 8, -8, 8, 161, 161); }

SpinPhaseField excited(const PhaseGrid& g, double r0 = -1.6) {
    return init_coherent_excited(g, r0, 0.0, kDeltaR);
}

double gaussian_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

ModelParams set1(double c = 0.4) { return {0.6, c, -1.0, 0.5, Dynamics::quantum}; }

// Fills every node with f(R, P) times the given spin matrix.
template <class F>
SpinPhaseField fill(const PhaseGrid& g, F&& f, complex s00, complex s01, complex s10, complex s11) {
    SpinPhaseField w(g);
    for (std::size_t i = 0; i < g.n_r(); ++i) {
        for (std::size_t j = 0; j < g.n_p(); ++j) {
            const double v = f(g.r(i), g.p(j));
            w.at(0, i, j) = v * s00;
            w.at(1, i, j) = v * s01;
            w.at(2, i, j) = v * s10;
            w.at(3, i, j) = v * s11;
        }
    }
    return w;
}

PositionProbability profile(const PhaseGrid& g, std::vector<double> v) { return {g, std::move(v)}; }

}  // namespace

TEST(SigmaZ, ExcitedAndUnpolarized) {
    EXPECT_NEAR(sigma_z_expectation(excited(default_grid())), 1.0, 1e-6);
    const auto gauss = [](double r, double p) { return std::exp(-r * r - p * p) / std::numbers::pi; };
    const SpinPhaseField half = fill(default_grid(), gauss, 0.5, 0.0, 0.0, 0.5);
    EXPECT_EQ(sigma_z_expectation(half), 0.0);
    EXPECT_NEAR(norm(half), 1.0, 1e-12);
}

TEST(SigmaZ, ImaginaryPartIsOnlyRoundOff) {
    const SpinPhaseField w = to_basis(excited(default_grid()), SpinBasis::sigma_x);
    EXPECT_LE(std::abs(sigma_z_integral(w).imag()), 1e-10);
    EXPECT_NEAR(sigma_z_expectation(w), sigma_z_expectation(excited(default_grid())), 1e-14);
}

TEST(SigmaZ, DecoupledHalfPeriodIsMinusOne) {
    // Pure spin precession: no coupling, so the field only needs to carry the spin.
    const PhaseGrid g = build_grid(-8, 8, -8, 8, 80, 80);
    IntegratorConfig c;
    c.dt = 5e-4;
    c.t_end = std::numbers::pi / 1.2;
    c.observe_every = 1'000'000;
    const TimeSeries s = evolve(excited(g), set1(0.0), c);
    EXPECT_NEAR(s.records.back().t, std::numbers::pi / 1.2, 1e-12);
    EXPECT_NEAR(s.records.back().sigma_z, -1.0, 1e-3);
}

TEST(ProbLeft, InitialStateIsTheGaussianCdf) {
    const double phi = gaussian_cdf(1.6 / kDeltaR);
    // With a node on R = 0 the half-weighted sum is a trapezoid rule over
    // [-8, 0]; its leading error is h^2 / 12 * f'(0) for the R marginal f.
    const double h = 0.1;
    const double f0 = std::exp(-1.6 * 1.6 / (2 * kDeltaR * kDeltaR)) / std::sqrt(2 * std::numbers::pi) / kDeltaR;
    const double df0 = -1.6 / (kDeltaR * kDeltaR) * f0;
    const double trapezoid = phi + h * h / 12.0 * df0;
    EXPECT_NEAR(prob_left(excited(centred_grid())), trapezoid, 1e-6);
    EXPECT_NEAR(prob_left(excited(centred_grid())), 0.99581, 1e-4);
    // Without a node on R = 0 the split cell costs a few 1e-4.
    EXPECT_NEAR(prob_left(excited(default_grid())), phi, 1e-3);
}

TEST(ProbLeft, SymmetricFieldIsHalfTheNorm) {
    for (const PhaseGrid& g : {default_grid(), centred_grid()}) {
        const auto f = [](double r, double p) { return std::exp(-0.5 * r * r - p * p) * (1 + 0.1 * r * r); };
        const SpinPhaseField w = fill(g, f, 0.7, complex(0.1, 0.2), complex(0.1, -0.2), 0.3);
        EXPECT_NEAR(prob_left(w), 0.5 * norm(w), 1e-14);
    }
}

TEST(ProbLeft, RightSupportedFieldHasNoLeftMass) {
    EXPECT_LT(prob_left(excited(centred_grid(), 3.5)), 1e-8);
}

TEST(ProbLeft, LeftAndRightPartitionTheNorm) {
    const SpinPhaseField w = excited(default_grid(), -0.3);
    const PositionProbability p = position_probability(w);
    double right = 0.0;
    for (std::size_t i = 0; i < p.values.size(); ++i) {
        if (p.grid.r(i) > 0) right += p.grid.r_weight(i) * p.values[i];
    }
    EXPECT_NEAR(prob_left(w) + right, norm(w), 1e-12);
}

TEST(ProbLeft, RejectsOneSidedGrid) {
    const PhaseGrid g = build_grid(1, 9, -8, 8, 40, 40);
    EXPECT_THROW(prob_left(SpinPhaseField(g)), std::invalid_argument);
}

TEST(PositionProbability, InitialStateIsTheGaussianMarginal) {
    const PositionProbability p = position_probability(excited(default_grid()));
    ASSERT_EQ(p.values.size(), 120u);
    double worst = 0.0;
    for (std::size_t i = 0; i < p.values.size(); ++i) {
        const double x = p.grid.r(i) + 1.6;
        const double expect =
            std::exp(-x * x / (2 * kDeltaR * kDeltaR)) / std::sqrt(2 * std::numbers::pi * kDeltaR * kDeltaR);
        worst = std::max(worst, std::abs(p.values[i] - expect));
    }
    EXPECT_LT(worst, 1e-4);
}

TEST(PositionProbability, SpinRotationAndZeroField) {
    SpinPhaseField w = excited(default_grid());
    w.component(1)[500] = complex(0.01, 0.02);
    w.component(2)[500] = complex(0.01, -0.02);
    const PositionProbability a = position_probability(w);
    const PositionProbability b = position_probability(to_basis(w, SpinBasis::sigma_x));
    for (std::size_t i = 0; i < a.values.size(); ++i) EXPECT_NEAR(a.values[i], b.values[i], 1e-15);
    for (double v : position_probability(SpinPhaseField(default_grid())).values) EXPECT_EQ(v, 0.0);
}

TEST(PositionProbability, IntegratesToTheNorm) {
    const SpinPhaseField w = excited(default_grid());
    const PositionProbability p = position_probability(w);
    double s = 0.0;
    for (std::size_t i = 0; i < p.values.size(); ++i) s += p.grid.r_weight(i) * p.values[i];
    EXPECT_NEAR(s, norm(w), 1e-12);
}

TEST(TimeAverage, SingleMirrorAndConstantSnapshots) {
    const PhaseGrid g = centred_grid();
    const PositionProbability a = position_probability(excited(g, -1.6));
    const PositionProbability b = position_probability(excited(g, 1.6));

    const std::vector<PositionProbability> one{a};
    EXPECT_TRUE(time_averaged_position_probability(std::span<const PositionProbability>(one)) == a);

    const std::vector<PositionProbability> mirror{a, b};
    const PositionProbability avg = time_averaged_position_probability(std::span<const PositionProbability>(mirror));
    for (std::size_t i = 0; i < avg.values.size(); ++i) {
        EXPECT_NEAR(avg.values[i], avg.values[avg.values.size() - 1 - i], 1e-15);
    }
    EXPECT_NEAR(asymmetry(avg), 0.0, 1e-14);

    const std::vector<ProbSnapshot> constant{{0.0, a}, {0.5, a}, {1.0, a}};
    const PositionProbability c = time_averaged_position_probability(std::span<const ProbSnapshot>(constant));
    for (std::size_t i = 0; i < c.values.size(); ++i) EXPECT_NEAR(c.values[i], a.values[i], 1e-15);
}

TEST(TimeAverage, RejectsEmpty) {
    const std::vector<ProbSnapshot> none;
    EXPECT_THROW(time_averaged_position_probability(std::span<const ProbSnapshot>(none)),
                 std::invalid_argument);
}

TEST(Asymmetry, Examples) {
    const PhaseGrid g = centred_grid();
    std::vector<double> sym(g.n_r()), left(g.n_r(), 0.0);
    for (std::size_t i = 0; i < g.n_r(); ++i) {
        sym[i] = std::exp(-g.r(i) * g.r(i));
        if (g.r(i) < -1.0) left[i] = 1.0;
    }
    EXPECT_NEAR(asymmetry(profile(g, sym)), 0.0, 1e-15);
    EXPECT_DOUBLE_EQ(asymmetry(profile(g, left)), 1.0);
    // Left and right masses partition the norm, so the asymmetry is 2 Prob_L - 1.
    const SpinPhaseField w = excited(g);
    const double a = asymmetry(position_probability(w));
    EXPECT_NEAR(a, 2 * prob_left(w) / norm(w) - 1, 1e-12);
    EXPECT_NEAR(a, 0.99162, 2e-4);
    EXPECT_THROW(asymmetry(profile(g, std::vector<double>(g.n_r(), 0.0))), std::domain_error);
}

TEST(Energy, GaussianMomentsWithoutSpinTerms) {
    ModelParams p = set1(0.0);
    p.omega = 0.0;
    const double s2 = kDeltaR * kDeltaR;
    const double r0 = -1.6;
    const double r2 = r0 * r0 + s2;
    const double r4 = r0 * r0 * r0 * r0 + 6 * r0 * r0 * s2 + 3 * s2 * s2;
    const double expect = 1.0 / (8 * s2) + 0.5 * p.b2 * r2 + 0.25 * p.b4 * r4;
    EXPECT_NEAR(energy_expectation(excited(default_grid()), p), expect, 1e-8);
}

TEST(Energy, SpinTermsOfTheExcitedState) {
    // <-omega sx> vanishes and <-c R sz> = -c R0 for the excited projector.
    ModelParams bare = set1(0.0);
    bare.omega = 0.0;
    const SpinPhaseField w = excited(default_grid());
    EXPECT_NEAR(energy_expectation(w, set1(0.4)) - energy_expectation(w, bare), 0.4 * 1.6, 1e-8);
    EXPECT_EQ(energy_expectation(SpinPhaseField(default_grid()), set1()), 0.0);
}

TEST(Energy, InvariantUnderBasisChange) {
    SpinPhaseField w = excited(default_grid());
    for (std::size_t n = 0; n < w.grid().size(); ++n) {
        w.component(1)[n] = complex(0.2, 0.1) * w.component(0)[n];
        w.component(2)[n] = complex(0.2, -0.1) * w.component(0)[n];
    }
    EXPECT_NEAR(energy_expectation(to_basis(w, SpinBasis::sigma_x), set1()), energy_expectation(w, set1()),
                1e-12);
}

TEST(BoundaryMass, Examples) {
    EXPECT_LE(boundary_mass(excited(default_grid())), 1e-8);
    EXPECT_EQ(boundary_mass(SpinPhaseField(default_grid())), 0.0);
    // Uniform field: the three-node frame holds 1 - ((n - 6) / (n - 1))^2 of the area.
    for (std::size_t n : {20u, 120u}) {
        const PhaseGrid g = build_grid(-8, 8, -8, 8, n, n);
        const SpinPhaseField w = fill(g, [](double, double) { return 1.0; }, 1.0, 0.0, 0.0, 0.0);
        const double inner = static_cast<double>(n - 6) / static_cast<double>(n - 1);
        EXPECT_NEAR(boundary_mass(w), 1.0 - inner * inner, 1e-14) << n;
    }
}

TEST(Observe, RecordCollectsEveryObservable) {
    const SpinPhaseField w = excited(default_grid());
    const Record r = observe(0.25, w, set1());
    EXPECT_EQ(r.t, 0.25);
    EXPECT_EQ(r.sigma_z, sigma_z_expectation(w));
    EXPECT_EQ(r.prob_left, prob_left(w));
    EXPECT_EQ(r.norm, norm(w));
    EXPECT_EQ(r.energy, energy_expectation(w, set1()));
    EXPECT_EQ(r.hermiticity_defect, hermiticity_defect(w));
    EXPECT_EQ(r.boundary_mass, boundary_mass(w));
    EXPECT_LE(std::abs(r.sigma_z), r.norm + 1e-6);
}

TEST(RabiEnvelope, PureCosine) {
    TimeSeries s;
    for (int k = 0; k <= 1000; ++k) {
        Record r;
        r.t = 0.01 * k;
        r.sigma_z = 0.3 * std::cos(1.2 * r.t);
        s.records.push_back(r);
    }
    const double period = std::numbers::pi / 0.6;
    EXPECT_NEAR(rabi_envelope(s, 0.0, 10.0, period), 0.6, 1e-3);
    // A window longer than the interval uses the whole interval once.
    EXPECT_NEAR(rabi_envelope(s, 0.0, 1.0, period), 0.3 * (1 - std::cos(1.2)), 1e-12);
    EXPECT_THROW(rabi_envelope(s, 20.0, 30.0, period), std::invalid_argument);
}

TEST(RabiEnvelope, SmallerForDampedSignal) {
    TimeSeries steady, damped;
    for (int k = 0; k <= 1000; ++k) {
        Record r;
        r.t = 0.01 * k;
        r.sigma_z = std::cos(1.2 * r.t);
        steady.records.push_back(r);
        r.sigma_z *= std::exp(-0.2 * r.t);
        damped.records.push_back(r);
    }
    const double period = std::numbers::pi / 0.6;
    EXPECT_LT(rabi_envelope(damped, 5.0, 10.0, period), rabi_envelope(steady, 5.0, 10.0, period));
}

TEST(Csv, SeventeenDigitsRoundTrip) {
    TimeSeries s;
    for (int k = 0; k < 5; ++k) {
        Record r;
        r.t = 0.1 * k;
        r.sigma_z = std::cos(1.0 / 3.0 + k);
        r.prob_left = 1.0 / 7.0;
        r.norm = 1.0 - 1e-13 * k;
        r.energy = -std::numbers::pi;
        r.hermiticity_defect = 3e-300;
        r.boundary_mass = std::nextafter(1e-9, 1.0);
        s.records.push_back(r);
    }
    std::stringstream buf;
    write_csv(buf, s);
    std::string header;
    std::getline(buf, header);
    EXPECT_EQ(header, "t,sigma_z,prob_left,norm,energy,hermiticity_defect,boundary_mass");
    std::string first;
    std::getline(buf, first);
    // 1/7 printed with 17 significant digits.
    EXPECT_NE(first.find(",0.14285714285714285,"), std::string::npos) << first;
    buf.clear();
    buf.seekg(0);
    const TimeSeries back = read_csv(buf);
    EXPECT_TRUE(back == s);
}

TEST(Csv, SourceColumnIsWrittenAndIgnored) {
    TimeSeries s;
    Record r;
    r.norm = 1.0;
    s.records.push_back(r);
    std::stringstream buf;
    write_csv(buf, s, std::string("fock"));
    EXPECT_NE(buf.str().find(",source\n"), std::string::npos);
    EXPECT_NE(buf.str().find(",fock\n"), std::string::npos);
    const TimeSeries back = read_csv(buf);
    EXPECT_TRUE(back == s);
}

TEST(Csv, PositionFileHasTwoColumns) {
    const PhaseGrid g = build_grid(-1, 1, -1, 1, 8, 8);
    std::vector<double> v(8);
    for (std::size_t i = 0; i < 8; ++i) v[i] = 0.1 * static_cast<double>(i);
    std::stringstream buf;
    write_position_csv(buf, profile(g, v));
    std::string line;
    std::getline(buf, line);
    EXPECT_EQ(line, "R,value");
    int rows = 0;
    while (std::getline(buf, line)) {
        EXPECT_EQ(std::count(line.begin(), line.end(), ','), 1) << line;
        ++rows;
    }
    EXPECT_EQ(rows, 8);
}
