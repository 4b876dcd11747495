#include "nanorod/oracle.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "nanorod/integrator.hpp"

namespace nanorod::oracle {

namespace {

using MatX = Eigen::MatrixXcd;
using SparseX = Eigen::SparseMatrix<complex>;

MatX to_eigen(const Matrix& m) {
    return Eigen::Map<const MatX>(m.data.data(), static_cast<Eigen::Index>(m.rows),
                                  static_cast<Eigen::Index>(m.cols));
}

Matrix from_eigen(const MatX& m) {
    Matrix out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
    Eigen::Map<MatX>(out.data.data(), m.rows(), m.cols()) = m;
    return out;
}

Matrix truncate(const MatX& m, std::size_t n) {
    const auto k = static_cast<Eigen::Index>(n);
    return from_eigen(m.topLeftCorner(k, k));
}

// Hermite functions phi_0..phi_{n-1} at x, through the stable three-term recurrence.
void hermite_functions(double x, std::size_t n, double* out) {
    out[0] = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x);
    if (n > 1) out[1] = std::numbers::sqrt2 * x * out[0];
    for (std::size_t k = 2; k < n; ++k) {
        const double kd = static_cast<double>(k);
        out[k] = std::sqrt(2.0 / kd) * x * out[k - 1] - std::sqrt((kd - 1.0) / kd) * out[k - 2];
    }
}

// Beyond this distance from the origin every retained Hermite function is negligible.
double oscillator_support(std::size_t n_levels) {
    return std::sqrt(2.0 * static_cast<double>(n_levels) + 1.0) + 8.0;
}

}  // namespace

void FockSpec::validate() const {
    if (n_levels < 8) throw std::invalid_argument("FockSpec: n_levels must be at least 8");
}

FockOperators build_operators(const FockSpec& spec) {
    spec.validate();
    const std::size_t n = spec.n_levels;
    const auto m = static_cast<Eigen::Index>(n + 4);
    MatX a = MatX::Zero(m, m);
    for (Eigen::Index k = 1; k < m; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
    const MatX ad = a.adjoint();
    const MatX r = (a + ad) / std::numbers::sqrt2;
    const MatX p = complex(0.0, 1.0) * (ad - a) / std::numbers::sqrt2;
    const MatX r2 = r * r;
    FockOperators ops;
    ops.n_levels = n;
    ops.r = truncate(r, n);
    ops.p = truncate(p, n);
    ops.r2 = truncate(r2, n);
    ops.r4 = truncate(r2 * r2, n);
    ops.p2 = truncate(p * p, n);
    return ops;
}

Matrix hamiltonian(const FockOperators& ops, const ModelParams& params) {
    params.validate();
    const std::size_t n = ops.n_levels;
    const MatX h_osc = 0.5 * to_eigen(ops.p2) + (0.5 * params.b2) * to_eigen(ops.r2) +
                       (0.25 * params.b4) * to_eigen(ops.r4);
    const MatX r = to_eigen(ops.r);
    const auto k = static_cast<Eigen::Index>(n);
    MatX h = MatX::Zero(2 * k, 2 * k);
    h.topLeftCorner(k, k) = h_osc - params.c * r;
    h.bottomRightCorner(k, k) = h_osc + params.c * r;
    h.topRightCorner(k, k) = -params.omega * MatX::Identity(k, k);
    h.bottomLeftCorner(k, k) = -params.omega * MatX::Identity(k, k);
    return from_eigen(h);
}

complex DensityMatrix::trace() const {
    complex s = 0.0;
    for (std::size_t i = 0; i < rho.rows; ++i) s += rho(i, i);
    return s;
}

double DensityMatrix::hermiticity_defect() const {
    double d = 0.0;
    for (std::size_t j = 0; j < rho.cols; ++j) {
        for (std::size_t i = 0; i <= j; ++i) d = std::max(d, std::abs(rho(i, j) - std::conj(rho(j, i))));
    }
    return d;
}

double DensityMatrix::purity() const {
    const MatX m = to_eigen(rho);
    return (m * m).trace().real();
}

DensityMatrix initial_state(double r0, double p0, double delta_r, const FockSpec& spec) {
    spec.validate();
    if (!(delta_r > 0.0)) throw std::invalid_argument("initial_state: delta_r must be positive");
    const std::size_t n = spec.n_levels;
    const double half_span = std::max(oscillator_support(n), std::abs(r0) + 14.0 * delta_r);
    const double hx = std::min(0.01, delta_r / 20.0);
    const auto n_x = static_cast<std::size_t>(std::ceil(2.0 * half_span / hx)) + 1;
    const double amp = std::pow(2.0 * std::numbers::pi * delta_r * delta_r, -0.25);

    std::vector<complex> coeff(n);
    std::vector<double> phi(n);
    for (std::size_t s = 0; s < n_x; ++s) {
        const double x = -half_span + static_cast<double>(s) * hx;
        const double u = (x - r0) / (2.0 * delta_r);
        const complex psi = amp * std::exp(-u * u) * std::polar(1.0, p0 * x);
        const double w = (s == 0 || s + 1 == n_x) ? 0.5 * hx : hx;
        hermite_functions(x, n, phi.data());
        for (std::size_t k = 0; k < n; ++k) coeff[k] += w * phi[k] * psi;
    }
    double captured = 0.0;
    for (const auto& v : coeff) captured += std::norm(v);
    if (captured < 1.0 - 1e-6) {
        std::ostringstream os;
        os << "initial_state: " << n << " Fock levels capture only " << captured
           << " of the wavefunction norm";
        throw std::invalid_argument(os.str());
    }
    const double scale = 1.0 / std::sqrt(captured);
    for (auto& v : coeff) v *= scale;

    DensityMatrix out{n, Matrix(2 * n, 2 * n)};
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) out.rho(i, j) = coeff[i] * std::conj(coeff[j]);
    }
    return out;
}

complex oscillator_expectation(const DensityMatrix& rho, const Matrix& op) {
    const std::size_t n = rho.n_levels;
    if (op.rows != n || op.cols != n) {
        throw std::invalid_argument("oscillator_expectation: operator size mismatch");
    }
    complex s = 0.0;
    for (std::size_t blk = 0; blk < 2; ++blk) {
        const std::size_t o = blk * n;
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < n; ++i) s += op(j, i) * rho.rho(o + i, o + j);
        }
    }
    return s;
}

Matrix left_projector(const FockSpec& spec) {
    spec.validate();
    const std::size_t n = spec.n_levels;
    // Hermite functions and their slopes at the origin. phi_k(0) vanishes for
    // odd k and phi_k'(0) for even k.
    std::vector<double> value(n + 1, 0.0), slope(n, 0.0);
    value[0] = std::pow(std::numbers::pi, -0.25);
    for (std::size_t k = 2; k <= n; k += 2) {
        value[k] = -std::sqrt(static_cast<double>(k - 1) / static_cast<double>(k)) * value[k - 2];
    }
    for (std::size_t k = 1; k < n; k += 2) {
        slope[k] = std::sqrt(0.5 * static_cast<double>(k)) * value[k - 1] -
                   std::sqrt(0.5 * static_cast<double>(k + 1)) * value[k + 1];
    }
    // (phi_m phi_n' - phi_m' phi_n)' = 2 (m - n) phi_m phi_n, and the
    // integrand is odd when m + n is odd.
    Matrix left(n, n);
    for (std::size_t m = 0; m < n; ++m) {
        left(m, m) = 0.5;
        for (std::size_t k = m + 1; k < n; k += 2) {
            const double wronskian = value[m] * slope[k] - slope[m] * value[k];
            const double element = wronskian / (2.0 * (static_cast<double>(m) - static_cast<double>(k)));
            left(m, k) = element;
            left(k, m) = element;
        }
    }
    return left;
}

namespace {

class VonNeumann {
public:
    VonNeumann(const DensityMatrix& rho0, const ModelParams& params)
        : n_(rho0.n_levels), dim_(static_cast<Eigen::Index>(2 * n_)) {
        const FockOperators ops = build_operators({n_});
        const MatX h = to_eigen(hamiltonian(ops, params));
        h_ = h.sparseView();
        h_.makeCompressed();
        left_ = to_eigen(left_projector({n_})).real();
    }

    void derivative(std::span<const double> y, std::span<double> dy) {
        const Eigen::Map<const MatX> rho(reinterpret_cast<const complex*>(y.data()), dim_, dim_);
        Eigen::Map<MatX> out(reinterpret_cast<complex*>(dy.data()), dim_, dim_);
        k_.noalias() = h_ * rho;
        // -i [H, rho] = -i (H rho - (H rho)^dagger) for Hermitian rho.
        out = complex(0.0, -1.0) * (k_ - k_.adjoint());
    }

    Record observe(double t, std::span<const double> y) const {
        const Eigen::Map<const MatX> rho(reinterpret_cast<const complex*>(y.data()), dim_, dim_);
        const auto k = static_cast<Eigen::Index>(n_);
        Record r;
        r.t = t;
        const complex tr = rho.trace();
        r.norm = tr.real();
        r.sigma_z = (rho.topLeftCorner(k, k).trace() - rho.bottomRightCorner(k, k).trace()).real();
        double pl = 0.0;
        for (Eigen::Index blk = 0; blk < 2; ++blk) {
            const auto block = rho.block(blk * k, blk * k, k, k);
            pl += (left_.cast<complex>().cwiseProduct(block.transpose())).sum().real();
        }
        r.prob_left = pl;
        complex e = 0.0;
        for (Eigen::Index col = 0; col < h_.outerSize(); ++col) {
            for (SparseX::InnerIterator it(h_, col); it; ++it) e += it.value() * rho(col, it.row());
        }
        r.energy = e.real();
        r.hermiticity_defect = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
        double top = 0.0;
        for (Eigen::Index blk = 0; blk < 2; ++blk) {
            for (Eigen::Index lvl = k - 3; lvl < k; ++lvl) top += rho(blk * k + lvl, blk * k + lvl).real();
        }
        r.boundary_mass = tr.real() != 0.0 ? std::abs(top / tr.real()) : 0.0;
        return r;
    }

private:
    std::size_t n_;
    Eigen::Index dim_;
    SparseX h_;
    Eigen::MatrixXd left_;
    MatX k_;
};

}  // namespace

TimeSeries evolve(const DensityMatrix& rho0, const ModelParams& params,
                  const EvolveSettings& settings, DensityMatrix* final_state) {
    if (!(settings.dt > 0.0) || !(settings.t_end >= 0.0) || settings.observe_every < 1) {
        throw std::invalid_argument("oracle::evolve: need dt > 0, t_end >= 0, observe_every >= 1");
    }
    if (rho0.rho.rows != rho0.dimension() || rho0.rho.cols != rho0.dimension()) {
        throw std::invalid_argument("oracle::evolve: density matrix has the wrong shape");
    }
    VonNeumann vn(rho0, params);
    std::vector<double> y(2 * rho0.rho.data.size());
    std::copy_n(reinterpret_cast<const double*>(rho0.rho.data.data()), y.size(), y.begin());
    std::vector<double> next(y.size());
    CashKarpStepper stepper(y.size());
    const Derivative f = [&vn](double, std::span<const double> in, std::span<double> out) {
        vn.derivative(in, out);
    };

    TimeSeries series;
    const double trace0 = vn.observe(0.0, y).norm;
    const auto record = [&](double t) {
        series.records.push_back(vn.observe(t, y));
        const double drift = std::abs(series.records.back().norm - trace0);
        if (drift > settings.trace_drift_limit) {
            std::ostringstream os;
            os << "oracle trace drift " << drift << " at t = " << t;
            throw SolverAbort(os.str(), series);
        }
    };
    record(0.0);

    const double slack = 1e-9 * settings.dt;
    const auto full = static_cast<std::uint64_t>(std::floor((settings.t_end + slack) / settings.dt));
    const bool partial = settings.t_end - static_cast<double>(full) * settings.dt > slack;
    const std::uint64_t total = full + (partial ? 1 : 0);
    double t = 0.0;
    for (std::uint64_t step = 1; step <= total; ++step) {
        const bool last = step == total;
        const double h = (last && partial) ? settings.t_end - t : settings.dt;
        stepper.step(y, t, h, f, next);
        std::swap(y, next);
        t = (last && partial) ? settings.t_end : static_cast<double>(step) * settings.dt;
        if (step % settings.observe_every == 0 || last) record(t);
    }
    if (final_state != nullptr) {
        *final_state = rho0;
        std::copy_n(y.begin(), y.size(), reinterpret_cast<double*>(final_state->rho.data.data()));
    }
    return series;
}

SpinPhaseField wigner_transform(const DensityMatrix& rho, const PhaseGrid& grid) {
    const std::size_t n = rho.n_levels;
    const double dr = grid.dr();
    // z runs over multiples of dr, so R -+ z/2 always falls on a lattice of
    // spacing dr/2 that contains every R node. The lattice extends far enough
    // that every retained Hermite function has decayed at its ends.
    const double support = oscillator_support(n);
    const double reach = support + std::max(std::abs(grid.r_min()), std::abs(grid.r_max()));
    const auto l_max = static_cast<std::ptrdiff_t>(std::ceil(2.0 * reach / dr));
    const auto n_lat = static_cast<Eigen::Index>(2 * (grid.n_r() - 1) + 2 * l_max + 1);
    const auto k = static_cast<Eigen::Index>(n);

    Eigen::MatrixXd phi(n_lat, k);
    std::vector<double> row(n);
    for (Eigen::Index s = 0; s < n_lat; ++s) {
        const double x = grid.r_min() + static_cast<double>(s - l_max) * 0.5 * dr;
        hermite_functions(x, n, row.data());
        for (Eigen::Index q = 0; q < k; ++q) phi(s, q) = row[static_cast<std::size_t>(q)];
    }
    const MatX phi_c = phi.cast<complex>();

    const auto n_z = static_cast<std::size_t>(2 * l_max + 1);
    std::vector<complex> phase(grid.n_p() * n_z);
    for (std::size_t j = 0; j < grid.n_p(); ++j) {
        for (std::size_t l = 0; l < n_z; ++l) {
            const double z = static_cast<double>(static_cast<std::ptrdiff_t>(l) - l_max) * dr;
            phase[j * n_z + l] = std::polar(dr / (2.0 * std::numbers::pi), grid.p(j) * z);
        }
    }

    const MatX full = to_eigen(rho.rho);
    SpinPhaseField out(grid, SpinBasis::sigma_z);
    std::vector<complex> diag(n_z);
    for (std::size_t comp = 0; comp < 4; ++comp) {
        const Eigen::Index s = static_cast<Eigen::Index>(comp / 2) * k;
        const Eigen::Index sp = static_cast<Eigen::Index>(comp % 2) * k;
        // Position representation <x|rho_block|x'> on the lattice.
        const MatX pos = phi_c * full.block(s, sp, k, k) * phi_c.transpose();
        auto dst = out.component(comp);
        for (std::size_t i = 0; i < grid.n_r(); ++i) {
            const auto centre = static_cast<std::ptrdiff_t>(2 * i) + l_max;
            for (std::size_t l = 0; l < n_z; ++l) {
                const auto off = static_cast<std::ptrdiff_t>(l) - l_max;
                diag[l] = pos(centre - off, centre + off);
            }
            for (std::size_t j = 0; j < grid.n_p(); ++j) {
                complex acc = 0.0;
                const complex* ph = &phase[j * n_z];
                for (std::size_t l = 0; l < n_z; ++l) acc += ph[l] * diag[l];
                dst[grid.index(i, j)] = acc;
            }
        }
    }
    return out;
}

TrajectoryResult classical_trajectories(double r0, double p0, double delta_r,
                                        const ModelParams& params,
                                        const TrajectorySettings& settings) {
    params.validate();
    if (params.c != 0.0) {
        throw std::invalid_argument("classical_trajectories: only the decoupled case c = 0 is supported");
    }
    if (settings.n_samples < 10'000) {
        throw std::invalid_argument("classical_trajectories: need at least 1e4 samples");
    }
    if (!(delta_r > 0.0) || !(settings.dt > 0.0) || !(settings.t_end >= 0.0) ||
        settings.observe_every < 1) {
        throw std::invalid_argument("classical_trajectories: invalid settings");
    }
    const std::size_t m = settings.n_samples;
    // Layout: all positions, then all momenta.
    std::vector<double> y(2 * m);
    std::mt19937_64 rng(settings.seed);
    std::normal_distribution<double> pos(r0, delta_r);
    std::normal_distribution<double> mom(p0, 1.0 / (2.0 * delta_r));
    for (std::size_t s = 0; s < m; ++s) {
        y[s] = pos(rng);
        y[m + s] = mom(rng);
    }
    const double b2 = params.b2;
    const double b4 = params.b4;
    const Derivative f = [m, b2, b4](double, std::span<const double> in, std::span<double> out) {
        for (std::size_t s = 0; s < m; ++s) {
            const double r = in[s];
            out[s] = in[m + s];
            out[m + s] = -(b2 * r + b4 * r * r * r);
        }
    };

    TrajectoryResult result;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const auto record = [&](double t) {
        double left = 0.0;
        double energy = 0.0;
        for (std::size_t s = 0; s < m; ++s) {
            const double r = y[s];
            const double p = y[m + s];
            left += r < 0.0 ? 1.0 : (r == 0.0 ? 0.5 : 0.0);
            energy += 0.5 * p * p + potential(r, params);
        }
        const double md = static_cast<double>(m);
        const double pl = left / md;
        result.series.records.push_back({t, nan, pl, 1.0, energy / md, nan, nan});
        result.prob_left_stderr.push_back(std::sqrt(pl * (1.0 - pl) / md));
    };
    record(0.0);

    CashKarpStepper stepper(y.size());
    std::vector<double> next(y.size());
    const double slack = 1e-9 * settings.dt;
    const auto full = static_cast<std::uint64_t>(std::floor((settings.t_end + slack) / settings.dt));
    const bool partial = settings.t_end - static_cast<double>(full) * settings.dt > slack;
    const std::uint64_t total = full + (partial ? 1 : 0);
    double t = 0.0;
    for (std::uint64_t step = 1; step <= total; ++step) {
        const bool last = step == total;
        const double h = (last && partial) ? settings.t_end - t : settings.dt;
        stepper.step(y, t, h, f, next);
        std::swap(y, next);
        t = (last && partial) ? settings.t_end : static_cast<double>(step) * settings.dt;
        if (step % settings.observe_every == 0 || last) record(t);
    }
    return result;
}

}  // namespace nanorod::oracle
