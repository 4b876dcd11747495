#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "nanorod/grid.hpp"
#include "nanorod/model.hpp"
#include "nanorod/observables.hpp"
#include "nanorod/state.hpp"

namespace nanorod::oracle {

// Reference solvers that share no code with the phase-space discretization:
// a truncated Fock-basis von Neumann integrator and, for the decoupled
// classical limit, an ensemble of phase-space trajectories.

struct FockSpec {
    std::size_t n_levels = 60;

    std::size_t dimension() const { return 2 * n_levels; }
    /// Throws std::invalid_argument for fewer than 8 levels.
    void validate() const;
};

/// Dense column-major complex matrix.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<complex> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}

    complex& operator()(std::size_t i, std::size_t j) { return data[j * rows + i]; }
    const complex& operator()(std::size_t i, std::size_t j) const { return data[j * rows + i]; }
};

/// Oscillator operators in the truncated ladder basis |0>..|n-1>.
/// Powers are formed in a larger basis before truncation, so R^4 and P^2 are
/// exact matrix elements rather than products of truncated matrices.
struct FockOperators {
    std::size_t n_levels = 0;
    Matrix r;   ///< (a + a^dagger) / sqrt(2)
    Matrix p;   ///< i (a^dagger - a) / sqrt(2)
    Matrix r2;
    Matrix r4;
    Matrix p2;
};

FockOperators build_operators(const FockSpec& spec);

/// Matrix elements <m| theta(-R) |n> of the left-half-line projector between
/// Hermite functions, exact for the truncated basis. Off-diagonal elements
/// follow from the Wronskian of phi_m and phi_n at R = 0.
Matrix left_projector(const FockSpec& spec);

/// Joint Hamiltonian P^2/2 + V(R) - omega sx - c R sz on spin (x) oscillator,
/// spin-major: index = s * n_levels + k with s = 0 the sigma_z excited state.
Matrix hamiltonian(const FockOperators& ops, const ModelParams& params);

/// Joint density matrix in the same spin-major ordering.
struct DensityMatrix {
    std::size_t n_levels = 0;
    Matrix rho;

    std::size_t dimension() const { return 2 * n_levels; }
    complex trace() const;
    /// max |rho - rho^dagger| over entries.
    double hermiticity_defect() const;
    double purity() const;
};

/// |psi><psi| (x) diag(1, 0), with psi(R) ~ exp(-(R-R0)^2 / (4 dR^2) + i P0 R)
/// projected onto the Hermite functions and renormalized. Throws
/// std::invalid_argument if the projection keeps less than 1 - 1e-6 of the
/// wavefunction's norm.
DensityMatrix initial_state(double r0, double p0, double delta_r, const FockSpec& spec);

/// <psi| op |psi> on the oscillator alone, for moment checks on the
/// oscillator factor of the initial state.
complex oscillator_expectation(const DensityMatrix& rho, const Matrix& op);

struct EvolveSettings {
    double dt = 1e-3;
    double t_end = 5.0;
    std::uint64_t observe_every = 10;
    double trace_drift_limit = 1e-6;
};

/// Integrates d rho/dt = -i [H, rho] with the Cash-Karp stepper used for the
/// phase-space field. Records carry sigma_z, the left-well probability from
/// left_projector, trace, <H>, the Hermiticity defect and, in the
/// boundary_mass column, the population of the top three Fock levels.
/// Throws SolverAbort when the trace drifts beyond the limit.
TimeSeries evolve(const DensityMatrix& rho0, const ModelParams& params,
                  const EvolveSettings& settings, DensityMatrix* final_state = nullptr);

/// Partial Wigner transform of the oscillator factor by direct quadrature:
/// W(R, P) = (1/2 pi) integral dz exp(i P z) <R - z/2| rho |R + z/2>
/// for each spin block. Returns a sigma_z-basis field on `grid`.
SpinPhaseField wigner_transform(const DensityMatrix& rho, const PhaseGrid& grid);

struct TrajectorySettings {
    std::size_t n_samples = 100'000;
    double dt = 5e-3;
    double t_end = 10.0;
    std::uint64_t observe_every = 10;
    std::uint64_t seed = 12345;
};

struct TrajectoryResult {
    /// prob_left is the sample fraction at R < 0 and energy the ensemble mean;
    /// norm is 1; the spin and field diagnostics are NaN.
    TimeSeries series;
    /// Binomial standard error of each prob_left entry.
    std::vector<double> prob_left_stderr;
};

/// Samples (R, P) from the Gaussian Wigner density of the initial state and
/// moves every sample along R' = P, P' = -V'(R). Only meaningful for c = 0,
/// where the spin decouples; throws std::invalid_argument otherwise or for
/// fewer than 1e4 samples.
TrajectoryResult classical_trajectories(double r0, double p0, double delta_r,
                                        const ModelParams& params,
                                        const TrajectorySettings& settings);

}  // namespace nanorod::oracle
