#pragma once

#include <string_view>
#include <utility>

namespace nanorod {

/// Which terms of the Moyal expansion drive the oscillator.
enum class Dynamics {
    classical,  ///< first-order (Poisson bracket) term only: hybrid quantum-classical motion
    quantum,    ///< first- and third-order terms: exact for the quartic potential
};

std::string_view to_string(Dynamics mode);
/// Throws std::invalid_argument for anything other than "classical" or "quantum".
Dynamics parse_dynamics(std::string_view text);

/// Dimensionless model H = P^2/2 + (b2/2) R^2 + (b4/4) R^4 - omega sx - c R sz, with hbar = 1.
struct ModelParams {
    double omega = 0.0;
    double c = 0.0;
    double b2 = 0.0;
    double b4 = 0.0;
    Dynamics mode = Dynamics::quantum;

    static constexpr double hbar = 1.0;

    /// Throws std::invalid_argument unless omega >= 0, b4 >= 0 and all values are finite.
    void validate() const;

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// SI-unit description of the rod and the charge qubit.
struct DimensionfulParams {
    double omega0 = 0.0;       ///< fundamental frequency [1/s]
    double mass = 0.0;         ///< [kg]
    double b2_prime = 0.0;     ///< [kg/s^2], negative past the critical strain
    double b4_prime = 0.0;     ///< [kg/(m^2 s^2)]
    double c_prime = 0.0;      ///< coupling [kg m / s^2]
    double omega_prime = 0.0;  ///< tunnelling frequency [1/s]
    double hbar_si = 1.054571817e-34;
};

/// V(R) = (b2/2) R^2 + (b4/4) R^4.
double potential(double r, const ModelParams& params);

struct PotentialDerivs {
    double first;  ///< V'(R) = b2 R + b4 R^3
    double third;  ///< V'''(R) = 6 b4 R
};
PotentialDerivs potential_derivs(double r, const ModelParams& params);

/// Left and right minima +-sqrt(-b2/b4) of the double well. Requires b2 < 0 and b4 > 0.
std::pair<double, double> well_minima(const ModelParams& params);

/// Eigenvalues V(R) -+ sqrt(omega^2 + c^2 R^2) of the spin block at fixed R, lower first.
std::pair<double, double> adiabatic_surfaces(double r, const ModelParams& params);

/// b2 = (critical - strain) / critical.
double strain_to_b2(double strain, double critical_strain);

ModelParams nondimensionalize(const DimensionfulParams& d, Dynamics mode = Dynamics::quantum);
/// Inverse of nondimensionalize given the scales (omega0, mass, hbar_si) in `scales`.
DimensionfulParams dimensionalize(const ModelParams& p, const DimensionfulParams& scales);

}  // namespace nanorod
