#include "nanorod/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nanorod {

std::string_view to_string(Dynamics mode) {
    return mode == Dynamics::classical ? "classical" : "quantum";
}

Dynamics parse_dynamics(std::string_view text) {
    if (text == "classical") return Dynamics::classical;
    if (text == "quantum") return Dynamics::quantum;
    throw std::invalid_argument("unknown dynamics mode '" + std::string(text) +
                                "' (expected classical or quantum)");
}

void ModelParams::validate() const {
    std::string problems;
    const auto finite = [&](double v, const char* name) {
        if (!std::isfinite(v)) problems += std::string("\n") + name + " must be finite";
        return std::isfinite(v);
    };
    if (finite(omega, "omega") && omega < 0.0) problems += "\nomega must be >= 0";
    finite(c, "c");
    finite(b2, "b2");
    if (finite(b4, "b4") && b4 < 0.0) problems += "\nb4 must be >= 0 (confining quartic)";
    if (!problems.empty()) throw std::invalid_argument("invalid model parameters:" + problems);
}

double potential(double r, const ModelParams& params) {
    const double r2 = r * r;
    return 0.5 * params.b2 * r2 + 0.25 * params.b4 * r2 * r2;
}

PotentialDerivs potential_derivs(double r, const ModelParams& params) {
    return {params.b2 * r + params.b4 * r * r * r, 6.0 * params.b4 * r};
}

std::pair<double, double> well_minima(const ModelParams& params) {
    if (!(params.b2 < 0.0)) {
        throw std::invalid_argument("well_minima: b2 >= 0 gives a single well");
    }
    if (!(params.b4 > 0.0)) {
        throw std::invalid_argument("well_minima: b4 must be positive");
    }
    const double r = std::sqrt(-params.b2 / params.b4);
    return {-r, r};
}

std::pair<double, double> adiabatic_surfaces(double r, const ModelParams& params) {
    const double v = potential(r, params);
    const double gap = std::sqrt(params.omega * params.omega + params.c * params.c * r * r);
    return {v - gap, v + gap};
}

double strain_to_b2(double strain, double critical_strain) {
    if (!(critical_strain > 0.0)) {
        throw std::invalid_argument("critical strain must be positive");
    }
    return (critical_strain - strain) / critical_strain;
}

namespace {

void check_scales(const DimensionfulParams& d) {
    if (!(d.omega0 > 0.0) || !(d.mass > 0.0) || !(d.hbar_si > 0.0)) {
        throw std::invalid_argument("omega0, mass and hbar must be positive");
    }
}

}  // namespace

ModelParams nondimensionalize(const DimensionfulParams& d, Dynamics mode) {
    check_scales(d);
    const double w = d.omega0;
    const double m = d.mass;
    ModelParams p;
    p.omega = d.omega_prime / w;
    p.c = d.c_prime / (w * std::sqrt(m * w * d.hbar_si));
    p.b2 = d.b2_prime / (m * w * w);
    p.b4 = d.hbar_si * d.b4_prime / (m * m * w * w * w);
    p.mode = mode;
    return p;
}

DimensionfulParams dimensionalize(const ModelParams& p, const DimensionfulParams& scales) {
    check_scales(scales);
    const double w = scales.omega0;
    const double m = scales.mass;
    DimensionfulParams d = scales;
    d.omega_prime = p.omega * w;
    d.c_prime = p.c * w * std::sqrt(m * w * scales.hbar_si);
    d.b2_prime = p.b2 * m * w * w;
    d.b4_prime = p.b4 * m * m * w * w * w / scales.hbar_si;
    return d;
}

}  // namespace nanorod
