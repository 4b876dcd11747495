#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "nanorod/grid.hpp"

namespace nanorod {

/// Basis in which the 2x2 spin block is written.
enum class SpinBasis {
    sigma_z,  ///< charge basis; the initial excited state is diag(1, 0)
    sigma_x,  ///< eigenbasis of the tunnelling term
};

std::string_view to_string(SpinBasis basis);

/// 2x2 complex matrix per phase-space node: the partially Wigner-transformed
/// density matrix.
///
/// Storage is one contiguous buffer of four component blocks (W00, W01, W10,
/// W11), each n_r * n_p complex values in grid order. `flat()` exposes the
/// whole thing as doubles for the time stepper.
class SpinPhaseField {
public:
    static constexpr std::size_t components = 4;

    SpinPhaseField() = default;
    explicit SpinPhaseField(const PhaseGrid& grid, SpinBasis basis = SpinBasis::sigma_z);

    const PhaseGrid& grid() const { return grid_; }
    SpinBasis basis() const { return basis_; }
    void set_basis(SpinBasis b) { basis_ = b; }

    /// Component k in row-major (a, b) order: 0 = W00, 1 = W01, 2 = W10, 3 = W11.
    std::span<complex> component(std::size_t k);
    std::span<const complex> component(std::size_t k) const;
    complex& at(std::size_t k, std::size_t i, std::size_t j);
    const complex& at(std::size_t k, std::size_t i, std::size_t j) const;

    ScalarField scalar(std::size_t k) const;
    void set_scalar(std::size_t k, const ScalarField& f);
    /// Sum of the diagonal components, W00 + W11.
    ScalarField trace() const;

    std::span<double> flat();
    std::span<const double> flat() const;

    SpinPhaseField& operator+=(const SpinPhaseField& other);
    SpinPhaseField& operator*=(double a);
    friend SpinPhaseField operator*(double a, SpinPhaseField w) { return w *= a; }
    friend SpinPhaseField operator+(SpinPhaseField a, const SpinPhaseField& b) { return a += b; }

    bool same_layout(const SpinPhaseField& other) const {
        return grid_ == other.grid_ && basis_ == other.basis_;
    }

private:
    PhaseGrid grid_;
    SpinBasis basis_ = SpinBasis::sigma_z;
    std::vector<complex> data_;
};

/// Excited spin times a minimum-uncertainty Gaussian:
/// diag(1,0) (1/pi) exp(-(R-R0)^2 / (2 dR^2)) exp(-2 dR^2 (P-P0)^2), in the sigma_z basis.
///
/// Requires delta_r > 0 and (r0, p0) at least 4 * delta_r inside the grid on
/// both axes. If the grid clips the tails by more than 1e-6 in norm the field
/// is rescaled to unit norm once and a warning is written to std::clog.
SpinPhaseField init_coherent_excited(const PhaseGrid& grid, double r0, double p0, double delta_r);

/// Phase-space integral of the spin trace, complex so the imaginary residue can be inspected.
complex trace_integral(const SpinPhaseField& w);
/// Real part of trace_integral.
double norm(const SpinPhaseField& w);

/// max|W10 - conj(W01)| + max|Im W00| + max|Im W11| over all nodes.
double hermiticity_defect(const SpinPhaseField& w);

/// Conjugates every node by the Hadamard rotation that maps sigma_x to sigma_z.
/// The operation is its own inverse; requesting the current basis returns a copy.
SpinPhaseField to_basis(const SpinPhaseField& w, SpinBasis target);

// Snapshot format: magic "NRWF", u32 version, u64 n_r, u64 n_p, f64 r_min,
// r_max, p_min, p_max, u32 basis, then for each node in row-major (R, P)
// order the four components W00 W01 W10 W11 as (re, im) f64 pairs. Native
// byte order.
void write_field(std::ostream& out, const SpinPhaseField& w);
/// Throws std::runtime_error on a malformed or truncated stream.
SpinPhaseField read_field(std::istream& in);

}  // namespace nanorod
