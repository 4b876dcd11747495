#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace nanorod {

using complex = std::complex<double>;

/// Uniform rectangular grid over the (R, P) phase plane.
///
/// Nodes are stored row-major over R then P: node (i, j) sits at flat index
/// i * n_p + j, so the momentum axis is the contiguous one.
class PhaseGrid {
public:
    PhaseGrid() = default;

    double r_min() const { return r_min_; }
    double r_max() const { return r_max_; }
    double p_min() const { return p_min_; }
    double p_max() const { return p_max_; }
    std::size_t n_r() const { return n_r_; }
    std::size_t n_p() const { return n_p_; }
    double dr() const { return dr_; }
    double dp() const { return dp_; }
    std::size_t size() const { return n_r_ * n_p_; }

    double r(std::size_t i) const { return r_min_ + static_cast<double>(i) * dr_; }
    double p(std::size_t j) const { return p_min_ + static_cast<double>(j) * dp_; }
    std::size_t index(std::size_t i, std::size_t j) const { return i * n_p_ + j; }

    /// Trapezoidal weight of node (i, j) including the dr*dp cell area.
    double weight(std::size_t i, std::size_t j) const { return r_weight(i) * p_weight(j); }
    double r_weight(std::size_t i) const { return (i == 0 || i + 1 == n_r_) ? 0.5 * dr_ : dr_; }
    double p_weight(std::size_t j) const { return (j == 0 || j + 1 == n_p_) ? 0.5 * dp_ : dp_; }

    friend bool operator==(const PhaseGrid&, const PhaseGrid&) = default;

private:
    friend PhaseGrid build_grid(double, double, double, double, std::size_t, std::size_t);

    double r_min_ = 0.0;
    double r_max_ = 0.0;
    double p_min_ = 0.0;
    double p_max_ = 0.0;
    std::size_t n_r_ = 0;
    std::size_t n_p_ = 0;
    double dr_ = 0.0;
    double dp_ = 0.0;
};

/// Throws std::invalid_argument on non-finite or unordered bounds and on
/// fewer than 8 nodes per axis.
PhaseGrid build_grid(double r_min, double r_max, double p_min, double p_max, std::size_t n_r,
                     std::size_t n_p);

/// One complex value per grid node.
struct ScalarField {
    PhaseGrid grid;
    std::vector<complex> values;

    ScalarField() = default;
    explicit ScalarField(const PhaseGrid& g) : grid(g), values(g.size()) {}

    complex& at(std::size_t i, std::size_t j) { return values[grid.index(i, j)]; }
    const complex& at(std::size_t i, std::size_t j) const { return values[grid.index(i, j)]; }
};

/// Samples f(R, P) on every node.
template <class F>
ScalarField sample(const PhaseGrid& grid, F&& f) {
    ScalarField out(grid);
    for (std::size_t i = 0; i < grid.n_r(); ++i) {
        for (std::size_t j = 0; j < grid.n_p(); ++j) {
            out.at(i, j) = complex(f(grid.r(i), grid.p(j)));
        }
    }
    return out;
}

// Derivative operators. Interior nodes use 4th-order central stencils; values
// beyond the grid edge are taken as zero (Dirichlet padding), so every node
// gets the same formula with the missing taps dropped.

/// d/dR, 5-point stencil. Requires n_r >= 5.
ScalarField d_dr(const ScalarField& f);
/// d/dP, 5-point stencil. Requires n_p >= 5.
ScalarField d_dp(const ScalarField& f);
/// d^3/dP^3, 7-point stencil. Requires n_p >= 7.
ScalarField d3_dp3(const ScalarField& f);

/// Trapezoidal rule over both axes. Throws std::domain_error on non-finite input.
complex integrate_phase_space(const ScalarField& f);

namespace stencil {

// Row kernels shared by the standalone operators above and the fused
// right-hand side, so both paths round identically. A complex field is viewed
// as 2 * n_r * n_p doubles (real/imaginary interleaved per node); each call
// writes the 2 * n_p doubles of row i into `out`.

template <class Load>
inline double first(Load&& load, double inv_12h) {
    return ((load(-2) - load(2)) + 8.0 * (load(1) - load(-1))) * inv_12h;
}

template <class Load>
inline double third(Load&& load, double inv_8h3) {
    return ((load(-3) - load(3)) + 8.0 * (load(2) - load(-2)) + 13.0 * (load(-1) - load(1))) *
           inv_8h3;
}

void row_d_dr(const double* f, const PhaseGrid& g, std::size_t i, double* out);
/// Same, with the five rows i-2 .. i+2 given explicitly (`line` doubles each);
/// a null pointer stands for an off-grid row of zeros.
void row_d_dr(const double* const rows[5], std::size_t line, double inv_12h, double* out);
void row_d_dp(const double* f, const PhaseGrid& g, std::size_t i, double* out);
void row_d3_dp3(const double* f, const PhaseGrid& g, std::size_t i, double* out);
/// Row-local forms: `row` holds the 2 * n_p doubles of one R row.
void row_d_dp(const double* row, std::size_t n_p, double inv_12h, double* out);
void row_d3_dp3(const double* row, std::size_t n_p, double inv_8h3, double* out);

}  // namespace stencil

}  // namespace nanorod
