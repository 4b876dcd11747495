#pragma once

#include <array>
#include <span>
#include <vector>

#include "nanorod/model.hpp"
#include "nanorod/state.hpp"

namespace nanorod {

// Right-hand side of the phase-space equation of motion for the spin-valued
// Wigner field, split into three separately testable parts:
//
//   commutator  -i [Hs(R), W]                  Hs = -omega sx - c R sz
//   transport   -P dW/dR + V' dW/dP - (c/2) {sz, dW/dP}
//   quantum     -(1/24) V'''(R) d3W/dP3        (only in Dynamics::quantum)
//
// For a quartic potential the Moyal series ends at the third-order term, so
// the quantum-mode right-hand side is the exact evolution law.
// All functions honour the basis tag of the input field.

SpinPhaseField commutator_term(const SpinPhaseField& w, const ModelParams& params);
SpinPhaseField transport_term(const SpinPhaseField& w, const ModelParams& params);
/// Exactly zero when b4 == 0.
SpinPhaseField quantum_correction_term(const SpinPhaseField& w, const ModelParams& params);

struct RhsTerms {
    SpinPhaseField commutator_part;
    SpinPhaseField transport_part;
    SpinPhaseField quantum_part;  ///< zero field in classical mode or when b4 == 0
    SpinPhaseField total;
};

/// Term-by-term assembly; total = (transport + quantum) + commutator.
RhsTerms rhs_terms(const SpinPhaseField& w, const ModelParams& params);

/// Reusable evaluator for the integrator's inner loop. Produces results
/// bitwise identical to rhs_terms(...).total without allocating per call.
class Liouvillian {
public:
    Liouvillian(const PhaseGrid& grid, SpinBasis basis, const ModelParams& params);

    const PhaseGrid& grid() const { return grid_; }
    SpinBasis basis() const { return basis_; }
    const ModelParams& params() const { return params_; }

    /// `in` and `out` are flat views of fields on this evaluator's grid and
    /// basis; they must not alias.
    void apply(std::span<const double> in, std::span<double> out);

    /// rows[d][k]: component k of R row i + d - 2, 2 * n_p doubles, or null
    /// for a row outside the grid.
    using RowInputs = std::array<std::array<const double*, 4>, 5>;

    /// Row i of apply() (sigma_z basis only), reading just the five
    /// neighbouring rows. Lets a caller evaluate the right-hand side in a
    /// pipeline without materializing whole fields.
    void apply_row(std::size_t i, const RowInputs& rows, double* const out[4]);

private:
    PhaseGrid grid_;
    SpinBasis basis_;
    ModelParams params_;
    bool with_quantum_;
    std::vector<double> minus_p_;  // -P_j, duplicated for (re, im)
    std::vector<double> force_;    // V'(R_i)
    std::vector<double> q_coef_;   // -V'''(R_i) / 24
    std::vector<double> row_r_, row_p_, row_3_;
};

SpinPhaseField rhs(const SpinPhaseField& w, const ModelParams& params);

}  // namespace nanorod
