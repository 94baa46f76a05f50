#ifndef FLASHSIM_TIMESYM_HPP
#define FLASHSIM_TIMESYM_HPP

#include <vector>

#include "flashsim/engine.hpp"
#include "flashsim/qalg.hpp"

namespace flashsim {

// History boundary data: an initial density operator and a final POVM
// element.  rho_final proportional to the identity expresses no constraint.
// Probabilities are invariant under rescaling either one; rho_final is
// normalized to unit maximum eigenvalue purely for readability of reports.
struct BoundaryConditions {
    DensityOp rho_initial;
    DensityOp rho_final;

    static BoundaryConditions make(Matrix rho_initial, Matrix rho_final);
    static BoundaryConditions unconstrained(Matrix rho_initial);
};

// A time-ordered outcome sequence z_1..z_n with the n+1 intervals around it.
struct SequenceSpec {
    std::vector<double> outcomes;      // z_1..z_n
    std::vector<double> intervals;     // dt_0..dt_n
    std::vector<JumpFamily> families;  // one per event
    LinearOp hamiltonian;

    std::size_t n_events() const { return outcomes.size(); }
    void validate() const;

    SequenceSpec reversed() const;  // outcomes and intervals reversed
};

// Probability density of the outcome sequence conditioned on both boundary
// conditions: Tr[rho_F K rho_I K^dagger] / Z with
// K = U(dt_n) J(z_n) ... J(z_1) U(dt_0) and Z the quadrature of the
// numerator over the full outcome-grid product.
double sequence_probability(const SequenceSpec& spec, const BoundaryConditions& bc);

// unnormalized numerator only
double sequence_numerator(const SequenceSpec& spec, const BoundaryConditions& bc);

// quadrature normalization over the grid product (parallel kernel)
double sequence_normalization(const SequenceSpec& spec, const BoundaryConditions& bc);
double sequence_normalization_serial(const SequenceSpec& spec, const BoundaryConditions& bc);

// density of the reversed sequence with boundary conditions
// (conjugate(rho_F), conjugate(rho_I))
double reverse_probability(const SequenceSpec& spec, const BoundaryConditions& bc);

struct SymmetryConditionReport {
    bool pass = true;
    double max_unitary_deviation = 0.0;
    double max_jump_deviation = 0.0;
};

// checks U(dt_j) and every grid J(z) for matrix symmetry in the collapse
// basis, the sufficient condition for the reversal identity
SymmetryConditionReport symmetry_condition_check(const SequenceSpec& spec, double tol = 1e-12);

// Exhaustive sweep machinery: numerators for every grid sequence, indexed in
// row-major grid order (outermost index = z_1).  Parallel over the leading
// grid axis with deterministic merges; the serial variant is the reference.
std::vector<double> sequence_numerator_table(const SequenceSpec& spec,
                                             const BoundaryConditions& bc);
std::vector<double> sequence_numerator_table_serial(const SequenceSpec& spec,
                                                    const BoundaryConditions& bc);

}  // namespace flashsim

#endif
