#ifndef FLASHSIM_QALG_HPP
#define FLASHSIM_QALG_HPP

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "flashsim/errors.hpp"

namespace flashsim {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

// hard cap on constructed dimensions; tensor() refuses to exceed it
inline constexpr Index kMaxDimension = 4096;

// Product-basis layout: subsystem dimensions in declared order.  Two values
// interoperate only when their tags match.
struct BasisTag {
    std::vector<Index> dims;

    BasisTag() = default;
    explicit BasisTag(std::vector<Index> d) : dims(std::move(d)) {}
    static BasisTag single(Index d) { return BasisTag({d}); }
    static BasisTag uniform(Index n_subsystems, Index d) {
        return BasisTag(std::vector<Index>(static_cast<std::size_t>(n_subsystems), d));
    }

    Index total() const {
        Index t = 1;
        for (Index d : dims) t *= d;
        return t;
    }
    std::size_t n_subsystems() const { return dims.size(); }
    bool operator==(const BasisTag&) const = default;
    std::string str() const;
};

BasisTag concat(const BasisTag& a, const BasisTag& b);

// Unnormalized amplitude vector over a finite product basis.  Norm is free to
// wander: all probabilities are ratios, so only zero norm is an error.
struct QuantumState {
    Vector amplitudes;
    BasisTag basis;

    Index dim() const { return amplitudes.size(); }
    double norm2() const { return amplitudes.squaredNorm(); }
    double norm() const { return amplitudes.norm(); }
};

QuantumState make_state(Vector amplitudes, BasisTag basis);

struct LinearOp {
    Matrix entries;
    BasisTag basis;

    Index dim() const { return entries.rows(); }
};

LinearOp make_op(Matrix entries, BasisTag basis);
LinearOp identity_op(const BasisTag& basis);
LinearOp diagonal_op(const RealVector& diag, const BasisTag& basis);

// tolerances used by the density-operator validity checks
inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kPsdTolPerTrace = 1e-10;

struct DensityOp {
    Matrix entries;

    Index dim() const { return entries.rows(); }
    double trace_real() const { return entries.trace().real(); }
};

// constructs after checking Hermiticity (1e-12 entrywise) and positive
// semidefiniteness (min eigenvalue >= -1e-10 * trace)
DensityOp make_density(Matrix entries);
DensityOp pure_density(const QuantumState& s);

// max entrywise |M - M^dagger|
double hermiticity_deviation(const Matrix& m);
bool is_hermitian(const Matrix& m, double tol = kHermitianTol);

// --- operations ---------------------------------------------------------

// Kronecker product; basis tags concatenate in declared subsystem order.
LinearOp tensor(const LinearOp& a, const LinearOp& b);
QuantumState tensor(const QuantumState& a, const QuantumState& b);

// exp(-i h t) for Hermitian h, via spectral decomposition
LinearOp unitary_from_hamiltonian(const LinearOp& h, double t);

// <psi|op|psi> / <psi|psi>
Complex expectation(const QuantumState& state, const LinearOp& op);

// entrywise complex conjugate in the distinguished collapse basis
DensityOp conjugate_in_basis(const DensityOp& rho);

struct SymmetryReport {
    bool symmetric = true;
    double max_deviation = 0.0;
    Index row = 0;
    Index col = 0;
};

// true iff max |M_ij - M_ji| <= tol (complex equality, not conjugation)
SymmetryReport is_symmetric_in_basis(const LinearOp& op, double tol);
SymmetryReport is_symmetric_in_basis(const Matrix& m, double tol);

// embeds a d_site x d_site operator at `slot` of the product basis
LinearOp embed_at(const Matrix& local, const BasisTag& basis, std::size_t slot);

// partial trace onto the subsystem at `slot`; diagnostic for per-cut local
// state inspection
Matrix reduced_density(const QuantumState& state, std::size_t slot);

}  // namespace flashsim

#endif
