#include "flashsim/qalg.hpp"

#include <Eigen/Eigenvalues>
#include <sstream>

namespace flashsim {

std::string BasisTag::str() const {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < dims.size(); ++i) os << (i ? "x" : "") << dims[i];
    os << "]";
    return os.str();
}

BasisTag concat(const BasisTag& a, const BasisTag& b) {
    BasisTag out = a;
    out.dims.insert(out.dims.end(), b.dims.begin(), b.dims.end());
    return out;
}

QuantumState make_state(Vector amplitudes, BasisTag basis) {
    if (amplitudes.size() != basis.total())
        throw SizeError("state length " + std::to_string(amplitudes.size()) +
                        " does not match basis " + basis.str());
    if (!amplitudes.allFinite()) throw ContractError("state has non-finite amplitudes");
    return {std::move(amplitudes), std::move(basis)};
}

LinearOp make_op(Matrix entries, BasisTag basis) {
    if (entries.rows() != entries.cols()) throw SizeError("operator must be square");
    if (entries.rows() != basis.total())
        throw SizeError("operator dim " + std::to_string(entries.rows()) +
                        " does not match basis " + basis.str());
    if (!entries.allFinite()) throw ContractError("operator has non-finite entries");
    return {std::move(entries), std::move(basis)};
}

LinearOp identity_op(const BasisTag& basis) {
    return {Matrix::Identity(basis.total(), basis.total()), basis};
}

LinearOp diagonal_op(const RealVector& diag, const BasisTag& basis) {
    if (diag.size() != basis.total()) throw SizeError("diagonal length does not match basis");
    Matrix m = Matrix::Zero(diag.size(), diag.size());
    for (Index i = 0; i < diag.size(); ++i) m(i, i) = diag(i);
    return {std::move(m), basis};
}

double hermiticity_deviation(const Matrix& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

bool is_hermitian(const Matrix& m, double tol) { return hermiticity_deviation(m) <= tol; }

DensityOp make_density(Matrix entries) {
    if (entries.rows() != entries.cols()) throw SizeError("density operator must be square");
    const double herm = hermiticity_deviation(entries);
    if (herm > kHermitianTol)
        throw ContractError("density operator not Hermitian: deviation " + std::to_string(herm));
    Eigen::SelfAdjointEigenSolver<Matrix> es(entries, Eigen::EigenvaluesOnly);
    const double tr = entries.trace().real();
    if (es.eigenvalues().minCoeff() < -kPsdTolPerTrace * tr)
        throw ContractError("density operator not positive semidefinite");
    return {std::move(entries)};
}

DensityOp pure_density(const QuantumState& s) {
    if (s.norm2() == 0.0) throw DegenerateStateError("pure_density: zero-norm state");
    Matrix m = s.amplitudes * s.amplitudes.adjoint();
    m /= m.trace().real();
    return {std::move(m)};
}

LinearOp tensor(const LinearOp& a, const LinearOp& b) {
    const Index da = a.dim(), db = b.dim();
    if (da > kMaxDimension / db)
        throw SizeError("tensor product dimension " + std::to_string(da) + "*" +
                        std::to_string(db) + " exceeds cap " + std::to_string(kMaxDimension));
    Matrix out(da * db, da * db);
    for (Index i = 0; i < da; ++i)
        for (Index j = 0; j < da; ++j)
            out.block(i * db, j * db, db, db) = a.entries(i, j) * b.entries;
    return {std::move(out), concat(a.basis, b.basis)};
}

QuantumState tensor(const QuantumState& a, const QuantumState& b) {
    const Index da = a.dim(), db = b.dim();
    if (da > kMaxDimension / db) throw SizeError("tensor product state exceeds dimension cap");
    Vector out(da * db);
    for (Index i = 0; i < da; ++i) out.segment(i * db, db) = a.amplitudes(i) * b.amplitudes;
    return {std::move(out), concat(a.basis, b.basis)};
}

namespace {

bool exactly_diagonal(const Matrix& m) {
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j)
            if (i != j && m(i, j) != Complex(0.0, 0.0)) return false;
    return true;
}

}  // namespace

LinearOp unitary_from_hamiltonian(const LinearOp& h, double t) {
    const double dev = hermiticity_deviation(h.entries);
    if (dev > kHermitianTol)
        throw ContractError("unitary_from_hamiltonian: input not Hermitian (deviation " +
                            std::to_string(dev) + ")");
    if (exactly_diagonal(h.entries)) {
        Matrix u = Matrix::Zero(h.dim(), h.dim());
        for (Index k = 0; k < h.dim(); ++k)
            u(k, k) = std::polar(1.0, -h.entries(k, k).real() * t);
        return {std::move(u), h.basis};
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(h.entries);
    if (es.info() != Eigen::Success)
        throw ContractError("unitary_from_hamiltonian: eigendecomposition failed");
    Vector phases(h.dim());
    for (Index k = 0; k < h.dim(); ++k)
        phases(k) = std::polar(1.0, -es.eigenvalues()(k) * t);
    Matrix u = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    return {std::move(u), h.basis};
}

Complex expectation(const QuantumState& state, const LinearOp& op) {
    if (state.basis != op.basis)
        throw SizeError("expectation: basis mismatch " + state.basis.str() + " vs " +
                        op.basis.str());
    const double n2 = state.norm2();
    if (n2 == 0.0) throw DegenerateStateError("expectation: zero-norm state");
    return state.amplitudes.dot(op.entries * state.amplitudes) / n2;
}

DensityOp conjugate_in_basis(const DensityOp& rho) { return {rho.entries.conjugate()}; }

SymmetryReport is_symmetric_in_basis(const Matrix& m, double tol) {
    SymmetryReport rep;
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = i + 1; j < m.cols(); ++j) {
            const double dev = std::abs(m(i, j) - m(j, i));
            if (dev > rep.max_deviation) {
                rep.max_deviation = dev;
                rep.row = i;
                rep.col = j;
            }
        }
    rep.symmetric = rep.max_deviation <= tol;
    return rep;
}

SymmetryReport is_symmetric_in_basis(const LinearOp& op, double tol) {
    return is_symmetric_in_basis(op.entries, tol);
}

LinearOp embed_at(const Matrix& local, const BasisTag& basis, std::size_t slot) {
    if (slot >= basis.n_subsystems()) throw SizeError("embed_at: slot out of range");
    if (local.rows() != basis.dims[slot]) throw SizeError("embed_at: local dim mismatch");
    Index left = 1, right = 1;
    for (std::size_t k = 0; k < slot; ++k) left *= basis.dims[k];
    for (std::size_t k = slot + 1; k < basis.n_subsystems(); ++k) right *= basis.dims[k];
    const Index d = basis.dims[slot];
    Matrix out = Matrix::Zero(basis.total(), basis.total());
    for (Index l = 0; l < left; ++l)
        for (Index i = 0; i < d; ++i)
            for (Index j = 0; j < d; ++j) {
                if (local(i, j) == Complex(0.0, 0.0)) continue;
                for (Index r = 0; r < right; ++r)
                    out((l * d + i) * right + r, (l * d + j) * right + r) = local(i, j);
            }
    return {std::move(out), basis};
}

Matrix reduced_density(const QuantumState& state, std::size_t slot) {
    const BasisTag& basis = state.basis;
    if (slot >= basis.n_subsystems()) throw SizeError("reduced_density: slot out of range");
    const double n2 = state.norm2();
    if (n2 == 0.0) throw DegenerateStateError("reduced_density: zero-norm state");
    Index left = 1, right = 1;
    for (std::size_t k = 0; k < slot; ++k) left *= basis.dims[k];
    for (std::size_t k = slot + 1; k < basis.n_subsystems(); ++k) right *= basis.dims[k];
    const Index d = basis.dims[slot];
    Matrix rho = Matrix::Zero(d, d);
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j) {
            Complex acc(0.0, 0.0);
            for (Index l = 0; l < left; ++l)
                for (Index r = 0; r < right; ++r)
                    acc += state.amplitudes((l * d + i) * right + r) *
                           std::conj(state.amplitudes((l * d + j) * right + r));
            rho(i, j) = acc / n2;
        }
    return rho;
}

}  // namespace flashsim
