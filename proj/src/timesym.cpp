#include "flashsim/timesym.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "flashsim/parallel.hpp"

namespace flashsim {

BoundaryConditions BoundaryConditions::make(Matrix rho_initial, Matrix rho_final) {
    DensityOp ri = make_density(std::move(rho_initial));
    DensityOp rf = make_density(std::move(rho_final));
    if (ri.dim() != rf.dim()) throw SizeError("boundary conditions: dimension mismatch");
    Eigen::SelfAdjointEigenSolver<Matrix> es(rf.entries, Eigen::EigenvaluesOnly);
    const double top = es.eigenvalues().maxCoeff();
    if (top <= 0.0) throw ContractError("boundary conditions: final POVM element is zero");
    rf.entries /= top;
    return {std::move(ri), std::move(rf)};
}

BoundaryConditions BoundaryConditions::unconstrained(Matrix rho_initial) {
    const Index d = rho_initial.rows();
    return make(std::move(rho_initial), Matrix::Identity(d, d));
}

void SequenceSpec::validate() const {
    if (intervals.size() != outcomes.size() + 1)
        throw ContractError("sequence: need exactly one more interval than outcomes");
    if (families.size() != outcomes.size())
        throw ContractError("sequence: need one jump family per outcome");
    for (double dt : intervals)
        if (dt < 0.0 || !std::isfinite(dt)) throw ContractError("sequence: bad interval");
    for (const auto& f : families)
        if (f.basis() != hamiltonian.basis)
            throw SizeError("sequence: family basis does not match Hamiltonian");
}

SequenceSpec SequenceSpec::reversed() const {
    SequenceSpec r = *this;
    std::reverse(r.outcomes.begin(), r.outcomes.end());
    std::reverse(r.intervals.begin(), r.intervals.end());
    std::reverse(r.families.begin(), r.families.end());
    return r;
}

namespace {

struct Chain {
    std::vector<Matrix> unitaries;  // U(dt_0) .. U(dt_n)
    const SequenceSpec* spec;
    const BoundaryConditions* bc;
};

Chain build_chain(const SequenceSpec& spec, const BoundaryConditions& bc) {
    spec.validate();
    if (bc.rho_initial.dim() != spec.hamiltonian.dim())
        throw SizeError("sequence: boundary dimension mismatch");
    Chain c;
    c.spec = &spec;
    c.bc = &bc;
    c.unitaries.reserve(spec.intervals.size());
    for (double dt : spec.intervals)
        c.unitaries.push_back(unitary_from_hamiltonian(spec.hamiltonian, dt).entries);
    return c;
}

double leaf_value(const Chain& c, const Matrix& rho) {
    return (c.bc->rho_final.entries * rho).trace().real();
}

Matrix step(const Chain& c, const Matrix& rho, std::size_t event, double z) {
    const Matrix j = c.spec->families[event].jump_at(z).entries;
    const Matrix& u = c.unitaries[event + 1];
    Matrix jr = j * rho * j.adjoint();
    return u * jr * u.adjoint();
}

double numerator_at(const Chain& c, const std::vector<double>& outcomes) {
    Matrix rho = c.unitaries[0] * c.bc->rho_initial.entries * c.unitaries[0].adjoint();
    for (std::size_t j = 0; j < outcomes.size(); ++j) rho = step(c, rho, j, outcomes[j]);
    return leaf_value(c, rho);
}

void fill_subtable(const Chain& c, const Matrix& rho, std::size_t event, double* out,
                   std::size_t stride_product) {
    const std::size_t n = c.spec->n_events();
    if (event == n) {
        *out = leaf_value(c, rho);
        return;
    }
    const OutcomeGrid& g = c.spec->families[event].grid();
    const std::size_t inner = stride_product / static_cast<std::size_t>(g.n);
    for (int k = 0; k < g.n; ++k) {
        Matrix next = step(c, rho, event, g.point(k));
        fill_subtable(c, next, event + 1, out + static_cast<std::size_t>(k) * inner, inner);
    }
}

std::size_t table_size(const SequenceSpec& spec) {
    std::size_t size = 1;
    for (const auto& f : spec.families) size *= static_cast<std::size_t>(f.grid().n);
    return size;
}

std::vector<double> numerator_table_impl(const SequenceSpec& spec, const BoundaryConditions& bc,
                                         bool parallel) {
    Chain c = build_chain(spec, bc);
    const std::size_t size = table_size(spec);
    std::vector<double> table(size, 0.0);
    Matrix rho0 = c.unitaries[0] * bc.rho_initial.entries * c.unitaries[0].adjoint();
    if (spec.n_events() == 0) {
        table[0] = leaf_value(c, rho0);
        return table;
    }
    const OutcomeGrid& g0 = spec.families[0].grid();
    const std::size_t inner = size / static_cast<std::size_t>(g0.n);
    auto branch = [&](std::int64_t k) {
        Matrix next = step(c, rho0, 0, g0.point(static_cast<int>(k)));
        fill_subtable(c, next, 1, table.data() + static_cast<std::size_t>(k) * inner, inner);
    };
    if (parallel)
        par::parallel_for(g0.n, branch);
    else
        par::serial_for(g0.n, branch);
    return table;
}

double weighted_table_sum(const SequenceSpec& spec, const std::vector<double>& table) {
    const std::size_t n = spec.n_events();
    if (n == 0) return table[0];
    double total = 0.0;
    for (std::size_t flat = 0; flat < table.size(); ++flat) {
        double w = 1.0;
        std::size_t rem = flat;
        for (std::size_t j = n; j-- > 0;) {
            const OutcomeGrid& g = spec.families[j].grid();
            const int k = static_cast<int>(rem % static_cast<std::size_t>(g.n));
            rem /= static_cast<std::size_t>(g.n);
            w *= g.weight(k);
        }
        total += table[flat] * w;
    }
    return total;
}

}  // namespace

double sequence_numerator(const SequenceSpec& spec, const BoundaryConditions& bc) {
    Chain c = build_chain(spec, bc);
    return numerator_at(c, spec.outcomes);
}

std::vector<double> sequence_numerator_table(const SequenceSpec& spec,
                                             const BoundaryConditions& bc) {
    return numerator_table_impl(spec, bc, true);
}

std::vector<double> sequence_numerator_table_serial(const SequenceSpec& spec,
                                                    const BoundaryConditions& bc) {
    return numerator_table_impl(spec, bc, false);
}

double sequence_normalization(const SequenceSpec& spec, const BoundaryConditions& bc) {
    return weighted_table_sum(spec, numerator_table_impl(spec, bc, true));
}

double sequence_normalization_serial(const SequenceSpec& spec, const BoundaryConditions& bc) {
    return weighted_table_sum(spec, numerator_table_impl(spec, bc, false));
}

double sequence_probability(const SequenceSpec& spec, const BoundaryConditions& bc) {
    const double num = sequence_numerator(spec, bc);
    const double z = sequence_normalization(spec, bc);
    if (z <= 0.0 || !std::isfinite(z))
        throw ConditioningError(
            "sequence_probability: normalization underflowed; final condition is nearly "
            "orthogonal to every evolution");
    return num / z;
}

double reverse_probability(const SequenceSpec& spec, const BoundaryConditions& bc) {
    BoundaryConditions reversed_bc{conjugate_in_basis(bc.rho_final),
                                   conjugate_in_basis(bc.rho_initial)};
    return sequence_probability(spec.reversed(), reversed_bc);
}

SymmetryConditionReport symmetry_condition_check(const SequenceSpec& spec, double tol) {
    spec.validate();
    SymmetryConditionReport rep;
    for (double dt : spec.intervals) {
        LinearOp u = unitary_from_hamiltonian(spec.hamiltonian, dt);
        rep.max_unitary_deviation =
            std::max(rep.max_unitary_deviation, is_symmetric_in_basis(u, tol).max_deviation);
    }
    for (const auto& f : spec.families) {
        const OutcomeGrid& g = f.grid();
        for (int k = 0; k < g.n; ++k) {
            const double dev = is_symmetric_in_basis(f.jump_at(g.point(k)), tol).max_deviation;
            rep.max_jump_deviation = std::max(rep.max_jump_deviation, dev);
        }
    }
    rep.pass = rep.max_unitary_deviation <= tol && rep.max_jump_deviation <= tol;
    return rep;
}

}  // namespace flashsim
