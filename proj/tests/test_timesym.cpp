#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "flashsim/engine.hpp"
#include "flashsim/timesym.hpp"
#include "oracles.hpp"

using namespace flashsim;

namespace {

Matrix random_density_matrix(Index d, Rng& rng) {
    Matrix g(d, d);
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j) g(i, j) = Complex(rng.normal(), rng.normal());
    Matrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    return rho;
}

JumpFamily diag_family(Index d, double sigma, int points) {
    RealVector v(d);
    for (Index i = 0; i < d; ++i) v(i) = static_cast<double>(i);
    return JumpFamily::gaussian_auto(diagonal_op(v, BasisTag::single(d)), sigma, {}, points);
}

SequenceSpec make_spec(Index d, std::size_t n, const Matrix& h, int points, Rng& rng) {
    SequenceSpec spec;
    spec.hamiltonian = {h, BasisTag::single(d)};
    spec.families.assign(n, diag_family(d, 1.0, points));
    spec.outcomes.assign(n, 0.0);
    for (std::size_t j = 0; j <= n; ++j) spec.intervals.push_back(rng.uniform(0.2, 1.2));
    return spec;
}

Matrix real_symmetric(Index d, Rng& rng) {
    Matrix m(d, d);
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j) m(i, j) = rng.normal();
    return 0.5 * (m + m.transpose());
}

}  // namespace

TEST_CASE("sequence_probability: empty sequence has probability one") {
    Rng rng(1);
    SequenceSpec spec = make_spec(2, 0, real_symmetric(2, rng), 21, rng);
    BoundaryConditions bc = BoundaryConditions::make(random_density_matrix(2, rng),
                                                     random_density_matrix(2, rng));
    CHECK(sequence_probability(spec, bc) == 1.0);
}

TEST_CASE("sequence_probability: with rho_F = 1 it is the flat outcome density") {
    Rng rng(2);
    SequenceSpec spec = make_spec(2, 1, real_symmetric(2, rng), kDefaultGridPoints, rng);
    Vector v(2);
    v << Complex(0.6, 0.2), Complex(-0.4, 0.7);
    QuantumState psi = make_state(v, BasisTag::single(2));
    BoundaryConditions bc = BoundaryConditions::unconstrained(pure_density(psi).entries);
    QuantumState evolved = evolve(psi, spec.hamiltonian, spec.intervals[0]);
    for (double z : {-1.5, 0.0, 0.4, 1.1, 2.5}) {
        SequenceSpec probe = spec;
        probe.outcomes = {z};
        CHECK(std::abs(sequence_probability(probe, bc) -
                       outcome_density(evolved, spec.families[0], z)) <= 1e-12);
    }
}

TEST_CASE("sequence_probability: two-event chain rule against the engine route") {
    Rng rng(12);
    SequenceSpec spec = make_spec(2, 2, real_symmetric(2, rng), kDefaultGridPoints, rng);
    Vector v(2);
    v << Complex(0.8, -0.1), Complex(0.3, 0.5);
    QuantumState psi = make_state(v, BasisTag::single(2));
    BoundaryConditions bc = BoundaryConditions::unconstrained(pure_density(psi).entries);
    for (auto [z1, z2] : {std::pair{0.2, -0.6}, std::pair{1.4, 0.9}, std::pair{-0.8, 2.2}}) {
        SequenceSpec probe = spec;
        probe.outcomes = {z1, z2};
        // independent path: fold the pure state with the flat probability rule
        QuantumState s1 = evolve(psi, spec.hamiltonian, spec.intervals[0]);
        const double p1 = outcome_density(s1, spec.families[0], z1);
        QuantumState s1c = collapse_apply(s1, spec.families[0], z1);
        QuantumState s2 = evolve(s1c, spec.hamiltonian, spec.intervals[1]);
        const double p2 = outcome_density(s2, spec.families[1], z2);
        CHECK(std::abs(sequence_probability(probe, bc) - p1 * p2) <= 1e-12);
    }
}

TEST_CASE("sequence_probability: normalized over the grid product by construction") {
    Rng rng(3);
    SequenceSpec spec = make_spec(2, 2, real_symmetric(2, rng), 21, rng);
    BoundaryConditions bc = BoundaryConditions::make(random_density_matrix(2, rng),
                                                     random_density_matrix(2, rng));
    const auto table = sequence_numerator_table(spec, bc);
    const double z_norm = sequence_normalization(spec, bc);
    double mass = 0.0;
    const auto& g = spec.families[0].grid();
    std::size_t flat = 0;
    for (int k1 = 0; k1 < g.n; ++k1)
        for (int k2 = 0; k2 < g.n; ++k2, ++flat)
            mass += table[flat] / z_norm * g.weight(k1) * g.weight(k2);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("reverse_probability: identity jump family is trivially symmetric") {
    Rng rng(4);
    // identity family weighted to satisfy completeness; any Hamiltonian works
    auto jump = [](double z) {
        return Matrix(std::sqrt(oracles::normal_pdf(z, 0.0, 1.0)) * Matrix::Identity(2, 2));
    };
    JumpFamily f = JumpFamily::general(jump, BasisTag::single(2), OutcomeGrid{-8.0, 8.0, 21});
    Matrix h(2, 2);  // complex Hermitian, deliberately not symmetric
    h << Complex(0.3), Complex(0.0, 0.8), Complex(0.0, -0.8), Complex(-0.1);
    SequenceSpec spec;
    spec.hamiltonian = {h, BasisTag::single(2)};
    spec.families = {f, f};
    spec.outcomes = {0.7, -0.3};
    spec.intervals = {0.5, 0.8, 0.3};
    BoundaryConditions bc = BoundaryConditions::make(random_density_matrix(2, rng),
                                                     random_density_matrix(2, rng));
    const double fwd = sequence_probability(spec, bc);
    const double rev = reverse_probability(spec, bc);
    CHECK(std::abs(fwd - rev) / fwd < 1e-12);
}

TEST_CASE("reverse_probability: symmetric-basis condition gives the identity") {
    Rng rng(5);
    for (Index d : {2, 3}) {
        SequenceSpec spec = make_spec(d, 2, real_symmetric(d, rng), 21, rng);
        BoundaryConditions bc = BoundaryConditions::make(random_density_matrix(d, rng),
                                                         random_density_matrix(d, rng));
        CHECK(symmetry_condition_check(spec, 1e-12).pass);
        const auto& g = spec.families[0].grid();
        double worst = 0.0;
        for (int k1 = 0; k1 < g.n; k1 += 4)
            for (int k2 = 0; k2 < g.n; k2 += 4) {
                SequenceSpec probe = spec;
                probe.outcomes = {g.point(k1), g.point(k2)};
                const double fwd = sequence_probability(probe, bc);
                const double rev = reverse_probability(probe, bc);
                worst = std::max(worst, std::abs(fwd - rev) / fwd);
            }
        CHECK(worst <= 1e-10);
    }
}

TEST_CASE("reverse_probability: complex non-symmetric H breaks the identity") {
    Rng rng(6);
    Matrix h(2, 2);
    h << Complex(0.0), Complex(0.0, 0.9), Complex(0.0, -0.9), Complex(0.0);
    SequenceSpec spec = make_spec(2, 2, Matrix(Matrix::Zero(2, 2)), 21, rng);
    spec.hamiltonian = {h, BasisTag::single(2)};
    BoundaryConditions bc = BoundaryConditions::make(random_density_matrix(2, rng),
                                                     random_density_matrix(2, rng));
    CHECK_FALSE(symmetry_condition_check(spec, 1e-12).pass);
    const auto& g = spec.families[0].grid();
    double worst = 0.0;
    for (int k1 = 0; k1 < g.n; k1 += 2)
        for (int k2 = 0; k2 < g.n; k2 += 2) {
            SequenceSpec probe = spec;
            probe.outcomes = {g.point(k1), g.point(k2)};
            const double fwd = sequence_probability(probe, bc);
            worst = std::max(worst, std::abs(fwd - reverse_probability(probe, bc)) / fwd);
        }
    CHECK(worst > 1e-2);
}

TEST_CASE("reversing twice returns the forward value exactly") {
    Rng rng(7);
    SequenceSpec spec = make_spec(3, 2, real_symmetric(3, rng), 21, rng);
    BoundaryConditions bc = BoundaryConditions::make(random_density_matrix(3, rng),
                                                     random_density_matrix(3, rng));
    const double fwd = sequence_probability(spec, bc);
    SequenceSpec rev_spec = spec.reversed();
    BoundaryConditions rev_bc{conjugate_in_basis(bc.rho_final),
                              conjugate_in_basis(bc.rho_initial)};
    CHECK(reverse_probability(rev_spec, rev_bc) == fwd);
}

TEST_CASE("symmetry_condition_check: diagonal dynamics pass exactly") {
    Rng rng(8);
    RealVector d3(3);
    d3 << 0.4, -0.2, 1.1;
    SequenceSpec spec = make_spec(3, 1, Matrix(diagonal_op(d3, BasisTag::single(3)).entries), 21,
                                  rng);
    const auto rep = symmetry_condition_check(spec, 0.0);
    CHECK(rep.pass);
    CHECK(rep.max_unitary_deviation == 0.0);
    CHECK(rep.max_jump_deviation == 0.0);
}

TEST_CASE("numerator tables: parallel kernel equals serial reference bit for bit") {
    Rng rng(9);
    SequenceSpec spec = make_spec(3, 3, real_symmetric(3, rng), 9, rng);
    BoundaryConditions bc = BoundaryConditions::make(random_density_matrix(3, rng),
                                                     random_density_matrix(3, rng));
    const auto par_table = sequence_numerator_table(spec, bc);
    const auto ser_table = sequence_numerator_table_serial(spec, bc);
    REQUIRE(par_table.size() == ser_table.size());
    for (std::size_t i = 0; i < par_table.size(); ++i) CHECK(par_table[i] == ser_table[i]);
    CHECK(sequence_normalization(spec, bc) == sequence_normalization_serial(spec, bc));
}

TEST_CASE("conditioning-infeasible final state raises an error") {
    SequenceSpec spec;
    spec.hamiltonian = identity_op(BasisTag::single(2));
    spec.hamiltonian.entries = Matrix::Zero(2, 2);
    spec.families = {JumpFamily::gaussian_auto(
        diagonal_op((RealVector(2) << 0.0, 1.0).finished(), BasisTag::single(2)), 1.0)};
    spec.outcomes = {0.5};
    spec.intervals = {0.1, 0.1};
    Matrix rho_i = Matrix::Zero(2, 2);
    rho_i(0, 0) = 1.0;
    Matrix rho_f = Matrix::Zero(2, 2);
    rho_f(1, 1) = 1.0;
    // H = 0 and diagonal jumps keep |0><0| orthogonal to |1><1| forever
    BoundaryConditions bc = BoundaryConditions::make(rho_i, rho_f);
    CHECK_THROWS_AS(sequence_probability(spec, bc), ConditioningError);
}

TEST_CASE("sequence validation rejects malformed input") {
    Rng rng(10);
    SequenceSpec spec = make_spec(2, 2, real_symmetric(2, rng), 9, rng);
    BoundaryConditions bc = BoundaryConditions::make(random_density_matrix(2, rng),
                                                     random_density_matrix(2, rng));
    SequenceSpec bad = spec;
    bad.intervals.pop_back();
    CHECK_THROWS_AS(sequence_probability(bad, bc), ContractError);
    SequenceSpec negative = spec;
    negative.intervals[0] = -0.5;
    CHECK_THROWS_AS(sequence_probability(negative, bc), ContractError);
}
