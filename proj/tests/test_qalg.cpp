#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "flashsim/qalg.hpp"
#include "flashsim/rng.hpp"
#include "oracles.hpp"

using namespace flashsim;

namespace {

Matrix random_complex(Index d, Rng& rng) {
    Matrix m(d, d);
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j) m(i, j) = Complex(rng.normal(), rng.normal());
    return m;
}

Matrix random_hermitian(Index d, Rng& rng) {
    Matrix g = random_complex(d, rng);
    return 0.5 * (g + g.adjoint());
}

Vector random_vector(Index d, Rng& rng) {
    Vector v(d);
    for (Index i = 0; i < d; ++i) v(i) = Complex(rng.normal(), rng.normal());
    return v;
}

}  // namespace

TEST_CASE("tensor: identity and diagonal structure") {
    LinearOp i2 = identity_op(BasisTag::single(2));
    LinearOp i4 = tensor(i2, i2);
    CHECK(i4.entries.isIdentity(0.0));
    CHECK(i4.basis == BasisTag({2, 2}));

    RealVector d01(2);
    d01 << 0.0, 1.0;
    LinearOp proj = diagonal_op(d01, BasisTag::single(2));
    LinearOp t = tensor(proj, i2);
    for (Index k = 0; k < 4; ++k) {
        CHECK(t.entries(k, k) == Complex(k < 2 ? 0.0 : 1.0));
    }
}

TEST_CASE("tensor: mixed product identity (Xu) x (Yv) = (X x Y)(u x v)") {
    Rng rng(42);
    for (int rep = 0; rep < 10; ++rep) {
        LinearOp x{random_complex(2, rng), BasisTag::single(2)};
        LinearOp y{random_complex(2, rng), BasisTag::single(2)};
        QuantumState u = make_state(random_vector(2, rng), BasisTag::single(2));
        QuantumState v = make_state(random_vector(2, rng), BasisTag::single(2));
        Vector lhs = tensor(x, y).entries * tensor(u, v).amplitudes;
        Vector rhs = tensor(QuantumState{x.entries * u.amplitudes, u.basis},
                            QuantumState{y.entries * v.amplitudes, v.basis})
                         .amplitudes;
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("tensor: associativity") {
    Rng rng(7);
    // dyadic-rational entries keep every scalar product exact, so the two
    // groupings must agree bitwise
    auto random_dyadic = [&](Index d) {
        Matrix m(d, d);
        for (Index i = 0; i < d; ++i)
            for (Index j = 0; j < d; ++j)
                m(i, j) = Complex(static_cast<double>(static_cast<int>(rng.next_u64() % 17) - 8) / 16.0,
                                  static_cast<double>(static_cast<int>(rng.next_u64() % 17) - 8) / 16.0);
        return m;
    };
    LinearOp a{random_dyadic(2), BasisTag::single(2)};
    LinearOp b{random_dyadic(3), BasisTag::single(3)};
    LinearOp c{random_dyadic(2), BasisTag::single(2)};
    Matrix left = tensor(tensor(a, b), c).entries;
    Matrix right = tensor(a, tensor(b, c)).entries;
    CHECK(left == right);
    CHECK(tensor(tensor(a, b), c).basis == BasisTag({2, 3, 2}));

    // generic complex entries agree to the last unit in the last place
    LinearOp x{random_complex(2, rng), BasisTag::single(2)};
    LinearOp y{random_complex(3, rng), BasisTag::single(3)};
    LinearOp z{random_complex(2, rng), BasisTag::single(2)};
    Matrix l2 = tensor(tensor(x, y), z).entries;
    Matrix r2 = tensor(x, tensor(y, z)).entries;
    CHECK((l2 - r2).cwiseAbs().maxCoeff() < 1e-14 * l2.cwiseAbs().maxCoeff());
}

TEST_CASE("tensor: dimension cap") {
    LinearOp big = identity_op(BasisTag::single(1000));
    LinearOp small = identity_op(BasisTag::single(5));
    CHECK_THROWS_AS(tensor(big, small), SizeError);
}

TEST_CASE("unitary_from_hamiltonian: trivial cases") {
    LinearOp zero{Matrix::Zero(3, 3), BasisTag::single(3)};
    CHECK(unitary_from_hamiltonian(zero, 1.7).entries.isIdentity(1e-15));

    RealVector d(2);
    d << 0.0, 1.0;
    LinearOp h = diagonal_op(d, BasisTag::single(2));
    LinearOp u = unitary_from_hamiltonian(h, M_PI);
    CHECK(std::abs(u.entries(0, 0) - Complex(1.0)) < 1e-14);
    CHECK(std::abs(u.entries(1, 1) - Complex(-1.0)) < 1e-14);
}

TEST_CASE("unitary_from_hamiltonian: matches Taylor oracle and is unitary") {
    Rng rng(3);
    for (int rep = 0; rep < 5; ++rep) {
        Matrix h = random_hermitian(4, rng);
        const double t = 0.37;
        LinearOp u = unitary_from_hamiltonian({h, BasisTag::single(4)}, t);
        Matrix reference = oracles::taylor_expm(Complex(0.0, -t) * h);
        CHECK((u.entries - reference).cwiseAbs().maxCoeff() < 1e-10);
        Matrix uu = u.entries * u.entries.adjoint();
        CHECK((uu - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("unitary_from_hamiltonian: group property U(t)U(s) = U(t+s)") {
    Rng rng(11);
    Matrix h = random_hermitian(4, rng);
    LinearOp hop{h, BasisTag::single(4)};
    for (int rep = 0; rep < 8; ++rep) {
        const double t = rng.uniform(-2.0, 2.0), s = rng.uniform(-2.0, 2.0);
        Matrix lhs = unitary_from_hamiltonian(hop, t).entries *
                     unitary_from_hamiltonian(hop, s).entries;
        Matrix rhs = unitary_from_hamiltonian(hop, t + s).entries;
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("unitary_from_hamiltonian: rejects non-Hermitian input") {
    Matrix bad(2, 2);
    bad << Complex(0.0), Complex(1.0), Complex(0.0), Complex(0.0);
    CHECK_THROWS_AS(unitary_from_hamiltonian({bad, BasisTag::single(2)}, 1.0), ContractError);
}

TEST_CASE("expectation: eigenvector, symmetry, oracle") {
    RealVector d(2);
    d << 0.0, 1.0;
    LinearOp op = diagonal_op(d, BasisTag::single(2));
    Vector e1(2);
    e1 << Complex(0.0), Complex(2.0);  // unnormalized eigenvector, eigenvalue 1
    CHECK(expectation(make_state(e1, op.basis), op).real() == doctest::Approx(1.0));

    Vector plus(2);
    plus << Complex(1.0), Complex(1.0);
    CHECK(expectation(make_state(plus, op.basis), op).real() == doctest::Approx(0.5));

    Rng rng(5);
    for (int rep = 0; rep < 10; ++rep) {
        Matrix h = random_hermitian(8, rng);
        Vector psi = random_vector(8, rng);
        Complex got = expectation(make_state(psi, BasisTag::single(8)), {h, BasisTag::single(8)});
        Complex want = oracles::naive_expectation(psi, h);
        CHECK(std::abs(got - want) < 1e-12);
        CHECK(std::abs(got.imag()) < 1e-12);  // Hermitian operators have real expectations
    }
}

TEST_CASE("expectation: zero-norm state fails") {
    QuantumState zero{Vector::Zero(2), BasisTag::single(2)};
    CHECK_THROWS_AS(expectation(zero, identity_op(BasisTag::single(2))), DegenerateStateError);
}

TEST_CASE("conjugate_in_basis: definition and involution") {
    Matrix rho(2, 2);
    rho << Complex(0.5), Complex(0.0, 0.25), Complex(0.0, -0.25), Complex(0.5);
    DensityOp r = make_density(rho);
    DensityOp rc = conjugate_in_basis(r);
    CHECK(rc.entries(0, 1) == Complex(0.0, -0.25));
    // involution is exact
    CHECK(conjugate_in_basis(rc).entries == r.entries);

    // real diagonal density is a fixed point
    Matrix diag = Matrix::Zero(2, 2);
    diag(0, 0) = 0.25;
    diag(1, 1) = 0.75;
    CHECK(conjugate_in_basis(make_density(diag)).entries == diag);
}

TEST_CASE("conjugate_in_basis: output of a valid density is a valid density") {
    Rng rng(9);
    for (int rep = 0; rep < 10; ++rep) {
        Matrix g = random_complex(4, rng);
        Matrix rho = g * g.adjoint();
        rho /= rho.trace().real();
        DensityOp conj = conjugate_in_basis(make_density(rho));
        CHECK_NOTHROW(make_density(conj.entries));  // Hermitian + PSD re-checked
    }
}

TEST_CASE("is_symmetric_in_basis: diagonal, antisymmetric, report") {
    RealVector d(3);
    d << 1.0, -2.0, 0.5;
    CHECK(is_symmetric_in_basis(diagonal_op(d, BasisTag::single(3)), 0.0).symmetric);

    Matrix anti(2, 2);
    anti << Complex(0.0), Complex(1.0), Complex(-1.0), Complex(0.0);
    auto rep = is_symmetric_in_basis(anti, 1e-12);
    CHECK_FALSE(rep.symmetric);
    CHECK(rep.max_deviation == doctest::Approx(2.0));
    CHECK(rep.row == 0);
    CHECK(rep.col == 1);
}

TEST_CASE("density validation rejects bad inputs, tolerates rounding noise") {
    Matrix nonherm(2, 2);
    nonherm << Complex(1.0), Complex(0.5), Complex(0.0), Complex(1.0);
    CHECK_THROWS_AS(make_density(nonherm), ContractError);

    Matrix negative(2, 2);
    negative << Complex(1.0), Complex(0.0), Complex(0.0), Complex(-0.5);
    CHECK_THROWS_AS(make_density(negative), ContractError);

    // an eigenvalue of -1e-12 * trace sits inside the tolerance band
    Matrix nearly(2, 2);
    nearly << Complex(1.0), Complex(0.0), Complex(0.0), Complex(-1e-12);
    CHECK_NOTHROW(make_density(nearly));
}

TEST_CASE("embed_at and reduced_density round trip") {
    Rng rng(21);
    BasisTag tag({2, 3});
    Matrix local = random_hermitian(3, rng);
    LinearOp embedded = embed_at(local, tag, 1);
    // embedding commutes with embedding on the other slot, exactly
    Matrix other = random_hermitian(2, rng);
    LinearOp embedded_other = embed_at(other, tag, 0);
    Matrix comm = embedded.entries * embedded_other.entries -
                  embedded_other.entries * embedded.entries;
    CHECK(comm.cwiseAbs().maxCoeff() == 0.0);

    // reduced state of a product state is the local state
    Vector a = random_vector(2, rng), b = random_vector(3, rng);
    QuantumState prod = tensor(make_state(a, BasisTag::single(2)),
                               make_state(b, BasisTag::single(3)));
    Matrix reduced = reduced_density(prod, 1);
    Matrix expected = (b * b.adjoint()) / b.squaredNorm();
    CHECK((reduced - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("basis mismatch is rejected") {
    QuantumState s = make_state(Vector::Ones(4), BasisTag({2, 2}));
    LinearOp op = identity_op(BasisTag::single(4));
    CHECK_THROWS_AS(expectation(s, op), SizeError);
}
