#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "flashsim/engine.hpp"
#include "flashsim/inference.hpp"
#include "oracles.hpp"

using namespace flashsim;

namespace {

QuantumState random_state(Index d, Rng& rng) {
    Vector v(d);
    for (Index i = 0; i < d; ++i) v(i) = Complex(rng.normal(), rng.normal());
    return make_state(std::move(v), BasisTag::single(d));
}

Matrix random_hermitian(Index d, Rng& rng) {
    Matrix g(d, d);
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j) g(i, j) = Complex(rng.normal(), rng.normal());
    return 0.5 * (g + g.adjoint());
}

NoisyObservationModel qubit_obs(double sigma) {
    RealVector d(2);
    d << 0.0, 1.0;
    return NoisyObservationModel(diagonal_op(d, BasisTag::single(2)), sigma);
}

}  // namespace

TEST_CASE("prior_from_state: point mass, symmetry, projector oracle") {
    NoisyObservationModel obs = qubit_obs(1.0);
    Vector e0(2);
    e0 << Complex(2.0), Complex(0.0);  // unnormalized eigenstate
    EigenPosterior p = prior_from_state(make_state(e0, BasisTag::single(2)), obs);
    CHECK(p.probabilities[0] == doctest::Approx(1.0));
    CHECK(p.probabilities[1] == doctest::Approx(0.0));

    Vector plus(2);
    plus << Complex(1.0), Complex(1.0);
    EigenPosterior half = prior_from_state(make_state(plus, BasisTag::single(2)), obs);
    CHECK(half.probabilities[0] == doctest::Approx(0.5));
    CHECK(half.probabilities[1] == doctest::Approx(0.5));

    // spectral projector oracle on a random 8-dim pair
    Rng rng(5);
    Matrix a = random_hermitian(8, rng);
    NoisyObservationModel obs8({a, BasisTag::single(8)}, 1.0);
    QuantumState psi = random_state(8, rng);
    EigenPosterior got = prior_from_state(psi, obs8);
    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    double total = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        double weight = 0.0;
        for (Index k = 0; k < 8; ++k)
            if (std::abs(es.eigenvalues()(k) - got.support[i]) < 1e-8)
                weight += std::norm(es.eigenvectors().col(k).dot(psi.amplitudes));
        weight /= psi.norm2();
        CHECK(std::abs(got.probabilities[i] - weight) < 1e-12);
        total += got.probabilities[i];
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
}

TEST_CASE("bayes_posterior: frozen two-point value and symmetries") {
    // prior {0: 1/2, 1: 1/2}, sigma = 1, z = 1 -> P(1|z) = 1/(1 + e^{-1/2})
    EigenPosterior prior{{0.0, 1.0}, {0.5, 0.5}};
    EigenPosterior post = bayes_posterior(prior, 1.0, 1.0);
    CHECK(post.probabilities[1] == doctest::Approx(0.6224593312018546).epsilon(1e-13));
    CHECK(post.probabilities[1] ==
          doctest::Approx(oracles::two_point_bayes(0.5, 0.0, 0.5, 1.0, 1.0, 1.0)).epsilon(1e-14));

    // z equidistant from equally weighted support points changes nothing
    EigenPosterior mid = bayes_posterior(prior, 0.5, 1.0);
    CHECK(mid.probabilities[0] == doctest::Approx(0.5).epsilon(1e-14));

    // an uninformative likelihood leaves the prior alone
    EigenPosterior wide = bayes_posterior(prior, 0.3, 1e6);
    CHECK(std::abs(wide.probabilities[0] - 0.5) < 1e-9);
}

TEST_CASE("collapse_posterior: equals the Bayes route (dual-path identity)") {
    Rng rng(17);
    for (Index d : {2, 4, 8, 16}) {
        NoisyObservationModel obs({random_hermitian(d, rng), BasisTag::single(d)}, 1.0);
        for (int rep = 0; rep < 25; ++rep) {
            QuantumState psi = random_state(d, rng);
            EigenPosterior prior = prior_from_state(psi, obs);
            const double z = rng.uniform(-6.0, 6.0 + static_cast<double>(d));
            EigenPosterior a = bayes_posterior(prior, z, obs.sigma());
            EigenPosterior b = collapse_posterior(psi, obs, z);
            CHECK(total_variation(a, b) <= 1e-12);
        }
    }
}

TEST_CASE("collapse_posterior: point mass stays put; frozen value reproduced") {
    NoisyObservationModel obs = qubit_obs(1.0);
    Vector e1(2);
    e1 << Complex(0.0), Complex(0.7);
    EigenPosterior p = collapse_posterior(make_state(e1, BasisTag::single(2)), obs, 0.2);
    CHECK(p.probabilities[1] == doctest::Approx(1.0));

    Vector plus(2);
    plus << Complex(1.0), Complex(1.0);
    EigenPosterior q = collapse_posterior(make_state(plus, BasisTag::single(2)), obs, 1.0);
    CHECK(q.probabilities[1] == doctest::Approx(0.6224593312018546).epsilon(1e-13));
}

TEST_CASE("dual path survives extreme z through the log-space guard") {
    NoisyObservationModel obs = qubit_obs(0.5);
    Vector v(2);
    v << Complex(0.8), Complex(0.6);
    QuantumState psi = make_state(v, BasisTag::single(2));
    EigenPosterior prior = prior_from_state(psi, obs);
    for (double z : {50.0, 120.0, -80.0}) {
        EigenPosterior a = bayes_posterior(prior, z, obs.sigma());
        EigenPosterior b = collapse_posterior(psi, obs, z);
        CHECK(total_variation(a, b) <= 1e-12);
        // far positive z pushes everything onto the upper eigenvalue
        if (z > 0) CHECK(a.probabilities[1] > 1.0 - 1e-10);
    }
}

TEST_CASE("marginal_density: point mass, frozen bimodal value, normalization") {
    NoisyObservationModel obs = qubit_obs(1.0);
    Vector e0(2);
    e0 << Complex(1.0), Complex(0.0);
    QuantumState ground = make_state(e0, BasisTag::single(2));
    for (double z : {-1.0, 0.0, 0.6})
        CHECK(marginal_density(ground, obs, z) ==
              doctest::Approx(oracles::normal_pdf(z, 0.0, 1.0)).epsilon(1e-13));

    // equal superposition at the midpoint: e^{-1/8} / sqrt(2 pi)
    Vector plus(2);
    plus << Complex(1.0), Complex(1.0);
    QuantumState sup = make_state(plus, BasisTag::single(2));
    CHECK(marginal_density(sup, obs, 0.5) ==
          doctest::Approx(0.3520653267642995).epsilon(1e-13));

    // integral over the default grid
    JumpFamily family = JumpFamily::gaussian_auto(obs.generator(), obs.sigma());
    const OutcomeGrid& g = family.grid();
    double mass = 0.0;
    for (int k = 0; k < g.n; ++k) mass += g.weight(k) * marginal_density(sup, obs, g.point(k));
    CHECK(std::abs(mass - 1.0) < 1e-8);
}

TEST_CASE("marginal_density equals engine outcome_density") {
    Rng rng(23);
    for (Index d : {2, 8}) {
        Matrix gen = random_hermitian(d, rng);
        NoisyObservationModel obs({gen, BasisTag::single(d)}, 0.8);
        JumpFamily family = JumpFamily::gaussian_auto({gen, BasisTag::single(d)}, 0.8);
        for (int rep = 0; rep < 20; ++rep) {
            QuantumState psi = random_state(d, rng);
            const double z = rng.uniform(-4.0, 4.0 + static_cast<double>(d));
            CHECK(std::abs(marginal_density(psi, obs, z) - outcome_density(psi, family, z)) <=
                  1e-12);
        }
    }
}

TEST_CASE("degenerate eigenvalues merge into one support point") {
    RealVector d4(4);
    d4 << 1.0, 1.0, 2.0, 2.0;
    NoisyObservationModel obs(diagonal_op(d4, BasisTag::single(4)), 1.0);
    CHECK(obs.support().size() == 2);
    Rng rng(31);
    QuantumState psi = random_state(4, rng);
    EigenPosterior p = prior_from_state(psi, obs);
    const double w1 = (std::norm(psi.amplitudes(0)) + std::norm(psi.amplitudes(1))) / psi.norm2();
    CHECK(p.probabilities[0] == doctest::Approx(w1).epsilon(1e-14));
}

TEST_CASE("wide noise makes the update ignorable") {
    Rng rng(41);
    Matrix gen = random_hermitian(6, rng);
    NoisyObservationModel tight({gen, BasisTag::single(6)}, 1.0);
    const double spread = tight.support().back() - tight.support().front();
    NoisyObservationModel wide({gen, BasisTag::single(6)}, 1e3 * spread);
    for (int rep = 0; rep < 10; ++rep) {
        QuantumState psi = random_state(6, rng);
        EigenPosterior prior = prior_from_state(psi, wide);
        std::vector<double> w = prior.probabilities;
        const std::size_t pick = rng.categorical(w.data(), w.size());
        const double z = rng.normal(prior.support[pick], wide.sigma());
        CHECK(total_variation(prior, bayes_posterior(prior, z, wide.sigma())) <= 1e-3);
    }
}

TEST_CASE("a jump on an uncorrelated factor leaves the local posterior unchanged") {
    Rng rng(51);
    const BasisTag tag({3, 3});
    RealVector da(3), db(3);
    da << 0.0, 1.0, 2.0;
    db << 0.0, 0.5, 1.0;
    Matrix diag_a = Matrix::Zero(3, 3), diag_b = Matrix::Zero(3, 3);
    for (int i = 0; i < 3; ++i) {
        diag_a(i, i) = da(i);
        diag_b(i, i) = db(i);
    }
    NoisyObservationModel obs_a(embed_at(diag_a, tag, 0), 1.0);
    JumpFamily family_b = JumpFamily::gaussian_auto(embed_at(diag_b, tag, 1), 0.4);
    for (int rep = 0; rep < 10; ++rep) {
        QuantumState psi = tensor(random_state(3, rng), random_state(3, rng));
        EigenPosterior before = prior_from_state(psi, obs_a);
        const double z = rng.uniform(-0.5, 1.5);
        EigenPosterior after = prior_from_state(collapse_apply(psi, family_b, z), obs_a);
        CHECK(total_variation(before, after) <= 1e-15);
    }
}

TEST_CASE("error paths: zero-norm states, underflow, bad sigma") {
    NoisyObservationModel obs = qubit_obs(1.0);
    QuantumState zero{Vector::Zero(2), BasisTag::single(2)};
    CHECK_THROWS_AS(prior_from_state(zero, obs), DegenerateStateError);
    CHECK_THROWS_AS(collapse_posterior(zero, obs, 0.0), DegenerateStateError);
    CHECK_THROWS_AS(qubit_obs(-1.0), ContractError);

    // a weightless prior has no posterior at any z
    EigenPosterior hollow{{0.0, 1.0}, {0.0, 0.0}};
    CHECK_THROWS_AS(bayes_posterior(hollow, 0.3, 1.0), UnderflowError);
    CHECK_THROWS_AS(bayes_posterior(hollow, 1e9, 1.0), UnderflowError);

    // extreme z stays exact through the log-space guard instead of underflowing
    EigenPosterior point{{0.0, 1.0}, {1.0, 0.0}};
    EigenPosterior far = bayes_posterior(point, 1e9, 1.0);
    CHECK(far.probabilities[0] == doctest::Approx(1.0));
}
