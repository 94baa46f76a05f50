#include "flashsim/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "flashsim/ensemble.hpp"
#include "flashsim/figure.hpp"
#include "flashsim/inference.hpp"
#include "flashsim/models.hpp"
#include "flashsim/parallel.hpp"
#include "flashsim/spacetime.hpp"
#include "flashsim/stats.hpp"
#include "flashsim/timesym.hpp"

namespace flashsim {

namespace {

using Clock = std::chrono::steady_clock;

struct Timer {
    Clock::time_point start = Clock::now();
    double seconds() const {
        return std::chrono::duration<double>(Clock::now() - start).count();
    }
};

Complex random_cnormal(Rng& rng) { return {rng.normal(), rng.normal()}; }

QuantumState random_state(Index d, Rng& rng) {
    Vector v(d);
    for (Index i = 0; i < d; ++i) v(i) = random_cnormal(rng);
    return make_state(std::move(v), BasisTag::single(d));
}

Matrix random_hermitian(Index d, Rng& rng) {
    Matrix g(d, d);
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j) g(i, j) = random_cnormal(rng);
    return 0.5 * (g + g.adjoint());
}

Matrix random_real_symmetric(Index d, Rng& rng) {
    Matrix g(d, d);
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j) g(i, j) = rng.normal();
    return 0.5 * (g + g.transpose());
}

Matrix random_density_matrix(Index d, Rng& rng) {
    Matrix g(d, d);
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j) g(i, j) = random_cnormal(rng);
    Matrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    return rho;
}

CheckResult below(std::string name, double value, double threshold, std::string note = {}) {
    return {std::move(name), value <= threshold, value, threshold, std::move(note)};
}

CheckResult above(std::string name, double value, double threshold, std::string note = {}) {
    return {std::move(name), value >= threshold, value, threshold, std::move(note)};
}

}  // namespace

// --- completeness ------------------------------------------------------------

SuiteReport verify_completeness() {
    Timer timer;
    SuiteReport rep;
    rep.suite = "completeness";

    GrwModel grw;
    const auto grw_rep = completeness_check(grw_family(grw, 0));
    rep.add(below("grw_family_completeness", grw_rep.max_deviation, grw_rep.tolerance));

    CslDiscreteModel csl;
    const auto csl_rep = completeness_check(csl_family(csl, 1));
    rep.add(below("csl_family_completeness", csl_rep.max_deviation, csl_rep.tolerance));

    RelativisticFieldSite site;
    site.fock_dim = 6;
    const auto rel_rep = completeness_check(relativistic_family(site));
    rep.add(below("relativistic_family_completeness", rel_rep.max_deviation, rel_rep.tolerance));

    rep.wall_seconds = timer.seconds();
    return rep;
}

// --- collapse = Bayes ---------------------------------------------------------

SuiteReport verify_bayes() {
    Timer timer;
    SuiteReport rep;
    rep.suite = "bayes";

    const double sigma = 1.0;
    double max_tv = 0.0;
    double max_marginal_diff = 0.0;
    for (Index d : {2, 4, 8, 16}) {
        Rng rng(0x9a5eb0c5 + static_cast<std::uint64_t>(d));
        NoisyObservationModel obs({random_hermitian(d, rng), BasisTag::single(d)}, sigma);
        JumpFamily family = JumpFamily::gaussian_auto(obs.generator(), sigma);
        const OutcomeGrid zg{family.grid().lo, family.grid().hi, 21};
        for (int s = 0; s < 100; ++s) {
            QuantumState psi = random_state(d, rng);
            EigenPosterior prior = prior_from_state(psi, obs);
            for (int k = 0; k < zg.n; ++k) {
                const double z = zg.point(k);
                const EigenPosterior via_bayes = bayes_posterior(prior, z, sigma);
                const EigenPosterior via_collapse = collapse_posterior(psi, obs, z);
                max_tv = std::max(max_tv, total_variation(via_bayes, via_collapse));
                max_marginal_diff =
                    std::max(max_marginal_diff, std::abs(marginal_density(psi, obs, z) -
                                                         outcome_density(psi, family, z)));
            }
        }
    }
    rep.add(below("collapse_vs_bayes_total_variation", max_tv, 1e-12,
                  "dims 2,4,8,16 x 100 states x 21 z"));
    rep.add(below("marginal_vs_outcome_density", max_marginal_diff, 1e-12));

    // wide-noise regime: the update is ignorable
    {
        Rng rng(0x77aa11);
        const Index d = 6;
        NoisyObservationModel obs({random_hermitian(d, rng), BasisTag::single(d)}, sigma);
        const double spread =
            *std::max_element(obs.support().begin(), obs.support().end()) -
            *std::min_element(obs.support().begin(), obs.support().end());
        const double wide_sigma = 1e3 * spread;
        double max_wide_tv = 0.0;
        for (int s = 0; s < 20; ++s) {
            QuantumState psi = random_state(d, rng);
            EigenPosterior prior = prior_from_state(psi, obs);
            // z from the marginal: Born eigenvalue plus wide noise
            std::vector<double> w = prior.probabilities;
            const std::size_t pick = rng.categorical(w.data(), w.size());
            const double z = rng.normal(prior.support[pick], wide_sigma);
            max_wide_tv =
                std::max(max_wide_tv, total_variation(prior, bayes_posterior(prior, z, wide_sigma)));
        }
        rep.add(below("wide_noise_posterior_shift", max_wide_tv, 1e-3,
                      "sigma = 1e3 x spectral spread"));
    }

    // a jump in an uncorrelated region leaves the local posterior alone
    {
        Rng rng(0x5151f3);
        const Index da = 4, db = 4;
        RealVector diag_a(da), diag_b(db);
        for (Index i = 0; i < da; ++i) diag_a(i) = static_cast<double>(i);
        for (Index i = 0; i < db; ++i) diag_b(i) = 0.7 * static_cast<double>(i);
        const BasisTag tag({da, db});
        LinearOp gen_a = embed_at(Matrix(diag_a.cast<Complex>().asDiagonal()), tag, 0);
        LinearOp gen_b = embed_at(Matrix(diag_b.cast<Complex>().asDiagonal()), tag, 1);
        NoisyObservationModel obs_a(gen_a, sigma);
        JumpFamily family_b = JumpFamily::gaussian_auto(gen_b, 0.5);
        double max_product_tv = 0.0;
        for (int s = 0; s < 20; ++s) {
            QuantumState psi = tensor(random_state(da, rng), random_state(db, rng));
            const double z = rng.uniform(-1.0, 3.0);
            EigenPosterior before = prior_from_state(psi, obs_a);
            EigenPosterior after = prior_from_state(collapse_apply(psi, family_b, z), obs_a);
            max_product_tv = std::max(max_product_tv, total_variation(before, after));
        }
        rep.add(below("distant_jump_leaves_posterior", max_product_tv, 1e-15,
                      "product states, jump on the other factor"));
    }

    rep.wall_seconds = timer.seconds();
    return rep;
}

// --- time reversal -------------------------------------------------------------

namespace {

struct TimesymSetup {
    SequenceSpec spec;
    BoundaryConditions bc;
};

TimesymSetup timesym_setup(Index d, std::size_t n_events, int grid_points, bool symmetric_h,
                           std::uint64_t seed) {
    Rng rng(seed);
    const BasisTag tag = BasisTag::single(d);
    Matrix h = symmetric_h ? random_real_symmetric(d, rng) : random_hermitian(d, rng);
    if (!symmetric_h) {
        // make the control genuinely non-symmetric: a complex phase on one hop
        h(0, 1) = Complex(0.0, 0.9);
        h(1, 0) = Complex(0.0, -0.9);
    }
    RealVector diag(d);
    for (Index i = 0; i < d; ++i) diag(i) = static_cast<double>(i);
    JumpFamily family = JumpFamily::gaussian_auto(diagonal_op(diag, tag), 1.0, {}, grid_points);
    SequenceSpec spec;
    spec.hamiltonian = {std::move(h), tag};
    spec.outcomes.assign(n_events, 0.0);
    spec.families.assign(n_events, family);
    for (std::size_t j = 0; j <= n_events; ++j)
        spec.intervals.push_back(rng.uniform(0.2, 1.3));
    BoundaryConditions bc =
        BoundaryConditions::make(random_density_matrix(d, rng), random_density_matrix(d, rng));
    return {std::move(spec), std::move(bc)};
}

// max over all grid sequences of |p_fwd - p_rev| / p_fwd
double max_reversal_asymmetry(const TimesymSetup& s) {
    const std::vector<double> fwd = sequence_numerator_table(s.spec, s.bc);
    double z_fwd = 0.0, z_rev = 0.0;
    SequenceSpec rev_spec = s.spec.reversed();
    BoundaryConditions rev_bc{conjugate_in_basis(s.bc.rho_final),
                              conjugate_in_basis(s.bc.rho_initial)};
    const std::vector<double> rev = sequence_numerator_table(rev_spec, rev_bc);
    // shared grid size per event
    const std::size_t n = s.spec.n_events();
    const std::size_t g = n ? static_cast<std::size_t>(s.spec.families[0].grid().n) : 1;
    // weights are uniform across events, so both normalizations use the same sum
    {
        const SequenceSpec& sp = s.spec;
        std::vector<double> w_cache(g, 0.0);
        for (std::size_t k = 0; k < g; ++k)
            w_cache[k] = n ? sp.families[0].grid().weight(static_cast<int>(k)) : 1.0;
        for (std::size_t flat = 0; flat < fwd.size(); ++flat) {
            double w = 1.0;
            std::size_t rem = flat;
            for (std::size_t j = 0; j < n; ++j) {
                w *= w_cache[rem % g];
                rem /= g;
            }
            z_fwd += fwd[flat] * w;
            z_rev += rev[flat] * w;
        }
        if (n == 0) {
            z_fwd = fwd[0];
            z_rev = rev[0];
        }
    }
    double max_asym = 0.0;
    for (std::size_t flat = 0; flat < fwd.size(); ++flat) {
        // reverse the outcome multi-index (base-g digits)
        std::size_t rev_flat = 0, rem = flat;
        for (std::size_t j = 0; j < n; ++j) {
            rev_flat = rev_flat * g + (rem % g);
            rem /= g;
        }
        const double p_fwd = fwd[flat] / z_fwd;
        const double p_rev = rev[rev_flat] / z_rev;
        if (p_fwd > 0.0)
            max_asym = std::max(max_asym, std::abs(p_fwd - p_rev) / p_fwd);
    }
    return max_asym;
}

}  // namespace

SuiteReport verify_timesym() {
    Timer timer;
    SuiteReport rep;
    rep.suite = "timesym";

    double worst = 0.0;
    double worst_sym_dev = 0.0;
    for (Index d : {2, 3}) {
        for (std::size_t n : {std::size_t{1}, std::size_t{2}, std::size_t{3}}) {
            TimesymSetup s = timesym_setup(d, n, 21, true, 0xbed0 + 31 * d + n);
            const auto sym = symmetry_condition_check(s.spec, 1e-12);
            worst_sym_dev = std::max(
                worst_sym_dev, std::max(sym.max_unitary_deviation, sym.max_jump_deviation));
            worst = std::max(worst, max_reversal_asymmetry(s));
        }
    }
    rep.add(below("symmetry_condition", worst_sym_dev, 1e-12,
                  "U(dt) and grid jumps symmetric in the collapse basis"));
    rep.add(below("forward_reverse_max_relative_gap", worst, 1e-10,
                  "qubit+qutrit, n in {1,2,3}, exhaustive 21-point grids"));

    // negative control: complex non-symmetric Hamiltonian must break it
    {
        TimesymSetup s = timesym_setup(2, 2, 21, false, 0xbad5eed);
        rep.add(above("asymmetric_h_control", max_reversal_asymmetry(s), 1e-2,
                      "complex-phase H; reversal identity must fail"));
    }

    // chain rule consistency: unconstrained final condition, single event
    {
        TimesymSetup s = timesym_setup(2, 1, kDefaultGridPoints, true, 0xfeed);
        Rng rng(0x1234);
        QuantumState psi = random_state(2, rng);
        BoundaryConditions bc = BoundaryConditions::unconstrained(pure_density(psi).entries);
        QuantumState evolved = evolve(psi, s.spec.hamiltonian, s.spec.intervals[0]);
        double max_diff = 0.0;
        for (int k = 0; k < 21; ++k) {
            const double z = s.spec.families[0].grid().lo +
                             (s.spec.families[0].grid().hi - s.spec.families[0].grid().lo) * k /
                                 20.0;
            SequenceSpec one = s.spec;
            one.outcomes = {z};
            const double p = sequence_probability(one, bc);
            const double q = outcome_density(evolved, one.families[0], z);
            max_diff = std::max(max_diff, std::abs(p - q));
        }
        rep.add(below("chain_rule_single_event", max_diff, 1e-12,
                      "rho_F = 1: boundary route equals the flat outcome density"));
    }

    // grid-doubling convergence of the normalized density
    {
        TimesymSetup coarse = timesym_setup(2, 2, 21, true, 0xc0ffee);
        TimesymSetup fine = coarse;
        JumpFamily fine_family = JumpFamily::gaussian_auto(
            diagonal_op((RealVector(2) << 0.0, 1.0).finished(), BasisTag::single(2)), 1.0, {}, 41);
        fine.spec.families.assign(2, fine_family);
        SequenceSpec probe = coarse.spec;
        probe.outcomes = {0.4, -0.3};
        SequenceSpec probe_fine = fine.spec;
        probe_fine.outcomes = probe.outcomes;
        const double p_coarse = sequence_probability(probe, coarse.bc);
        const double p_fine = sequence_probability(probe_fine, fine.bc);
        rep.add(below("normalization_grid_convergence",
                      std::abs(p_coarse - p_fine) / std::abs(p_fine), 1e-6,
                      "21 -> 41 quadrature points"));
    }

    rep.wall_seconds = timer.seconds();
    return rep;
}

// --- foliation independence -----------------------------------------------------

namespace {

LocalDynamics qubit_lattice_dynamics(const LatticeRegion& region) {
    const Index q = 2;
    Matrix h_local(q, q);
    h_local << Complex(0.2), Complex(0.5), Complex(0.5), Complex(-0.1);
    RealVector diag(q);
    diag << 0.0, 1.0;
    JumpFamily family =
        JumpFamily::gaussian_auto(diagonal_op(diag, BasisTag::single(q)), 0.6);
    std::vector<Matrix> hs(static_cast<std::size_t>(region.n_sites), h_local);
    std::vector<JumpFamily> fams(static_cast<std::size_t>(region.n_sites), family);
    return LocalDynamics(region, BasisTag::uniform(region.n_sites, q), std::move(hs),
                         std::move(fams));
}

struct FoliationCase {
    std::string name;
    FoliationComparison cmp;
    std::size_t n_events = 0;
};

FoliationCase foliation_case(const std::string& name, const LatticeRegion& region,
                             const QuantumState& initial, std::uint64_t sprinkle_seed,
                             double mu) {
    LocalDynamics dyn = qubit_lattice_dynamics(region);
    Rng rng(sprinkle_seed);
    CausalSprinkling events = sprinkle(region, mu, rng);
    const Cut start = Cut::level(region.n_sites, 0);
    const Cut end = Cut::level(region.n_sites, region.n_steps);
    // sample outcomes once along the first foliation, then replay everywhere
    const auto foliations = enumerate_foliations(start, end, region, std::nullopt, 10000);
    Rng sample_rng = Rng::substream(sprinkle_seed, 99);
    EvolutionMode sim;
    sim.rng = &sample_rng;
    FoliationRun run = evolve_along_foliation(initial, foliations[0], dyn, events, sim);
    FoliationCase fc;
    fc.name = name;
    fc.n_events = events.size();
    fc.cmp = compare_foliations(initial, start, end, dyn, events, run.outcomes, 10000);
    return fc;
}

}  // namespace

SuiteReport verify_foliation() {
    Timer timer;
    SuiteReport rep;
    rep.suite = "foliation";

    const LatticeRegion region22{2, 2, 1.0, 1.0};
    const LatticeRegion region31{3, 1, 1.0, 1.0};

    // product and entangled initial states on the 2-site lattice
    Vector prod4(4);
    prod4 << Complex(1.0), Complex(0.3), Complex(0.7), Complex(0.21);
    Vector ent4(4);
    ent4 << Complex(0.8), Complex(0.1, 0.2), Complex(-0.15), Complex(0.55, -0.1);
    Vector prod8(8);
    prod8 << Complex(1.0), Complex(0.4), Complex(0.5), Complex(0.2), Complex(0.6), Complex(0.24),
        Complex(0.3), Complex(0.12);
    Vector ent8(8);
    ent8 << Complex(0.7), Complex(0.05, 0.1), Complex(0.1), Complex(-0.2, 0.05), Complex(0.15),
        Complex(0.3, -0.25), Complex(-0.1), Complex(0.6);

    const std::vector<FoliationCase> cases = {
        foliation_case("2x2_product", region22, make_state(prod4, BasisTag::uniform(2, 2)),
                       0xf01a, 1.25),
        foliation_case("2x2_entangled", region22, make_state(ent4, BasisTag::uniform(2, 2)),
                       0xf01b, 1.25),
        foliation_case("3x1_product", region31, make_state(prod8, BasisTag::uniform(3, 2)),
                       0xf01c, 1.6),
        foliation_case("3x1_entangled", region31, make_state(ent8, BasisTag::uniform(3, 2)),
                       0xf01e, 1.6),
    };
    for (const auto& fc : cases) {
        std::ostringstream note;
        note << fc.cmp.n_foliations << " foliations, " << fc.n_events << " events";
        rep.add(below(fc.name + "_state_deviation", fc.cmp.max_state_deviation, 1e-12,
                      note.str()));
        rep.add(below(fc.name + "_probability_spread", fc.cmp.max_probability_spread, 1e-12));
        rep.add(above(fc.name + "_event_count", static_cast<double>(fc.n_events), 3.0,
                      "need >= 3 sprinkled events"));
    }

    const auto micro = microcausality_check(qubit_lattice_dynamics(region22));
    rep.add(below("microcausality_commutators", micro.max_commutator_norm, 0.0,
                  "single-site supports commute exactly"));

    rep.wall_seconds = timer.seconds();
    return rep;
}

// --- sprinkling statistics --------------------------------------------------------

SuiteReport verify_sprinkle() {
    Timer timer;
    SuiteReport rep;
    rep.suite = "sprinkle";

    const LatticeRegion region{5, 2, 1.0, 1.0};  // area 10
    const double mu = 2.0;                       // mean count 20
    const int n_samples = 10000;
    std::vector<std::uint64_t> counts(n_samples, 0);
    par::parallel_for(n_samples, [&](std::int64_t k) {
        Rng rng = Rng::substream(0x5e8a11, static_cast<std::uint64_t>(k));
        counts[static_cast<std::size_t>(k)] = sprinkle(region, mu, rng).size();
    });
    const auto gof = stats::chi2_poisson_gof(counts, mu * region.area());
    rep.add(above("poisson_count_gof_pvalue", gof.p_value, 0.01,
                  "chi-square over 1e4 sprinklings, mean 20"));

    double mean = 0.0, var = 0.0;
    for (auto c : counts) mean += static_cast<double>(c);
    mean /= n_samples;
    for (auto c : counts) var += (c - mean) * (c - mean);
    var /= n_samples - 1;
    rep.add(below("count_mean_error", std::abs(mean - 20.0), 4.0 * std::sqrt(20.0 / n_samples)));
    rep.add(below("count_variance_error", std::abs(var - 20.0), 5.0 * std::sqrt(2.0 * 400.0 / n_samples)));

    // boost invariance of the causal order, pair for pair
    {
        const int n_boost = 1000;
        const double rapidity = 0.6;
        std::vector<int> violations(n_boost, 0);
        std::vector<int> axiom_failures(n_boost, 0);
        par::parallel_for(n_boost, [&](std::int64_t k) {
            Rng rng = Rng::substream(0xb005a, static_cast<std::uint64_t>(k));
            CausalSprinkling s = sprinkle(region, mu, rng);
            CausalSprinkling b = boost(s, rapidity);
            const std::size_t n = s.size();
            int bad = 0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    if (i == j) continue;
                    // skip pairs within rounding distance of the lightcone
                    const double dt = s.events[j].t - s.events[i].t;
                    const double dx = s.events[j].x - s.events[i].x;
                    const double margin = std::abs(std::abs(dt) * s.light_speed) -
                                          std::abs(dx);
                    if (std::abs(margin) <= 1e-12) continue;
                    if (s.precedes(i, j) != b.precedes(i, j)) ++bad;
                }
            violations[static_cast<std::size_t>(k)] = bad;
            if (!check_causal_axioms(s).pass() || !check_causal_axioms(b).pass())
                axiom_failures[static_cast<std::size_t>(k)] = 1;
        });
        int total_bad = 0, total_axiom = 0;
        for (int v : violations) total_bad += v;
        for (int v : axiom_failures) total_axiom += v;
        rep.add(below("boost_order_violations", static_cast<double>(total_bad), 0.0,
                      "1e3 sprinklings, rapidity 0.6"));
        rep.add(below("causal_axiom_failures", static_cast<double>(total_axiom), 0.0,
                      "antisymmetry, transitivity, local finiteness"));
    }

    // counts in a fixed diamond, boosted vs direct sprinkling
    {
        const LatticeRegion big{12, 12, 1.0, 1.0};
        const double rapidity = 0.4;
        const double cx = 4.0, ct = 4.0, radius = 1.5;
        auto in_diamond = [&](double t, double x) {
            return std::abs(x - cx) + std::abs(t - ct) <= radius;
        };
        const int n = 1000;
        std::vector<double> boosted_counts(n, 0.0), direct_counts(n, 0.0);
        par::parallel_for(n, [&](std::int64_t k) {
            Rng rng_a = Rng::substream(0xd1a3, static_cast<std::uint64_t>(k));
            CausalSprinkling sa = boost(sprinkle(big, mu, rng_a), rapidity);
            double ca = 0.0;
            for (const auto& e : sa.events) ca += in_diamond(e.t, e.x) ? 1.0 : 0.0;
            boosted_counts[static_cast<std::size_t>(k)] = ca;
            Rng rng_b = Rng::substream(0xd1a4, static_cast<std::uint64_t>(k));
            CausalSprinkling sb = sprinkle(big, mu, rng_b);
            double cb = 0.0;
            for (const auto& e : sb.events) cb += in_diamond(e.t, e.x) ? 1.0 : 0.0;
            direct_counts[static_cast<std::size_t>(k)] = cb;
        });
        const auto ks = stats::ks_two_sample(boosted_counts, direct_counts);
        rep.add(above("boosted_diamond_count_ks_pvalue", ks.p_value, 0.01,
                      "equal invariant area; volume law is frame independent"));
    }

    rep.wall_seconds = timer.seconds();
    return rep;
}

// --- energy increase ----------------------------------------------------------------

namespace {

QuantumState low_occupation_state(const RelativisticFieldSite& site, int max_level, Rng& rng) {
    const Index q = site.fock_dim;
    Vector amp = Vector::Zero(q * q);
    for (Index na = 0; na <= max_level; ++na)
        for (Index nb = 0; nb <= max_level; ++nb)
            amp(na * q + nb) = random_cnormal(rng);
    return make_state(std::move(amp), site.basis());
}

}  // namespace

SuiteReport verify_energy() {
    Timer timer;
    SuiteReport rep;
    rep.suite = "energy";

    RelativisticFieldSite site;
    site.fock_dim = 8;
    site.beta = 0.05;
    Rng rng(0xe4e6);
    const LinearOp h = site.free_hamiltonian();

    double max_two_path_gap = 0.0;
    double min_delta_e = std::numeric_limits<double>::infinity();
    for (int s = 0; s < 6; ++s) {
        QuantumState psi = low_occupation_state(site, 3, rng);
        const auto r = energy_increase(psi, site, h);
        max_two_path_gap = std::max(max_two_path_gap, std::abs(r.quadrature - r.direct));
        min_delta_e = std::min(min_delta_e, r.quadrature);
    }
    rep.add(below("quadrature_vs_direct", max_two_path_gap, 1e-8,
                  "two-path energy increase, 6 random low-occupation states"));
    rep.add(above("delta_e_nonnegative", min_delta_e, -1e-10));

    // commuting case: a Hamiltonian diagonal in the collapse basis gains nothing
    {
        QuantumState psi = low_occupation_state(site, 3, rng);
        const auto r = energy_increase(psi, site, site.phi_dag_phi());
        rep.add(below("commuting_hamiltonian_delta_e", std::abs(r.quadrature), 1e-10));
    }

    // small-beta linearity
    {
        QuantumState psi = low_occupation_state(site, 2, rng);
        double slope_min = std::numeric_limits<double>::infinity(), slope_max = 0.0;
        for (double beta : {0.01, 0.02, 0.04}) {
            RelativisticFieldSite s2 = site;
            s2.beta = beta;
            const double slope = energy_increase(psi, s2, h).quadrature / beta;
            slope_min = std::min(slope_min, slope);
            slope_max = std::max(slope_max, slope);
        }
        rep.add(below("small_beta_linearity", slope_max / slope_min - 1.0, 0.05,
                      "delta E / beta constant over beta in {0.01,0.02,0.04}"));
    }

    // 1-D discreteness scaling: halving the spacing doubles the regularized
    // coefficient delta(0) ~ 1/a
    {
        RelativisticFieldSite fine = site, coarse = site;
        coarse.beta = fine.beta = 1e-5;
        fine.lattice_spacing = 0.5;
        Rng rng2(0xe4e7);
        QuantumState psi = low_occupation_state(site, 2, rng2);
        auto coefficient = [&](const RelativisticFieldSite& s) {
            const double de = energy_increase(psi, s, s.free_hamiltonian()).quadrature;
            const double phi2 = expectation(psi, s.phi_dag_phi()).real();
            return de / (0.5 * s.beta * phi2);
        };
        const double ratio = coefficient(fine) / coefficient(coarse);
        rep.add(below("spacing_halved_coefficient_doubles", std::abs(ratio - 2.0), 0.02));
    }

    rep.wall_seconds = timer.seconds();
    return rep;
}

// --- figure data ----------------------------------------------------------------------

SuiteReport verify_figure() {
    Timer timer;
    SuiteReport rep;
    rep.suite = "figure";

    FigureSpec spec;
    spec.seed = 0xf16;
    const auto points = emit_figure_data(spec);

    std::vector<double> panel2, panel3;
    for (const auto& p : points) {
        if (p.panel == 2) panel2.push_back(p.z);
        if (p.panel == 3) panel3.push_back(p.z);
    }
    rep.add(above("sprinkled_point_count", static_cast<double>(panel2.size()), 9000.0,
                  "Poisson mean 1e4"));
    std::vector<double> noise(panel2.size());
    for (std::size_t i = 0; i < panel2.size(); ++i) noise[i] = panel3[i] - panel2[i];
    const double measured = stats::stddev_of(noise);
    const double expected = spec.noise_sigma();
    rep.add(below("noise_std_relative_error", std::abs(measured - expected) / expected, 0.03,
                  "std(panel3 - panel2) vs (2 beta)^{-1/2}"));

    // exact panel-2 values along the blob ridge average to the peak density
    {
        double ridge_sum = 0.0;
        int ridge_n = 0;
        const double half_width = 0.15 * spec.width;
        for (const auto& p : points)
            if (p.panel == 2 && std::abs(p.x - spec.velocity * p.t) <= half_width) {
                ridge_sum += p.z;
                ++ridge_n;
            }
        const double ridge_mean = ridge_sum / ridge_n;
        rep.add(below("blob_ridge_mean_error", std::abs(ridge_mean - spec.rho0) / spec.rho0,
                      0.02, std::to_string(ridge_n) + " points within 0.15 w of x = v t"));
    }

    // determinism and the infinite-beta (noise-free) flag
    const auto again = emit_figure_data(spec);
    bool identical = again.size() == points.size();
    for (std::size_t i = 0; identical && i < points.size(); ++i)
        identical = points[i].panel == again[i].panel && points[i].t == again[i].t &&
                    points[i].x == again[i].x && points[i].z == again[i].z;
    rep.add({"figure_deterministic_under_seed", identical, identical ? 0.0 : 1.0, 0.0, {}});

    FigureSpec quiet = spec;
    quiet.beta = std::numeric_limits<double>::infinity();
    const auto noiseless = emit_figure_data(quiet);
    double max_gap = 0.0;
    std::size_t i3 = 0;
    for (std::size_t i = 0; i < noiseless.size(); ++i)
        if (noiseless[i].panel == 3) {
            max_gap = std::max(max_gap, std::abs(noiseless[i].z - panel2[i3]));
            ++i3;
        }
    rep.add(below("infinite_beta_matches_exact_panel", max_gap, 0.0));

    rep.wall_seconds = timer.seconds();
    return rep;
}

// --- GRW localization phenomenology ------------------------------------------------

SuiteReport verify_grw_localization() {
    Timer timer;
    SuiteReport rep;
    rep.suite = "grw";

    GrwModel model;
    model.grid = {-4.0, 4.0, 64};
    model.alpha = 10.0;
    const double separation = std::sqrt(16.0 / model.alpha);  // alpha D^2 = 16
    const double packet_w = 0.25;

    Vector amp = grw_gaussian_packet(model, -0.5 * separation, packet_w).amplitudes +
                 grw_gaussian_packet(model, 0.5 * separation, packet_w).amplitudes;
    const QuantumState initial = make_state(amp, model.basis());

    // one collapse per trajectory; classify the branch by the outcome sign
    CollapseModel cm = grw_collapse_model(model);
    EventSchedule schedule = EventSchedule::explicit_list({{0.005, 0, std::nullopt, 0}}, 0.01);
    const int n_traj = 10000;
    const auto ensemble = run_ensemble(cm, initial, schedule, 0x62a7c4, n_traj);
    int right = 0;
    for (const auto& traj : ensemble)
        if (traj.flashes.at(0).z > 0.0) ++right;
    const double frequency = static_cast<double>(right) / n_traj;
    rep.add(below("branch_frequency_error", std::abs(frequency - 0.5), 0.02,
                  "1e4 trajectories, alpha D^2 = 16"));

    // collapse onto one branch suppresses the other by at least e^{-alpha D^2/4}
    {
        JumpFamily family = grw_family(model, 0);
        QuantumState collapsed = collapse_apply(initial, family, -0.5 * separation);
        const auto site_of = [&](double x) {
            int best = 0;
            double dist = 1e300;
            for (int i = 0; i < model.grid.n_sites; ++i)
                if (std::abs(model.grid.site_x(i) - x) < dist) {
                    dist = std::abs(model.grid.site_x(i) - x);
                    best = i;
                }
            return best;
        };
        const double kept = std::abs(collapsed.amplitudes(site_of(-0.5 * separation)));
        const double suppressed = std::abs(collapsed.amplitudes(site_of(0.5 * separation)));
        rep.add(below("cross_branch_amplitude_ratio", suppressed / kept, std::exp(-4.0),
                      "z at one branch center"));
    }

    rep.wall_seconds = timer.seconds();
    return rep;
}

std::vector<SuiteReport> run_suites(const std::string& name) {
    if (name == "completeness") return {verify_completeness()};
    if (name == "bayes") return {verify_bayes()};
    if (name == "timesym") return {verify_timesym()};
    if (name == "foliation") return {verify_foliation()};
    if (name == "sprinkle") return {verify_sprinkle()};
    if (name == "energy") return {verify_energy()};
    if (name == "all")
        return {verify_completeness(), verify_bayes(),    verify_timesym(),
                verify_foliation(),    verify_sprinkle(), verify_energy()};
    throw ConfigError("unknown verification suite '" + name +
                      "' (expected completeness|bayes|timesym|foliation|sprinkle|energy|all)");
}

}  // namespace flashsim
