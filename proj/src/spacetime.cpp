#include "flashsim/spacetime.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "flashsim/parallel.hpp"

namespace flashsim {

// --- region ------------------------------------------------------------------

void LatticeRegion::validate() const {
    if (n_sites < 1 || n_steps < 1) throw ContractError("region: need sites and steps");
    if (spacing <= 0.0 || dt <= 0.0) throw ContractError("region: spacing and dt must be positive");
}

int LatticeRegion::nearest_site(double x) const {
    // site i occupies [i*spacing, (i+1)*spacing); nearest center, ties down
    int best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_sites; ++i) {
        const double center = (i + 0.5) * spacing;
        const double d = std::abs(x - center);
        if (d < best_dist) {
            best_dist = d;
            best = i;
        }
    }
    return best;
}

int LatticeRegion::plaquette(double t) const {
    int k = static_cast<int>(std::floor(t / dt));
    return std::clamp(k, 0, n_steps - 1);
}

// --- sprinkling ----------------------------------------------------------------

namespace {

void compute_order(CausalSprinkling& s) {
    const std::size_t n = s.events.size();
    s.order_matrix.assign(n * n, false);
    const double c = s.light_speed;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double dtij = s.events[j].t - s.events[i].t;
            if (dtij <= 0.0) continue;
            if (std::abs(s.events[j].x - s.events[i].x) <= c * dtij)
                s.order_matrix[i * n + j] = true;
        }
}

}  // namespace

CausalSprinkling sprinkle(const LatticeRegion& region, double mu, Rng& rng) {
    region.validate();
    if (mu < 0.0) throw ContractError("sprinkle: density must be nonnegative");
    CausalSprinkling s;
    s.region = region;
    s.light_speed = region.light_speed();
    const std::uint64_t count = rng.poisson(mu * region.area());
    s.events.reserve(count);
    for (std::uint64_t k = 0; k < count; ++k) {
        SprinkledEvent e;
        e.id = static_cast<int>(k);
        e.t = rng.uniform(0.0, region.duration());
        e.x = rng.uniform(0.0, region.width());
        e.assigned_site = region.nearest_site(e.x);
        s.events.push_back(e);
    }
    compute_order(s);
    return s;
}

CausalSprinkling boost(const CausalSprinkling& sprinkling, double rapidity) {
    CausalSprinkling out = sprinkling;
    const double c = sprinkling.light_speed;
    const double ch = std::cosh(rapidity), sh = std::sinh(rapidity);
    for (auto& e : out.events) {
        const double ct = c * e.t, x = e.x;
        const double ct_new = ct * ch - x * sh;
        e.x = x * ch - ct * sh;
        e.t = ct_new / c;
    }
    // region degrades to a bounding box purely for reporting
    if (!out.events.empty()) {
        double t_max = 0.0, x_max = 0.0;
        for (const auto& e : out.events) {
            t_max = std::max(t_max, std::abs(e.t));
            x_max = std::max(x_max, std::abs(e.x));
        }
        out.region.n_steps = std::max(1, static_cast<int>(std::ceil(2.0 * t_max /
                                                                    out.region.dt)) + 1);
        out.region.n_sites = std::max(1, static_cast<int>(std::ceil(2.0 * x_max /
                                                                    out.region.spacing)) + 1);
    }
    compute_order(out);
    return out;
}

CausalAxiomReport check_causal_axioms(const CausalSprinkling& s) {
    CausalAxiomReport rep;
    const std::size_t n = s.size();
    for (std::size_t i = 0; i < n && rep.antisymmetric; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && s.precedes(i, j) && s.precedes(j, i)) {
                rep.antisymmetric = false;
                break;
            }
    // order must equal its own transitive closure
    std::vector<bool> closure = s.order_matrix;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i) {
            if (!closure[i * n + k]) continue;
            for (std::size_t j = 0; j < n; ++j)
                if (closure[k * n + j] && !closure[i * n + j]) closure[i * n + j] = true;
        }
    rep.transitive = closure == s.order_matrix;
    // every order interval is finite for a finite sample; record the largest
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (!s.precedes(i, j)) continue;
            std::size_t card = 0;
            for (std::size_t k = 0; k < n; ++k)
                if (s.precedes(i, k) && s.precedes(k, j)) ++card;
            rep.max_interval_cardinality = std::max(rep.max_interval_cardinality, card);
        }
    rep.locally_finite = true;
    return rep;
}

void sprinkling_to_csv(const CausalSprinkling& s, std::ostream& os) {
    os << "event_id,t,x,site,z\n";
    char buf[128];
    for (const auto& e : s.events) {
        if (e.z)
            std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%d,%.17g\n", e.id, e.t, e.x,
                          e.assigned_site, *e.z);
        else
            std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%d,\n", e.id, e.t, e.x,
                          e.assigned_site);
        os << buf;
    }
}

EventSchedule schedule_from_sprinkling(const CausalSprinkling& s) {
    std::vector<ScheduledEvent> events;
    events.reserve(s.size());
    for (const auto& e : s.events) events.push_back({e.t, e.assigned_site, e.x, e.id});
    return EventSchedule::explicit_list(std::move(events), s.region.duration());
}

// --- cuts and foliations --------------------------------------------------------

Cut Cut::level(int n_sites, int step) {
    Cut c;
    c.sigma.assign(static_cast<std::size_t>(n_sites), step);
    return c;
}

bool cut_valid(const Cut& cut, const LatticeRegion& region, std::optional<int> slope_limit) {
    if (static_cast<int>(cut.sigma.size()) != region.n_sites) return false;
    for (int s : cut.sigma)
        if (s < 0 || s > region.n_steps) return false;
    if (slope_limit)
        for (std::size_t i = 0; i + 1 < cut.sigma.size(); ++i)
            if (std::abs(cut.sigma[i + 1] - cut.sigma[i]) > *slope_limit) return false;
    return true;
}

namespace {

double path_count_estimate(const Cut& start, const Cut& end) {
    double log_paths = 0.0;
    int total = 0;
    for (std::size_t i = 0; i < start.sigma.size(); ++i) {
        const int r = end.sigma[i] - start.sigma[i];
        total += r;
        log_paths -= std::lgamma(r + 1.0);
    }
    log_paths += std::lgamma(total + 1.0);
    return std::exp(log_paths);
}

void enumerate_rec(const Cut& current, const Cut& end, const LatticeRegion& region,
                   std::optional<int> slope_limit, std::vector<FoliationStep>& prefix,
                   std::vector<Foliation>& out, const Cut& start, std::size_t cap) {
    if (current == end) {
        out.push_back({start, end, prefix});
        if (out.size() > cap)
            throw EnumerationError("enumerate_foliations: more than " + std::to_string(cap) +
                                   " foliations");
        return;
    }
    for (std::size_t site = 0; site < current.sigma.size(); ++site) {
        if (current.sigma[site] >= end.sigma[site]) continue;
        Cut next = current;
        next.sigma[site] += 1;
        if (!cut_valid(next, region, slope_limit)) continue;
        prefix.push_back({static_cast<int>(site), current.sigma[site]});
        enumerate_rec(next, end, region, slope_limit, prefix, out, start, cap);
        prefix.pop_back();
    }
}

}  // namespace

std::vector<Foliation> enumerate_foliations(const Cut& start, const Cut& end,
                                            const LatticeRegion& region,
                                            std::optional<int> slope_limit, std::size_t cap) {
    if (!cut_valid(start, region, slope_limit) || !cut_valid(end, region, slope_limit))
        throw ContractError("enumerate_foliations: invalid boundary cut");
    for (std::size_t i = 0; i < start.sigma.size(); ++i)
        if (start.sigma[i] > end.sigma[i])
            throw ContractError("enumerate_foliations: start is not before end");
    const double estimate = path_count_estimate(start, end);
    if (estimate > static_cast<double>(cap) * 4.0)
        throw EnumerationError("enumerate_foliations: estimated " + std::to_string(estimate) +
                               " monotone paths exceeds cap " + std::to_string(cap));
    std::vector<Foliation> out;
    std::vector<FoliationStep> prefix;
    enumerate_rec(start, end, region, slope_limit, prefix, out, start, cap);
    return out;
}

// --- local dynamics ---------------------------------------------------------------

LocalDynamics::LocalDynamics(LatticeRegion region, BasisTag lattice_basis,
                             std::vector<Matrix> h_int, std::vector<JumpFamily> site_families,
                             std::optional<int> slope_limit)
    : region_(region),
      basis_(std::move(lattice_basis)),
      h_int_(std::move(h_int)),
      local_families_(std::move(site_families)),
      slope_limit_(slope_limit) {
    region_.validate();
    if (static_cast<int>(basis_.n_subsystems()) != region_.n_sites)
        throw SizeError("dynamics: basis must declare one subsystem per site");
    if (h_int_.size() != basis_.n_subsystems() || local_families_.size() != basis_.n_subsystems())
        throw SizeError("dynamics: need one Hamiltonian and one family per site");
    if (basis_.total() > kMaxDimension) throw SizeError("dynamics: dimension exceeds cap");
    for (std::size_t s = 0; s < basis_.n_subsystems(); ++s) {
        const Index d = basis_.dims[s];
        if (h_int_[s].rows() != d || h_int_[s].cols() != d)
            throw SizeError("dynamics: site Hamiltonian dimension mismatch");
        if (hermiticity_deviation(h_int_[s]) > kHermitianTol)
            throw ContractError("dynamics: site Hamiltonian not Hermitian");
        if (local_families_[s].basis().total() != d)
            throw SizeError("dynamics: site family dimension mismatch");
        embedded_families_.push_back(local_families_[s].embedded(basis_, s));
        LinearOp u_local = unitary_from_hamiltonian(
            {h_int_[s], BasisTag::single(d)}, region_.dt);
        embedded_unitaries_.push_back(embed_at(u_local.entries, basis_, s).entries);
    }
}

LinearOp LocalDynamics::embedded_hamiltonian(std::size_t site) const {
    return embed_at(h_int_[site], basis_, site);
}

MicrocausalityReport microcausality_check(const LocalDynamics& dyn, int z_samples) {
    MicrocausalityReport rep;
    const std::size_t n = dyn.n_sites();
    auto sample_zs = [&](const JumpFamily& f) {
        std::vector<double> zs;
        const OutcomeGrid& g = f.grid();
        for (int k = 0; k < z_samples; ++k)
            zs.push_back(g.lo + (g.hi - g.lo) * (k + 0.5) / z_samples);
        return zs;
    };
    auto consider = [&](double norm, std::size_t a, std::size_t b) {
        if (norm > rep.max_commutator_norm) {
            rep.max_commutator_norm = norm;
            rep.site_a = a;
            rep.site_b = b;
        }
    };
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            if (a == b) continue;
            const auto za = sample_zs(dyn.embedded_family(a));
            const auto zb = sample_zs(dyn.embedded_family(b));
            const Matrix hb = dyn.embedded_hamiltonian(b).entries;
            for (double z1 : za) {
                const Matrix ja = dyn.embedded_family(a).jump_at(z1).entries;
                consider((ja * hb - hb * ja).cwiseAbs().maxCoeff(), a, b);
                for (double z2 : zb) {
                    const Matrix jb = dyn.embedded_family(b).jump_at(z2).entries;
                    consider((ja * jb - jb * ja).cwiseAbs().maxCoeff(), a, b);
                }
            }
        }
    rep.pass = rep.max_commutator_norm == 0.0;
    return rep;
}

// --- hypersurface evolution ----------------------------------------------------

namespace {

std::vector<const SprinkledEvent*> events_in_plaquette(const CausalSprinkling& events,
                                                       const LatticeRegion& region, int site,
                                                       int step) {
    std::vector<const SprinkledEvent*> found;
    for (const auto& e : events.events)
        if (e.assigned_site == site && region.plaquette(e.t) == step) found.push_back(&e);
    std::sort(found.begin(), found.end(), [](const SprinkledEvent* a, const SprinkledEvent* b) {
        if (a->t != b->t) return a->t < b->t;
        return a->x < b->x;
    });
    return found;
}

}  // namespace

std::pair<QuantumState, Cut> advance(const QuantumState& state, const Cut& cut, int site,
                                     const LocalDynamics& dyn, const CausalSprinkling& events,
                                     const EvolutionMode& mode,
                                     std::vector<FlashRecord>* flashes) {
    const LatticeRegion& region = dyn.region();
    if (state.basis != dyn.basis()) throw SizeError("advance: basis mismatch");
    if (site < 0 || site >= region.n_sites) throw SizeError("advance: site out of range");
    if (!cut_valid(cut, region, dyn.slope_limit())) throw ReplayError("advance: invalid cut");
    const int step = cut.sigma[static_cast<std::size_t>(site)];
    Cut next = cut;
    next.sigma[static_cast<std::size_t>(site)] += 1;
    if (!cut_valid(next, region, dyn.slope_limit()))
        throw ReplayError("advance: resulting cut invalid at site " + std::to_string(site));

    QuantumState out{dyn.embedded_unitary(static_cast<std::size_t>(site)) * state.amplitudes,
                     state.basis};
    const JumpFamily& family = dyn.embedded_family(static_cast<std::size_t>(site));
    for (const SprinkledEvent* e : events_in_plaquette(events, region, site, step)) {
        double z;
        if (mode.replay) {
            auto it = mode.replay->find(e->id);
            if (it == mode.replay->end())
                throw ReplayError("advance: no outcome assigned to event " +
                                  std::to_string(e->id));
            z = it->second;
        } else if (mode.rng) {
            z = sample_outcome(out, family, *mode.rng);
        } else {
            throw ContractError("advance: mode needs either outcomes or an rng");
        }
        if (mode.density_product) *mode.density_product *= outcome_density(out, family, z);
        out = collapse_apply(out, family, z);
        if (mode.sampled) (*mode.sampled)[e->id] = z;
        if (flashes) flashes->push_back({e->t, site, e->x, z});
    }
    return {std::move(out), std::move(next)};
}

FoliationRun evolve_along_foliation(const QuantumState& state, const Foliation& fol,
                                    const LocalDynamics& dyn, const CausalSprinkling& events,
                                    EvolutionMode mode) {
    FoliationRun run;
    if (!mode.sampled && mode.rng) mode.sampled = &run.outcomes;
    if (mode.replay) run.outcomes = *mode.replay;
    QuantumState s = state;
    Cut cut = fol.start;
    for (const auto& step : fol.steps) {
        if (cut.sigma[static_cast<std::size_t>(step.site)] != step.from_step)
            throw ReplayError("foliation: step does not match the running cut");
        auto [s2, c2] = advance(s, cut, step.site, dyn, events, mode, &run.flashes);
        s = std::move(s2);
        cut = std::move(c2);
    }
    if (!(cut == fol.end)) throw ReplayError("foliation: steps do not reach the end cut");
    run.final_state = std::move(s);
    return run;
}

double region_outcome_probability(const QuantumState& initial, const Cut& start, const Cut& end,
                                  const LocalDynamics& dyn, const CausalSprinkling& events,
                                  const OutcomeMap& outcomes, const Foliation& via) {
    if (!(via.start == start) || !(via.end == end))
        throw ContractError("region_outcome_probability: foliation does not span the region");
    EvolutionMode mode;
    mode.replay = &outcomes;
    double density_product = 1.0;
    mode.density_product = &density_product;
    evolve_along_foliation(initial, via, dyn, events, mode);
    return density_product;
}

namespace {

FoliationComparison compare_foliations_impl(const QuantumState& initial, const Cut& start,
                                            const Cut& end, const LocalDynamics& dyn,
                                            const CausalSprinkling& events,
                                            const OutcomeMap& outcomes, std::size_t cap,
                                            bool parallel) {
    const auto foliations = enumerate_foliations(start, end, dyn.region(), dyn.slope_limit(), cap);
    FoliationComparison cmp;
    cmp.n_foliations = foliations.size();
    if (foliations.empty()) return cmp;
    std::vector<Vector> finals(foliations.size());
    std::vector<double> probs(foliations.size(), 0.0);
    auto body = [&](std::int64_t i) {
        EvolutionMode mode;
        mode.replay = &outcomes;
        double density_product = 1.0;
        mode.density_product = &density_product;
        FoliationRun run = evolve_along_foliation(initial, foliations[static_cast<std::size_t>(i)],
                                                  dyn, events, mode);
        finals[static_cast<std::size_t>(i)] = std::move(run.final_state.amplitudes);
        probs[static_cast<std::size_t>(i)] = density_product;
    };
    if (parallel)
        par::parallel_for(static_cast<std::int64_t>(foliations.size()), body);
    else
        par::serial_for(static_cast<std::int64_t>(foliations.size()), body);
    double p_min = probs[0], p_max = probs[0];
    for (std::size_t i = 1; i < foliations.size(); ++i) {
        cmp.max_state_deviation =
            std::max(cmp.max_state_deviation, (finals[i] - finals[0]).cwiseAbs().maxCoeff());
        p_min = std::min(p_min, probs[i]);
        p_max = std::max(p_max, probs[i]);
    }
    cmp.max_probability_spread = p_max > 0.0 ? (p_max - p_min) / p_max : 0.0;
    return cmp;
}

}  // namespace

FoliationComparison compare_foliations(const QuantumState& initial, const Cut& start,
                                       const Cut& end, const LocalDynamics& dyn,
                                       const CausalSprinkling& events, const OutcomeMap& outcomes,
                                       std::size_t cap) {
    return compare_foliations_impl(initial, start, end, dyn, events, outcomes, cap, true);
}

FoliationComparison compare_foliations_serial(const QuantumState& initial, const Cut& start,
                                              const Cut& end, const LocalDynamics& dyn,
                                              const CausalSprinkling& events,
                                              const OutcomeMap& outcomes, std::size_t cap) {
    return compare_foliations_impl(initial, start, end, dyn, events, outcomes, cap, false);
}

// --- energy increase --------------------------------------------------------------

EnergyIncreaseReport energy_increase(const QuantumState& state,
                                     const RelativisticFieldSite& site_model, const LinearOp& h,
                                     std::optional<OutcomeGrid> grid) {
    site_model.validate();
    if (hermiticity_deviation(h.entries) > kHermitianTol)
        throw ContractError("energy_increase: Hamiltonian not Hermitian");
    if (state.basis != h.basis || h.basis != site_model.basis())
        throw SizeError("energy_increase: basis mismatch");
    const double n2 = state.norm2();
    if (n2 == 0.0) throw DegenerateStateError("energy_increase: zero-norm state");

    JumpFamily family = relativistic_family(site_model);
    const double pad = 8.0 / std::sqrt(site_model.beta);
    OutcomeGrid g = grid.value_or(OutcomeGrid::covering(family.eigenvalues().minCoeff(),
                                                        family.eigenvalues().maxCoeff(),
                                                        1.0 / std::sqrt(site_model.beta), 8.0,
                                                        kDefaultGridPoints));
    if (g.lo > family.eigenvalues().minCoeff() - pad + 1e-12 ||
        g.hi < family.eigenvalues().maxCoeff() + pad - 1e-12)
        throw ContractError("energy_increase: grid does not cover the spectrum +- 8/sqrt(beta)");

    const Vector& psi = state.amplitudes;
    const Matrix& H = h.entries;
    double quadrature = 0.0;
    double jhj_total = 0.0;
    for (int k = 0; k < g.n; ++k) {
        const Matrix j = family.jump_at(g.point(k)).entries;
        const Vector jpsi = j * psi;
        const Vector hjpsi = H * jpsi;
        // <psi| J H J |psi> and <psi| J J H |psi>
        const double jhj = jpsi.dot(hjpsi).real();
        const Complex jjh = jpsi.dot(j * (H * psi));
        quadrature += g.weight(k) * (jhj - jjh.real());
        jhj_total += g.weight(k) * jhj;
    }
    EnergyIncreaseReport rep;
    rep.quadrature = quadrature / n2;
    const double e_before = psi.dot(H * psi).real() / n2;
    rep.direct = jhj_total / n2 - e_before;
    return rep;
}

}  // namespace flashsim
