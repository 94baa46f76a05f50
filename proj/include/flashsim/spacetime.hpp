#ifndef FLASHSIM_SPACETIME_HPP
#define FLASHSIM_SPACETIME_HPP

#include <iosfwd>
#include <map>
#include <optional>
#include <vector>

#include "flashsim/engine.hpp"
#include "flashsim/models.hpp"
#include "flashsim/qalg.hpp"
#include "flashsim/rng.hpp"

namespace flashsim {

// --- lattice region and sprinkled events -----------------------------------

struct LatticeRegion {
    int n_sites = 2;
    int n_steps = 2;
    double spacing = 1.0;  // lattice unit of length
    double dt = 1.0;       // lattice unit of time; lightcone speed = spacing/dt

    double width() const { return n_sites * spacing; }
    double duration() const { return n_steps * dt; }
    double area() const { return width() * duration(); }
    double light_speed() const { return spacing / dt; }
    void validate() const;
    int nearest_site(double x) const;  // ties to the lower index
    int plaquette(double t) const;     // timestep index containing t
};

struct SprinkledEvent {
    int id = 0;
    double t = 0.0;
    double x = 0.0;
    int assigned_site = 0;
    std::optional<double> z;  // outcome, filled after simulation
};

// Poisson-sprinkled event set with the lightcone causal order.
struct CausalSprinkling {
    LatticeRegion region;
    double light_speed = 1.0;
    std::vector<SprinkledEvent> events;
    // order(i, j) == true iff event i strictly precedes event j
    std::vector<bool> order_matrix;

    std::size_t size() const { return events.size(); }
    bool precedes(std::size_t i, std::size_t j) const {
        return order_matrix[i * events.size() + j];
    }
};

// count ~ Poisson(mu * area), positions i.i.d. uniform over the region
CausalSprinkling sprinkle(const LatticeRegion& region, double mu, Rng& rng);

// 1+1 Lorentz boost of all event coordinates; the causal order is recomputed
// from the boosted coordinates (and must match pair-for-pair).  The carried
// region becomes a bounding box; site assignments keep their original labels.
CausalSprinkling boost(const CausalSprinkling& sprinkling, double rapidity);

struct CausalAxiomReport {
    bool antisymmetric = true;
    bool transitive = true;
    bool locally_finite = true;
    std::size_t max_interval_cardinality = 0;
    bool pass() const { return antisymmetric && transitive && locally_finite; }
};

CausalAxiomReport check_causal_axioms(const CausalSprinkling& s);

// header `event_id,t,x,site,z`; z column empty when unset
void sprinkling_to_csv(const CausalSprinkling& s, std::ostream& os);

// sprinkled events as an explicit trajectory schedule: one subsystem per
// lattice site, event times and positions taken from the sprinkling
EventSchedule schedule_from_sprinkling(const CausalSprinkling& s);

// --- cuts and foliations -----------------------------------------------------

// Spacelike cut: timestep reached at each site.  A slope limit of nullopt
// admits every staircase cut (the default; single-site dynamics commute at
// distinct sites, so every interleaving is physical).
struct Cut {
    std::vector<int> sigma;

    static Cut level(int n_sites, int step);
    bool operator==(const Cut&) const = default;
};

bool cut_valid(const Cut& cut, const LatticeRegion& region, std::optional<int> slope_limit);

struct FoliationStep {
    int site = 0;
    int from_step = 0;
};

struct Foliation {
    Cut start;
    Cut end;
    std::vector<FoliationStep> steps;
};

// all monotone elementary-advance orderings from start to end; throws
// EnumerationError (with a path-count estimate) past `cap`
std::vector<Foliation> enumerate_foliations(const Cut& start, const Cut& end,
                                            const LatticeRegion& region,
                                            std::optional<int> slope_limit, std::size_t cap);

// --- local dynamics ----------------------------------------------------------

// outcome assignment per sprinkled event id
using OutcomeMap = std::map<int, double>;

// Strictly single-site interaction and jump operators on a lattice of small
// quantum systems.  Operators at distinct sites act on disjoint tensor
// factors, so microcausality holds exactly, not approximately.  Embedded
// unitaries and families are precomputed against the region's dt.
class LocalDynamics {
public:
    LocalDynamics(LatticeRegion region, BasisTag lattice_basis, std::vector<Matrix> h_int,
                  std::vector<JumpFamily> site_families,
                  std::optional<int> slope_limit = std::nullopt);

    const LatticeRegion& region() const { return region_; }
    const BasisTag& basis() const { return basis_; }
    std::size_t n_sites() const { return basis_.n_subsystems(); }
    std::optional<int> slope_limit() const { return slope_limit_; }

    const Matrix& site_hamiltonian(std::size_t site) const { return h_int_[site]; }
    const JumpFamily& local_family(std::size_t site) const { return local_families_[site]; }
    const JumpFamily& embedded_family(std::size_t site) const { return embedded_families_[site]; }
    const Matrix& embedded_unitary(std::size_t site) const { return embedded_unitaries_[site]; }
    LinearOp embedded_hamiltonian(std::size_t site) const;

private:
    LatticeRegion region_;
    BasisTag basis_;
    std::vector<Matrix> h_int_;
    std::vector<JumpFamily> local_families_;
    std::vector<JumpFamily> embedded_families_;
    std::vector<Matrix> embedded_unitaries_;
    std::optional<int> slope_limit_;
};

struct MicrocausalityReport {
    double max_commutator_norm = 0.0;
    std::size_t site_a = 0;
    std::size_t site_b = 0;
    bool pass = true;
};

// max commutator norm over distinct-site pairs of jump and interaction
// operators at sampled outcomes; zero exactly for single-site supports
MicrocausalityReport microcausality_check(const LocalDynamics& dyn, int z_samples = 3);

// --- hypersurface evolution ---------------------------------------------------

// replay: outcomes must contain every crossed event; simulate: rng draws each
// outcome at the moment the cut crosses it, recording into sampled (if given)
struct EvolutionMode {
    const OutcomeMap* replay = nullptr;
    Rng* rng = nullptr;
    OutcomeMap* sampled = nullptr;
    // when set, multiplied by the conditional outcome density of every
    // crossed event (the running probability of the outcome assignment)
    double* density_product = nullptr;
};

// advances one site by one timestep: applies the site unitary, then the jump
// for each event in that plaquette in (t, x) sub-order
std::pair<QuantumState, Cut> advance(const QuantumState& state, const Cut& cut, int site,
                                     const LocalDynamics& dyn, const CausalSprinkling& events,
                                     const EvolutionMode& mode,
                                     std::vector<FlashRecord>* flashes = nullptr);

struct FoliationRun {
    QuantumState final_state;
    std::vector<FlashRecord> flashes;
    OutcomeMap outcomes;  // replayed or sampled, by event id
};

FoliationRun evolve_along_foliation(const QuantumState& state, const Foliation& fol,
                                    const LocalDynamics& dyn, const CausalSprinkling& events,
                                    EvolutionMode mode);

// product of the conditional outcome densities along `via`, conditioned on
// the state on the start cut; foliation independence makes this a function
// of the outcome set alone
double region_outcome_probability(const QuantumState& initial, const Cut& start, const Cut& end,
                                  const LocalDynamics& dyn, const CausalSprinkling& events,
                                  const OutcomeMap& outcomes, const Foliation& via);

// --- foliation-independence comparison (parallel kernel) ----------------------

struct FoliationComparison {
    std::size_t n_foliations = 0;
    double max_state_deviation = 0.0;       // max amplitude difference vs first foliation
    double max_probability_spread = 0.0;    // max relative spread of outcome probabilities
};

FoliationComparison compare_foliations(const QuantumState& initial, const Cut& start,
                                       const Cut& end, const LocalDynamics& dyn,
                                       const CausalSprinkling& events, const OutcomeMap& outcomes,
                                       std::size_t cap);
// serial reference; must agree bit-for-bit with compare_foliations
FoliationComparison compare_foliations_serial(const QuantumState& initial, const Cut& start,
                                              const Cut& end, const LocalDynamics& dyn,
                                              const CausalSprinkling& events,
                                              const OutcomeMap& outcomes, std::size_t cap);

// --- energy increase -----------------------------------------------------------

struct EnergyIncreaseReport {
    double quadrature = 0.0;  // integral dz <J [H, J]> / <psi|psi>
    double direct = 0.0;      // E_z[<psi_+|H|psi_+> weight] - <psi|H|psi>
};

// expected energy change of one collapse at this site; the grid must cover
// the phi^dag phi spectrum padded by 8 / sqrt(beta)
EnergyIncreaseReport energy_increase(const QuantumState& state,
                                     const RelativisticFieldSite& site_model, const LinearOp& h,
                                     std::optional<OutcomeGrid> grid = std::nullopt);

}  // namespace flashsim

#endif
