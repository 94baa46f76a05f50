#ifndef FLASHSIM_ENGINE_HPP
#define FLASHSIM_ENGINE_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "flashsim/qalg.hpp"
#include "flashsim/rng.hpp"

namespace flashsim {

inline constexpr int kDefaultGridPoints = 161;
inline constexpr double kDefaultGridSigmas = 8.0;
inline constexpr double kDefaultCompletenessTol = 1e-6;

// Uniform quadrature grid over the outcome space, trapezoid weights.
struct OutcomeGrid {
    double lo = 0.0;
    double hi = 1.0;
    int n = kDefaultGridPoints;

    double spacing() const { return (hi - lo) / (n - 1); }
    double point(int k) const { return lo + spacing() * k; }
    double weight(int k) const {
        const double h = spacing();
        return (k == 0 || k == n - 1) ? 0.5 * h : h;
    }
    // grid covering [values_lo, values_hi] padded by k_sigmas * sigma
    static OutcomeGrid covering(double values_lo, double values_hi, double sigma,
                                double k_sigmas = kDefaultGridSigmas,
                                int n_points = kDefaultGridPoints);
};

// A parametric family of collapse operators J(z) over a scalar outcome grid.
//
// Gaussian families J(z) = (2 pi sigma^2)^{-1/4} exp(-(A - z)^2 / (4 sigma^2))
// about a Hermitian generator A carry their eigensystem and support exact,
// grid-free two-step sampling.  General families supply an explicit z -> J(z)
// map and fall back to grid-based sampling.
class JumpFamily {
public:
    static JumpFamily gaussian(const LinearOp& generator, double sigma, OutcomeGrid grid,
                               std::string label = {});
    // grid spans the generator spectrum padded by 8 sigma
    static JumpFamily gaussian_auto(const LinearOp& generator, double sigma,
                                    std::string label = {},
                                    int n_points = kDefaultGridPoints);
    static JumpFamily general(std::function<Matrix(double)> jump_at, BasisTag basis,
                              OutcomeGrid grid, std::string label = {});

    LinearOp jump_at(double z) const;
    const OutcomeGrid& grid() const { return grid_; }
    const BasisTag& basis() const { return basis_; }
    const std::string& label() const { return label_; }

    double completeness_tol() const { return completeness_tol_; }
    JumpFamily& set_completeness_tol(double tol) {
        completeness_tol_ = tol;
        return *this;
    }

    bool is_gaussian() const { return has_gaussian_; }
    double sigma() const;
    const RealVector& eigenvalues() const;
    // amplitudes in the generator eigenbasis (identity transform when the
    // generator is exactly diagonal)
    Vector to_eigenbasis(const Vector& amplitudes) const;
    bool generator_diagonal() const { return diagonal_; }

    // flash decoration: for localization families the outcome is itself the
    // event position; lattice families carry their site coordinate instead
    JumpFamily& mark_z_as_position() {
        z_is_position_ = true;
        return *this;
    }
    JumpFamily& set_site_position(double x) {
        site_position_ = x;
        return *this;
    }
    std::optional<double> flash_position(double z) const {
        if (z_is_position_) return z;
        return site_position_;
    }

    // same family acting on subsystem `slot` of a larger product basis
    JumpFamily embedded(const BasisTag& full, std::size_t slot) const;

private:
    JumpFamily() = default;

    bool has_gaussian_ = false;
    RealVector eigenvalues_;
    Matrix eigenvectors_;  // unused when diagonal_
    bool diagonal_ = false;
    double sigma_ = 0.0;

    std::function<Matrix(double)> jump_fn_;  // general families only

    BasisTag basis_;
    OutcomeGrid grid_;
    std::string label_;
    double completeness_tol_ = kDefaultCompletenessTol;
    bool z_is_position_ = false;
    std::optional<double> site_position_;
};

// --- single-step operations ----------------------------------------------

// U(dt)|psi>; dt may be negative
QuantumState evolve(const QuantumState& state, const LinearOp& h, double dt);

// <psi|J†(z)J(z)|psi> / <psi|psi>
double outcome_density(const QuantumState& state, const JumpFamily& family, double z);

// J(z)|psi>, deliberately left unnormalized
QuantumState collapse_apply(const QuantumState& state, const JumpFamily& family, double z);

// draw z from the outcome density.  Gaussian families: Born-weighted
// eigenvalue then Normal(A, sigma), exact and grid-free.  General families:
// inverse-CDF on the quadrature grid.
double sample_outcome(const QuantumState& state, const JumpFamily& family, Rng& rng);

// grid inverse-CDF sampler, kept callable for any family; reference
// implementation the exact sampler is tested against
double sample_outcome_grid(const QuantumState& state, const JumpFamily& family, Rng& rng);

struct CompletenessReport {
    double max_deviation = 0.0;
    double tolerance = kDefaultCompletenessTol;
    bool pass = false;
};

// quadrature of integral dz J†(z)J(z) against the identity
CompletenessReport completeness_check(const JumpFamily& family);

// --- trajectories ----------------------------------------------------------

struct ScheduledEvent {
    double time = 0.0;
    int family = 0;
    std::optional<double> position;  // a priori location (sprinkled events)
    long event_id = -1;
};

struct EventSchedule {
    enum class Kind { poisson, periodic, explicit_list };
    Kind kind = Kind::poisson;
    double horizon = 0.0;
    double rate = 0.0;    // poisson: per subsystem
    double period = 0.0;  // periodic
    std::vector<ScheduledEvent> events;

    static EventSchedule poisson(double rate, double horizon);
    static EventSchedule periodic(double period, double horizon);
    static EventSchedule explicit_list(std::vector<ScheduledEvent> events, double horizon);
};

struct FlashRecord {
    double time = 0.0;
    int label = 0;
    std::optional<double> position;
    double z = 0.0;
};

struct RescaleEvent {
    double time = 0.0;
    double factor = 1.0;
};

struct Trajectory {
    QuantumState initial;
    QuantumState final_state;
    std::vector<FlashRecord> flashes;
    std::uint64_t rng_seed = 0;
    std::vector<RescaleEvent> rescale_log;
    // set when two events coincide in time and their jump operators do not
    // commute (tie-break by label order is then physically material)
    bool simultaneous_noncommuting = false;
};

class CollapseModel {
public:
    CollapseModel(LinearOp hamiltonian, std::vector<JumpFamily> families);

    const LinearOp& hamiltonian() const { return h_; }
    const std::vector<JumpFamily>& families() const { return families_; }
    const BasisTag& basis() const { return h_.basis; }

    // spectral propagator with the eigendecomposition cached at construction
    QuantumState evolve(const QuantumState& state, double dt) const;

    // optional per-step state monitor (e.g. Fock truncation leakage guard);
    // called after every collapse with the post-jump state and event time
    CollapseModel& set_monitor(std::function<void(const QuantumState&, double)> monitor) {
        monitor_ = std::move(monitor);
        return *this;
    }
    const std::function<void(const QuantumState&, double)>& monitor() const { return monitor_; }

private:
    LinearOp h_;
    std::vector<JumpFamily> families_;
    RealVector h_eigenvalues_;
    Matrix h_eigenvectors_;
    bool h_diagonal_ = false;
    std::function<void(const QuantumState&, double)> monitor_;
};

// Deterministic function of (model, initial, schedule, seed).  Event times
// for subsystem i come from substream i+1 of the trajectory seed; outcome
// draws consume substream 0 in flash order.
Trajectory run_trajectory(const CollapseModel& model, const QuantumState& initial,
                          const EventSchedule& schedule, std::uint64_t seed);

// norm window outside which the working state is rescaled to unit norm
inline constexpr double kRenormLo = 1e-6;
inline constexpr double kRenormHi = 1e6;

}  // namespace flashsim

#endif
