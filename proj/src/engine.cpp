#include "flashsim/engine.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace flashsim {

namespace {

bool exactly_diagonal(const Matrix& m) {
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j)
            if (i != j && m(i, j) != Complex(0.0, 0.0)) return false;
    return true;
}

double gaussian_prefactor(double sigma) {
    return std::pow(2.0 * M_PI * sigma * sigma, -0.25);
}

}  // namespace

OutcomeGrid OutcomeGrid::covering(double values_lo, double values_hi, double sigma,
                                  double k_sigmas, int n_points) {
    if (n_points < 2) throw ContractError("OutcomeGrid: need at least 2 points");
    return {values_lo - k_sigmas * sigma, values_hi + k_sigmas * sigma, n_points};
}

JumpFamily JumpFamily::gaussian(const LinearOp& generator, double sigma, OutcomeGrid grid,
                                std::string label) {
    if (sigma <= 0.0) throw ContractError("gaussian family: sigma must be positive");
    const double dev = hermiticity_deviation(generator.entries);
    if (dev > kHermitianTol)
        throw ContractError("gaussian family: generator not Hermitian (deviation " +
                            std::to_string(dev) + ")");
    JumpFamily f;
    f.has_gaussian_ = true;
    f.sigma_ = sigma;
    f.basis_ = generator.basis;
    f.grid_ = grid;
    f.label_ = std::move(label);
    if (exactly_diagonal(generator.entries)) {
        f.diagonal_ = true;
        f.eigenvalues_ = generator.entries.diagonal().real();
    } else {
        Eigen::SelfAdjointEigenSolver<Matrix> es(generator.entries);
        if (es.info() != Eigen::Success)
            throw ContractError("gaussian family: eigendecomposition failed");
        f.eigenvalues_ = es.eigenvalues();
        f.eigenvectors_ = es.eigenvectors();
    }
    return f;
}

JumpFamily JumpFamily::gaussian_auto(const LinearOp& generator, double sigma, std::string label,
                                     int n_points) {
    // provisional family just to get the spectrum
    JumpFamily probe = gaussian(generator, sigma, OutcomeGrid{0.0, 1.0, 2}, {});
    const double lo = probe.eigenvalues_.minCoeff();
    const double hi = probe.eigenvalues_.maxCoeff();
    probe.grid_ = OutcomeGrid::covering(lo, hi, sigma, kDefaultGridSigmas, n_points);
    probe.label_ = std::move(label);
    return probe;
}

JumpFamily JumpFamily::general(std::function<Matrix(double)> jump_at, BasisTag basis,
                               OutcomeGrid grid, std::string label) {
    JumpFamily f;
    f.jump_fn_ = std::move(jump_at);
    f.basis_ = std::move(basis);
    f.grid_ = grid;
    f.label_ = std::move(label);
    return f;
}

LinearOp JumpFamily::jump_at(double z) const {
    if (has_gaussian_) {
        const double pref = gaussian_prefactor(sigma_);
        const Index d = eigenvalues_.size();
        Vector diag(d);
        for (Index i = 0; i < d; ++i) {
            const double u = eigenvalues_(i) - z;
            diag(i) = pref * std::exp(-u * u / (4.0 * sigma_ * sigma_));
        }
        if (diagonal_) {
            Matrix m = Matrix::Zero(d, d);
            for (Index i = 0; i < d; ++i) m(i, i) = diag(i);
            return {std::move(m), basis_};
        }
        Matrix m = eigenvectors_ * diag.asDiagonal() * eigenvectors_.adjoint();
        return {std::move(m), basis_};
    }
    return {jump_fn_(z), basis_};
}

double JumpFamily::sigma() const {
    if (!has_gaussian_) throw ContractError("sigma(): not a gaussian family");
    return sigma_;
}

const RealVector& JumpFamily::eigenvalues() const {
    if (!has_gaussian_) throw ContractError("eigenvalues(): not a gaussian family");
    return eigenvalues_;
}

Vector JumpFamily::to_eigenbasis(const Vector& amplitudes) const {
    if (!has_gaussian_) throw ContractError("to_eigenbasis(): not a gaussian family");
    if (diagonal_) return amplitudes;
    return eigenvectors_.adjoint() * amplitudes;
}

JumpFamily JumpFamily::embedded(const BasisTag& full, std::size_t slot) const {
    if (slot >= full.n_subsystems()) throw SizeError("embedded: slot out of range");
    if (full.dims[slot] != basis_.total()) throw SizeError("embedded: subsystem dim mismatch");
    JumpFamily f;
    if (has_gaussian_) {
        // exp of an embedded generator factorizes: J_full(z) = 1 x J(z) x 1
        Matrix gen_local = diagonal_ ? Matrix(eigenvalues_.cast<Complex>().asDiagonal())
                                     : Matrix(eigenvectors_ *
                                              eigenvalues_.cast<Complex>().asDiagonal() *
                                              eigenvectors_.adjoint());
        f = gaussian(embed_at(gen_local, full, slot), sigma_, grid_, label_);
    } else {
        auto local_fn = jump_fn_;
        f.jump_fn_ = [local_fn, full, slot](double z) {
            return embed_at(local_fn(z), full, slot).entries;
        };
        f.basis_ = full;
        f.grid_ = grid_;
        f.label_ = label_;
    }
    f.completeness_tol_ = completeness_tol_;
    f.z_is_position_ = z_is_position_;
    f.site_position_ = site_position_;
    return f;
}

QuantumState evolve(const QuantumState& state, const LinearOp& h, double dt) {
    if (state.basis != h.basis)
        throw SizeError("evolve: basis mismatch " + state.basis.str() + " vs " + h.basis.str());
    if (!std::isfinite(dt)) throw ContractError("evolve: dt must be finite");
    if (dt == 0.0) return state;
    LinearOp u = unitary_from_hamiltonian(h, dt);
    return {u.entries * state.amplitudes, state.basis};
}

double outcome_density(const QuantumState& state, const JumpFamily& family, double z) {
    if (state.basis != family.basis()) throw SizeError("outcome_density: basis mismatch");
    const double n2 = state.norm2();
    if (n2 == 0.0) throw DegenerateStateError("outcome_density: zero-norm state");
    LinearOp j = family.jump_at(z);
    return (j.entries * state.amplitudes).squaredNorm() / n2;
}

QuantumState collapse_apply(const QuantumState& state, const JumpFamily& family, double z) {
    if (state.basis != family.basis()) throw SizeError("collapse_apply: basis mismatch");
    if (state.norm2() == 0.0) throw DegenerateStateError("collapse_apply: zero-norm state");
    LinearOp j = family.jump_at(z);
    QuantumState out{j.entries * state.amplitudes, state.basis};
    if (out.norm2() == 0.0)
        throw DegenerateOutcomeError("collapse at z=" + std::to_string(z) +
                                     " annihilated every amplitude");
    return out;
}

double sample_outcome(const QuantumState& state, const JumpFamily& family, Rng& rng) {
    if (state.basis != family.basis()) throw SizeError("sample_outcome: basis mismatch");
    if (state.norm2() == 0.0) throw DegenerateStateError("sample_outcome: zero-norm state");
    if (!family.is_gaussian()) return sample_outcome_grid(state, family, rng);
    // Born weight on the generator eigenvalue, then Gaussian noise about it
    Vector c = family.to_eigenbasis(state.amplitudes);
    std::vector<double> weights(static_cast<std::size_t>(c.size()));
    for (Index i = 0; i < c.size(); ++i) weights[static_cast<std::size_t>(i)] = std::norm(c(i));
    const std::size_t pick = rng.categorical(weights.data(), weights.size());
    return rng.normal(family.eigenvalues()(static_cast<Index>(pick)), family.sigma());
}

double sample_outcome_grid(const QuantumState& state, const JumpFamily& family, Rng& rng) {
    const OutcomeGrid& g = family.grid();
    std::vector<double> density(static_cast<std::size_t>(g.n));
    for (int k = 0; k < g.n; ++k)
        density[static_cast<std::size_t>(k)] = outcome_density(state, family, g.point(k));
    // piecewise-linear inverse of the cumulative trapezoid sums
    std::vector<double> cdf(static_cast<std::size_t>(g.n), 0.0);
    for (int k = 1; k < g.n; ++k)
        cdf[k] = cdf[k - 1] + 0.5 * (density[k - 1] + density[k]) * g.spacing();
    const double total = cdf.back();
    if (total <= 0.0) throw DegenerateOutcomeError("sample_outcome_grid: zero density mass");
    const double u = rng.uniform() * total;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const int k = std::max(1, static_cast<int>(it - cdf.begin()));
    const double seg = cdf[k] - cdf[k - 1];
    const double frac = seg > 0.0 ? (u - cdf[k - 1]) / seg : 0.5;
    return g.point(k - 1) + frac * g.spacing();
}

CompletenessReport completeness_check(const JumpFamily& family) {
    const OutcomeGrid& g = family.grid();
    const Index d = family.basis().total();
    CompletenessReport rep;
    rep.tolerance = family.completeness_tol();
    if (family.is_gaussian()) {
        // J†J is diagonal in the generator eigenbasis; accumulate the
        // squared weights per eigenvalue, then one deviation sweep
        const RealVector& eigs = family.eigenvalues();
        const double sigma = family.sigma();
        const double norm = 1.0 / (sigma * std::sqrt(2.0 * M_PI));
        RealVector acc = RealVector::Zero(d);
        for (int k = 0; k < g.n; ++k) {
            const double z = g.point(k);
            for (Index i = 0; i < d; ++i) {
                const double u = (eigs(i) - z) / sigma;
                acc(i) += g.weight(k) * norm * std::exp(-0.5 * u * u);
            }
        }
        rep.max_deviation = (acc.array() - 1.0).abs().maxCoeff();
    } else {
        Matrix acc = Matrix::Zero(d, d);
        for (int k = 0; k < g.n; ++k) {
            LinearOp j = family.jump_at(g.point(k));
            acc += g.weight(k) * (j.entries.adjoint() * j.entries);
        }
        rep.max_deviation = (acc - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
    }
    rep.pass = rep.max_deviation <= rep.tolerance;
    return rep;
}

EventSchedule EventSchedule::poisson(double rate, double horizon) {
    if (rate < 0.0 || horizon <= 0.0) throw ContractError("poisson schedule: bad parameters");
    EventSchedule s;
    s.kind = Kind::poisson;
    s.rate = rate;
    s.horizon = horizon;
    return s;
}

EventSchedule EventSchedule::periodic(double period, double horizon) {
    if (period <= 0.0 || horizon <= 0.0) throw ContractError("periodic schedule: bad parameters");
    EventSchedule s;
    s.kind = Kind::periodic;
    s.period = period;
    s.horizon = horizon;
    return s;
}

EventSchedule EventSchedule::explicit_list(std::vector<ScheduledEvent> events, double horizon) {
    EventSchedule s;
    s.kind = Kind::explicit_list;
    s.events = std::move(events);
    s.horizon = horizon;
    for (const auto& e : s.events)
        if (e.time < 0.0 || e.time > horizon)
            throw ContractError("explicit schedule: event outside [0, horizon]");
    return s;
}

CollapseModel::CollapseModel(LinearOp hamiltonian, std::vector<JumpFamily> families)
    : h_(std::move(hamiltonian)), families_(std::move(families)) {
    const double dev = hermiticity_deviation(h_.entries);
    if (dev > kHermitianTol)
        throw ContractError("CollapseModel: Hamiltonian not Hermitian (deviation " +
                            std::to_string(dev) + ")");
    for (const auto& f : families_)
        if (f.basis() != h_.basis)
            throw SizeError("CollapseModel: family basis does not match Hamiltonian");
    if (exactly_diagonal(h_.entries)) {
        h_diagonal_ = true;
        h_eigenvalues_ = h_.entries.diagonal().real();
    } else {
        Eigen::SelfAdjointEigenSolver<Matrix> es(h_.entries);
        if (es.info() != Eigen::Success)
            throw ContractError("CollapseModel: eigendecomposition failed");
        h_eigenvalues_ = es.eigenvalues();
        h_eigenvectors_ = es.eigenvectors();
    }
}

QuantumState CollapseModel::evolve(const QuantumState& state, double dt) const {
    if (state.basis != h_.basis) throw SizeError("evolve: basis mismatch");
    if (dt == 0.0) return state;
    const Index d = h_eigenvalues_.size();
    Vector phases(d);
    for (Index k = 0; k < d; ++k) phases(k) = std::polar(1.0, -h_eigenvalues_(k) * dt);
    if (h_diagonal_) return {phases.asDiagonal() * state.amplitudes, state.basis};
    Vector c = h_eigenvectors_.adjoint() * state.amplitudes;
    c = phases.asDiagonal() * c;
    return {h_eigenvectors_ * c, state.basis};
}

namespace {

std::vector<ScheduledEvent> schedule_events(const CollapseModel& model,
                                            const EventSchedule& schedule, std::uint64_t seed) {
    std::vector<ScheduledEvent> events;
    const int n_families = static_cast<int>(model.families().size());
    switch (schedule.kind) {
        case EventSchedule::Kind::poisson: {
            for (int i = 0; i < n_families; ++i) {
                Rng stream = Rng::substream(seed, static_cast<std::uint64_t>(i) + 1);
                double t = 0.0;
                if (schedule.rate <= 0.0) continue;
                for (;;) {
                    t += stream.exponential(schedule.rate);
                    if (t > schedule.horizon) break;
                    events.push_back({t, i, std::nullopt, -1});
                }
            }
            break;
        }
        case EventSchedule::Kind::periodic: {
            for (double t = schedule.period; t <= schedule.horizon; t += schedule.period)
                for (int i = 0; i < n_families; ++i) events.push_back({t, i, std::nullopt, -1});
            break;
        }
        case EventSchedule::Kind::explicit_list:
            events = schedule.events;
            break;
    }
    std::stable_sort(events.begin(), events.end(), [](const auto& a, const auto& b) {
        if (a.time != b.time) return a.time < b.time;
        return a.family < b.family;  // simultaneous events: label order
    });
    for (const auto& e : events)
        if (e.family < 0 || e.family >= n_families)
            throw ContractError("schedule references unknown subsystem " +
                                std::to_string(e.family));
    return events;
}

bool jumps_commute(const JumpFamily& a, const JumpFamily& b) {
    // diagonal generators in the same basis always commute
    if (a.is_gaussian() && b.is_gaussian() && a.generator_diagonal() && b.generator_diagonal())
        return true;
    // off-center samples: the grid midpoint of a symmetric spectrum gives a
    // jump proportional to the identity, which commutes with anything
    for (double qa : {0.3, 0.45}) {
        const double za = a.grid().lo + qa * (a.grid().hi - a.grid().lo);
        const Matrix ja = a.jump_at(za).entries;
        for (double qb : {0.35, 0.6}) {
            const double zb = b.grid().lo + qb * (b.grid().hi - b.grid().lo);
            const Matrix jb = b.jump_at(zb).entries;
            if ((ja * jb - jb * ja).cwiseAbs().maxCoeff() > 1e-12) return false;
        }
    }
    return true;
}

}  // namespace

Trajectory run_trajectory(const CollapseModel& model, const QuantumState& initial,
                          const EventSchedule& schedule, std::uint64_t seed) {
    if (initial.basis != model.basis()) throw SizeError("run_trajectory: basis mismatch");
    if (schedule.horizon <= 0.0) throw ContractError("run_trajectory: horizon must be positive");

    Trajectory traj;
    traj.initial = initial;
    traj.rng_seed = seed;

    const auto events = schedule_events(model, schedule, seed);
    Rng outcome_rng = Rng::substream(seed, 0);

    QuantumState state = initial;
    double t = 0.0;
    for (std::size_t k = 0; k < events.size(); ++k) {
        const auto& ev = events[k];
        state = model.evolve(state, ev.time - t);
        t = ev.time;
        const JumpFamily& family = model.families()[static_cast<std::size_t>(ev.family)];
        if (k > 0 && events[k - 1].time == ev.time && events[k - 1].family != ev.family &&
            !traj.simultaneous_noncommuting) {
            const auto& prev = model.families()[static_cast<std::size_t>(events[k - 1].family)];
            if (!jumps_commute(prev, family)) traj.simultaneous_noncommuting = true;
        }
        const double z = sample_outcome(state, family, outcome_rng);
        try {
            state = collapse_apply(state, family, z);
        } catch (const DegenerateOutcomeError& e) {
            throw DegenerateOutcomeError(std::string(e.what()) + " (event " + std::to_string(k) +
                                         " at t=" + std::to_string(t) + ", subsystem " +
                                         std::to_string(ev.family) + ")");
        }
        FlashRecord flash;
        flash.time = ev.time;
        flash.label = ev.family;
        flash.z = z;
        flash.position = ev.position ? ev.position : family.flash_position(z);
        traj.flashes.push_back(flash);
        if (model.monitor()) model.monitor()(state, t);
        const double n2 = state.norm2();
        if (n2 < kRenormLo * kRenormLo || n2 > kRenormHi * kRenormHi) {
            const double f = std::sqrt(n2);
            state.amplitudes /= f;
            traj.rescale_log.push_back({t, f});
        }
    }
    state = model.evolve(state, schedule.horizon - t);
    traj.final_state = std::move(state);
    return traj;
}

}  // namespace flashsim
