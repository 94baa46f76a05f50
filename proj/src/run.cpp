#include "flashsim/run.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "flashsim/ensemble.hpp"
#include "flashsim/figure.hpp"
#include "flashsim/models.hpp"
#include "flashsim/parallel.hpp"
#include "flashsim/spacetime.hpp"

namespace flashsim {

namespace {

using nlohmann::json;

std::filesystem::path resolve_out_dir(Config& cfg, const RunOverrides& ov,
                                      const std::string& key) {
    std::string dir = cfg.get_string(key, ".");
    if (ov.out_dir) dir = *ov.out_dir;
    std::filesystem::create_directories(dir);
    return dir;
}

void write_flash_csv(std::ostream& os, const std::vector<Trajectory>& trajectories) {
    os << "trajectory_id,time,label,position,z\n";
    char buf[160];
    for (std::size_t k = 0; k < trajectories.size(); ++k)
        for (const auto& f : trajectories[k].flashes) {
            if (f.position)
                std::snprintf(buf, sizeof buf, "%zu,%.17g,%d,%.17g,%.17g\n", k, f.time, f.label,
                              *f.position, f.z);
            else
                std::snprintf(buf, sizeof buf, "%zu,%.17g,%d,,%.17g\n", k, f.time, f.label, f.z);
            os << buf;
        }
}

struct BuiltModel {
    CollapseModel model;
    QuantumState initial;
    EventSchedule schedule;
};

EventSchedule schedule_from_config(Config& cfg, double default_rate) {
    const std::string kind = cfg.get_string("schedule.kind", "poisson");
    const double horizon = cfg.get_double("schedule.horizon", 10.0);
    if (kind == "poisson")
        return EventSchedule::poisson(cfg.get_double("schedule.rate", default_rate), horizon);
    if (kind == "periodic")
        return EventSchedule::periodic(cfg.get_double("schedule.period"), horizon);
    throw ConfigError("schedule.kind must be poisson or periodic");
}

BuiltModel build_grw(Config& cfg) {
    GrwModel m;
    m.n_particles = static_cast<int>(cfg.get_int("model.grw.n_particles", 1));
    m.grid.x_min = cfg.get_double("model.grw.x_min", -4.0);
    m.grid.x_max = cfg.get_double("model.grw.x_max", 4.0);
    m.grid.n_sites = static_cast<int>(cfg.get_int("model.grw.n_sites", 32));
    m.alpha = cfg.get_double("model.grw.alpha", 10.0);
    m.lambda_rate = cfg.get_double("model.grw.lambda", 1.0);
    m.mass = cfg.get_double("model.grw.mass", 1.0);
    m.periodic = cfg.get_bool("model.grw.periodic", true);
    const double center = cfg.get_double("model.grw.packet_center", 0.0);
    const double width = cfg.get_double("model.grw.packet_width", 0.5);
    QuantumState one = grw_gaussian_packet(m, center, width);
    QuantumState initial = one;
    for (int p = 1; p < m.n_particles; ++p) initial = tensor(initial, one);
    return {grw_collapse_model(m), std::move(initial), schedule_from_config(cfg, m.lambda_rate)};
}

BuiltModel build_csl(Config& cfg) {
    CslDiscreteModel m;
    m.n_sites = static_cast<int>(cfg.get_int("model.csl.n_sites", 3));
    m.max_occupation = static_cast<int>(cfg.get_int("model.csl.max_occupation", 3));
    m.beta = cfg.get_double("model.csl.beta", 1.0);
    m.mu_density = cfg.get_double("model.csl.mu", 4.0);
    const double kernel_width = cfg.get_double("model.csl.kernel_width", 2.0);
    const int kernel_truncation =
        static_cast<int>(cfg.get_int("model.csl.kernel_truncation",
                                     std::min(2, m.n_sites - 1)));
    m.kernel = kernel_truncation == 0 ? SmearingKernel::delta()
                                      : SmearingKernel::discrete_gaussian(kernel_width,
                                                                          kernel_truncation);
    m.hopping = cfg.get_double("model.csl.hopping", 1.0);
    m.onsite = cfg.get_double("model.csl.onsite", 0.0);
    m.periodic = cfg.get_bool("model.csl.periodic", true);
    // default start: one particle on the first site
    Vector amp = Vector::Zero(m.basis().total());
    Index idx = 0;
    const Index q = m.max_occupation + 1;
    for (int s = 0; s < m.n_sites; ++s) idx = idx * q + (s == 0 ? 1 : 0);
    amp(idx) = 1.0;
    QuantumState initial = make_state(std::move(amp), m.basis());
    // sprinkled collapses hit each unit-spacing site at rate mu
    return {csl_collapse_model(m), std::move(initial),
            schedule_from_config(cfg, m.mu_density)};
}

// relativistic lattice: trajectories evolve along the canonical foliation of
// a per-trajectory sprinkling
struct RelativisticRun {
    LatticeRegion region;
    LocalDynamics dynamics;
    QuantumState initial;
    double mu;
};

RelativisticRun build_relativistic(Config& cfg) {
    RelativisticFieldSite site;
    site.fock_dim = static_cast<int>(cfg.get_int("model.relativistic.fock_dim", 3));
    site.beta = cfg.get_double("model.relativistic.beta", 0.5);
    site.lattice_spacing = cfg.get_double("model.relativistic.spacing", 1.0);
    site.omega = cfg.get_double("model.relativistic.omega", 1.0);
    LatticeRegion region;
    region.n_sites = static_cast<int>(cfg.get_int("model.relativistic.n_sites", 2));
    region.n_steps = static_cast<int>(cfg.get_int("model.relativistic.n_steps", 2));
    region.spacing = site.lattice_spacing;
    region.dt = cfg.get_double("model.relativistic.dt", site.lattice_spacing);
    const double mu = cfg.get_double("model.relativistic.mu", 1.0);

    const Index site_dim = site.basis().total();
    const BasisTag lattice_basis = BasisTag::uniform(region.n_sites, site_dim);
    std::vector<Matrix> h_int(static_cast<std::size_t>(region.n_sites),
                              site.free_hamiltonian().entries);
    JumpFamily local = relativistic_family(site);
    std::vector<JumpFamily> families;
    for (int s = 0; s < region.n_sites; ++s) {
        JumpFamily f = local;
        f.set_site_position((s + 0.5) * region.spacing);
        families.push_back(std::move(f));
    }
    LocalDynamics dyn(region, lattice_basis, std::move(h_int), std::move(families));
    Vector amp = Vector::Zero(lattice_basis.total());
    amp(0) = 1.0;  // field vacuum
    QuantumState initial = make_state(std::move(amp), lattice_basis);
    return {region, std::move(dyn), std::move(initial), mu};
}

}  // namespace

RunResult execute_run(Config& cfg, const RunOverrides& overrides) {
    const auto t0 = std::chrono::steady_clock::now();
    RunResult result;
    const std::string kind = cfg.get_string("model.kind");
    const int n_traj = static_cast<int>(cfg.get_int("run.trajectories", 100));
    std::uint64_t seed = cfg.get_uint("run.seed", 0);
    if (overrides.seed) seed = *overrides.seed;
    const std::filesystem::path out = resolve_out_dir(cfg, overrides, "run.out_dir");
    result.seed = seed;
    result.n_trajectories = n_traj;

    std::vector<Trajectory> trajectories;
    double e_before = 0.0, e_after = 0.0;
    if (kind == "grw" || kind == "csl_discrete") {
        BuiltModel built = kind == "grw" ? build_grw(cfg) : build_csl(cfg);
        cfg.reject_unconsumed();
        trajectories = run_ensemble(built.model, built.initial, built.schedule, seed, n_traj);
        e_before = expectation(built.initial, built.model.hamiltonian()).real();
        for (const auto& t : trajectories)
            e_after += expectation(t.final_state, built.model.hamiltonian()).real();
        e_after /= std::max(1, n_traj);
    } else if (kind == "relativistic_lattice") {
        RelativisticRun rel = build_relativistic(cfg);
        cfg.reject_unconsumed();
        const Cut start = Cut::level(rel.region.n_sites, 0);
        const Cut end = Cut::level(rel.region.n_sites, rel.region.n_steps);
        // canonical foliation: sweep sites left to right, one full row per step
        Foliation canonical;
        canonical.start = start;
        canonical.end = end;
        for (int step = 0; step < rel.region.n_steps; ++step)
            for (int s = 0; s < rel.region.n_sites; ++s) canonical.steps.push_back({s, step});
        Matrix h_total = Matrix::Zero(rel.dynamics.basis().total(),
                                      rel.dynamics.basis().total());
        for (std::size_t s = 0; s < rel.dynamics.n_sites(); ++s)
            h_total += rel.dynamics.embedded_hamiltonian(s).entries;
        const LinearOp h_op{h_total, rel.dynamics.basis()};
        e_before = expectation(rel.initial, h_op).real();
        trajectories.assign(static_cast<std::size_t>(n_traj), Trajectory{});
        std::vector<double> energies(static_cast<std::size_t>(n_traj), 0.0);
        par::parallel_for(n_traj, [&](std::int64_t k) {
            Rng sprinkle_rng = Rng::substream(trajectory_seed(seed, k), 1);
            CausalSprinkling events = sprinkle(rel.region, rel.mu, sprinkle_rng);
            Rng outcome_rng = Rng::substream(trajectory_seed(seed, k), 0);
            EvolutionMode sim;
            sim.rng = &outcome_rng;
            FoliationRun run =
                evolve_along_foliation(rel.initial, canonical, rel.dynamics, events, sim);
            Trajectory traj;
            traj.initial = rel.initial;
            traj.final_state = run.final_state;
            traj.flashes = std::move(run.flashes);
            traj.rng_seed = trajectory_seed(seed, k);
            energies[static_cast<std::size_t>(k)] =
                expectation(traj.final_state, h_op).real();
            trajectories[static_cast<std::size_t>(k)] = std::move(traj);
        });
        for (double e : energies) e_after += e;
        e_after /= std::max(1, n_traj);
    } else {
        throw ConfigError("model.kind must be grw, csl_discrete or relativistic_lattice");
    }

    result.mean_energy_before = e_before;
    result.mean_energy_after = e_after;
    for (const auto& t : trajectories)
        result.total_flashes += static_cast<long>(t.flashes.size());

    const auto flashes_path = out / "flashes.csv";
    {
        std::ofstream os(flashes_path, std::ios::binary);
        write_flash_csv(os, trajectories);
    }
    result.flashes_path = flashes_path.string();

    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json summary;
    summary["model"] = kind;
    summary["seed"] = seed;
    summary["trajectories"] = n_traj;
    summary["total_flashes"] = result.total_flashes;
    summary["mean_flashes_per_trajectory"] =
        static_cast<double>(result.total_flashes) / std::max(1, n_traj);
    summary["mean_energy_before"] = e_before;
    summary["mean_energy_after"] = e_after;
    summary["wall_seconds"] = result.wall_seconds;
    summary["config"] = json::object();
    for (const auto& [key, value] : cfg.raw()) summary["config"][key] = value;
    bool flagged = false;
    for (const auto& t : trajectories) flagged |= t.simultaneous_noncommuting;
    summary["simultaneous_noncommuting_events"] = flagged;
    const auto summary_path = out / "summary.json";
    {
        std::ofstream os(summary_path, std::ios::binary);
        os << summary.dump(2) << "\n";
    }
    result.summary_path = summary_path.string();
    return result;
}

std::string execute_figure(Config& cfg, const RunOverrides& overrides) {
    FigureSpec spec;
    spec.rho0 = cfg.get_double("density.rho0", 1.0);
    spec.width = cfg.get_double("density.width", 1.5);
    spec.velocity = cfg.get_double("density.velocity", 0.5);
    spec.region.n_sites = static_cast<int>(cfg.get_int("region.n_sites", 10));
    spec.region.n_steps = static_cast<int>(cfg.get_int("region.n_steps", 10));
    spec.region.spacing = cfg.get_double("region.spacing", 1.0);
    spec.region.dt = cfg.get_double("region.dt", 1.0);
    spec.mu = cfg.get_double("figure.mu", 100.0);
    spec.beta = cfg.get_double("figure.beta", 1.0);
    spec.seed = cfg.get_uint("figure.seed", 0);
    spec.panel1_nx = static_cast<int>(cfg.get_int("figure.panel1_nx", 64));
    spec.panel1_nt = static_cast<int>(cfg.get_int("figure.panel1_nt", 64));
    if (overrides.seed) spec.seed = *overrides.seed;
    const std::filesystem::path out = resolve_out_dir(cfg, overrides, "figure.out_dir");
    cfg.reject_unconsumed();
    const auto points = emit_figure_data(spec);
    const auto path = out / "figure.csv";
    std::ofstream os(path, std::ios::binary);
    figure_to_csv(points, os);
    return path.string();
}

}  // namespace flashsim
