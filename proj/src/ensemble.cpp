#include "flashsim/ensemble.hpp"

#include "flashsim/parallel.hpp"
#include "flashsim/rng.hpp"

namespace flashsim {

std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t index) {
    return master_seed ^ splitmix64(index + 1);
}

namespace {

std::vector<Trajectory> run_impl(const CollapseModel& model, const QuantumState& initial,
                                 const EventSchedule& schedule, std::uint64_t master_seed,
                                 int n_trajectories, bool parallel) {
    if (n_trajectories < 0) throw ContractError("ensemble: negative trajectory count");
    std::vector<Trajectory> out(static_cast<std::size_t>(n_trajectories));
    auto body = [&](std::int64_t k) {
        out[static_cast<std::size_t>(k)] = run_trajectory(
            model, initial, schedule, trajectory_seed(master_seed, static_cast<std::uint64_t>(k)));
    };
    if (parallel)
        par::parallel_for(n_trajectories, body);
    else
        par::serial_for(n_trajectories, body);
    return out;
}

}  // namespace

std::vector<Trajectory> run_ensemble(const CollapseModel& model, const QuantumState& initial,
                                     const EventSchedule& schedule, std::uint64_t master_seed,
                                     int n_trajectories) {
    return run_impl(model, initial, schedule, master_seed, n_trajectories, true);
}

std::vector<Trajectory> run_ensemble_serial(const CollapseModel& model,
                                            const QuantumState& initial,
                                            const EventSchedule& schedule,
                                            std::uint64_t master_seed, int n_trajectories) {
    return run_impl(model, initial, schedule, master_seed, n_trajectories, false);
}

}  // namespace flashsim
