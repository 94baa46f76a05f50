#ifndef FLASHSIM_ENSEMBLE_HPP
#define FLASHSIM_ENSEMBLE_HPP

#include <cstdint>
#include <vector>

#include "flashsim/engine.hpp"

namespace flashsim {

// seed of trajectory k under master seed s: splitmix64(s ^ splitmix64(k + 1))
std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t index);

// Runs n independent trajectories.  Each owns a private generator derived
// from (master_seed, index), and results land in index-addressed slots, so
// the parallel and serial runners agree bit-for-bit for any thread count.
std::vector<Trajectory> run_ensemble(const CollapseModel& model, const QuantumState& initial,
                                     const EventSchedule& schedule, std::uint64_t master_seed,
                                     int n_trajectories);

// serial reference implementation
std::vector<Trajectory> run_ensemble_serial(const CollapseModel& model,
                                            const QuantumState& initial,
                                            const EventSchedule& schedule,
                                            std::uint64_t master_seed, int n_trajectories);

}  // namespace flashsim

#endif
