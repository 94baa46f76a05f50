#ifndef FLASHSIM_RUN_HPP
#define FLASHSIM_RUN_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "flashsim/config.hpp"

namespace flashsim {

// command-line overrides that beat the config file
struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
};

struct RunResult {
    std::string flashes_path;
    std::string summary_path;
    std::uint64_t seed = 0;
    long total_flashes = 0;
    int n_trajectories = 0;
    double mean_energy_before = 0.0;
    double mean_energy_after = 0.0;
    double wall_seconds = 0.0;
};

// Builds the configured model, runs the ensemble, writes
// `flashes.csv` (trajectory_id,time,label,position,z) and `summary.json`
// into the output directory.  Strict config: unknown keys abort the run.
RunResult execute_run(Config& config, const RunOverrides& overrides);

// parses a figure spec config and writes `figure.csv` (panel,t,x,z)
std::string execute_figure(Config& config, const RunOverrides& overrides);

}  // namespace flashsim

#endif
