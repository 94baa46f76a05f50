// flashsim: stochastic collapse-dynamics simulator and verification CLI.
#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "flashsim/config.hpp"
#include "flashsim/parallel.hpp"
#include "flashsim/run.hpp"
#include "flashsim/spacetime.hpp"
#include "flashsim/verify.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitSuiteFailure = 2;

void emit_error_json(const std::string& kind, const std::string& message) {
    json err;
    err["error"] = kind;
    err["message"] = message;
    std::cerr << err.dump() << "\n";
}

json suite_to_json(const flashsim::SuiteReport& rep) {
    json j;
    j["suite"] = rep.suite;
    j["pass"] = rep.pass;
    j["wall_seconds"] = rep.wall_seconds;
    j["checks"] = json::array();
    for (const auto& c : rep.checks) {
        json cj;
        cj["name"] = c.name;
        cj["pass"] = c.pass;
        cj["value"] = c.value;
        cj["threshold"] = c.threshold;
        if (!c.note.empty()) cj["note"] = c.note;
        j["checks"].push_back(cj);
    }
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"flashsim: collapse-model trajectory sampler and verification suites"};
    app.require_subcommand(1);

    std::string config_path, suite_name = "all", out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false, out_set = false;
    int threads = 0;

    app.add_option("--threads", threads, "worker threads (default: machine parallelism)");

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option_function<std::uint64_t>(
               "--seed", [&](const std::uint64_t& v) { seed = v; seed_set = true; },
               "master seed override");
        cmd->add_option_function<std::string>(
               "--out-dir", [&](const std::string& v) { out_dir = v; out_set = true; },
               "output directory");
    };

    CLI::App* run_cmd = app.add_subcommand("run", "run a configured flash ensemble");
    run_cmd->add_option("config", config_path, "run configuration file")->required();
    add_common(run_cmd);

    CLI::App* verify_cmd = app.add_subcommand("verify", "run a verification suite");
    verify_cmd
        ->add_option("suite", suite_name,
                     "completeness|bayes|timesym|foliation|sprinkle|energy|all")
        ->required();
    add_common(verify_cmd);

    CLI::App* figure_cmd = app.add_subcommand("figure", "emit pointillist matter-density data");
    figure_cmd->add_option("spec", config_path, "figure spec file")->required();
    add_common(figure_cmd);

    CLI::App* sprinkle_cmd = app.add_subcommand("sprinkle", "emit a Poisson event sprinkling");
    int sp_sites = 4, sp_steps = 4;
    double sp_spacing = 1.0, sp_dt = 1.0, sp_mu = 2.0;
    sprinkle_cmd->add_option("--sites", sp_sites, "lattice sites");
    sprinkle_cmd->add_option("--steps", sp_steps, "time steps");
    sprinkle_cmd->add_option("--spacing", sp_spacing, "lattice spacing");
    sprinkle_cmd->add_option("--dt", sp_dt, "timestep duration");
    sprinkle_cmd->add_option("--mu", sp_mu, "events per unit spacetime volume");
    add_common(sprinkle_cmd);

    CLI11_PARSE(app, argc, argv);
    flashsim::par::set_threads(threads);

    flashsim::RunOverrides overrides;
    if (seed_set) overrides.seed = seed;
    if (out_set) overrides.out_dir = out_dir;

    try {
        if (run_cmd->parsed()) {
            flashsim::Config cfg = flashsim::Config::parse_file(config_path);
            const auto result = flashsim::execute_run(cfg, overrides);
            std::cout << "wrote " << result.flashes_path << " (" << result.total_flashes
                      << " flashes over " << result.n_trajectories << " trajectories)\n"
                      << "wrote " << result.summary_path << "\n";
            return kExitOk;
        }
        if (figure_cmd->parsed()) {
            flashsim::Config cfg = flashsim::Config::parse_file(config_path);
            std::cout << "wrote " << flashsim::execute_figure(cfg, overrides) << "\n";
            return kExitOk;
        }
        if (sprinkle_cmd->parsed()) {
            flashsim::LatticeRegion region{sp_sites, sp_steps, sp_spacing, sp_dt};
            flashsim::Rng rng(seed_set ? seed : 0);
            const auto sprinkling = flashsim::sprinkle(region, sp_mu, rng);
            std::filesystem::path dir = out_set ? out_dir : ".";
            std::filesystem::create_directories(dir);
            const auto path = dir / "sprinkling.csv";
            std::ofstream os(path, std::ios::binary);
            flashsim::sprinkling_to_csv(sprinkling, os);
            std::cout << "wrote " << path.string() << " (" << sprinkling.size() << " events)\n";
            return kExitOk;
        }
        if (verify_cmd->parsed()) {
            const auto reports = flashsim::run_suites(suite_name);
            json all = json::array();
            bool pass = true;
            for (const auto& rep : reports) {
                pass = pass && rep.pass;
                all.push_back(suite_to_json(rep));
                for (const auto& c : rep.checks)
                    std::cout << (c.pass ? "PASS" : "FAIL") << "  " << rep.suite << "." << c.name
                              << "  value=" << c.value << " threshold=" << c.threshold
                              << (c.note.empty() ? "" : "  (" + c.note + ")") << "\n";
                std::cout << (rep.pass ? "PASS" : "FAIL") << "  suite " << rep.suite << " in "
                          << rep.wall_seconds << " s\n";
            }
            std::filesystem::path dir = out_set ? out_dir : ".";
            std::filesystem::create_directories(dir);
            const auto report_path = dir / "verify_report.json";
            std::ofstream os(report_path, std::ios::binary);
            os << all.dump(2) << "\n";
            std::cout << "wrote " << report_path.string() << "\n";
            return pass ? kExitOk : kExitSuiteFailure;
        }
    } catch (const flashsim::ConfigError& e) {
        emit_error_json("config", e.what());
        return kExitValidation;
    } catch (const flashsim::Error& e) {
        emit_error_json("runtime", e.what());
        return kExitValidation;
    } catch (const std::exception& e) {
        emit_error_json("internal", e.what());
        return kExitValidation;
    }
    return kExitValidation;
}
