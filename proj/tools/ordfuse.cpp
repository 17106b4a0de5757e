#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ordfuse/config_io.hpp"
#include "ordfuse/dp_policy.hpp"
#include "ordfuse/errors.hpp"
#include "ordfuse/experiments.hpp"
#include "ordfuse/kernels.hpp"

using namespace ordfuse;

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

int cmd_validate(const std::string& path) {
    const ConfigBundle b = load_config(path);
    std::cout << "config ok: M=" << b.scenario.M << " K=" << b.scenario.K << " N=" << b.scenario.N
              << " preset=" << b.experiment.preset << " detector=" << detector_name(b.experiment.detector)
              << (b.fading ? " fading=on" : "") << "\n";
    return 0;
}

int cmd_run(const std::string& path, const std::string& preset, const std::uint64_t* seed,
            long trials, const std::string& out) {
    ConfigBundle b = load_config(path);
    if (!preset.empty()) b.experiment.preset = preset;
    if (seed) {
        b.experiment.seed = *seed;
        b.scenario.rng_seed = *seed;
    }
    if (trials > 0) b.experiment.trials = trials;
    if (!out.empty()) b.experiment.output = out;
    b.experiment.validate();
    for (const auto& file : run_experiment(b)) std::cout << file << "\n";
    return 0;
}

int cmd_solve(const std::string& path, const std::string& out) {
    const ConfigBundle b = load_config(path);
    const SensorEnsemble ens = SensorEnsemble::from_config(b.scenario);
    SolverOptions opt;
    opt.grid_size = b.experiment.grid_size;
    const PolicyTable policy = b.experiment.detector == DetectorKind::OneThreshold
                                   ? solve_one_threshold(b.scenario, b.costs, ens, opt)
                                   : solve_backward(b.scenario, b.costs, ens, opt);
    save_policy(policy, out);
    for (int k = 1; k <= policy.K; ++k) {
        const StagePolicy& s = policy.stage(k);
        std::cout << "stage " << k << ": pi_low=" << s.pi_low << " pi_high=" << s.pi_high << "\n";
    }
    std::cout << "policy written to " << out << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ordered-transmission cooperative spectrum sensing simulator"};
    app.require_subcommand(1);

    std::string config, preset, out;
    std::uint64_t seed = 0;
    long trials = 0;

    auto* run = app.add_subcommand("run", "Run an experiment preset and write CSV output");
    run->add_option("--config", config, "Configuration file")->required();
    std::string preset_help = "Preset:";
    for (const auto& name : preset_names()) preset_help += " " + name;
    run->add_option("--preset", preset, preset_help);
    auto* seed_opt = run->add_option("--seed", seed, "Random seed");
    run->add_option("--trials", trials, "Monte Carlo slots per point")->check(CLI::PositiveNumber);
    run->add_option("--out", out, "Output directory");

    auto* validate = app.add_subcommand("validate", "Check a configuration file");
    validate->add_option("--config", config, "Configuration file")->required();

    std::string policy_out;
    auto* solve = app.add_subcommand("solve", "Solve the stopping policy and save it");
    solve->add_option("--config", config, "Configuration file")->required();
    solve->add_option("--out", policy_out, "Policy file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    try {
        if (*validate) return cmd_validate(config);
        if (*run) return cmd_run(config, preset, seed_opt->count() ? &seed : nullptr, trials, out);
        if (*solve) return cmd_solve(config, policy_out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntimeError;
    }
    return 0;
}
