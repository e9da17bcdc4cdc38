#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qlsys/experiments.hpp"

// Exit codes: 0 success, 2 invalid configuration, 3 conditioning failure,
// 4 post-selection failure, 5 fit failure.
int main(int argc, char** argv) {
    CLI::App app{"Linear-system experiments on a singular value transformation simulator"};

    std::string experiment;
    std::string out_dir;
    std::string phase_cache;
    double nu = 0.01;
    double dx = 0.125;
    double dt = -1.0;
    double epsilon = 0.1;
    double kappa = 0.0;
    std::int64_t seed = -1;
    std::size_t grid_points = 0;
    std::size_t truncation = 2;
    std::size_t steps = 0;
    std::size_t sweep_points = 25;
    std::size_t jobs = 1;

    app.add_option("--experiment", experiment,
                   "one of: complex, heat, burgers, scaling-dt, scaling-qubits")
        ->required();
    app.add_option("--nu", nu, "viscosity / diffusivity");
    app.add_option("--dx", dx, "grid spacing for the diffusion runs");
    app.add_option("--dt", dt, "time step (per-experiment default when omitted)");
    app.add_option("--grid-points", grid_points,
                   "grid size; solved dimension for the complex experiment");
    app.add_option("--truncation", truncation, "Carleman truncation level");
    app.add_option("--epsilon", epsilon, "inversion accuracy target");
    app.add_option("--kappa", kappa, "condition-number target override (ladder when omitted)");
    app.add_option("--steps", steps, "number of implicit time steps");
    app.add_option("--seed", seed, "random seed (required for the complex experiment)");
    app.add_option("--out", out_dir, "output directory for CSV files")->required();
    app.add_option("--phase-cache", phase_cache, "directory for cached phase sequences");
    app.add_option("--sweep-points", sweep_points, "points in the time-step sweep");
    app.add_option("--jobs", jobs, "max concurrent sweep points");
    app.set_config("--config", "", "key=value configuration file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        qlsys::ExperimentConfig config;
        config.experiment = qlsys::parse_experiment_kind(experiment);
        config.nu = nu;
        config.dx = dx;
        if (dt >= 0.0) config.dt = dt;
        config.grid_points = grid_points;
        config.truncation = truncation;
        config.epsilon = epsilon;
        if (kappa != 0.0) config.kappa = kappa;
        config.steps = steps;
        if (seed >= 0) config.seed = static_cast<std::uint64_t>(seed);
        config.out_dir = out_dir;
        config.phase_cache_dir = phase_cache;
        config.sweep_points = sweep_points;
        config.jobs = jobs;

        const std::vector<std::string> files = qlsys::run_experiment(config);
        for (const std::string& file : files) std::cout << file << '\n';
        return 0;
    } catch (const qlsys::PostSelectionError& e) {
        std::cerr << "post-selection failure: " << e.what() << '\n';
        return 4;
    } catch (const qlsys::ConditioningError& e) {
        std::cerr << "conditioning failure: " << e.what() << '\n';
        return 3;
    } catch (const qlsys::ConvergenceError& e) {
        std::cerr << "fit failure: " << e.what() << '\n';
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "invalid configuration: " << e.what() << '\n';
        return 2;
    }
}
