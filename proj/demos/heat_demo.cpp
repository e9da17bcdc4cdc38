// Drives a rod from a cold start with a hot left boundary and compares the
// circuit-solved implicit evolution against the dense classical one.
#include <cstdio>

#include "qlsys/experiments.hpp"

int main() {
    using namespace qlsys;

    HeatConfig config;
    config.nu = 0.01;
    config.dx = 0.125;
    config.dt = 1.0;
    config.dirichlet_left = 1.0;
    config.neumann_right = 0.0;
    config.unknowns = 8;
    config.initial = ComplexVector(8, Complex{0.0, 0.0});

    const std::size_t steps = 100;
    const auto classical = heat_evolve(config, steps, SolverBackend::Classical);
    const auto quantum = heat_evolve(config, steps, SolverBackend::Qsvt);

    std::printf("lambda %g, explicit stability threshold dt < %g\n", config.lambda(),
                heat_stability_threshold(config));
    std::printf("%-6s %-12s %-12s %-12s\n", "x", "t=0", "classical", "circuit");
    for (std::size_t i = 0; i < config.unknowns; ++i)
        std::printf("%-6.3f %-12.6f %-12.6f %-12.6f\n",
                    config.dx * static_cast<double>(i + 1), config.initial[i].real(),
                    classical.back()[i].real(), quantum.back()[i].real());

    double worst = 0.0;
    for (std::size_t k = 0; k <= steps; ++k)
        for (std::size_t i = 0; i < config.unknowns; ++i)
            worst = std::max(worst, std::abs(quantum[k][i] - classical[k][i]));
    std::printf("max backend deviation over the trajectory %.3e\n", worst);
    return 0;
}
