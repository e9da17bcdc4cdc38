// Solves a seeded 8x8 complex tridiagonal system through the full inversion
// circuit and compares the post-selected answer with a dense solve.
#include <cstdio>

#include "qlsys/experiments.hpp"

int main() {
    using namespace qlsys;

    const std::uint64_t seed = 5;
    auto [a, y] = random_complex_tridiagonal(3, seed);

    const SolveReport report = solve_linear_system(a, y, 0.1);
    const ComplexVector direct = pseudoinverse_solve(a, y);

    std::printf("seed %llu, dim %zu\n", static_cast<unsigned long long>(seed), a.rows);
    std::printf("kappa %g, polynomial degree %lld, success probability %.4f\n",
                report.kappa_used, report.degree_used, report.success_probability);
    std::printf("%-3s %-26s %-26s\n", "i", "circuit", "direct");
    for (std::size_t i = 0; i < a.rows; ++i)
        std::printf("%-3zu %+.6f%+.6fi       %+.6f%+.6fi\n", i, report.solution[i].real(),
                    report.solution[i].imag(), direct[i].real(), direct[i].imag());

    double err2 = 0.0, ref2 = 0.0;
    for (std::size_t i = 0; i < a.rows; ++i) {
        err2 += std::norm(report.solution[i] - direct[i]);
        ref2 += std::norm(direct[i]);
    }
    std::printf("relative l2 deviation %.3e\n", std::sqrt(err2 / ref2));
    return 0;
}
