// Copyright 2026 The qlsys Authors
// SPDX-License-Identifier: Apache-2.0
#ifndef QLSYS_PDE_HPP
#define QLSYS_PDE_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qlsys/numerics.hpp"
#include "qlsys/qsvt.hpp"

namespace qlsys {

// One-dimensional diffusion on a uniform grid, Dirichlet value on the left
// boundary and a Neumann gradient on the right (eliminated ghost point).
// The unknown vector holds the interior points plus the right boundary node.
struct HeatConfig {
    double nu = 0.0;
    double dx = 0.0;
    double dt = 0.0;
    double dirichlet_left = 0.0;
    double neumann_right = 0.0;
    std::size_t unknowns = 0;
    ComplexVector initial;

    double lambda() const { return nu * dt / (dx * dx); }
};

// du/dt = F0 + F1 u + F2 (u ⊗ u)
struct QuadraticODE {
    ComplexVector f0;
    ComplexMatrix f1;  // n x n
    ComplexMatrix f2;  // n x n^2
};

// Truncated linear embedding of a quadratic ODE: block row j couples the
// tensor powers u^⊗(j-1), u^⊗j, u^⊗(j+1). Keys are (block row, block column).
struct CarlemanSystem {
    std::size_t truncation = 0;
    std::map<std::pair<std::size_t, std::size_t>, ComplexMatrix> blocks;
    ComplexMatrix assembled;
    std::size_t dimension = 0;
    ComplexVector y_in;
    ComplexVector b;
};

enum class SolverBackend { Classical, Qsvt };

namespace detail {

inline void check_heat_config(const HeatConfig& config) {
    if (!(config.nu > 0.0) || !(config.dx > 0.0) || config.dt < 0.0)
        throw InvalidInputError("heat: nu and dx must be positive, dt nonnegative");
    if (!std::isfinite(config.lambda()))
        throw InvalidInputError("heat: lambda not finite");
    if (config.unknowns == 0) throw InvalidInputError("heat: no unknowns");
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows * b.rows, a.cols * b.cols);
    for (std::size_t ra = 0; ra < a.rows; ++ra)
        for (std::size_t ca = 0; ca < a.cols; ++ca) {
            const Complex v = a.at(ra, ca);
            if (v == Complex{0.0, 0.0}) continue;
            for (std::size_t rb = 0; rb < b.rows; ++rb)
                for (std::size_t cb = 0; cb < b.cols; ++cb)
                    out.at(ra * b.rows + rb, ca * b.cols + cb) = v * b.at(rb, cb);
        }
    return out;
}

}  // namespace detail

/** Implicit-Euler system A u^{n+1} = b for one diffusion step. */
inline std::pair<ComplexMatrix, ComplexVector> heat_system(const HeatConfig& config,
                                                           const ComplexVector& u_n) {
    detail::check_heat_config(config);
    const std::size_t n = config.unknowns;
    if (u_n.size() != n) throw InvalidInputError("heat: state size mismatch");
    const double lambda = config.lambda();

    ComplexMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        a.at(i, i) = 1.0 + 2.0 * lambda;
        if (i > 0) a.at(i, i - 1) = -lambda;
        if (i + 1 < n) a.at(i, i + 1) = -lambda;
    }
    if (n > 1) a.at(n - 1, n - 2) = -2.0 * lambda;

    ComplexVector b = u_n;
    b[0] += lambda * config.dirichlet_left;
    b[n - 1] += 2.0 * lambda * config.neumann_right * config.dx;
    return {std::move(a), std::move(b)};
}

/** One forward-Euler diffusion step with the same boundary substitutions. */
inline ComplexVector heat_explicit_step(const HeatConfig& config, const ComplexVector& u_n) {
    detail::check_heat_config(config);
    const std::size_t n = config.unknowns;
    if (u_n.size() != n) throw InvalidInputError("heat: state size mismatch");
    const double lambda = config.lambda();

    ComplexVector out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Complex left = i == 0 ? Complex(config.dirichlet_left) : u_n[i - 1];
        Complex right;
        if (i + 1 < n)
            right = u_n[i + 1];
        else  // ghost point: u_{N} = u_{N-2} + 2 dx * gradient
            right = (n > 1 ? u_n[n - 2] : Complex(config.dirichlet_left)) +
                    2.0 * config.dx * config.neumann_right;
        out[i] = lambda * right + (1.0 - 2.0 * lambda) * u_n[i] + lambda * left;
    }
    return out;
}

/** Largest explicitly stable time step, dx^2 / (2 nu). */
inline double heat_stability_threshold(const HeatConfig& config) {
    if (!(config.nu > 0.0)) throw InvalidInputError("heat: nu must be positive");
    return config.dx * config.dx / (2.0 * config.nu);
}

/**
 * Runs repeated implicit steps from config.initial and returns the whole
 * trajectory (steps + 1 states). The classical backend solves each step
 * densely; the qsvt backend runs the full inversion circuit per step,
 * computing the inverse-polynomial phases once and reusing them. A supplied
 * reflection sequence skips that computation and takes precedence over any
 * kappa override. Backend failures are rethrown with the failing step
 * attached.
 */
inline std::vector<ComplexVector> heat_evolve(const HeatConfig& config, std::size_t steps,
                                              SolverBackend backend, double epsilon = 0.1,
                                              std::optional<double> kappa = std::nullopt,
                                              const PhaseSequence* reflection_phases = nullptr) {
    detail::check_heat_config(config);
    if (config.initial.size() != config.unknowns)
        throw InvalidInputError("heat: initial state size mismatch");

    std::vector<ComplexVector> trajectory;
    trajectory.reserve(steps + 1);
    trajectory.push_back(config.initial);

    std::optional<PhaseSequence> phases;
    for (std::size_t step = 1; step <= steps; ++step) {
        auto [a, b] = heat_system(config, trajectory.back());
        try {
            if (backend == SolverBackend::Classical) {
                trajectory.push_back(pseudoinverse_solve(a, b));
            } else {
                if (!phases.has_value()) {
                    if (reflection_phases != nullptr) {
                        if (reflection_phases->convention != PhaseConvention::Reflection)
                            throw InvalidInputError(
                                "heat: supplied phases must use the reflection convention");
                        phases = *reflection_phases;
                    } else {
                        double kappa_used = 0.0;
                        if (kappa.has_value()) {
                            kappa_used = *kappa;
                        } else {
                            kappa_used = conditioning_summary(a).ladder_kappa;
                            if (kappa_used == 0.0)
                                throw ConditioningError("heat: no ladder kappa fits");
                        }
                        phases = convert_phases_reflection(
                            find_phases_wx(chebyshev_inverse_coefficients(kappa_used, epsilon)));
                    }
                }
                trajectory.push_back(
                    solve_linear_system(a, b, epsilon, phases->kappa, &*phases).solution);
            }
        } catch (const PostSelectionError& e) {
            throw PostSelectionError("step " + std::to_string(step) + ": " + e.what(),
                                     e.probability);
        } catch (const ConditioningError& e) {
            throw ConditioningError("step " + std::to_string(step) + ": " + e.what());
        } catch (const ConvergenceError& e) {
            throw ConvergenceError("step " + std::to_string(step) + ": " + e.what(),
                                   e.residual);
        }
    }
    return trajectory;
}

/** Number of unknowns in a Carleman embedding: sum of n^j for j = 1..N. */
inline std::size_t carleman_dimension(std::size_t n, std::size_t truncation) {
    std::size_t total = 0, power = 1;
    for (std::size_t j = 1; j <= truncation; ++j) {
        power *= n;
        total += power;
    }
    return total;
}

/**
 * Builds the truncated Carleman embedding of a quadratic ODE. Block row j
 * holds Kronecker sums placing F1 on the diagonal block, F2 on the
 * superdiagonal block, and F0 (as an n x 1 map) on the subdiagonal block.
 */
inline CarlemanSystem carleman_matrix(const QuadraticODE& ode, std::size_t truncation) {
    const std::size_t n = ode.f1.rows;
    if (truncation == 0) throw InvalidInputError("carleman: truncation must be >= 1");
    if (n == 0 || ode.f1.cols != n) throw InvalidInputError("carleman: F1 must be square");
    if (ode.f2.rows != n || ode.f2.cols != n * n)
        throw InvalidInputError("carleman: F2 must be n x n^2");
    if (ode.f0.size() != n) throw InvalidInputError("carleman: F0 must have length n");

    const std::size_t dim = carleman_dimension(n, truncation);
    if (dim > 64) throw ResourceLimitError("carleman: dimension beyond desk scale");

    ComplexMatrix f0_col(n, 1);
    for (std::size_t i = 0; i < n; ++i) f0_col.at(i, 0) = ode.f0[i];

    auto kron_sum = [&](const ComplexMatrix& op, std::size_t level) {
        // sum over i of I^(i-1) (x) op (x) I^(level-i)
        ComplexMatrix total;
        for (std::size_t i = 1; i <= level; ++i) {
            ComplexMatrix term = ComplexMatrix::identity(1);
            for (std::size_t k = 1; k <= level; ++k)
                term = detail::kron(term, k == i ? op : ComplexMatrix::identity(n));
            if (total.rows == 0)
                total = std::move(term);
            else
                for (std::size_t idx = 0; idx < total.data.size(); ++idx)
                    total.data[idx] += term.data[idx];
        }
        return total;
    };

    CarlemanSystem sys;
    sys.truncation = truncation;
    sys.dimension = dim;
    sys.assembled = ComplexMatrix(dim, dim);
    sys.b.assign(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) sys.b[i] = ode.f0[i];

    std::vector<std::size_t> offset(truncation + 2, 0);
    std::size_t power = 1;
    for (std::size_t j = 1; j <= truncation; ++j) {
        power *= n;
        offset[j + 1] = offset[j] + power;
    }

    auto place = [&](std::size_t row_level, std::size_t col_level, ComplexMatrix block) {
        for (std::size_t r = 0; r < block.rows; ++r)
            for (std::size_t c = 0; c < block.cols; ++c)
                sys.assembled.at(offset[row_level] + r, offset[col_level] + c) =
                    block.at(r, c);
        sys.blocks[{row_level, col_level}] = std::move(block);
    };

    for (std::size_t j = 1; j <= truncation; ++j) {
        place(j, j, kron_sum(ode.f1, j));
        if (j + 1 <= truncation) place(j, j + 1, kron_sum(ode.f2, j));
        if (j >= 2) place(j, j - 1, kron_sum(f0_col, j));
    }
    return sys;
}

/** Stacks the tensor powers [u; u^⊗2; ...; u^⊗N]. */
inline ComplexVector carleman_initial_state(const ComplexVector& u_in, std::size_t truncation) {
    if (truncation == 0 || u_in.empty())
        throw InvalidInputError("carleman: empty state or zero truncation");
    ComplexVector out;
    ComplexVector level = {Complex(1.0)};
    for (std::size_t j = 1; j <= truncation; ++j) {
        ComplexVector next(level.size() * u_in.size());
        for (std::size_t p = 0; p < level.size(); ++p)
            for (std::size_t q = 0; q < u_in.size(); ++q)
                next[p * u_in.size() + q] = level[p] * u_in[q];
        level = std::move(next);
        out.insert(out.end(), level.begin(), level.end());
    }
    return out;
}

/**
 * Central-difference Burgers' discretization on S grid points with zero
 * Dirichlet ends; the n = S-2 interior values are the unknowns.
 */
inline QuadraticODE burgers_ode(std::size_t grid_points, double nu) {
    if (grid_points < 4) throw InvalidInputError("burgers: need at least 4 grid points");
    const std::size_t n = grid_points - 2;
    const double dx = 1.0 / static_cast<double>(grid_points - 1);
    const double lambda1 = nu / (dx * dx);
    const double lambda2 = -1.0 / (2.0 * dx);

    QuadraticODE ode;
    ode.f0.assign(n, 0.0);
    ode.f1 = ComplexMatrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        ode.f1.at(i, i) = -2.0 * lambda1;
        if (i > 0) ode.f1.at(i, i - 1) = lambda1;
        if (i + 1 < n) ode.f1.at(i, i + 1) = lambda1;
    }
    ode.f2 = ComplexMatrix(n, n * n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i + 1 < n) ode.f2.at(i, i * n + i + 1) = lambda2;
        if (i > 0) ode.f2.at(i, i * n + i - 1) = -lambda2;
    }
    return ode;
}

/** Implicit-Euler system L y^{k+1} = B for one Carleman step. */
inline std::pair<ComplexMatrix, ComplexVector> carleman_implicit_system(
    const CarlemanSystem& sys, const ComplexVector& y_k, double dt) {
    if (y_k.size() != sys.dimension) throw InvalidInputError("carleman: state size mismatch");
    ComplexMatrix l(sys.dimension, sys.dimension);
    for (std::size_t r = 0; r < sys.dimension; ++r) {
        l.at(r, r) = 1.0;
        for (std::size_t c = 0; c < sys.dimension; ++c)
            l.at(r, c) -= sys.assembled.at(r, c) * dt;
    }
    ComplexVector rhs = y_k;
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += sys.b[i] * dt;
    return {std::move(l), std::move(rhs)};
}

/**
 * Fine-step forward-Euler reference for the Burgers' ODE, sampled at the
 * requested output times (each must sit on the dt_ref grid). Throws a
 * stability error if the sup norm grows past ten times the initial one.
 */
inline std::vector<ComplexVector> burgers_reference_explicit(
    std::size_t grid_points, double nu, const ComplexVector& u0, double dt_ref,
    const std::vector<double>& output_times) {
    if (!(dt_ref > 0.0)) throw InvalidInputError("burgers: dt_ref must be positive");
    if (output_times.empty()) throw InvalidInputError("burgers: no output times");
    const QuadraticODE ode = burgers_ode(grid_points, nu);
    const std::size_t n = grid_points - 2;
    if (u0.size() != n) throw InvalidInputError("burgers: initial state size mismatch");

    auto sup_norm = [](const ComplexVector& v) {
        double worst = 0.0;
        for (const Complex& x : v) worst = std::max(worst, std::abs(x));
        return worst;
    };
    const double base = sup_norm(u0);

    std::vector<long long> step_marks;
    long long prev_mark = -1;
    for (double t : output_times) {
        if (t < 0.0) throw InvalidInputError("burgers: negative output time");
        const double steps = t / dt_ref;
        const long long mark = std::llround(steps);
        if (std::abs(steps - static_cast<double>(mark)) > 1e-9)
            throw InvalidInputError("burgers: output time off the dt_ref grid");
        if (mark <= prev_mark)
            throw InvalidInputError("burgers: output times must increase");
        step_marks.push_back(mark);
        prev_mark = mark;
    }

    std::vector<ComplexVector> trajectory;
    ComplexVector u = u0;
    long long step = 0;
    std::size_t next_out = 0;
    while (next_out < step_marks.size()) {
        if (step == step_marks[next_out]) {
            trajectory.push_back(u);
            ++next_out;
            continue;
        }
        ComplexVector du(n, 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            Complex acc = ode.f0[r];
            for (std::size_t c = 0; c < n; ++c) acc += ode.f1.at(r, c) * u[c];
            for (std::size_t p = 0; p < n; ++p)
                for (std::size_t q = 0; q < n; ++q) {
                    const Complex w = ode.f2.at(r, p * n + q);
                    if (w != Complex{0.0, 0.0}) acc += w * u[p] * u[q];
                }
            du[r] = acc;
        }
        for (std::size_t i = 0; i < n; ++i) u[i] += dt_ref * du[i];
        ++step;
        if (base > 0.0 && sup_norm(u) > 10.0 * base)
            throw StabilityError("burgers: explicit reference diverged at t = " +
                                 std::to_string(static_cast<double>(step) * dt_ref));
    }
    return trajectory;
}

/**
 * Tridiagonal Toeplitz system with the three stencil values and the
 * right-hand side drawn from the given source (uniform on (-1, 1) draws).
 * Draw order: z1 re/im (subdiagonal), z2 re/im (diagonal), z3 re/im
 * (superdiagonal), then re/im per right-hand-side component.
 */
inline std::pair<ComplexMatrix, ComplexVector> complex_tridiagonal_from_source(
    std::size_t n_qubits, const std::function<double()>& source) {
    if (n_qubits == 0) throw InvalidInputError("complex system: need at least 1 qubit");
    const std::size_t dim = std::size_t{1} << n_qubits;
    const double a = source(), b = source();
    const double c = source(), d = source();
    const double e = source(), f = source();
    const Complex z1(a, b), z2(c, d), z3(e, f);

    ComplexMatrix m(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) {
        m.at(i, i) = z2;
        if (i > 0) m.at(i, i - 1) = z1;
        if (i + 1 < dim) m.at(i, i + 1) = z3;
    }
    ComplexVector y(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        const double re = source(), im = source();
        y[i] = Complex(re, im);
    }
    return {std::move(m), std::move(y)};
}

/** Seeded instance of the random tridiagonal family; bit-exact per seed. */
inline std::pair<ComplexMatrix, ComplexVector> random_complex_tridiagonal(
    std::size_t n_qubits, std::uint64_t seed) {
    SplitMix64 rng(seed);
    return complex_tridiagonal_from_source(n_qubits, [&rng] { return rng.uniform_pm1(); });
}

}  // namespace qlsys

#endif  // QLSYS_PDE_HPP
