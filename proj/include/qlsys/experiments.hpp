#ifndef QLSYS_EXPERIMENTS_HPP
#define QLSYS_EXPERIMENTS_HPP

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "qlsys/blockenc.hpp"
#include "qlsys/invpoly.hpp"
#include "qlsys/numerics.hpp"
#include "qlsys/pde.hpp"
#include "qlsys/qsvt.hpp"

namespace qlsys {

enum class ExperimentKind { Complex, Heat, Burgers, ScalingDt, ScalingQubits };

inline ExperimentKind parse_experiment_kind(const std::string& name) {
    if (name == "complex") return ExperimentKind::Complex;
    if (name == "heat") return ExperimentKind::Heat;
    if (name == "burgers") return ExperimentKind::Burgers;
    if (name == "scaling-dt") return ExperimentKind::ScalingDt;
    if (name == "scaling-qubits") return ExperimentKind::ScalingQubits;
    throw InvalidInputError("unknown experiment: " + name);
}

/**
 * Everything a run needs. Zero / nullopt fields fall back to per-experiment
 * defaults: the complex solve uses dimension 8, heat uses 9 grid points,
 * dt 1 and 100 steps, the Burgers run uses 7 grid points, dt 0.1 and 3
 * steps. grid_points is the solved dimension for the complex experiment and
 * the physical grid size (boundaries included) for the PDE runs.
 */
struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::Complex;
    double nu = 0.01;
    double dx = 0.125;
    std::optional<double> dt;
    std::size_t grid_points = 0;
    std::size_t truncation = 2;
    double epsilon = 0.1;
    std::optional<double> kappa;
    std::size_t steps = 0;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::string phase_cache_dir;
    std::size_t sweep_points = 25;
    std::size_t jobs = 1;
};

/** Shortest decimal form that parses back to the exact same double. */
inline std::string format_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

namespace detail {

inline std::string sanitize_csv_field(std::string text) {
    for (char& c : text)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return text;
}

class Stopwatch {
  public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double elapsed_ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                         start_)
            .count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInputError("cannot open for writing: " + path.string());
    out << content;
    out.flush();
    if (!out) throw InvalidInputError("write failed: " + path.string());
}

}  // namespace detail

inline ComplexMatrix zero_pad_matrix(const ComplexMatrix& a, std::size_t dim) {
    if (dim < a.rows || dim < a.cols)
        throw InvalidInputError("zero pad: target smaller than the matrix");
    ComplexMatrix out(dim, dim);
    for (std::size_t r = 0; r < a.rows; ++r)
        for (std::size_t c = 0; c < a.cols; ++c) out.at(r, c) = a.at(r, c);
    return out;
}

inline ComplexVector zero_pad_vector(const ComplexVector& v, std::size_t dim) {
    if (dim < v.size()) throw InvalidInputError("zero pad: target smaller than the vector");
    ComplexVector out(dim, Complex{0.0, 0.0});
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i];
    return out;
}

inline std::filesystem::path phase_cache_path(const std::string& dir, double kappa,
                                              double epsilon) {
    return std::filesystem::path(dir) /
           ("phases_k" + format_double(kappa) + "_e" + format_double(epsilon) + ".txt");
}

/**
 * Returns the reflection-convention inversion phases for (kappa, epsilon),
 * reading them from the cache directory when a valid file exists and writing
 * the file after a fresh computation. An empty directory disables caching.
 * Corrupt or mismatched cache files are silently recomputed and replaced.
 */
inline PhaseSequence load_or_compute_phases(double kappa, double epsilon,
                                            const std::string& cache_dir) {
    if (!cache_dir.empty()) {
        std::ifstream in(phase_cache_path(cache_dir, kappa, epsilon));
        if (in) {
            std::ostringstream buffer;
            buffer << in.rdbuf();
            try {
                PhaseSequence seq = parse_phase_sequence(buffer.str());
                if (seq.convention == PhaseConvention::Reflection &&
                    std::abs(seq.kappa - kappa) <= 1e-9 * kappa &&
                    std::abs(seq.epsilon - epsilon) <= 1e-12)
                    return seq;
            } catch (const InvalidInputError&) {
            }
        }
    }
    const PhaseSequence seq =
        convert_phases_reflection(find_phases_wx(chebyshev_inverse_coefficients(kappa, epsilon)));
    if (!cache_dir.empty()) {
        std::filesystem::create_directories(cache_dir);
        const std::filesystem::path file = phase_cache_path(cache_dir, kappa, epsilon);
        const std::filesystem::path tmp = file.string() + ".tmp";
        detail::write_text_file(tmp, serialize_phase_sequence(seq));
        std::filesystem::rename(tmp, file);
    }
    return seq;
}

/** One row of a per-solve summary CSV. */
struct SolveRecord {
    std::string matrix_id;
    std::size_t dim = 0;
    double alpha = 0.0;
    double sigma_min = 0.0;
    double kappa = 0.0;
    long long degree = 0;
    double success_probability = 0.0;
    double residual = 0.0;
    double wall_time_ms = 0.0;
};

inline std::string solve_csv_header() {
    return "matrix_id,dim,alpha,sigma_min,kappa,degree,success_probability,residual,wall_time_ms";
}

inline std::string solve_csv_row(const SolveRecord& r) {
    std::ostringstream os;
    os << detail::sanitize_csv_field(r.matrix_id) << ',' << r.dim << ','
       << format_double(r.alpha) << ',' << format_double(r.sigma_min) << ','
       << format_double(r.kappa) << ',' << r.degree << ','
       << format_double(r.success_probability) << ',' << format_double(r.residual) << ','
       << format_double(r.wall_time_ms);
    return os.str();
}

/**
 * One point of a resource-scaling sweep. sweep_value is the time step for
 * the dt sweep and the matrix qubit count for the qubit sweep; nu, dt and
 * epsilon record the context the point was generated under so a record set
 * stays self-describing. The degree column is the polynomial degree at the
 * ladder kappa when one fits and at the exact conditioning 1/sigma_min
 * beyond the ladder's reach (ladder_kappa 0 marks that regime). Rows that
 * failed keep status text other than "ok" and leave unfilled numeric fields
 * as NaN.
 */
struct ScalingRecord {
    double sweep_value = 0.0;
    double sigma_min = std::numeric_limits<double>::quiet_NaN();
    long long degree = 0;
    double alpha = std::numeric_limits<double>::quiet_NaN();
    double ladder_kappa = 0.0;
    double success_probability = std::numeric_limits<double>::quiet_NaN();
    std::string status = "ok";
    double nu = 0.0;
    double dt = 0.0;
    double epsilon = 0.0;
    double wall_time_ms = 0.0;
};

inline std::string scaling_csv_header() {
    return "sweep_value,sigma_min,degree,alpha,ladder_kappa,success_probability,status,nu,dt,"
           "epsilon,wall_time_ms";
}

inline std::string scaling_csv_row(const ScalingRecord& r) {
    std::ostringstream os;
    os << format_double(r.sweep_value) << ',' << format_double(r.sigma_min) << ',' << r.degree
       << ',' << format_double(r.alpha) << ',' << format_double(r.ladder_kappa) << ','
       << format_double(r.success_probability) << ',' << detail::sanitize_csv_field(r.status)
       << ',' << format_double(r.nu) << ',' << format_double(r.dt) << ','
       << format_double(r.epsilon) << ',' << format_double(r.wall_time_ms);
    return os.str();
}

/** Serializes a trajectory as time,grid_index,value_re,value_im rows. */
inline std::string trajectory_csv(const std::vector<ComplexVector>& trajectory, double dt,
                                  const std::vector<std::string>& metadata) {
    std::ostringstream os;
    for (const std::string& line : metadata) os << "# " << line << '\n';
    os << "time,grid_index,value_re,value_im\n";
    for (std::size_t k = 0; k < trajectory.size(); ++k)
        for (std::size_t i = 0; i < trajectory[k].size(); ++i)
            os << format_double(dt * static_cast<double>(k)) << ',' << i << ','
               << format_double(trajectory[k][i].real()) << ','
               << format_double(trajectory[k][i].imag()) << '\n';
    return os.str();
}

namespace detail {

/**
 * Post-selection probability predicted from the dense singular decomposition
 * of the subnormalized adjoint and the rescaled inverse series, for the
 * normalized right-hand side.
 */
inline double success_probability_estimate(const ComplexMatrix& a, double alpha,
                                           const ComplexVector& b,
                                           const InversePolynomial& poly, double scale) {
    const double b_norm = vector_norm(b);
    if (b_norm == 0.0) throw InvalidInputError("success estimate: zero right-hand side");
    ComplexMatrix abar = adjoint(a);
    for (Complex& v : abar.data) v /= alpha;
    const SVDResult dec = svd(abar);
    ComplexVector g(a.rows, Complex{0.0, 0.0});
    for (std::size_t k = 0; k < dec.rank; ++k) {
        const double f =
            scale * evaluate_chebyshev(poly.chebyshev_coeffs, dec.singular_values[k]);
        Complex overlap{0.0, 0.0};
        for (std::size_t i = 0; i < a.rows; ++i)
            overlap += std::conj(dec.right_vectors.at(i, k)) * (b[i] / b_norm);
        for (std::size_t i = 0; i < a.rows; ++i) g[i] += f * overlap * dec.left_vectors.at(i, k);
    }
    const double norm = vector_norm(g);
    return norm * norm;
}

inline double relative_residual(const ComplexMatrix& a, const ComplexVector& x,
                                const ComplexVector& y) {
    const ComplexVector ax = matvec(a, x);
    ComplexVector r(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) r[i] = ax[i] - y[i];
    return vector_norm(r) / vector_norm(y);
}

inline HeatConfig boundary_driven_heat(double nu, double dx, double dt, std::size_t unknowns) {
    HeatConfig hc;
    hc.nu = nu;
    hc.dx = dx;
    hc.dt = dt;
    hc.dirichlet_left = 1.0;
    hc.neumann_right = 0.0;
    hc.unknowns = unknowns;
    hc.initial = ComplexVector(unknowns, Complex{0.0, 0.0});
    return hc;
}

inline ScalingRecord heat_scaling_point(double sweep_value, double nu, double dx, double dt,
                                        std::size_t unknowns, double epsilon) {
    ScalingRecord rec;
    rec.sweep_value = sweep_value;
    rec.nu = nu;
    rec.dt = dt;
    rec.epsilon = epsilon;
    const Stopwatch watch;
    try {
        const HeatConfig hc = boundary_driven_heat(nu, dx, dt, unknowns);
        auto [a, b] = heat_system(hc, hc.initial);
        const ConditioningSummary cond = conditioning_summary(a);
        rec.alpha = cond.alpha;
        rec.sigma_min = cond.sigma_min;
        rec.ladder_kappa = cond.ladder_kappa;
        const double kappa =
            cond.ladder_kappa > 0.0 ? cond.ladder_kappa : 1.0 / cond.sigma_min;
        const InversePolynomial poly = chebyshev_inverse_coefficients(kappa, epsilon);
        rec.degree = poly.degree;
        rec.success_probability =
            success_probability_estimate(a, cond.alpha, b, poly, inverse_series_scale(poly));
    } catch (const std::exception& e) {
        rec.status = std::string("failed: ") + e.what();
    }
    rec.wall_time_ms = watch.elapsed_ms();
    return rec;
}

}  // namespace detail

/**
 * Runs the configured resource sweep over the boundary-driven diffusion
 * family and returns one record per point, in sweep order. The dt sweep uses
 * sweep_points log-spaced steps between 0.01 and 4 on the configured grid;
 * the qubit sweep visits n = 3..6 matrix qubits (2^n unknowns, dx = 2^-n)
 * for each dt in {1, 2, 3}. Failing points are flagged in their status field
 * and do not stop the sweep. Points execute on up to `jobs` threads; record
 * order stays deterministic regardless.
 */
inline std::vector<ScalingRecord> run_scaling(const ExperimentConfig& config) {
    struct Point {
        double sweep_value;
        double nu;
        double dx;
        double dt;
        std::size_t unknowns;
        double epsilon;
    };
    std::vector<Point> points;
    if (config.experiment == ExperimentKind::ScalingDt) {
        if (config.sweep_points < 2)
            throw InvalidInputError("scaling: at least two sweep points required");
        const std::size_t grid = config.grid_points == 0 ? 9 : config.grid_points;
        if (grid < 2) throw InvalidInputError("scaling: needs at least two grid points");
        const std::size_t unknowns = grid - 1;
        const double lo = 0.01, hi = 4.0;
        for (std::size_t i = 0; i < config.sweep_points; ++i) {
            double dt = hi;
            if (i == 0)
                dt = lo;
            else if (i + 1 < config.sweep_points)
                dt = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) *
                                                 static_cast<double>(i) /
                                                 static_cast<double>(config.sweep_points - 1));
            points.push_back({dt, config.nu, config.dx, dt, unknowns, config.epsilon});
        }
    } else if (config.experiment == ExperimentKind::ScalingQubits) {
        for (double dt : {1.0, 2.0, 3.0})
            for (std::size_t n = 3; n <= 6; ++n) {
                const std::size_t unknowns = std::size_t{1} << n;
                const double dx = 1.0 / static_cast<double>(unknowns);
                points.push_back(
                    {static_cast<double>(n), config.nu, dx, dt, unknowns, config.epsilon});
            }
    } else {
        throw InvalidInputError("scaling: experiment is not a sweep");
    }

    std::vector<ScalingRecord> records(points.size());
    auto compute = [&](std::size_t i) {
        const Point& p = points[i];
        records[i] =
            detail::heat_scaling_point(p.sweep_value, p.nu, p.dx, p.dt, p.unknowns, p.epsilon);
    };
    const std::size_t jobs = std::min(std::max<std::size_t>(1, config.jobs), points.size());
    if (jobs <= 1) {
        for (std::size_t i = 0; i < points.size(); ++i) compute(i);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i; (i = next.fetch_add(1)) < points.size();) compute(i);
        };
        std::vector<std::thread> pool;
        pool.reserve(jobs);
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    return records;
}

struct ExtrapolationReport {
    double test_n = 0.0;
    DoubleExpFit fit;
    double predicted_sigma_min = 0.0;
    long long implied_degree = 0;
    std::optional<double> true_sigma_min;
    std::optional<double> relative_error;
};

/**
 * Fits sigma_min(sweep_value) with a two-term exponential over the usable
 * records and evaluates the model at test_n, reporting the predicted value
 * and the polynomial degree it implies. When test_n is a whole qubit count
 * small enough for a dense check (dimension at most 256), the true value of
 * the matching diffusion system and the relative prediction error are filled
 * in. Needs at least four usable records from a single sweep context.
 */
inline ExtrapolationReport extrapolate_report(const std::vector<ScalingRecord>& records,
                                              double test_n) {
    std::vector<double> xs, ys;
    std::optional<double> nu, dt, epsilon;
    for (const ScalingRecord& rec : records) {
        if (rec.status != "ok") continue;
        if (!nu.has_value()) {
            nu = rec.nu;
            dt = rec.dt;
            epsilon = rec.epsilon;
        } else if (rec.nu != *nu || rec.dt != *dt || rec.epsilon != *epsilon) {
            throw InvalidInputError("extrapolation: records mix sweep contexts");
        }
        xs.push_back(rec.sweep_value);
        ys.push_back(rec.sigma_min);
    }
    if (xs.size() < 4)
        throw InvalidInputError("extrapolation: needs at least 4 usable records");

    ExtrapolationReport report;
    report.test_n = test_n;
    report.fit = fit_double_exponential(xs, ys);
    report.predicted_sigma_min = double_exp_eval(report.fit, test_n);
    if (!(report.predicted_sigma_min > 0.0) || report.predicted_sigma_min >= 1.0)
        throw ConvergenceError("extrapolation: predicted sigma_min outside (0, 1)",
                               report.predicted_sigma_min);
    report.implied_degree =
        2 * degree_parameters(1.0 / report.predicted_sigma_min, *epsilon).second + 1;

    const double rounded = std::round(test_n);
    if (std::abs(test_n - rounded) < 1e-9 && rounded >= 1.0 && rounded <= 8.0) {
        const std::size_t unknowns = std::size_t{1} << static_cast<std::size_t>(rounded);
        const HeatConfig hc = detail::boundary_driven_heat(
            *nu, 1.0 / static_cast<double>(unknowns), *dt, unknowns);
        auto [a, b] = heat_system(hc, hc.initial);
        (void)b;
        const ConditioningSummary cond = conditioning_summary(a);
        report.true_sigma_min = cond.sigma_min;
        report.relative_error =
            std::abs(report.predicted_sigma_min - cond.sigma_min) / cond.sigma_min;
    }
    return report;
}

namespace detail {

inline std::vector<std::string> run_complex(const ExperimentConfig& config,
                                            const std::filesystem::path& out_dir) {
    if (!config.seed.has_value()) throw InvalidInputError("complex experiment: seed is required");
    const std::size_t dim = config.grid_points == 0 ? 8 : config.grid_points;
    if (!is_power_of_two(dim) || dim < 2)
        throw InvalidInputError("complex experiment: dimension must be a power of two >= 2");
    auto [a, y] = random_complex_tridiagonal(log2_exact(dim), *config.seed);
    const ComplexVector truth = pseudoinverse_solve(a, y);

    const ConditioningSummary cond = conditioning_summary(a);
    const double kappa = config.kappa.value_or(cond.ladder_kappa);
    if (kappa == 0.0) throw ConditioningError("complex experiment: no ladder kappa fits");
    const PhaseSequence phases =
        load_or_compute_phases(kappa, config.epsilon, config.phase_cache_dir);

    const Stopwatch watch;
    const SolveReport report = solve_linear_system(a, y, config.epsilon, kappa, &phases);
    const double wall = watch.elapsed_ms();

    double err2 = 0.0, ref2 = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        err2 += std::norm(report.solution[i] - truth[i]);
        ref2 += std::norm(truth[i]);
    }
    const double rel_error = std::sqrt(err2 / ref2);

    std::ostringstream parity;
    parity << "# experiment=complex\n"
           << "# seed=" << *config.seed << '\n'
           << "# dim=" << dim << '\n'
           << "# epsilon=" << format_double(config.epsilon) << '\n'
           << "# kappa=" << format_double(report.kappa_used) << '\n'
           << "# degree=" << report.degree_used << '\n'
           << "# alpha=" << format_double(cond.alpha) << '\n'
           << "# sigma_min=" << format_double(cond.sigma_min) << '\n'
           << "# rel_l2_error=" << format_double(rel_error) << '\n'
           << "grid_index,true_re,true_im,qsvt_re,qsvt_im\n";
    for (std::size_t i = 0; i < dim; ++i)
        parity << i << ',' << format_double(truth[i].real()) << ','
               << format_double(truth[i].imag()) << ','
               << format_double(report.solution[i].real()) << ','
               << format_double(report.solution[i].imag()) << '\n';

    SolveRecord row;
    row.matrix_id = "complex-seed" + std::to_string(*config.seed);
    row.dim = dim;
    row.alpha = cond.alpha;
    row.sigma_min = cond.sigma_min;
    row.kappa = report.kappa_used;
    row.degree = report.degree_used;
    row.success_probability = report.success_probability;
    row.residual = relative_residual(a, report.solution, y);
    row.wall_time_ms = wall;

    const std::filesystem::path parity_path = out_dir / "parity.csv";
    const std::filesystem::path solve_path = out_dir / "solve.csv";
    write_text_file(parity_path, parity.str());
    write_text_file(solve_path, solve_csv_header() + "\n" + solve_csv_row(row) + "\n");
    return {parity_path.string(), solve_path.string()};
}

inline std::vector<std::string> run_heat(const ExperimentConfig& config,
                                         const std::filesystem::path& out_dir) {
    const std::size_t grid = config.grid_points == 0 ? 9 : config.grid_points;
    if (grid < 2) throw InvalidInputError("heat experiment: needs at least two grid points");
    const HeatConfig hc =
        boundary_driven_heat(config.nu, config.dx, config.dt.value_or(1.0), grid - 1);
    const std::size_t steps = config.steps == 0 ? 100 : config.steps;

    const std::vector<ComplexVector> classical =
        heat_evolve(hc, steps, SolverBackend::Classical);

    auto [a0, b0] = heat_system(hc, hc.initial);
    const ConditioningSummary cond = conditioning_summary(a0);
    const double kappa = config.kappa.value_or(cond.ladder_kappa);
    if (kappa == 0.0) throw ConditioningError("heat experiment: no ladder kappa fits");
    const PhaseSequence phases =
        load_or_compute_phases(kappa, config.epsilon, config.phase_cache_dir);
    const std::vector<ComplexVector> quantum =
        heat_evolve(hc, steps, SolverBackend::Qsvt, config.epsilon, kappa, &phases);

    std::vector<std::string> meta = {"experiment=heat",
                                     "nu=" + format_double(hc.nu),
                                     "dx=" + format_double(hc.dx),
                                     "dt=" + format_double(hc.dt),
                                     "lambda=" + format_double(hc.lambda()),
                                     "dirichlet_left=" + format_double(hc.dirichlet_left),
                                     "neumann_right=" + format_double(hc.neumann_right),
                                     "steps=" + std::to_string(steps)};
    std::vector<std::string> meta_classical = meta;
    meta_classical.push_back("backend=classical");
    std::vector<std::string> meta_quantum = meta;
    meta_quantum.push_back("backend=qsvt");
    meta_quantum.push_back("epsilon=" + format_double(config.epsilon));
    meta_quantum.push_back("kappa=" + format_double(phases.kappa));
    meta_quantum.push_back("degree=" + std::to_string(phases.degree));

    const Stopwatch watch;
    const SolveReport rep = solve_linear_system(a0, b0, config.epsilon, kappa, &phases);
    const double wall = watch.elapsed_ms();
    SolveRecord row;
    row.matrix_id = "heat-step1";
    row.dim = hc.unknowns;
    row.alpha = cond.alpha;
    row.sigma_min = cond.sigma_min;
    row.kappa = rep.kappa_used;
    row.degree = rep.degree_used;
    row.success_probability = rep.success_probability;
    row.residual = relative_residual(a0, rep.solution, b0);
    row.wall_time_ms = wall;

    const std::filesystem::path classical_path = out_dir / "heat_classical.csv";
    const std::filesystem::path quantum_path = out_dir / "heat_qsvt.csv";
    const std::filesystem::path solve_path = out_dir / "solve.csv";
    write_text_file(classical_path, trajectory_csv(classical, hc.dt, meta_classical));
    write_text_file(quantum_path, trajectory_csv(quantum, hc.dt, meta_quantum));
    write_text_file(solve_path, solve_csv_header() + "\n" + solve_csv_row(row) + "\n");
    return {classical_path.string(), quantum_path.string(), solve_path.string()};
}

inline std::vector<std::string> run_burgers(const ExperimentConfig& config,
                                            const std::filesystem::path& out_dir) {
    const std::size_t grid = config.grid_points == 0 ? 7 : config.grid_points;
    const std::size_t truncation = config.truncation == 0 ? 2 : config.truncation;
    const double dt = config.dt.value_or(0.1);
    if (!(dt > 0.0)) throw InvalidInputError("burgers experiment: dt must be positive");
    const std::size_t steps = config.steps == 0 ? 3 : config.steps;

    const QuadraticODE ode = burgers_ode(grid, config.nu);
    const CarlemanSystem sys = carleman_matrix(ode, truncation);
    const std::size_t n = grid - 2;
    const double dx = 1.0 / static_cast<double>(grid - 1);
    ComplexVector u0(n);
    for (std::size_t i = 0; i < n; ++i)
        u0[i] = std::sin(2.0 * std::numbers::pi * dx * static_cast<double>(i + 1));

    std::size_t padded = 1;
    while (padded < sys.dimension) padded <<= 1;

    ComplexVector y_classical = carleman_initial_state(u0, truncation);
    ComplexVector y_quantum = y_classical;

    const ComplexMatrix l_padded =
        zero_pad_matrix(carleman_implicit_system(sys, y_quantum, dt).first, padded);
    const ConditioningSummary cond = conditioning_summary(l_padded);
    const double kappa = config.kappa.value_or(cond.ladder_kappa);
    if (kappa == 0.0) throw ConditioningError("burgers experiment: no ladder kappa fits");
    const PhaseSequence phases =
        load_or_compute_phases(kappa, config.epsilon, config.phase_cache_dir);

    auto embed = [&](ComplexVector::const_iterator first) {
        ComplexVector full(grid, Complex{0.0, 0.0});
        for (std::size_t i = 0; i < n; ++i) full[i + 1] = *(first + static_cast<long>(i));
        return full;
    };

    std::vector<ComplexVector> classical_traj{embed(u0.begin())};
    std::vector<ComplexVector> quantum_traj{embed(u0.begin())};
    std::ostringstream solve_rows;
    solve_rows << solve_csv_header() << '\n';

    for (std::size_t step = 1; step <= steps; ++step) {
        auto [lc, bc] = carleman_implicit_system(sys, y_classical, dt);
        y_classical = pseudoinverse_solve(lc, bc);
        classical_traj.push_back(embed(y_classical.begin()));

        const ComplexVector b_padded =
            zero_pad_vector(carleman_implicit_system(sys, y_quantum, dt).second, padded);
        const Stopwatch watch;
        const SolveReport rep =
            solve_linear_system(l_padded, b_padded, config.epsilon, kappa, &phases);
        const double wall = watch.elapsed_ms();
        y_quantum.assign(rep.solution.begin(),
                         rep.solution.begin() + static_cast<long>(sys.dimension));
        quantum_traj.push_back(embed(y_quantum.begin()));

        SolveRecord row;
        row.matrix_id = "burgers-step" + std::to_string(step);
        row.dim = padded;
        row.alpha = cond.alpha;
        row.sigma_min = cond.sigma_min;
        row.kappa = rep.kappa_used;
        row.degree = rep.degree_used;
        row.success_probability = rep.success_probability;
        row.residual = relative_residual(l_padded, rep.solution, b_padded);
        row.wall_time_ms = wall;
        solve_rows << solve_csv_row(row) << '\n';
    }

    const double dt_ref = dt / 100.0;
    std::vector<double> times(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) times[k] = dt * static_cast<double>(k);
    const std::vector<ComplexVector> reference =
        burgers_reference_explicit(grid, config.nu, u0, dt_ref, times);
    std::vector<ComplexVector> reference_traj;
    reference_traj.reserve(reference.size());
    for (const ComplexVector& state : reference) reference_traj.push_back(embed(state.begin()));

    std::vector<std::string> meta = {"experiment=burgers",
                                     "grid_points=" + std::to_string(grid),
                                     "truncation=" + std::to_string(truncation),
                                     "nu=" + format_double(config.nu),
                                     "dt=" + format_double(dt),
                                     "steps=" + std::to_string(steps),
                                     "carleman_dimension=" + std::to_string(sys.dimension),
                                     "padded_dimension=" + std::to_string(padded)};
    std::vector<std::string> meta_quantum = meta;
    meta_quantum.push_back("backend=qsvt");
    meta_quantum.push_back("epsilon=" + format_double(config.epsilon));
    meta_quantum.push_back("kappa=" + format_double(phases.kappa));
    meta_quantum.push_back("degree=" + std::to_string(phases.degree));
    meta_quantum.push_back("alpha=" + format_double(cond.alpha));
    meta_quantum.push_back("sigma_min=" + format_double(cond.sigma_min));
    std::vector<std::string> meta_classical = meta;
    meta_classical.push_back("backend=carleman-implicit");
    std::vector<std::string> meta_reference = meta;
    meta_reference.push_back("backend=explicit-reference");
    meta_reference.push_back("dt_ref=" + format_double(dt_ref));

    const std::filesystem::path quantum_path = out_dir / "burgers_qsvt.csv";
    const std::filesystem::path classical_path = out_dir / "burgers_implicit.csv";
    const std::filesystem::path reference_path = out_dir / "burgers_explicit.csv";
    const std::filesystem::path solve_path = out_dir / "solve.csv";
    write_text_file(quantum_path, trajectory_csv(quantum_traj, dt, meta_quantum));
    write_text_file(classical_path, trajectory_csv(classical_traj, dt, meta_classical));
    write_text_file(reference_path, trajectory_csv(reference_traj, dt, meta_reference));
    write_text_file(solve_path, solve_rows.str());
    return {quantum_path.string(), classical_path.string(), reference_path.string(),
            solve_path.string()};
}

inline std::vector<std::string> run_scaling_dt(const ExperimentConfig& config,
                                               const std::filesystem::path& out_dir) {
    const std::vector<ScalingRecord> records = run_scaling(config);
    const std::size_t grid = config.grid_points == 0 ? 9 : config.grid_points;
    std::ostringstream os;
    os << "# experiment=scaling-dt\n"
       << "# nu=" << format_double(config.nu) << '\n'
       << "# dx=" << format_double(config.dx) << '\n'
       << "# unknowns=" << (grid - 1) << '\n'
       << "# epsilon=" << format_double(config.epsilon) << '\n'
       << "# sweep_points=" << config.sweep_points << '\n'
       << scaling_csv_header() << '\n';
    for (const ScalingRecord& rec : records) os << scaling_csv_row(rec) << '\n';
    const std::filesystem::path path = out_dir / "scaling_dt.csv";
    write_text_file(path, os.str());
    return {path.string()};
}

inline std::vector<std::string> run_scaling_qubits(const ExperimentConfig& config,
                                                   const std::filesystem::path& out_dir) {
    const std::vector<ScalingRecord> records = run_scaling(config);
    std::vector<std::string> written;
    std::ostringstream extra;
    extra << "# experiment=scaling-qubits\n"
          << "# nu=" << format_double(config.nu) << '\n'
          << "# epsilon=" << format_double(config.epsilon) << '\n'
          << "dt,test_n,predicted_sigma_min,implied_degree,true_sigma_min,relative_error,"
             "amp1,rate1,amp2,rate2,residual_rms\n";
    for (std::size_t start = 0; start < records.size(); start += 4) {
        const std::vector<ScalingRecord> group(records.begin() + static_cast<long>(start),
                                               records.begin() + static_cast<long>(start + 4));
        const double dt = group.front().dt;
        std::ostringstream os;
        os << "# experiment=scaling-qubits\n"
           << "# nu=" << format_double(config.nu) << '\n'
           << "# dt=" << format_double(dt) << '\n'
           << "# epsilon=" << format_double(config.epsilon) << '\n'
           << scaling_csv_header() << '\n';
        for (const ScalingRecord& rec : group) os << scaling_csv_row(rec) << '\n';
        const std::filesystem::path path =
            out_dir / ("scaling_qubits_dt" + format_double(dt) + ".csv");
        write_text_file(path, os.str());
        written.push_back(path.string());

        const ExtrapolationReport report = extrapolate_report(group, 7.0);
        extra << format_double(dt) << ',' << format_double(report.test_n) << ','
              << format_double(report.predicted_sigma_min) << ',' << report.implied_degree
              << ','
              << (report.true_sigma_min ? format_double(*report.true_sigma_min) : "nan") << ','
              << (report.relative_error ? format_double(*report.relative_error) : "nan") << ','
              << format_double(report.fit.amp1) << ',' << format_double(report.fit.rate1) << ','
              << format_double(report.fit.amp2) << ',' << format_double(report.fit.rate2) << ','
              << format_double(report.fit.residual_rms) << '\n';
    }
    const std::filesystem::path extra_path = out_dir / "extrapolation.csv";
    write_text_file(extra_path, extra.str());
    written.push_back(extra_path.string());
    return written;
}

}  // namespace detail

/**
 * Runs one named experiment end to end and writes its CSV outputs into
 * config.out_dir (created if missing). Returns the paths written. Outputs
 * are byte-for-byte reproducible for a fixed config except for the trailing
 * wall_time_ms column of the per-solve and sweep summaries.
 */
inline std::vector<std::string> run_experiment(const ExperimentConfig& config) {
    if (config.out_dir.empty()) throw InvalidInputError("experiment: output directory required");
    const std::filesystem::path out_dir(config.out_dir);
    std::filesystem::create_directories(out_dir);
    switch (config.experiment) {
        case ExperimentKind::Complex:
            return detail::run_complex(config, out_dir);
        case ExperimentKind::Heat:
            return detail::run_heat(config, out_dir);
        case ExperimentKind::Burgers:
            return detail::run_burgers(config, out_dir);
        case ExperimentKind::ScalingDt:
            return detail::run_scaling_dt(config, out_dir);
        case ExperimentKind::ScalingQubits:
            return detail::run_scaling_qubits(config, out_dir);
    }
    throw InvalidInputError("experiment: unknown kind");
}

}  // namespace qlsys

#endif  // QLSYS_EXPERIMENTS_HPP
