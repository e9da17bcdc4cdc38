// Copyright 2026 The qlsys Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace qlsys {

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;

struct InvalidInputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct ResourceLimitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConditioningError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConversionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct StabilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct PostSelectionError : std::runtime_error {
    double probability;
    PostSelectionError(const std::string& msg, double p)
        : std::runtime_error(msg), probability(p) {}
};
struct ConvergenceError : std::runtime_error {
    double residual;
    ConvergenceError(const std::string& msg, double r)
        : std::runtime_error(msg), residual(r) {}
};

struct ComplexMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    ComplexVector data;

    ComplexMatrix() = default;
    ComplexMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}

    Complex& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    const Complex& at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    static ComplexMatrix identity(std::size_t n) {
        ComplexMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
        return m;
    }
};

inline bool is_finite(const ComplexMatrix& m) {
    for (const auto& z : m.data)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
}

inline ComplexMatrix adjoint(const ComplexMatrix& m) {
    ComplexMatrix out(m.cols, m.rows);
    for (std::size_t r = 0; r < m.rows; ++r)
        for (std::size_t c = 0; c < m.cols; ++c) out.at(c, r) = std::conj(m.at(r, c));
    return out;
}

inline ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols != b.rows) throw InvalidInputError("matmul: dimension mismatch");
    ComplexMatrix out(a.rows, b.cols);
    for (std::size_t r = 0; r < a.rows; ++r)
        for (std::size_t k = 0; k < a.cols; ++k) {
            const Complex v = a.at(r, k);
            if (v == 0.0) continue;
            for (std::size_t c = 0; c < b.cols; ++c) out.at(r, c) += v * b.at(k, c);
        }
    return out;
}

inline ComplexVector matvec(const ComplexMatrix& a, const ComplexVector& v) {
    if (a.cols != v.size()) throw InvalidInputError("matvec: dimension mismatch");
    ComplexVector out(a.rows, 0.0);
    for (std::size_t r = 0; r < a.rows; ++r) {
        Complex acc = 0.0;
        for (std::size_t c = 0; c < a.cols; ++c) acc += a.at(r, c) * v[c];
        out[r] = acc;
    }
    return out;
}

inline double vector_norm(const ComplexVector& v) {
    double s = 0.0;
    for (const auto& z : v) s += std::norm(z);
    return std::sqrt(s);
}

inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows != b.rows || a.cols != b.cols)
        throw InvalidInputError("max_abs_diff: shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

/** Deterministic 64-bit generator used for all seeded draws and test data. */
struct SplitMix64 {
    std::uint64_t state;
    explicit SplitMix64(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    // uniform on (-1, 1), 53-bit resolution
    double uniform_pm1() {
        return 2.0 * ((next() >> 11) * (1.0 / 9007199254740992.0)) - 1.0;
    }
};

struct SVDResult {
    ComplexMatrix left_vectors;           // W, orthonormal columns
    std::vector<double> singular_values;  // nonincreasing
    ComplexMatrix right_vectors;          // V, orthonormal columns
    std::size_t rank = 0;
};

constexpr double kRankThreshold = 1e-12;

namespace detail {

// One-sided Jacobi on the columns of B (rows >= cols). Returns B orthogonalized
// in place with the accumulated right rotations in V.
inline void jacobi_orthogonalize(ComplexMatrix& B, ComplexMatrix& V) {
    const std::size_t m = B.rows, n = B.cols;
    const double tol = 1e-14;
    for (int sweep = 0; sweep < 128; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double app = 0.0, aqq = 0.0;
                Complex apq = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    app += std::norm(B.at(i, p));
                    aqq += std::norm(B.at(i, q));
                    apq += std::conj(B.at(i, p)) * B.at(i, q);
                }
                const double off = std::abs(apq);
                if (off <= tol * std::sqrt(app * aqq) || off == 0.0) continue;
                rotated = true;
                const Complex ph = apq / off;
                const double tau = (aqq - app) / (2.0 * off);
                const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::hypot(1.0, tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                const Complex phc = std::conj(ph);
                for (std::size_t i = 0; i < m; ++i) {
                    const Complex bp = B.at(i, p), bq = B.at(i, q);
                    B.at(i, p) = c * bp - s * phc * bq;
                    B.at(i, q) = s * ph * bp + c * bq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const Complex vp = V.at(i, p), vq = V.at(i, q);
                    V.at(i, p) = c * vp - s * phc * vq;
                    V.at(i, q) = s * ph * vp + c * vq;
                }
            }
        }
        if (!rotated) break;
    }
}

// Fill columns of W whose singular value vanished with unit vectors orthogonal
// to the existing columns.
inline void complete_null_columns(ComplexMatrix& W, const std::vector<bool>& missing) {
    const std::size_t m = W.rows, n = W.cols;
    for (std::size_t k = 0; k < n; ++k) {
        if (!missing[k]) continue;
        for (std::size_t cand = 0; cand < m; ++cand) {
            ComplexVector v(m, 0.0);
            v[cand] = 1.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (missing[j] && j >= k) continue;
                Complex dot = 0.0;
                for (std::size_t i = 0; i < m; ++i) dot += std::conj(W.at(i, j)) * v[i];
                for (std::size_t i = 0; i < m; ++i) v[i] -= dot * W.at(i, j);
            }
            const double nv = vector_norm(v);
            if (nv > 0.5) {
                for (std::size_t i = 0; i < m; ++i) W.at(i, k) = v[i] / nv;
                break;
            }
        }
    }
}

}  // namespace detail

/**
 * Singular value decomposition M = W diag(S) V^dagger via one-sided Jacobi.
 * Deterministic phase convention: the largest-magnitude entry of each right
 * vector is made real nonnegative (first index wins ties).
 */
inline SVDResult svd(const ComplexMatrix& M) {
    if (M.rows == 0 || M.cols == 0) throw InvalidInputError("svd: empty matrix");
    if (!is_finite(M)) throw InvalidInputError("svd: non-finite input");

    const bool swapped = M.rows < M.cols;
    ComplexMatrix B = swapped ? adjoint(M) : M;
    const std::size_t m = B.rows, n = B.cols;
    ComplexMatrix V = ComplexMatrix::identity(n);
    detail::jacobi_orthogonalize(B, V);

    std::vector<double> sigma(n);
    for (std::size_t k = 0; k < n; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += std::norm(B.at(i, k));
        sigma[k] = std::sqrt(s);
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return sigma[a] > sigma[b]; });

    ComplexMatrix W(m, n), Vs(n, n);
    std::vector<double> S(n);
    std::vector<bool> missing(n, false);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t src = order[k];
        S[k] = sigma[src];
        if (S[k] < 1e-200) {
            missing[k] = true;
        } else {
            for (std::size_t i = 0; i < m; ++i) W.at(i, k) = B.at(i, src) / S[k];
        }
        for (std::size_t i = 0; i < n; ++i) Vs.at(i, k) = V.at(i, src);
    }
    detail::complete_null_columns(W, missing);

    SVDResult out;
    if (swapped) {
        out.left_vectors = Vs;
        out.right_vectors = W;
    } else {
        out.left_vectors = W;
        out.right_vectors = Vs;
    }
    out.singular_values = S;
    for (std::size_t k = 0; k < n; ++k)
        if (S[k] > kRankThreshold) out.rank = k + 1;

    // phase convention on the right vectors
    ComplexMatrix& Vr = out.right_vectors;
    ComplexMatrix& Wl = out.left_vectors;
    for (std::size_t k = 0; k < Vr.cols; ++k) {
        std::size_t imax = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < Vr.rows; ++i) {
            const double a = std::abs(Vr.at(i, k));
            if (a > best) {
                best = a;
                imax = i;
            }
        }
        if (best <= 0.0) continue;
        const Complex ph = Vr.at(imax, k) / best;
        const Complex f = std::conj(ph);
        for (std::size_t i = 0; i < Vr.rows; ++i) Vr.at(i, k) *= f;
        for (std::size_t i = 0; i < Wl.rows; ++i) Wl.at(i, k) *= f;
    }
    return out;
}

/** (sigma_max, sigma_min) of M, taken from the endpoints of svd(M). */
inline std::pair<double, double> singular_extrema(const ComplexMatrix& M) {
    const SVDResult r = svd(M);
    return {r.singular_values.front(), r.singular_values.back()};
}

/** x = M^+ y using the SVD with rank threshold 1e-12. */
inline ComplexVector pseudoinverse_solve(const ComplexMatrix& M, const ComplexVector& y) {
    if (y.size() != M.rows) throw InvalidInputError("pseudoinverse_solve: dimension mismatch");
    const SVDResult r = svd(M);
    ComplexVector x(M.cols, 0.0);
    for (std::size_t k = 0; k < r.singular_values.size(); ++k) {
        if (r.singular_values[k] <= kRankThreshold) continue;
        Complex wy = 0.0;
        for (std::size_t i = 0; i < M.rows; ++i)
            wy += std::conj(r.left_vectors.at(i, k)) * y[i];
        wy /= r.singular_values[k];
        for (std::size_t i = 0; i < M.cols; ++i) x[i] += r.right_vectors.at(i, k) * wy;
    }
    return x;
}

struct RealMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;
    RealMatrix() = default;
    RealMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

namespace detail {

// Gaussian elimination with partial pivoting; A is destroyed.
inline bool solve_real_system(RealMatrix& A, std::vector<double>& b) {
    const std::size_t n = A.rows;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(A.at(r, col)) > std::abs(A.at(piv, col))) piv = r;
        if (std::abs(A.at(piv, col)) < 1e-300) return false;
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(A.at(piv, c), A.at(col, c));
            std::swap(b[piv], b[col]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = A.at(r, col) / A.at(col, col);
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) A.at(r, c) -= f * A.at(col, c);
            b[r] -= f * b[col];
        }
    }
    for (std::size_t ri = n; ri-- > 0;) {
        double acc = b[ri];
        for (std::size_t c = ri + 1; c < n; ++c) acc -= A.at(ri, c) * b[c];
        b[ri] = acc / A.at(ri, ri);
    }
    return true;
}

}  // namespace detail

/** Residual callback: fills r(p) and, when jac != nullptr, the Jacobian dr/dp. */
using LMResidualFn =
    std::function<void(const std::vector<double>&, std::vector<double>&, RealMatrix*)>;

struct LMOptions {
    int max_iterations = 400;
    double gradient_tol = 1e-14;
    double step_tol = 1e-15;
};

struct LMResult {
    std::vector<double> params;
    double cost = 0.0;  // sum of squared residuals
    bool converged = false;
    int iterations = 0;
};

/** Damped least squares (Levenberg-Marquardt, Nielsen schedule). */
inline LMResult levenberg_marquardt(const LMResidualFn& fn, std::vector<double> p,
                                    std::size_t n_residuals, const LMOptions& opt = {}) {
    const std::size_t np = p.size();
    std::vector<double> r(n_residuals), r_new(n_residuals);
    RealMatrix J(n_residuals, np);

    auto cost_of = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return std::isfinite(s) ? s : std::numeric_limits<double>::infinity();
    };

    fn(p, r, &J);
    double cost = cost_of(r);
    double mu = 0.0, nu = 2.0;
    LMResult out;

    for (int it = 0; it < opt.max_iterations; ++it) {
        out.iterations = it + 1;
        RealMatrix JtJ(np, np);
        std::vector<double> g(np, 0.0);
        for (std::size_t i = 0; i < n_residuals; ++i)
            for (std::size_t a = 0; a < np; ++a) {
                g[a] += J.at(i, a) * r[i];
                for (std::size_t b = a; b < np; ++b) JtJ.at(a, b) += J.at(i, a) * J.at(i, b);
            }
        for (std::size_t a = 0; a < np; ++a)
            for (std::size_t b = 0; b < a; ++b) JtJ.at(a, b) = JtJ.at(b, a);

        double gmax = 0.0;
        for (double x : g) gmax = std::max(gmax, std::abs(x));
        if (gmax < opt.gradient_tol) {
            out.converged = true;
            break;
        }
        if (mu == 0.0) {
            double dmax = 0.0;
            for (std::size_t a = 0; a < np; ++a) dmax = std::max(dmax, JtJ.at(a, a));
            mu = 1e-3 * (dmax > 0 ? dmax : 1.0);
        }

        RealMatrix Asys = JtJ;
        for (std::size_t a = 0; a < np; ++a) Asys.at(a, a) += mu;
        std::vector<double> delta(np);
        for (std::size_t a = 0; a < np; ++a) delta[a] = -g[a];
        if (!detail::solve_real_system(Asys, delta)) {
            mu *= nu;
            nu *= 2.0;
            continue;
        }

        double dn = 0.0, pn = 0.0;
        for (std::size_t a = 0; a < np; ++a) {
            dn += delta[a] * delta[a];
            pn += p[a] * p[a];
        }
        if (std::sqrt(dn) < opt.step_tol * (std::sqrt(pn) + opt.step_tol)) {
            out.converged = true;
            break;
        }

        std::vector<double> p_new(np);
        for (std::size_t a = 0; a < np; ++a) p_new[a] = p[a] + delta[a];
        fn(p_new, r_new, nullptr);
        const double cost_new = cost_of(r_new);

        double denom = 0.0;
        for (std::size_t a = 0; a < np; ++a) denom += delta[a] * (mu * delta[a] - g[a]);
        const double rho = denom > 0 ? (cost - cost_new) / denom : -1.0;

        if (std::isfinite(cost_new) && rho > 0) {
            p = p_new;
            fn(p, r, &J);
            cost = cost_of(r);
            const double shrink = 1.0 - std::pow(2.0 * rho - 1.0, 3.0);
            mu *= std::max(1.0 / 3.0, shrink);
            nu = 2.0;
        } else {
            mu *= nu;
            nu *= 2.0;
        }
    }
    out.params = std::move(p);
    out.cost = cost;
    return out;
}

struct DoubleExpFit {
    double amp1 = 0.0;
    double rate1 = 0.0;
    double amp2 = 0.0;
    double rate2 = 0.0;
    double residual_rms = 0.0;
    bool degraded = false;
};

inline double double_exp_eval(const DoubleExpFit& f, double x) {
    auto e = [](double a) { return std::exp(std::clamp(a, -700.0, 700.0)); };
    return f.amp1 * e(-f.rate1 * x) + f.amp2 * e(-f.rate2 * x);
}

/**
 * Fit y = amp1*exp(-rate1*x) + amp2*exp(-rate2*x) by damped least squares with
 * deterministic multi-start over rate pairs; amplitudes are seeded by a linear
 * solve for each rate pair and the best residual is kept.
 */
inline DoubleExpFit fit_double_exponential(const std::vector<double>& xs,
                                           const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw InvalidInputError("fit: size mismatch");
    if (xs.size() < 4) throw InvalidInputError("fit: needs at least 4 points");
    const std::size_t n = xs.size();

    auto clampexp = [](double a) { return std::exp(std::clamp(a, -700.0, 700.0)); };
    LMResidualFn fn = [&](const std::vector<double>& p, std::vector<double>& r, RealMatrix* J) {
        r.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double e1 = clampexp(-p[1] * xs[i]);
            const double e2 = clampexp(-p[3] * xs[i]);
            r[i] = p[0] * e1 + p[2] * e2 - ys[i];
            if (J) {
                J->at(i, 0) = e1;
                J->at(i, 1) = -p[0] * xs[i] * e1;
                J->at(i, 2) = e2;
                J->at(i, 3) = -p[2] * xs[i] * e2;
            }
        }
    };

    const double rate_pairs[][2] = {{0.0, 0.0}, {0.05, 0.5}, {0.1, 1.0}, {0.3, 2.0},
                                    {0.5, 3.0}, {1.0, 5.0},  {2.0, 0.2}, {0.7, 0.7},
                                    {1.5, 4.0}};
    LMResult best;
    best.cost = std::numeric_limits<double>::infinity();
    for (const auto& rp : rate_pairs) {
        // linear least squares for the amplitudes at fixed rates
        ComplexMatrix E(n, 2);
        ComplexVector yv(n);
        for (std::size_t i = 0; i < n; ++i) {
            E.at(i, 0) = clampexp(-rp[0] * xs[i]);
            E.at(i, 1) = clampexp(-rp[1] * xs[i]);
            yv[i] = ys[i];
        }
        const ComplexVector amp = pseudoinverse_solve(E, yv);
        std::vector<double> p0 = {amp[0].real(), rp[0], amp[1].real(), rp[1]};
        const LMResult res = levenberg_marquardt(fn, p0, n);
        if (res.cost < best.cost) best = res;
    }

    DoubleExpFit out;
    out.amp1 = best.params[0];
    out.rate1 = best.params[1];
    out.amp2 = best.params[2];
    out.rate2 = best.params[3];
    out.residual_rms = std::sqrt(best.cost / static_cast<double>(n));
    out.degraded = !best.converged;
    return out;
}

}  // namespace qlsys
