// Copyright 2026 The qlsys Authors
// SPDX-License-Identifier: Apache-2.0
#ifndef QLSYS_INVPOLY_HPP
#define QLSYS_INVPOLY_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qlsys/numerics.hpp"

namespace qlsys {

enum class PhaseConvention { WX, Reflection };

// Odd Chebyshev expansion of a truncated 1/x approximation. The coefficient
// at index j multiplies T_{2j+1}, so the polynomial degree is 2j_max + 1.
struct InversePolynomial {
    double kappa = 0.0;
    double epsilon = 0.0;
    long long b = 0;
    long long degree = 0;
    std::vector<double> chebyshev_coeffs;
};

struct PhaseSequence {
    PhaseConvention convention = PhaseConvention::WX;
    std::vector<double> phases;
    long long degree = 0;
    double beta = 0.0;
    double kappa = 0.0;
    double epsilon = 0.0;
};

inline std::pair<long long, long long> degree_parameters(double kappa, double epsilon) {
    if (!(kappa > 1.0) || !std::isfinite(kappa))
        throw InvalidInputError("degree parameters: kappa must exceed 1");
    if (!(epsilon > 0.0) || !(epsilon < 1.0))
        throw InvalidInputError("degree parameters: epsilon must lie in (0, 1)");
    const auto b = static_cast<long long>(std::ceil(kappa * kappa * std::log(kappa / epsilon)));
    auto d = static_cast<long long>(
        std::ceil(std::sqrt(static_cast<double>(b) * std::log(4.0 * static_cast<double>(b) / epsilon))));
    if (d < 1) d = 1;
    if (d % 2 == 0) ++d;
    return {b, d};
}

inline double inverse_target_eval(double x, long long b) {
    if (x == 0.0) return 0.0;
    return -std::expm1(static_cast<double>(b) * std::log1p(-x * x)) / x;
}

namespace detail {

// Tail sums of the symmetric binomial: coefficient j carries
// 4 (-1)^j P[X >= b+j+1] with X ~ Binomial(2b, 1/2), evaluated through a
// log-domain start and a ratio recurrence so large b never overflows.
inline std::vector<double> inverse_coefficients(long long b, long long j_max) {
    const double bd = static_cast<double>(b);
    std::vector<double> t(static_cast<std::size_t>(b) + 1, 0.0);
    t[1] = std::exp(std::lgamma(2.0 * bd + 1.0) - std::lgamma(bd + 2.0) - std::lgamma(bd) -
                    2.0 * bd * std::log(2.0));
    for (long long i = 1; i < b; ++i)
        t[static_cast<std::size_t>(i) + 1] =
            t[static_cast<std::size_t>(i)] * static_cast<double>(b - i) / static_cast<double>(b + i + 1);
    std::vector<double> suffix(static_cast<std::size_t>(b) + 2, 0.0);
    for (long long i = b; i >= 1; --i)
        suffix[static_cast<std::size_t>(i)] = suffix[static_cast<std::size_t>(i) + 1] +
                                              t[static_cast<std::size_t>(i)];
    std::vector<double> coeffs(static_cast<std::size_t>(j_max) + 1);
    for (long long j = 0; j <= j_max; ++j)
        coeffs[static_cast<std::size_t>(j)] =
            4.0 * (j % 2 == 0 ? 1.0 : -1.0) * suffix[static_cast<std::size_t>(j) + 1];
    return coeffs;
}

}  // namespace detail

inline InversePolynomial chebyshev_inverse_coefficients(double kappa, double epsilon) {
    const auto [b, d] = degree_parameters(kappa, epsilon);
    InversePolynomial poly;
    poly.kappa = kappa;
    poly.epsilon = epsilon;
    poly.b = b;
    poly.degree = 2 * d + 1;
    poly.chebyshev_coeffs = detail::inverse_coefficients(b, d);
    return poly;
}

inline double evaluate_chebyshev(const std::vector<double>& odd_coeffs, double x) {
    if (odd_coeffs.empty()) throw InvalidInputError("chebyshev evaluation: empty coefficients");
    const std::size_t degree = 2 * odd_coeffs.size() - 1;
    double b1 = 0.0, b2 = 0.0;
    for (std::size_t k = degree; k >= 1; --k) {
        const double ck = k % 2 == 1 ? odd_coeffs[(k - 1) / 2] : 0.0;
        const double b0 = 2.0 * x * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    return x * b1 - b2;
}

namespace detail {

using Mat2 = std::array<Complex, 4>;

inline Mat2 mat2_mul(const Mat2& a, const Mat2& b) {
    return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2],
            a[2] * b[1] + a[3] * b[3]};
}

inline Mat2 z_rotation(double phi) {
    return {std::polar(1.0, phi), Complex(0.0), Complex(0.0), std::polar(1.0, -phi)};
}

inline Mat2 wx_gate(double x) {
    const double s = std::sqrt(std::max(0.0, 1.0 - x * x));
    return {Complex(x), Complex(0.0, s), Complex(0.0, s), Complex(x)};
}

inline Mat2 reflection_gate(double x) {
    const double s = std::sqrt(std::max(0.0, 1.0 - x * x));
    return {Complex(x), Complex(s), Complex(s), Complex(-x)};
}

inline Complex plus_sandwich(const Mat2& u) { return 0.5 * (u[0] + u[1] + u[2] + u[3]); }

template <typename GateFn>
inline Mat2 phase_product(const std::vector<double>& phases, double x, GateFn gate) {
    Mat2 u = z_rotation(phases[0]);
    const Mat2 w = gate(x);
    for (std::size_t k = 1; k < phases.size(); ++k)
        u = mat2_mul(mat2_mul(u, w), z_rotation(phases[k]));
    return u;
}

inline Mat2 wx_unitary(const std::vector<double>& phases, double x) {
    return phase_product(phases, x, wx_gate);
}

inline Mat2 reflection_unitary(const std::vector<double>& phases, double x) {
    return phase_product(phases, x, reflection_gate);
}

}  // namespace detail

inline double realized_wx_value(const std::vector<double>& phases, double x) {
    return detail::plus_sandwich(detail::wx_unitary(phases, x)).real();
}

/**
 * Rescale factor bringing the series sup norm on [-1, 1] down to 0.9, the
 * same factor the phase finder applies to its targets. Lets callers predict
 * the realized transform without running the optimizer.
 */
inline double inverse_series_scale(const InversePolynomial& poly) {
    if (poly.chebyshev_coeffs.empty()) throw InvalidInputError("series scale: empty polynomial");
    double max_abs = 0.0;
    for (int i = 0; i <= 8192; ++i) {
        const double x = -1.0 + static_cast<double>(i) * (2.0 / 8192.0);
        max_abs = std::max(max_abs, std::abs(evaluate_chebyshev(poly.chebyshev_coeffs, x)));
    }
    return 0.9 / max_abs;
}

inline PhaseSequence find_phases_wx(const InversePolynomial& poly) {
    if (poly.chebyshev_coeffs.empty() ||
        poly.degree != 2 * static_cast<long long>(poly.chebyshev_coeffs.size()) - 1)
        throw InvalidInputError("phase finding: inconsistent polynomial");
    const std::size_t d = static_cast<std::size_t>(poly.degree);

    const double scale = inverse_series_scale(poly);

    std::vector<double> nodes(d + 1), targets(d + 1);
    for (std::size_t j = 1; j <= d + 1; ++j) {
        nodes[j - 1] = std::cos((2.0 * static_cast<double>(j) - 1.0) * std::numbers::pi /
                                (4.0 * static_cast<double>(d + 1)));
        targets[j - 1] = scale * evaluate_chebyshev(poly.chebyshev_coeffs, nodes[j - 1]);
    }

    const std::size_t n_params = (d + 2) / 2;
    auto expand = [&](const std::vector<double>& p) {
        std::vector<double> phases(d + 1);
        for (std::size_t k = 0; k <= d; ++k) phases[k] = p[std::min(k, d - k)];
        return phases;
    };

    const LMResidualFn fn = [&](const std::vector<double>& p, std::vector<double>& r,
                                RealMatrix* jac) {
        const std::vector<double> phases = expand(p);
        std::vector<detail::Mat2> factors(d + 1), prefix(d + 1), suffix_after(d + 1);
        for (std::size_t node = 0; node <= d; ++node) {
            const double x = nodes[node];
            const detail::Mat2 w = detail::wx_gate(x);
            factors[0] = detail::z_rotation(phases[0]);
            for (std::size_t k = 1; k <= d; ++k)
                factors[k] = detail::mat2_mul(w, detail::z_rotation(phases[k]));
            prefix[0] = factors[0];
            for (std::size_t k = 1; k <= d; ++k)
                prefix[k] = detail::mat2_mul(prefix[k - 1], factors[k]);
            suffix_after[d] = {Complex(1.0), Complex(0.0), Complex(0.0), Complex(1.0)};
            for (std::size_t k = d; k-- > 0;)
                suffix_after[k] = detail::mat2_mul(factors[k + 1], suffix_after[k + 1]);

            r[node] = detail::plus_sandwich(prefix[d]).real() - targets[node];
            if (jac == nullptr) continue;
            for (std::size_t c = 0; c < n_params; ++c) jac->at(node, c) = 0.0;
            for (std::size_t k = 0; k <= d; ++k) {
                detail::Mat2 dz = prefix[k];
                dz[0] *= Complex(0.0, 1.0);
                dz[2] *= Complex(0.0, 1.0);
                dz[1] *= Complex(0.0, -1.0);
                dz[3] *= Complex(0.0, -1.0);
                const double grad =
                    detail::plus_sandwich(detail::mat2_mul(dz, suffix_after[k])).real();
                jac->at(node, std::min(k, d - k)) += grad;
            }
        }
    };

    std::vector<double> p0(n_params, 0.0);
    p0[0] = std::numbers::pi / 4.0;
    LMOptions options;
    options.max_iterations = 600;
    const LMResult lm = levenberg_marquardt(fn, p0, d + 1, options);

    const std::vector<double> phases = expand(lm.params);
    double residual = 0.0;
    for (std::size_t node = 0; node <= d; ++node)
        residual = std::max(residual,
                            std::abs(realized_wx_value(phases, nodes[node]) - targets[node]));
    if (residual > 1e-6) throw ConvergenceError("phase finding stalled", residual);

    PhaseSequence seq;
    seq.convention = PhaseConvention::WX;
    seq.phases = phases;
    seq.degree = static_cast<long long>(d);
    seq.beta = realized_wx_value(phases, 1.0);
    seq.kappa = poly.kappa;
    seq.epsilon = poly.epsilon;
    return seq;
}

inline PhaseSequence convert_phases_reflection(const PhaseSequence& wx) {
    if (wx.convention != PhaseConvention::WX)
        throw InvalidInputError("phase conversion: expected the WX convention");
    if (wx.phases.size() < 2 ||
        wx.degree != static_cast<long long>(wx.phases.size()) - 1)
        throw InvalidInputError("phase conversion: inconsistent sequence");

    PhaseSequence out = wx;
    out.convention = PhaseConvention::Reflection;
    const std::size_t d = wx.phases.size() - 1;
    out.phases[0] = wx.phases[0] - std::numbers::pi / 4.0;
    for (std::size_t k = 1; k < d; ++k) out.phases[k] = wx.phases[k] - std::numbers::pi / 2.0;
    out.phases[d] = wx.phases[d] - std::numbers::pi / 4.0;

    double distance = 0.0;
    for (int i = 0; i <= 20; ++i) {
        const double a = -1.0 + 0.1 * static_cast<double>(i);
        const detail::Mat2 ur = detail::reflection_unitary(out.phases, a);
        const detail::Mat2 uw = detail::wx_unitary(wx.phases, a);
        Complex trace = 0.0;
        for (int e = 0; e < 4; ++e) trace += std::conj(uw[static_cast<std::size_t>(e)]) *
                                             ur[static_cast<std::size_t>(e)];
        const Complex phase = std::abs(trace) > 0.0 ? trace / std::abs(trace) : Complex(1.0);
        for (int e = 0; e < 4; ++e)
            distance = std::max(distance, std::abs(ur[static_cast<std::size_t>(e)] -
                                                   phase * uw[static_cast<std::size_t>(e)]));
    }
    if (distance > 1e-10)
        throw ConversionError("phase conversion identity violated beyond tolerance");
    return out;
}

inline std::string serialize_phase_sequence(const PhaseSequence& seq) {
    std::ostringstream os;
    os.precision(17);
    os << (seq.convention == PhaseConvention::WX ? "wx" : "reflection") << ' ' << seq.degree
       << ' ' << seq.kappa << ' ' << seq.epsilon << ' ' << seq.beta << '\n';
    for (double phi : seq.phases) os << phi << '\n';
    return os.str();
}

inline PhaseSequence parse_phase_sequence(const std::string& text) {
    std::istringstream is(text);
    std::string convention;
    PhaseSequence seq;
    if (!(is >> convention >> seq.degree >> seq.kappa >> seq.epsilon >> seq.beta))
        throw InvalidInputError("phase file: malformed header");
    if (convention == "wx")
        seq.convention = PhaseConvention::WX;
    else if (convention == "reflection")
        seq.convention = PhaseConvention::Reflection;
    else
        throw InvalidInputError("phase file: unknown convention");
    if (seq.degree < 0) throw InvalidInputError("phase file: negative degree");
    seq.phases.resize(static_cast<std::size_t>(seq.degree) + 1);
    for (double& phi : seq.phases)
        if (!(is >> phi)) throw InvalidInputError("phase file: missing phases");
    return seq;
}

}  // namespace qlsys

#endif  // QLSYS_INVPOLY_HPP
