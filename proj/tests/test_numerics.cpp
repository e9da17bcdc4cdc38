// Copyright 2026 The qlsys Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "qlsys/numerics.hpp"

using namespace qlsys;

namespace {

ComplexMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    SplitMix64 rng(seed);
    ComplexMatrix m(rows, cols);
    for (auto& z : m.data) {
        const double re = rng.uniform_pm1();
        const double im = rng.uniform_pm1();
        z = Complex(re, im);
    }
    return m;
}

ComplexMatrix heat_matrix_8x8() {
    const double lam = 0.64;
    ComplexMatrix a(8, 8);
    for (std::size_t i = 0; i < 8; ++i) {
        a.at(i, i) = 1.0 + 2.0 * lam;
        if (i + 1 < 8) a.at(i, i + 1) = -lam;
        if (i >= 1) a.at(i, i - 1) = -lam;
    }
    a.at(7, 6) = -2.0 * lam;
    return a;
}

ComplexMatrix seeded_tridiagonal_8x8(std::uint64_t seed, ComplexVector* y_out) {
    SplitMix64 rng(seed);
    const Complex z1(rng.uniform_pm1(), rng.uniform_pm1());
    const Complex z2(rng.uniform_pm1(), rng.uniform_pm1());
    const Complex z3(rng.uniform_pm1(), rng.uniform_pm1());
    ComplexMatrix a(8, 8);
    for (std::size_t i = 0; i < 8; ++i) {
        a.at(i, i) = z2;
        if (i >= 1) a.at(i, i - 1) = z1;
        if (i + 1 < 8) a.at(i, i + 1) = z3;
    }
    if (y_out) {
        y_out->resize(8);
        for (auto& v : *y_out) {
            const double g = rng.uniform_pm1();
            const double h = rng.uniform_pm1();
            v = Complex(g, h);
        }
    }
    return a;
}

ComplexMatrix reconstruct(const SVDResult& r) {
    const std::size_t m = r.left_vectors.rows;
    const std::size_t n = r.right_vectors.rows;
    const std::size_t k = r.singular_values.size();
    ComplexMatrix out(m, n);
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = 0; b < n; ++b)
                out.at(a, b) += r.left_vectors.at(a, j) * r.singular_values[j] *
                                std::conj(r.right_vectors.at(b, j));
    return out;
}

double orthonormality_error(const ComplexMatrix& m) {
    double worst = 0.0;
    for (std::size_t a = 0; a < m.cols; ++a)
        for (std::size_t b = 0; b < m.cols; ++b) {
            Complex dot = 0.0;
            for (std::size_t i = 0; i < m.rows; ++i)
                dot += std::conj(m.at(i, a)) * m.at(i, b);
            worst = std::max(worst, std::abs(dot - (a == b ? 1.0 : 0.0)));
        }
    return worst;
}

}  // namespace

TEST(SplitMix, SeededDrawsAreReproducible) {
    SplitMix64 a(5), b(5);
    EXPECT_DOUBLE_EQ(a.uniform_pm1(), b.uniform_pm1());
    SplitMix64 c(5);
    EXPECT_DOUBLE_EQ(c.uniform_pm1(), -0.22646390803213201);
}

TEST(Svd, DiagonalMatrix) {
    ComplexMatrix m(2, 2);
    m.at(0, 0) = 3.0;
    m.at(1, 1) = 1.0;
    const SVDResult r = svd(m);
    EXPECT_NEAR(r.singular_values[0], 3.0, 1e-14);
    EXPECT_NEAR(r.singular_values[1], 1.0, 1e-14);
    EXPECT_LT(max_abs_diff(r.left_vectors, ComplexMatrix::identity(2)), 1e-12);
    EXPECT_LT(max_abs_diff(r.right_vectors, ComplexMatrix::identity(2)), 1e-12);
    EXPECT_EQ(r.rank, 2u);
}

TEST(Svd, IdentityMatrix) {
    const SVDResult r = svd(ComplexMatrix::identity(4));
    for (double s : r.singular_values) EXPECT_NEAR(s, 1.0, 1e-14);
}

TEST(Svd, SeededReconstruction4x4) {
    const ComplexMatrix m = random_matrix(4, 4, 42);
    const SVDResult r = svd(m);
    EXPECT_LT(max_abs_diff(reconstruct(r), m), 1e-10);
}

TEST(Svd, ReconstructionAndOrthonormalityProperty) {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        const std::size_t dim = 2 + static_cast<std::size_t>(seed % 11) * 6;  // up to 62
        const ComplexMatrix m = random_matrix(dim, dim, seed * 7919);
        const SVDResult r = svd(m);
        EXPECT_LT(max_abs_diff(reconstruct(r), m), 1e-10) << "seed " << seed;
        EXPECT_LT(orthonormality_error(r.left_vectors), 1e-10) << "seed " << seed;
        EXPECT_LT(orthonormality_error(r.right_vectors), 1e-10) << "seed " << seed;
    }
}

TEST(Svd, RectangularShapes) {
    for (auto [rows, cols] : {std::pair<std::size_t, std::size_t>{6, 3}, {3, 6}}) {
        const ComplexMatrix m = random_matrix(rows, cols, 11);
        const SVDResult r = svd(m);
        EXPECT_LT(max_abs_diff(reconstruct(r), m), 1e-10);
        EXPECT_LT(orthonormality_error(r.left_vectors), 1e-10);
        EXPECT_LT(orthonormality_error(r.right_vectors), 1e-10);
    }
}

TEST(Svd, RankDeficient) {
    ComplexMatrix m(3, 3);
    m.at(0, 0) = 1.0;
    m.at(1, 1) = 2.0;
    const SVDResult r = svd(m);
    EXPECT_EQ(r.rank, 2u);
    EXPECT_NEAR(r.singular_values.back(), 0.0, 1e-14);
    EXPECT_LT(orthonormality_error(r.left_vectors), 1e-10);
}

TEST(Svd, DeterministicPhaseConvention) {
    const ComplexMatrix m = random_matrix(5, 5, 99);
    const SVDResult r1 = svd(m), r2 = svd(m);
    EXPECT_LT(max_abs_diff(r1.right_vectors, r2.right_vectors), 0.0 + 1e-15);
    for (std::size_t k = 0; k < 5; ++k) {
        std::size_t imax = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < 5; ++i)
            if (std::abs(r1.right_vectors.at(i, k)) > best) {
                best = std::abs(r1.right_vectors.at(i, k));
                imax = i;
            }
        EXPECT_NEAR(r1.right_vectors.at(imax, k).imag(), 0.0, 1e-12);
        EXPECT_GE(r1.right_vectors.at(imax, k).real(), 0.0);
    }
}

TEST(Svd, NonFiniteInputRejected) {
    ComplexMatrix m(2, 2);
    m.at(0, 0) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(svd(m), InvalidInputError);
}

TEST(SingularExtrema, DiagonalModuli) {
    ComplexMatrix m(2, 2);
    m.at(0, 0) = 2.0;
    m.at(1, 1) = -5.0;
    const auto [smax, smin] = singular_extrema(m);
    EXPECT_NEAR(smax, 5.0, 1e-14);
    EXPECT_NEAR(smin, 2.0, 1e-14);
}

TEST(SingularExtrema, Identity8) {
    const auto [smax, smin] = singular_extrema(ComplexMatrix::identity(8));
    EXPECT_NEAR(smax, 1.0, 1e-14);
    EXPECT_NEAR(smin, 1.0, 1e-14);
}

TEST(SingularExtrema, TridiagonalImplicitStepMatrix) {
    const auto [smax, smin] = singular_extrema(heat_matrix_8x8());
    EXPECT_NEAR(smax, 3.5663998742569252, 1e-9);
    EXPECT_NEAR(smin, 1.0138782033648500, 1e-9);
}

TEST(SingularExtrema, MatchesSvdEndpoints) {
    const ComplexMatrix m = random_matrix(7, 7, 123);
    const SVDResult r = svd(m);
    const auto [smax, smin] = singular_extrema(m);
    EXPECT_EQ(smax, r.singular_values.front());
    EXPECT_EQ(smin, r.singular_values.back());
}

TEST(Pseudoinverse, IdentityReturnsInput) {
    const ComplexVector y = {Complex(1, 2), Complex(3, -4)};
    const ComplexVector x = pseudoinverse_solve(ComplexMatrix::identity(2), y);
    EXPECT_NEAR(std::abs(x[0] - y[0]), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(x[1] - y[1]), 0.0, 1e-14);
}

TEST(Pseudoinverse, DiagonalCase) {
    ComplexMatrix m(2, 2);
    m.at(0, 0) = 2.0;
    m.at(1, 1) = 4.0;
    const ComplexVector x = pseudoinverse_solve(m, {2.0, 4.0});
    EXPECT_NEAR(std::abs(x[0] - 1.0), 0.0, 1e-13);
    EXPECT_NEAR(std::abs(x[1] - 1.0), 0.0, 1e-13);
}

TEST(Pseudoinverse, SeededTridiagonalResidual) {
    ComplexVector y;
    const ComplexMatrix m = seeded_tridiagonal_8x8(5, &y);
    const ComplexVector x = pseudoinverse_solve(m, y);
    const ComplexVector mx = matvec(m, x);
    double num = 0.0;
    for (std::size_t i = 0; i < 8; ++i) num += std::norm(mx[i] - y[i]);
    EXPECT_LE(std::sqrt(num) / vector_norm(y), 1e-9);
}

TEST(Pseudoinverse, ProjectorIdentityOnRandomInstances) {
    for (std::uint64_t seed : {3u, 17u, 31u}) {
        const std::size_t dim = 6;
        const ComplexMatrix m = random_matrix(dim, dim, seed);
        // columns of M^+ from unit right-hand sides
        ComplexMatrix pinv(dim, dim);
        for (std::size_t c = 0; c < dim; ++c) {
            ComplexVector e(dim, 0.0);
            e[c] = 1.0;
            const ComplexVector col = pseudoinverse_solve(m, e);
            for (std::size_t r = 0; r < dim; ++r) pinv.at(r, c) = col[r];
        }
        const ComplexMatrix mpm = matmul(matmul(m, pinv), m);
        EXPECT_LT(max_abs_diff(mpm, m), 1e-9) << "seed " << seed;
    }
}

TEST(Pseudoinverse, DimensionMismatchRejected) {
    EXPECT_THROW(pseudoinverse_solve(ComplexMatrix::identity(2), ComplexVector(3, 1.0)),
                 InvalidInputError);
}

TEST(DoubleExpFit, RecoversSynthesizedParameters) {
    const DoubleExpFit truth{1.0, 0.5, 2.0, 3.0, 0.0, false};
    std::vector<double> xs, ys;
    for (double x = 0.0; x <= 3.0 + 1e-12; x += 0.5) {
        xs.push_back(x);
        ys.push_back(double_exp_eval(truth, x));
    }
    const DoubleExpFit f = fit_double_exponential(xs, ys);
    EXPECT_LE(f.residual_rms, 1e-8);
    EXPECT_FALSE(f.degraded);
}

TEST(DoubleExpFit, ConstantData) {
    const std::vector<double> xs = {0.0, 1.0, 2.0, 3.0, 4.0};
    const std::vector<double> ys(5, 1.0);
    const DoubleExpFit f = fit_double_exponential(xs, ys);
    EXPECT_LE(f.residual_rms, 1e-8);
}

TEST(DoubleExpFit, SingleExponentialData) {
    std::vector<double> xs, ys;
    for (double x = 0.0; x <= 4.0 + 1e-12; x += 0.5) {
        xs.push_back(x);
        ys.push_back(std::exp(-x));
    }
    const DoubleExpFit f = fit_double_exponential(xs, ys);
    EXPECT_LE(f.residual_rms, 1e-8);
}

TEST(DoubleExpFit, SwapSymmetryComparesByResidual) {
    std::vector<double> xs, ys;
    for (double x = 0.0; x <= 3.0 + 1e-12; x += 0.25) {
        xs.push_back(x);
        ys.push_back(2.0 * std::exp(-3.0 * x) + 1.0 * std::exp(-0.5 * x));
    }
    const DoubleExpFit f = fit_double_exponential(xs, ys);
    EXPECT_LE(f.residual_rms, 1e-8);
    const double i1 = f.amp1 * std::exp(-f.rate1 * 0.0) + f.amp2;
    EXPECT_NEAR(i1, 3.0, 1e-6);
}

TEST(DoubleExpFit, TooFewPointsRejected) {
    EXPECT_THROW(fit_double_exponential({0, 1, 2}, {1, 1, 1}), InvalidInputError);
}

TEST(DoubleExpFit, DeterministicAcrossCalls) {
    const std::vector<double> xs = {0, 1, 2, 3, 4, 5};
    const std::vector<double> ys = {3.0, 1.2, 0.6, 0.3, 0.2, 0.1};
    const DoubleExpFit a = fit_double_exponential(xs, ys);
    const DoubleExpFit b = fit_double_exponential(xs, ys);
    EXPECT_EQ(a.amp1, b.amp1);
    EXPECT_EQ(a.rate1, b.rate1);
    EXPECT_EQ(a.residual_rms, b.residual_rms);
}
