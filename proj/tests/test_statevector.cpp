// Copyright 2026 The qlsys Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "qlsys/numerics.hpp"
#include "qlsys/statevector.hpp"

using namespace qlsys;

namespace {

const std::array<Complex, 4> kX = {Complex(0), Complex(1), Complex(1), Complex(0)};
const std::array<Complex, 4> kZ = {Complex(1), Complex(0), Complex(0), Complex(-1)};
const std::array<Complex, 4> kH = {Complex(1 / std::sqrt(2.0)), Complex(1 / std::sqrt(2.0)),
                                   Complex(1 / std::sqrt(2.0)), Complex(-1 / std::sqrt(2.0))};

RegisterLayout matrix_only(std::size_t n) { return RegisterLayout{0, 0, n}; }

}  // namespace

TEST(ApplyCircuit, PauliXFlipsZero) {
    Circuit c;
    c.layout = matrix_only(1);
    c.gates.push_back(make_single_qubit(0, kX));
    const QuantumState out = apply_circuit(QuantumState::zero(c.layout), c);
    EXPECT_NEAR(std::abs(out.amplitudes[0]), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(out.amplitudes[1] - 1.0), 0.0, 1e-15);
}

TEST(ApplyCircuit, HadamardMakesPlus) {
    Circuit c;
    c.layout = matrix_only(1);
    c.gates.push_back(make_single_qubit(0, kH));
    const QuantumState out = apply_circuit(QuantumState::zero(c.layout), c);
    EXPECT_NEAR(std::abs(out.amplitudes[0] - 1 / std::sqrt(2.0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(out.amplitudes[1] - 1 / std::sqrt(2.0)), 0.0, 1e-15);
}

TEST(ApplyCircuit, MultiControlledXOnMatchingPattern) {
    Circuit c;
    c.layout = matrix_only(3);
    c.gates.push_back(make_mcx({0, 1}, {1, 1}, 2));
    QuantumState s = QuantumState::zero(c.layout);
    s.amplitudes[0] = 0.0;
    s.amplitudes[6] = 1.0;  // |110>
    QuantumState out = apply_circuit(s, c);
    EXPECT_NEAR(std::abs(out.amplitudes[7] - 1.0), 0.0, 1e-15);  // |111>

    s.amplitudes[6] = 0.0;
    s.amplitudes[4] = 1.0;  // |100>
    out = apply_circuit(s, c);
    EXPECT_NEAR(std::abs(out.amplitudes[4] - 1.0), 0.0, 1e-15);
}

TEST(ApplyCircuit, NegativePolarityControls) {
    Circuit c;
    c.layout = matrix_only(2);
    c.gates.push_back(make_mcx({0}, {0}, 1));
    const QuantumState out = apply_circuit(QuantumState::zero(c.layout), c);
    EXPECT_NEAR(std::abs(out.amplitudes[1] - 1.0), 0.0, 1e-15);  // |01>
}

TEST(ApplyCircuit, LayoutMismatchRejected) {
    Circuit c;
    c.layout = matrix_only(2);
    EXPECT_THROW(apply_circuit(QuantumState::zero(matrix_only(3)), c), InvalidInputError);
}

TEST(ApplyCircuit, RegisterPermutationMovesBasisStates) {
    Circuit c;
    c.layout = matrix_only(2);
    c.gates.push_back(make_register_permutation({0, 1}, {1, 2, 3, 0}));
    QuantumState s = QuantumState::zero(c.layout);
    const QuantumState out = apply_circuit(s, c);
    EXPECT_NEAR(std::abs(out.amplitudes[1] - 1.0), 0.0, 1e-15);
}

TEST(ApplyCircuit, PermutationRequiresBijection) {
    EXPECT_THROW(make_register_permutation({0, 1}, {0, 0, 1, 2}), InvalidInputError);
}

TEST(ApplyCircuit, ControlledRegisterUnitaryFiresOnPattern) {
    ComplexMatrix swap2(2, 2);
    swap2.at(0, 1) = 1.0;
    swap2.at(1, 0) = 1.0;
    Circuit c;
    c.layout = matrix_only(2);
    c.gates.push_back(make_controlled_register_unitary({0}, {1}, {1}, swap2));
    QuantumState s = QuantumState::zero(c.layout);
    QuantumState out = apply_circuit(s, c);  // control |0> does not fire
    EXPECT_NEAR(std::abs(out.amplitudes[0] - 1.0), 0.0, 1e-15);

    s.amplitudes[0] = 0.0;
    s.amplitudes[2] = 1.0;  // |10>
    out = apply_circuit(s, c);
    EXPECT_NEAR(std::abs(out.amplitudes[3] - 1.0), 0.0, 1e-15);
}

TEST(ApplyCircuit, NormPreservedOnMixedGateKinds) {
    SplitMix64 rng(7);
    Circuit c;
    c.layout = RegisterLayout{1, 2, 2};
    c.gates.push_back(make_single_qubit(0, kH));
    c.gates.push_back(make_mcx({0, 1}, {1, 0}, 3));
    c.gates.push_back(make_register_permutation({3, 4}, {2, 0, 3, 1}));
    ComplexVector v(4);
    for (auto& z : v) z = Complex(rng.uniform_pm1(), rng.uniform_pm1());
    c.gates.push_back(make_controlled_register_unitary(
        {0}, {1}, {3, 4}, detail::householder_completion(v, 4)));
    QuantumState s = QuantumState::zero(c.layout);
    for (auto& z : s.amplitudes) z = Complex(rng.uniform_pm1(), rng.uniform_pm1());
    const double n0 = vector_norm(s.amplitudes);
    for (auto& z : s.amplitudes) z /= n0;
    const QuantumState out = apply_circuit(s, c);
    EXPECT_NEAR(vector_norm(out.amplitudes), 1.0, 1e-10);
}

TEST(PrepareState, UnitVectorLeavesZeroStateUnchanged) {
    ComplexVector v(8, 0.0);
    v[0] = 1.0;
    const Circuit c = prepare_state(v, matrix_only(3), Register::Matrix);
    const QuantumState out = apply_circuit(QuantumState::zero(c.layout), c);
    EXPECT_NEAR(std::abs(out.amplitudes[0] - 1.0), 0.0, 1e-12);
}

TEST(PrepareState, TwoOnesGivePlusState) {
    const Circuit c = prepare_state({1.0, 1.0}, matrix_only(1), Register::Matrix);
    const QuantumState out = apply_circuit(QuantumState::zero(c.layout), c);
    EXPECT_NEAR(std::abs(out.amplitudes[0] - 1 / std::sqrt(2.0)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(out.amplitudes[1] - 1 / std::sqrt(2.0)), 0.0, 1e-12);
}

TEST(PrepareState, SeededVectorAmplitudesMatch) {
    SplitMix64 rng(21);
    ComplexVector v(8);
    for (auto& z : v) z = Complex(rng.uniform_pm1(), rng.uniform_pm1());
    const Circuit c = prepare_state(v, matrix_only(3), Register::Matrix);
    const QuantumState out = apply_circuit(QuantumState::zero(c.layout), c);
    const double nv = vector_norm(v);
    for (std::size_t i = 0; i < 8; ++i)
        EXPECT_NEAR(std::abs(out.amplitudes[i] - v[i] / nv), 0.0, 1e-12);
}

TEST(PrepareState, ZeroPaddedWhenShorterThanRegister) {
    const Circuit c = prepare_state({1.0, 2.0, 2.0}, matrix_only(3), Register::Matrix);
    const QuantumState out = apply_circuit(QuantumState::zero(c.layout), c);
    EXPECT_NEAR(std::abs(out.amplitudes[0] - 1.0 / 3.0), 0.0, 1e-12);
    for (std::size_t i = 3; i < 8; ++i)
        EXPECT_NEAR(std::abs(out.amplitudes[i]), 0.0, 1e-12);
}

TEST(PrepareState, ZeroVectorRejected) {
    EXPECT_THROW(prepare_state(ComplexVector(4, 0.0), matrix_only(2), Register::Matrix),
                 InvalidInputError);
}

TEST(CircuitUnitary, EmptyCircuitIsIdentity) {
    Circuit c;
    c.layout = matrix_only(2);
    EXPECT_LT(max_abs_diff(circuit_unitary(c), ComplexMatrix::identity(4)), 1e-15);
}

TEST(CircuitUnitary, SingleXMatrix) {
    Circuit c;
    c.layout = matrix_only(1);
    c.gates.push_back(make_single_qubit(0, kX));
    const ComplexMatrix u = circuit_unitary(c);
    EXPECT_NEAR(std::abs(u.at(0, 1) - 1.0), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(u.at(1, 0) - 1.0), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(u.at(0, 0)), 0.0, 1e-15);
}

TEST(CircuitUnitary, HadamardConjugationOfZ) {
    Circuit c;
    c.layout = matrix_only(1);
    c.gates.push_back(make_single_qubit(0, kH));
    c.gates.push_back(make_single_qubit(0, kZ));
    c.gates.push_back(make_single_qubit(0, kH));
    Circuit x;
    x.layout = c.layout;
    x.gates.push_back(make_single_qubit(0, kX));
    EXPECT_LT(max_abs_diff(circuit_unitary(c), circuit_unitary(x)), 1e-12);
}

TEST(CircuitUnitary, UnitarityOfMixedCircuit) {
    Circuit c;
    c.layout = RegisterLayout{1, 1, 2};
    c.gates.push_back(make_single_qubit(1, kH));
    c.gates.push_back(make_mcx({1}, {1}, 0));
    c.gates.push_back(make_register_permutation({2, 3}, {3, 1, 0, 2}));
    const ComplexMatrix u = circuit_unitary(c);
    EXPECT_LT(max_abs_diff(matmul(adjoint(u), u), ComplexMatrix::identity(16)), 1e-10);
}

TEST(CircuitUnitary, InvertedCircuitGivesInverse) {
    SplitMix64 rng(13);
    ComplexVector v(4);
    for (auto& z : v) z = Complex(rng.uniform_pm1(), rng.uniform_pm1());
    Circuit c;
    c.layout = matrix_only(3);
    c.gates.push_back(make_single_qubit(0, kH));
    c.gates.push_back(make_controlled_register_unitary(
        {0}, {1}, {1, 2}, detail::householder_completion(v, 4)));
    c.gates.push_back(make_mcx({1}, {0}, 2));
    c.gates.push_back(make_register_permutation({1, 2}, {2, 3, 1, 0}));
    Circuit both = c;
    const Circuit inv = invert_circuit(c);
    both.gates.insert(both.gates.end(), inv.gates.begin(), inv.gates.end());
    EXPECT_LT(max_abs_diff(circuit_unitary(both), ComplexMatrix::identity(8)), 1e-12);
}

TEST(CircuitUnitary, TooManyQubitsRejected) {
    Circuit c;
    c.layout = RegisterLayout{1, 5, 7};
    EXPECT_THROW(circuit_unitary(c), ResourceLimitError);
}

TEST(Postselect, DeterministicOutcomeKeepsState) {
    const auto [state, prob] = postselect(QuantumState::zero(matrix_only(2)), {0}, {0});
    EXPECT_DOUBLE_EQ(prob, 1.0);
    EXPECT_NEAR(std::abs(state.amplitudes[0] - 1.0), 0.0, 1e-15);
}

TEST(Postselect, EntangledHalfProbability) {
    QuantumState s = QuantumState::zero(matrix_only(2));
    s.amplitudes[0] = 1 / std::sqrt(2.0);
    s.amplitudes[3] = 1 / std::sqrt(2.0);
    const auto [state, prob] = postselect(s, {0}, {0});
    EXPECT_DOUBLE_EQ(prob, 0.5);
    EXPECT_NEAR(std::abs(state.amplitudes[0] - 1.0), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(state.amplitudes[3]), 0.0, 1e-15);
}

TEST(Postselect, ProbabilityMatchesSliceSumExactly) {
    SplitMix64 rng(31);
    QuantumState s = QuantumState::zero(matrix_only(3));
    for (auto& z : s.amplitudes) z = Complex(rng.uniform_pm1(), rng.uniform_pm1());
    const double n = vector_norm(s.amplitudes);
    for (auto& z : s.amplitudes) z /= n;
    double expected = 0.0;
    for (std::size_t g = 0; g < 4; ++g) expected += std::norm(s.amplitudes[g]);
    const auto [state, prob] = postselect(s, {0}, {0});
    EXPECT_EQ(prob, expected);
}

TEST(Postselect, ZeroProbabilityThrows) {
    try {
        postselect(QuantumState::zero(matrix_only(2)), {0}, {1});
        FAIL() << "expected PostSelectionError";
    } catch (const PostSelectionError& e) {
        EXPECT_DOUBLE_EQ(e.probability, 0.0);
    }
}

TEST(SampleCounts, AllShotsOnDeterministicState) {
    const auto counts = sample_counts(QuantumState::zero(matrix_only(3)), 1000, 9);
    ASSERT_EQ(counts.size(), 1u);
    EXPECT_EQ(counts.at("000"), 1000u);
}

TEST(SampleCounts, BalancedSuperposition) {
    QuantumState s = QuantumState::zero(matrix_only(1));
    s.amplitudes[0] = 1 / std::sqrt(2.0);
    s.amplitudes[1] = 1 / std::sqrt(2.0);
    const std::uint64_t shots = 100000;
    const auto counts = sample_counts(s, shots, 1234);
    const double sigma5 = 5.0 * std::sqrt(0.25 * shots);
    EXPECT_NEAR(static_cast<double>(counts.at("0")), shots / 2.0, sigma5);
    EXPECT_NEAR(static_cast<double>(counts.at("1")), shots / 2.0, sigma5);
}

TEST(SampleCounts, DeterministicPerSeed) {
    QuantumState s = QuantumState::zero(matrix_only(2));
    s.amplitudes = {0.5, 0.5, 0.5, 0.5};
    const auto a = sample_counts(s, 5000, 77);
    const auto b = sample_counts(s, 5000, 77);
    EXPECT_EQ(a, b);
    std::uint64_t total = 0;
    for (const auto& [k, v] : a) total += v;
    EXPECT_EQ(total, 5000u);
}

TEST(SampleCounts, EmpiricalDistributionCloseToExact) {
    // solution profile of one implicit diffusion step, loaded as a state
    const double lam = 0.64;
    ComplexMatrix a(8, 8);
    for (std::size_t i = 0; i < 8; ++i) {
        a.at(i, i) = 1.0 + 2.0 * lam;
        if (i + 1 < 8) a.at(i, i + 1) = -lam;
        if (i >= 1) a.at(i, i - 1) = -lam;
    }
    a.at(7, 6) = -2.0 * lam;
    ComplexVector b(8, 0.0);
    b[0] = lam;
    const ComplexVector x = pseudoinverse_solve(a, b);
    const Circuit prep = prepare_state(x, matrix_only(3), Register::Matrix);
    const QuantumState st = apply_circuit(QuantumState::zero(prep.layout), prep);
    const std::uint64_t shots = 100000;
    const auto counts = sample_counts(st, shots, 2026);
    double tv = 0.0;
    for (std::size_t g = 0; g < 8; ++g) {
        std::string key(3, '0');
        for (std::size_t q = 0; q < 3; ++q)
            if ((g >> (2 - q)) & 1) key[q] = '1';
        const double emp =
            counts.count(key) ? static_cast<double>(counts.at(key)) / shots : 0.0;
        tv += std::abs(emp - std::norm(st.amplitudes[g]));
    }
    EXPECT_LE(0.5 * tv, 0.02);
}

TEST(Expectation, IdentityGivesOne) {
    QuantumState s = QuantumState::zero(matrix_only(2));
    const Complex e = expectation(s, ComplexMatrix::identity(4));
    EXPECT_NEAR(std::abs(e - 1.0), 0.0, 1e-14);
}

TEST(Expectation, ProjectorOnPlusState) {
    QuantumState s = QuantumState::zero(matrix_only(1));
    s.amplitudes[0] = 1 / std::sqrt(2.0);
    s.amplitudes[1] = 1 / std::sqrt(2.0);
    ComplexMatrix p(2, 2);
    p.at(0, 0) = 1.0;
    EXPECT_NEAR(expectation(s, p).real(), 0.5, 1e-14);
}

TEST(Expectation, MatchesDirectContraction) {
    SplitMix64 rng(55);
    ComplexMatrix h(8, 8);
    for (std::size_t r = 0; r < 8; ++r) {
        h.at(r, r) = rng.uniform_pm1();
        for (std::size_t c = r + 1; c < 8; ++c) {
            h.at(r, c) = Complex(rng.uniform_pm1(), rng.uniform_pm1());
            h.at(c, r) = std::conj(h.at(r, c));
        }
    }
    QuantumState s = QuantumState::zero(matrix_only(3));
    for (auto& z : s.amplitudes) z = Complex(rng.uniform_pm1(), rng.uniform_pm1());
    const double n = vector_norm(s.amplitudes);
    for (auto& z : s.amplitudes) z /= n;
    Complex direct = 0.0;
    for (std::size_t r = 0; r < 8; ++r)
        for (std::size_t c = 0; c < 8; ++c)
            direct += std::conj(s.amplitudes[r]) * h.at(r, c) * s.amplitudes[c];
    EXPECT_NEAR(std::abs(expectation(s, h) - direct), 0.0, 1e-12);
}

TEST(Expectation, DimensionMismatchRejected) {
    EXPECT_THROW(expectation(QuantumState::zero(matrix_only(2)), ComplexMatrix::identity(2)),
                 InvalidInputError);
}
