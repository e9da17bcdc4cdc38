// Copyright 2026 The qlsys Authors
// SPDX-License-Identifier: Apache-2.0
#ifndef QLSYS_QSVT_HPP
#define QLSYS_QSVT_HPP

#include <array>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "qlsys/blockenc.hpp"
#include "qlsys/invpoly.hpp"
#include "qlsys/numerics.hpp"
#include "qlsys/statevector.hpp"

namespace qlsys {

struct QSVTConfig {
    BlockEncoding encoding;
    PhaseSequence phases;  // reflection convention
    bool real_part = true;
};

struct SolveReport {
    ComplexVector solution;
    double success_probability = 0.0;
    double rescale = 0.0;  // ||y|| / (alpha * beta_effective)
    double kappa_used = 0.0;
    long long degree_used = 0;
};

namespace detail {

inline GateOp offset_gate(GateOp op, std::size_t offset) {
    if (op.kind == GateOp::Kind::SingleQubit || op.kind == GateOp::Kind::MultiControlledX)
        op.target += offset;
    for (std::size_t& q : op.controls) q += offset;
    for (std::size_t& q : op.reg_qubits) q += offset;
    return op;
}

inline Complex unit_power(long long exponent) {
    switch (((exponent % 4) + 4) % 4) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
    }
}

}  // namespace detail

/**
 * Builds the singular-value-transform circuit for a block encoding and a
 * reflection-convention phase sequence.
 *
 * Qubit layout: one projector-phase qubit in front, then the encoding's flag
 * and matrix registers. Each phase is applied as a pair of multi-controlled-X
 * gates from the all-zero flag subspace around a Z rotation; the encoding and
 * its inverse alternate between phases. With real_part set, Hadamards and a
 * fixed compensation phase turn the extracted block into the real part of the
 * polynomial transform.
 */
inline Circuit assemble_qsvt_circuit(const QSVTConfig& config) {
    const PhaseSequence& seq = config.phases;
    if (seq.convention != PhaseConvention::Reflection)
        throw InvalidInputError("qsvt: phases must use the reflection convention");
    if (seq.phases.empty() ||
        static_cast<long long>(seq.phases.size()) != seq.degree + 1)
        throw InvalidInputError("qsvt: phase count does not match the polynomial degree");
    if (config.encoding.layout.n_qsp != 0)
        throw InvalidInputError("qsvt: encoding already carries a phase qubit");

    const RegisterLayout layout{1, config.encoding.layout.n_flag,
                                config.encoding.layout.n_matrix};
    check_layout(layout);

    std::vector<std::size_t> flags(layout.n_flag);
    for (std::size_t q = 0; q < layout.n_flag; ++q) flags[q] = 1 + q;
    const std::vector<int> zeros(flags.size(), 0);

    Circuit circuit;
    circuit.layout = layout;

    auto projector_phase = [&](double phi) {
        circuit.gates.push_back(make_mcx(flags, zeros, 0));
        circuit.gates.push_back(make_single_qubit(
            0, {std::exp(Complex(0.0, -phi)), 0.0, 0.0, std::exp(Complex(0.0, phi))}));
        circuit.gates.push_back(make_mcx(flags, zeros, 0));
    };
    const Circuit inverse_encoding = invert_circuit(config.encoding.circuit);
    auto apply_encoding = [&](bool inverted) {
        const Circuit& src = inverted ? inverse_encoding : config.encoding.circuit;
        for (const GateOp& g : src.gates)
            circuit.gates.push_back(detail::offset_gate(g, 1));
    };

    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    const std::array<Complex, 4> hadamard = {inv_sqrt2, inv_sqrt2, inv_sqrt2, -inv_sqrt2};

    if (config.real_part) circuit.gates.push_back(make_single_qubit(0, hadamard));
    const long long degree = seq.degree;
    for (long long k = degree; k >= 0; --k) {
        projector_phase(seq.phases[static_cast<std::size_t>(k)]);
        if (k > 0) apply_encoding((degree - k) % 2 == 1);
    }
    if (config.real_part) {
        const Complex comp = detail::unit_power(degree);
        circuit.gates.push_back(make_single_qubit(0, {comp, 0.0, 0.0, std::conj(comp)}));
        circuit.gates.push_back(make_single_qubit(0, hadamard));
    }
    return circuit;
}

/** Extracts the polynomial-transformed block (phase qubit and flags zero). */
inline ComplexMatrix qsvt_block(const QSVTConfig& config) {
    const Circuit circuit = assemble_qsvt_circuit(config);
    const ComplexMatrix u = circuit_unitary(circuit);
    const std::vector<std::size_t>& rows = config.encoding.row_projector;
    const std::vector<std::size_t>& cols = config.encoding.col_projector;
    ComplexMatrix block(rows.size(), cols.size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols.size(); ++c)
            block.at(r, c) = u.at(rows[r], cols[c]);
    return block;
}

/**
 * Measures the scale the assembled transform applies at singular value one,
 * by running it on an exact encoding of the identity and reading the (0,0)
 * block entry. Folds the target's safety rescale and any assembly phases.
 */
inline double calibrate_beta(const PhaseSequence& reflection_phases) {
    QSVTConfig probe;
    probe.encoding = build_dilation_encoding(ComplexMatrix::identity(2), 1.0);
    probe.phases = reflection_phases;
    probe.real_part = true;
    return qsvt_block(probe).at(0, 0).real();
}

/** Encoding normalization and subnormalized spectrum facts behind kappa selection. */
struct ConditioningSummary {
    double alpha = 0.0;
    double sigma_min = 0.0;
    double ladder_kappa = 0.0;
};

/**
 * Reports the banded-encoding normalization of A†, the smallest subnormalized
 * singular value above the rank cutoff, and the smallest ladder value from
 * {2, 4, 8, 16, 32} whose reciprocal sits below it (zero when none fits).
 */
inline ConditioningSummary conditioning_summary(const ComplexMatrix& a) {
    ConditioningSummary out;
    out.alpha = build_block_encoding(banded_spec_from_matrix(adjoint(a))).alpha;
    ComplexMatrix abar = a;
    for (Complex& v : abar.data) v /= out.alpha;
    const SVDResult dec = svd(abar);
    if (dec.rank == 0) throw ConditioningError("conditioning: matrix is zero");
    out.sigma_min = dec.singular_values[dec.rank - 1];
    for (double candidate : {2.0, 4.0, 8.0, 16.0, 32.0})
        if (1.0 / candidate < out.sigma_min) {
            out.ladder_kappa = candidate;
            break;
        }
    return out;
}

/**
 * Solves A x = y through the inversion pipeline: block encode A†, pick the
 * smallest condition-number target from {2, 4, 8, 16, 32} compatible with the
 * subnormalized spectrum (unless kappa overrides it), apply the real-part
 * singular-value transform with inverse-polynomial phases, post-select the
 * phase and flag qubits on zero, and rescale the surviving amplitudes.
 *
 * Pass reflection_phases to reuse a cached sequence; it must match the chosen
 * or overridden kappa's convention requirements (reflection, inverse target).
 */
inline SolveReport solve_linear_system(const ComplexMatrix& a, const ComplexVector& y,
                                       double epsilon,
                                       std::optional<double> kappa = std::nullopt,
                                       const PhaseSequence* reflection_phases = nullptr) {
    if (a.rows != a.cols) throw InvalidInputError("solve: matrix must be square");
    if (y.size() != a.rows) throw InvalidInputError("solve: right-hand side size mismatch");
    const double y_norm = vector_norm(y);
    if (y_norm == 0.0) throw InvalidInputError("solve: zero right-hand side");

    const BlockEncoding encoding = build_block_encoding(banded_spec_from_matrix(adjoint(a)));
    const double alpha = encoding.alpha;

    ComplexMatrix abar = a;
    for (Complex& v : abar.data) v /= alpha;
    const SVDResult dec = svd(abar);
    if (dec.rank == 0) throw ConditioningError("solve: matrix is zero");
    const double sigma_min = dec.singular_values[dec.rank - 1];

    double kappa_used = 0.0;
    if (kappa.has_value()) {
        if (*kappa <= 1.0) throw InvalidInputError("solve: kappa must exceed 1");
        kappa_used = *kappa;
    } else {
        for (double candidate : {2.0, 4.0, 8.0, 16.0, 32.0}) {
            if (1.0 / candidate < sigma_min) {
                kappa_used = candidate;
                break;
            }
        }
        if (kappa_used == 0.0)
            throw ConditioningError("solve: subnormalized sigma_min " +
                                    std::to_string(sigma_min) +
                                    " below 1/32, no ladder value fits");
    }

    PhaseSequence phases;
    if (reflection_phases != nullptr) {
        if (reflection_phases->convention != PhaseConvention::Reflection)
            throw InvalidInputError("solve: supplied phases must use the reflection convention");
        phases = *reflection_phases;
    } else {
        phases = convert_phases_reflection(
            find_phases_wx(chebyshev_inverse_coefficients(kappa_used, epsilon)));
    }
    const double beta = calibrate_beta(phases);

    QSVTConfig config;
    config.encoding = encoding;
    config.phases = phases;
    config.real_part = true;
    const Circuit circuit = assemble_qsvt_circuit(config);

    QuantumState state = QuantumState::zero(circuit.layout);
    state = apply_circuit(state, prepare_state(y, circuit.layout, Register::Matrix));
    state = apply_circuit(state, circuit);

    std::vector<std::size_t> measured(circuit.layout.n_flag + 1);
    for (std::size_t q = 0; q < measured.size(); ++q) measured[q] = q;
    const std::vector<int> outcome(measured.size(), 0);
    auto [post, probability] = postselect(state, measured, outcome);

    SolveReport report;
    report.success_probability = probability;
    report.rescale = y_norm / (alpha * beta);
    report.kappa_used = kappa_used;
    report.degree_used = phases.degree;
    const double amplitude_scale = std::sqrt(probability) * report.rescale;
    report.solution.resize(a.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        report.solution[i] = post.amplitudes[i] * amplitude_scale;
    return report;
}

}  // namespace qlsys

#endif  // QLSYS_QSVT_HPP
