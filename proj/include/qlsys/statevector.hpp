// Copyright 2026 The qlsys Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "qlsys/numerics.hpp"

namespace qlsys {

constexpr std::size_t kMaxQubits = 16;
constexpr std::size_t kMaxUnitaryQubits = 12;

// Qubit 0 is the most significant bit of the basis-state index, so the
// matrix register (placed last) occupies the least significant bits and the
// all-ancilla-zero block sits at indices 0 .. 2^n_matrix - 1.
struct RegisterLayout {
    std::size_t n_qsp = 0;  // 0 or 1
    std::size_t n_flag = 0;
    std::size_t n_matrix = 0;

    std::size_t total() const { return n_qsp + n_flag + n_matrix; }
    bool operator==(const RegisterLayout&) const = default;
};

enum class Register { Qsp, Flag, Matrix };

inline std::vector<std::size_t> register_qubits(const RegisterLayout& layout, Register reg) {
    std::size_t begin = 0, count = 0;
    switch (reg) {
        case Register::Qsp: begin = 0; count = layout.n_qsp; break;
        case Register::Flag: begin = layout.n_qsp; count = layout.n_flag; break;
        case Register::Matrix: begin = layout.n_qsp + layout.n_flag; count = layout.n_matrix; break;
    }
    std::vector<std::size_t> qs(count);
    for (std::size_t i = 0; i < count; ++i) qs[i] = begin + i;
    return qs;
}

inline void check_layout(const RegisterLayout& layout) {
    if (layout.n_qsp > 1) throw InvalidInputError("layout: n_qsp must be 0 or 1");
    if (layout.total() == 0 || layout.total() > kMaxQubits)
        throw InvalidInputError("layout: total qubits out of range");
}

struct QuantumState {
    RegisterLayout layout;
    ComplexVector amplitudes;

    static QuantumState zero(const RegisterLayout& layout) {
        check_layout(layout);
        QuantumState s;
        s.layout = layout;
        s.amplitudes.assign(std::size_t{1} << layout.total(), 0.0);
        s.amplitudes[0] = 1.0;
        return s;
    }
};

struct GateOp {
    enum class Kind { SingleQubit, MultiControlledX, RegisterPermutation, ControlledRegisterUnitary };

    Kind kind = Kind::SingleQubit;
    std::size_t target = 0;                  // SingleQubit, MultiControlledX
    std::array<Complex, 4> matrix2{};        // SingleQubit, row-major
    std::vector<std::size_t> controls;       // MultiControlledX, ControlledRegisterUnitary
    std::vector<int> polarities;             // 0 or 1 per control
    std::vector<std::size_t> reg_qubits;     // RegisterPermutation, ControlledRegisterUnitary
    std::vector<std::size_t> permutation;    // basis-index bijection on reg_qubits
    ComplexMatrix reg_unitary;               // ControlledRegisterUnitary
};

inline GateOp make_single_qubit(std::size_t qubit, const std::array<Complex, 4>& m) {
    GateOp g;
    g.kind = GateOp::Kind::SingleQubit;
    g.target = qubit;
    g.matrix2 = m;
    return g;
}

inline GateOp make_mcx(std::vector<std::size_t> controls, std::vector<int> polarities,
                       std::size_t target) {
    if (controls.size() != polarities.size())
        throw InvalidInputError("mcx: controls/polarities size mismatch");
    GateOp g;
    g.kind = GateOp::Kind::MultiControlledX;
    g.controls = std::move(controls);
    g.polarities = std::move(polarities);
    g.target = target;
    return g;
}

inline GateOp make_register_permutation(std::vector<std::size_t> reg_qubits,
                                        std::vector<std::size_t> permutation) {
    if (permutation.size() != (std::size_t{1} << reg_qubits.size()))
        throw InvalidInputError("permutation: size must be 2^k");
    std::vector<bool> seen(permutation.size(), false);
    for (std::size_t v : permutation) {
        if (v >= permutation.size() || seen[v])
            throw InvalidInputError("permutation: not a bijection");
        seen[v] = true;
    }
    GateOp g;
    g.kind = GateOp::Kind::RegisterPermutation;
    g.reg_qubits = std::move(reg_qubits);
    g.permutation = std::move(permutation);
    return g;
}

inline GateOp make_controlled_register_unitary(std::vector<std::size_t> controls,
                                               std::vector<int> polarities,
                                               std::vector<std::size_t> reg_qubits,
                                               ComplexMatrix unitary) {
    if (unitary.rows != unitary.cols || unitary.rows != (std::size_t{1} << reg_qubits.size()))
        throw InvalidInputError("register unitary: dimension must be 2^k");
    GateOp g;
    g.kind = GateOp::Kind::ControlledRegisterUnitary;
    g.controls = std::move(controls);
    g.polarities = std::move(polarities);
    g.reg_qubits = std::move(reg_qubits);
    g.reg_unitary = std::move(unitary);
    return g;
}

struct Circuit {
    RegisterLayout layout;
    std::vector<GateOp> gates;
};

namespace detail {

inline int bit_of(std::size_t g, std::size_t qubit, std::size_t total) {
    return static_cast<int>((g >> (total - 1 - qubit)) & 1u);
}

inline bool controls_match(std::size_t g, const GateOp& op, std::size_t total) {
    for (std::size_t i = 0; i < op.controls.size(); ++i)
        if (bit_of(g, op.controls[i], total) != op.polarities[i]) return false;
    return true;
}

inline void apply_gate(ComplexVector& amps, const GateOp& op, std::size_t total) {
    const std::size_t dim = amps.size();
    switch (op.kind) {
        case GateOp::Kind::SingleQubit: {
            const std::size_t step = std::size_t{1} << (total - 1 - op.target);
            for (std::size_t g = 0; g < dim; ++g) {
                if (g & step) continue;
                const Complex a = amps[g], b = amps[g | step];
                amps[g] = op.matrix2[0] * a + op.matrix2[1] * b;
                amps[g | step] = op.matrix2[2] * a + op.matrix2[3] * b;
            }
            break;
        }
        case GateOp::Kind::MultiControlledX: {
            const std::size_t step = std::size_t{1} << (total - 1 - op.target);
            for (std::size_t g = 0; g < dim; ++g) {
                if (g & step) continue;
                if (!controls_match(g, op, total)) continue;
                std::swap(amps[g], amps[g | step]);
            }
            break;
        }
        case GateOp::Kind::RegisterPermutation: {
            const std::size_t k = op.reg_qubits.size();
            ComplexVector out(dim, 0.0);
            for (std::size_t g = 0; g < dim; ++g) {
                std::size_t r = 0;
                for (std::size_t i = 0; i < k; ++i)
                    r = (r << 1) | static_cast<std::size_t>(bit_of(g, op.reg_qubits[i], total));
                const std::size_t rp = op.permutation[r];
                std::size_t gp = g;
                for (std::size_t i = 0; i < k; ++i) {
                    const std::size_t mask = std::size_t{1} << (total - 1 - op.reg_qubits[i]);
                    if ((rp >> (k - 1 - i)) & 1u)
                        gp |= mask;
                    else
                        gp &= ~mask;
                }
                out[gp] = amps[g];
            }
            amps = std::move(out);
            break;
        }
        case GateOp::Kind::ControlledRegisterUnitary: {
            const std::size_t k = op.reg_qubits.size();
            const std::size_t sub = std::size_t{1} << k;
            std::vector<std::size_t> masks(k);
            for (std::size_t i = 0; i < k; ++i)
                masks[i] = std::size_t{1} << (total - 1 - op.reg_qubits[i]);
            ComplexVector block(sub);
            for (std::size_t g = 0; g < dim; ++g) {
                bool base = true;
                for (std::size_t i = 0; i < k && base; ++i)
                    if (g & masks[i]) base = false;
                if (!base) continue;
                if (!controls_match(g, op, total)) continue;
                for (std::size_t r = 0; r < sub; ++r) {
                    std::size_t idx = g;
                    for (std::size_t i = 0; i < k; ++i)
                        if ((r >> (k - 1 - i)) & 1u) idx |= masks[i];
                    block[r] = amps[idx];
                }
                for (std::size_t r = 0; r < sub; ++r) {
                    Complex acc = 0.0;
                    for (std::size_t c = 0; c < sub; ++c)
                        acc += op.reg_unitary.at(r, c) * block[c];
                    std::size_t idx = g;
                    for (std::size_t i = 0; i < k; ++i)
                        if ((r >> (k - 1 - i)) & 1u) idx |= masks[i];
                    amps[idx] = acc;
                }
            }
            break;
        }
    }
}

}  // namespace detail

inline QuantumState apply_circuit(const QuantumState& state, const Circuit& circuit) {
    if (!(state.layout == circuit.layout))
        throw InvalidInputError("apply_circuit: layout mismatch");
    QuantumState out = state;
    const std::size_t total = state.layout.total();
    for (const GateOp& op : circuit.gates) detail::apply_gate(out.amplitudes, op, total);
    return out;
}

inline GateOp invert_gate(const GateOp& op) {
    GateOp inv = op;
    switch (op.kind) {
        case GateOp::Kind::SingleQubit:
            inv.matrix2 = {std::conj(op.matrix2[0]), std::conj(op.matrix2[2]),
                           std::conj(op.matrix2[1]), std::conj(op.matrix2[3])};
            break;
        case GateOp::Kind::MultiControlledX:
            break;
        case GateOp::Kind::RegisterPermutation:
            for (std::size_t i = 0; i < op.permutation.size(); ++i)
                inv.permutation[op.permutation[i]] = i;
            break;
        case GateOp::Kind::ControlledRegisterUnitary:
            inv.reg_unitary = adjoint(op.reg_unitary);
            break;
    }
    return inv;
}

inline Circuit invert_circuit(const Circuit& circuit) {
    Circuit inv;
    inv.layout = circuit.layout;
    inv.gates.reserve(circuit.gates.size());
    for (auto it = circuit.gates.rbegin(); it != circuit.gates.rend(); ++it)
        inv.gates.push_back(invert_gate(*it));
    return inv;
}

namespace detail {

/** Unitary completion whose first column is v normalized. */
inline ComplexMatrix householder_completion(const ComplexVector& v, std::size_t dim) {
    ComplexVector vn(dim, 0.0);
    const double nv = vector_norm(v);
    for (std::size_t i = 0; i < v.size(); ++i) vn[i] = v[i] / nv;

    ComplexMatrix U = ComplexMatrix::identity(dim);
    bool trivial = std::abs(vn[0] - 1.0) < 1e-15;
    for (std::size_t i = 1; trivial && i < dim; ++i)
        if (std::abs(vn[i]) != 0.0) trivial = false;
    if (trivial) return U;

    const Complex ph = std::abs(vn[0]) > 0.0 ? vn[0] / std::abs(vn[0]) : Complex(1.0);
    ComplexVector u = vn;
    u[0] += ph;
    double uu = 0.0;
    for (const auto& z : u) uu += std::norm(z);
    ComplexMatrix H = ComplexMatrix::identity(dim);
    for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c) H.at(r, c) -= 2.0 * u[r] * std::conj(u[c]) / uu;
    for (std::size_t r = 0; r < dim; ++r) H.at(r, 0) *= -ph;
    return H;
}

}  // namespace detail

/**
 * Circuit loading v / ||v|| into the target register (one register unitary,
 * Householder completion of the remaining columns).
 */
inline Circuit prepare_state(const ComplexVector& v, const RegisterLayout& layout,
                             Register target) {
    check_layout(layout);
    const std::vector<std::size_t> qs = register_qubits(layout, target);
    if (qs.empty()) throw InvalidInputError("prepare_state: empty target register");
    const std::size_t dim = std::size_t{1} << qs.size();
    if (v.empty() || v.size() > dim) throw InvalidInputError("prepare_state: bad vector size");
    if (vector_norm(v) == 0.0) throw InvalidInputError("prepare_state: zero vector");

    Circuit c;
    c.layout = layout;
    c.gates.push_back(make_controlled_register_unitary(
        {}, {}, qs, detail::householder_completion(v, dim)));
    return c;
}

inline ComplexMatrix circuit_unitary(const Circuit& circuit) {
    const std::size_t total = circuit.layout.total();
    if (total > kMaxUnitaryQubits)
        throw ResourceLimitError("circuit_unitary: too many qubits");
    const std::size_t dim = std::size_t{1} << total;
    ComplexMatrix U(dim, dim);
    for (std::size_t col = 0; col < dim; ++col) {
        ComplexVector amps(dim, 0.0);
        amps[col] = 1.0;
        for (const GateOp& op : circuit.gates) detail::apply_gate(amps, op, total);
        for (std::size_t row = 0; row < dim; ++row) U.at(row, col) = amps[row];
    }
    return U;
}

/** Post-select the given qubits onto the outcome bits; returns (state, probability). */
inline std::pair<QuantumState, double> postselect(const QuantumState& state,
                                                  const std::vector<std::size_t>& qubits,
                                                  const std::vector<int>& outcome) {
    if (qubits.size() != outcome.size())
        throw InvalidInputError("postselect: qubits/outcome size mismatch");
    const std::size_t total = state.layout.total();
    for (std::size_t q : qubits)
        if (q >= total) throw InvalidInputError("postselect: qubit out of range");

    double prob = 0.0;
    for (std::size_t g = 0; g < state.amplitudes.size(); ++g) {
        bool match = true;
        for (std::size_t i = 0; i < qubits.size() && match; ++i)
            match = detail::bit_of(g, qubits[i], total) == outcome[i];
        if (match) prob += std::norm(state.amplitudes[g]);
    }
    if (prob == 0.0) throw PostSelectionError("postselect: zero-probability outcome", 0.0);

    QuantumState out;
    out.layout = state.layout;
    out.amplitudes.assign(state.amplitudes.size(), 0.0);
    const double scale = 1.0 / std::sqrt(prob);
    for (std::size_t g = 0; g < state.amplitudes.size(); ++g) {
        bool match = true;
        for (std::size_t i = 0; i < qubits.size() && match; ++i)
            match = detail::bit_of(g, qubits[i], total) == outcome[i];
        if (match) out.amplitudes[g] = state.amplitudes[g] * scale;
    }
    return {out, prob};
}

/** Multinomial sample of basis states; deterministic per seed. */
inline std::map<std::string, std::uint64_t> sample_counts(const QuantumState& state,
                                                          std::uint64_t shots,
                                                          std::uint64_t seed) {
    if (shots == 0) throw InvalidInputError("sample_counts: shots must be >= 1");
    const std::size_t total = state.layout.total();
    std::vector<double> cdf(state.amplitudes.size());
    double acc = 0.0;
    for (std::size_t g = 0; g < state.amplitudes.size(); ++g) {
        acc += std::norm(state.amplitudes[g]);
        cdf[g] = acc;
    }
    std::mt19937_64 rng(seed);
    std::map<std::string, std::uint64_t> counts;
    for (std::uint64_t s = 0; s < shots; ++s) {
        const double u = (rng() >> 11) * (1.0 / 9007199254740992.0) * acc;
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        std::size_t g = static_cast<std::size_t>(it - cdf.begin());
        if (g >= cdf.size()) g = cdf.size() - 1;
        std::string key(total, '0');
        for (std::size_t q = 0; q < total; ++q)
            if (detail::bit_of(g, q, total)) key[q] = '1';
        ++counts[key];
    }
    return counts;
}

inline Complex expectation(const QuantumState& state, const ComplexMatrix& M) {
    if (M.rows != state.amplitudes.size() || M.cols != state.amplitudes.size())
        throw InvalidInputError("expectation: dimension mismatch");
    Complex acc = 0.0;
    for (std::size_t r = 0; r < M.rows; ++r) {
        Complex row = 0.0;
        for (std::size_t c = 0; c < M.cols; ++c) row += M.at(r, c) * state.amplitudes[c];
        acc += std::conj(state.amplitudes[r]) * row;
    }
    return acc;
}

}  // namespace qlsys
