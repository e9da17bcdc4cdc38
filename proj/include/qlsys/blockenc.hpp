// Copyright 2026 The qlsys Authors
// SPDX-License-Identifier: Apache-2.0
#ifndef QLSYS_BLOCKENC_HPP
#define QLSYS_BLOCKENC_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "qlsys/numerics.hpp"
#include "qlsys/statevector.hpp"

namespace qlsys {

// One term of a banded-matrix decomposition. A term with empty
// insert_positions places `value` on the diagonal at offset `shift`
// (positive = below the main diagonal) everywhere except delete_rows;
// a term with one insert position places `value` at that single entry.
struct DataItem {
    Complex value{0.0, 0.0};
    long long shift = 0;
    std::vector<std::size_t> delete_rows;
    std::vector<std::pair<std::size_t, std::size_t>> insert_positions;
};

struct BandedSpec {
    std::size_t dimension = 0;
    std::vector<DataItem> items;  // zero-padded to a power of two
    std::optional<std::pair<Complex, Complex>> modified_diagonal;
};

struct BlockEncoding {
    Circuit circuit;
    double alpha = 0.0;
    RegisterLayout layout;
    std::vector<std::size_t> row_projector;
    std::vector<std::size_t> col_projector;
};

namespace detail {

inline bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

inline std::size_t log2_exact(std::size_t n) {
    std::size_t b = 0;
    while ((std::size_t{1} << b) < n) ++b;
    return b;
}

inline std::vector<int> pattern_bits(std::size_t value, std::size_t width) {
    std::vector<int> bits(width);
    for (std::size_t q = 0; q < width; ++q)
        bits[q] = static_cast<int>((value >> (width - 1 - q)) & 1);
    return bits;
}

}  // namespace detail

inline BandedSpec banded_spec_from_matrix(const ComplexMatrix& a) {
    if (a.rows != a.cols || !detail::is_power_of_two(a.rows))
        throw InvalidInputError("banded spec: matrix must be square with power-of-two dimension");
    if (!is_finite(a)) throw InvalidInputError("banded spec: non-finite entries");
    const std::size_t n = a.rows;

    std::map<long long, std::vector<std::pair<std::size_t, Complex>>> offsets;
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c)
            if (a.at(r, c) != Complex(0.0, 0.0))
                offsets[static_cast<long long>(r) - static_cast<long long>(c)].push_back(
                    {r, a.at(r, c)});

    BandedSpec spec;
    spec.dimension = n;
    std::vector<DataItem> diagonals;
    std::vector<DataItem> inserts;

    auto add_insert = [&](std::size_t r, std::size_t c, Complex v) {
        DataItem it;
        it.value = v;
        it.shift = static_cast<long long>(r) - static_cast<long long>(c);
        it.insert_positions.push_back({r, c});
        inserts.push_back(std::move(it));
    };
    auto add_diagonal = [&](long long shift, Complex v, const std::vector<std::size_t>& rows) {
        DataItem it;
        it.value = v;
        it.shift = shift;
        std::vector<bool> keep(n, false);
        for (std::size_t r : rows) keep[r] = true;
        for (std::size_t r = 0; r < n; ++r)
            if (!keep[r]) it.delete_rows.push_back(r);
        diagonals.push_back(std::move(it));
    };

    for (const auto& [shift, entries] : offsets) {
        // rows grouped by exact value, tracked in first-appearance order
        std::vector<std::pair<Complex, std::vector<std::size_t>>> groups;
        for (const auto& [r, v] : entries) {
            auto it = std::find_if(groups.begin(), groups.end(),
                                   [&](const auto& g) { return g.first == v; });
            if (it == groups.end())
                groups.push_back({v, {r}});
            else
                it->second.push_back(r);
        }

        if (shift == 0 && groups.size() == 2 &&
            std::abs(groups[1].first - groups[0].first) < std::abs(groups[1].first)) {
            // two distinct diagonal values: carry the common part on all
            // occupied rows and the difference only on the later group
            const Complex v1 = groups[0].first, v2 = groups[1].first;
            std::vector<std::size_t> all_rows;
            for (const auto& g : groups)
                all_rows.insert(all_rows.end(), g.second.begin(), g.second.end());
            add_diagonal(0, v2 - v1, groups[1].second);
            add_diagonal(0, v1, all_rows);
            spec.modified_diagonal = std::make_pair(v2 - v1, v1);
            continue;
        }

        std::size_t dominant = 0;
        for (std::size_t g = 1; g < groups.size(); ++g)
            if (groups[g].second.size() > groups[dominant].second.size()) dominant = g;
        if (groups[dominant].second.size() >= 2) {
            add_diagonal(shift, groups[dominant].first, groups[dominant].second);
            for (std::size_t g = 0; g < groups.size(); ++g) {
                if (g == dominant) continue;
                for (std::size_t r : groups[g].second)
                    add_insert(r, static_cast<std::size_t>(static_cast<long long>(r) - shift),
                               groups[g].first);
            }
        } else {
            for (const auto& [r, v] : entries)
                add_insert(r, static_cast<std::size_t>(static_cast<long long>(r) - shift), v);
        }
    }

    std::stable_sort(diagonals.begin(), diagonals.end(),
                     [](const DataItem& x, const DataItem& y) { return x.shift > y.shift; });
    std::stable_sort(inserts.begin(), inserts.end(), [](const DataItem& x, const DataItem& y) {
        return x.insert_positions[0] < y.insert_positions[0];
    });
    spec.items = std::move(diagonals);
    spec.items.insert(spec.items.end(), inserts.begin(), inserts.end());
    if (spec.items.empty()) spec.items.push_back(DataItem{});
    while (!detail::is_power_of_two(spec.items.size())) spec.items.push_back(DataItem{});
    return spec;
}

inline BlockEncoding build_block_encoding(const BandedSpec& spec) {
    if (!detail::is_power_of_two(spec.dimension))
        throw InvalidInputError("block encoding: dimension must be a power of two");
    if (!detail::is_power_of_two(spec.items.size()))
        throw InvalidInputError("block encoding: item list must be zero-padded to a power of two");
    const std::size_t n_matrix = detail::log2_exact(spec.dimension);
    const std::size_t n_data = detail::log2_exact(spec.items.size());
    const std::size_t dim = spec.dimension;

    BlockEncoding enc;
    enc.layout = RegisterLayout{0, n_data + 1, n_matrix};
    if (enc.layout.total() > kMaxQubits)
        throw ResourceLimitError("block encoding: item count exceeds register capacity");
    const std::size_t delete_qubit = n_data;
    std::vector<std::size_t> data_qubits(n_data);
    for (std::size_t q = 0; q < n_data; ++q) data_qubits[q] = q;
    std::vector<std::size_t> matrix_qubits(n_matrix);
    for (std::size_t q = 0; q < n_matrix; ++q) matrix_qubits[q] = n_data + 1 + q;

    double alpha = 0.0;
    for (const DataItem& it : spec.items) alpha += std::abs(it.value);
    if (!(alpha > 0.0)) throw InvalidInputError("block encoding: all item values are zero");
    enc.alpha = alpha;

    Circuit& c = enc.circuit;
    c.layout = enc.layout;

    if (n_data > 0) {
        ComplexVector prep(spec.items.size());
        for (std::size_t i = 0; i < spec.items.size(); ++i) {
            const Complex v = spec.items[i].value;
            const double mag = std::abs(v);
            prep[i] = mag > 0.0 ? std::sqrt(mag / alpha) * (v / mag) : Complex(0.0, 0.0);
        }
        c.gates.push_back(make_controlled_register_unitary(
            {}, {}, data_qubits, detail::householder_completion(prep, prep.size())));
    }

    auto shift_matrix = [&](std::size_t s) {
        ComplexMatrix m(dim, dim);
        for (std::size_t j = 0; j < dim; ++j) m.at((j + s) % dim, j) = 1.0;
        return m;
    };
    auto matrix_row_controls = [&](std::size_t item, std::size_t row, std::vector<std::size_t>& q,
                                   std::vector<int>& p) {
        q = data_qubits;
        p = detail::pattern_bits(item, n_data);
        const std::vector<int> rb = detail::pattern_bits(row, n_matrix);
        for (std::size_t j = 0; j < n_matrix; ++j) {
            q.push_back(matrix_qubits[j]);
            p.push_back(rb[j]);
        }
    };

    for (std::size_t i = 0; i < spec.items.size(); ++i) {
        const DataItem& it = spec.items[i];
        if (it.value == Complex(0.0, 0.0)) continue;
        const auto item_bits = detail::pattern_bits(i, n_data);

        if (it.insert_positions.empty()) {
            const std::size_t s =
                static_cast<std::size_t>(((it.shift % static_cast<long long>(dim)) +
                                          static_cast<long long>(dim)) %
                                         static_cast<long long>(dim));
            if (s != 0)
                c.gates.push_back(make_controlled_register_unitary(data_qubits, item_bits,
                                                                   matrix_qubits, shift_matrix(s)));
            for (std::size_t r : it.delete_rows) {
                if (r >= dim) throw InvalidInputError("block encoding: delete row out of range");
                std::vector<std::size_t> q;
                std::vector<int> p;
                matrix_row_controls(i, r, q, p);
                c.gates.push_back(make_mcx(q, p, delete_qubit));
            }
        } else {
            if (it.insert_positions.size() != 1)
                throw InvalidInputError("block encoding: insert items carry a single entry");
            const auto [r, col] = it.insert_positions[0];
            if (r >= dim || col >= dim)
                throw InvalidInputError("block encoding: insert position out of range");
            const std::size_t s = (r + dim - col) % dim;
            if (s != 0)
                c.gates.push_back(make_controlled_register_unitary(data_qubits, item_bits,
                                                                   matrix_qubits, shift_matrix(s)));
            // delete every row, then re-admit the single target row
            c.gates.push_back(make_mcx(data_qubits, item_bits, delete_qubit));
            std::vector<std::size_t> q;
            std::vector<int> p;
            matrix_row_controls(i, r, q, p);
            c.gates.push_back(make_mcx(q, p, delete_qubit));
        }
    }

    if (n_data > 0) {
        ComplexVector unprep(spec.items.size());
        for (std::size_t i = 0; i < spec.items.size(); ++i)
            unprep[i] = std::sqrt(std::abs(spec.items[i].value) / alpha);
        c.gates.push_back(make_controlled_register_unitary(
            {}, {}, data_qubits, adjoint(detail::householder_completion(unprep, unprep.size()))));
    }

    enc.row_projector.resize(dim);
    enc.col_projector.resize(dim);
    for (std::size_t g = 0; g < dim; ++g) enc.row_projector[g] = enc.col_projector[g] = g;
    return enc;
}

inline BlockEncoding build_dilation_encoding(const ComplexMatrix& a, double alpha) {
    if (a.rows != a.cols || !detail::is_power_of_two(a.rows))
        throw InvalidInputError("dilation: matrix must be square with power-of-two dimension");
    if (!is_finite(a) || !std::isfinite(alpha) || alpha <= 0.0)
        throw InvalidInputError("dilation: non-finite input");
    const std::size_t n = a.rows;
    ComplexMatrix abar(n, n);
    for (std::size_t i = 0; i < n * n; ++i) abar.data[i] = a.data[i] / alpha;

    const SVDResult f = svd(abar);
    if (!f.singular_values.empty() && f.singular_values[0] > 1.0 + 1e-9)
        throw InvalidInputError("dilation: alpha below the spectral norm");

    // W sqrt(I - S^2) W'  and  V sqrt(I - S^2) V'
    auto damped = [&](const ComplexMatrix& basis) {
        ComplexMatrix m(n, n);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c) {
                Complex acc = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double s = k < f.singular_values.size() ? f.singular_values[k] : 0.0;
                    acc += basis.at(r, k) * std::sqrt(std::max(0.0, 1.0 - s * s)) *
                           std::conj(basis.at(c, k));
                }
                m.at(r, c) = acc;
            }
        return m;
    };
    const ComplexMatrix top_right = damped(f.left_vectors);
    const ComplexMatrix bottom_left = damped(f.right_vectors);

    ComplexMatrix u(2 * n, 2 * n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            u.at(r, c) = abar.at(r, c);
            u.at(r, n + c) = top_right.at(r, c);
            u.at(n + r, c) = bottom_left.at(r, c);
            u.at(n + r, n + c) = -std::conj(abar.at(c, r));
        }

    BlockEncoding enc;
    enc.alpha = alpha;
    enc.layout = RegisterLayout{0, 1, detail::log2_exact(n)};
    if (enc.layout.total() > kMaxQubits) throw ResourceLimitError("dilation: matrix too large");
    enc.circuit.layout = enc.layout;
    std::vector<std::size_t> all_qubits(enc.layout.total());
    for (std::size_t q = 0; q < all_qubits.size(); ++q) all_qubits[q] = q;
    enc.circuit.gates.push_back(make_controlled_register_unitary({}, {}, all_qubits, u));
    enc.row_projector.resize(n);
    enc.col_projector.resize(n);
    for (std::size_t g = 0; g < n; ++g) enc.row_projector[g] = enc.col_projector[g] = g;
    return enc;
}

inline ComplexMatrix extract_block(const BlockEncoding& enc) {
    const ComplexMatrix u = circuit_unitary(enc.circuit);
    ComplexMatrix block(enc.row_projector.size(), enc.col_projector.size());
    for (std::size_t r = 0; r < block.rows; ++r)
        for (std::size_t c = 0; c < block.cols; ++c)
            block.at(r, c) = u.at(enc.row_projector[r], enc.col_projector[c]);
    return block;
}

enum class PermutationEnd { Left, Right };

// Routes the given basis indices onto the states whose forced bits conform
// (top bits one for Left, bottom bits zero for Right), as chains of
// controlled bit flips. Each flip transposes exactly two basis states.
inline std::vector<GateOp> build_permutation(const std::vector<std::size_t>& indices,
                                             PermutationEnd direction,
                                             std::size_t register_size) {
    if (register_size == 0 || register_size > kMaxQubits)
        throw InvalidInputError("permutation: bad register size");
    if (indices.empty()) throw InvalidInputError("permutation: empty index set");
    const std::size_t n = register_size;
    const std::size_t space = std::size_t{1} << n;
    std::vector<bool> member(space, false);
    for (std::size_t x : indices) {
        if (x >= space) throw InvalidInputError("permutation: index out of range");
        if (member[x]) throw InvalidInputError("permutation: duplicate index");
        member[x] = true;
    }

    std::size_t block_bits = 0;
    while ((std::size_t{1} << block_bits) < indices.size()) ++block_bits;
    const std::size_t k = n - block_bits;
    std::size_t forced_mask = 0;
    for (std::size_t b = 0; b < k; ++b)
        forced_mask |= direction == PermutationEnd::Right ? (std::size_t{1} << b)
                                                          : (std::size_t{1} << (n - 1 - b));
    const std::size_t forced_value = direction == PermutationEnd::Right ? 0 : forced_mask;
    auto conforming = [&](std::size_t x) { return (x & forced_mask) == forced_value; };

    std::vector<bool> occupied(space, false);
    std::deque<std::size_t> movers;
    for (std::size_t x = 0; x < space; ++x) {
        if (!member[x]) continue;
        if (conforming(x))
            occupied[x] = true;
        else
            movers.push_back(x);
    }
    std::vector<bool> pending(space, false);
    for (std::size_t x : movers) pending[x] = true;

    std::vector<std::size_t> free_masks;  // extra flips over the non-forced bits
    for (std::size_t m = 0; m < space; ++m)
        if ((m & forced_mask) == 0) free_masks.push_back(m);
    std::stable_sort(free_masks.begin(), free_masks.end(), [](std::size_t x, std::size_t y) {
        return std::popcount(x) < std::popcount(y);
    });

    auto descending_bits = [&](std::size_t mask) {
        std::vector<std::size_t> bits;
        for (std::size_t b = n; b-- > 0;)
            if (mask & (std::size_t{1} << b)) bits.push_back(std::size_t{1} << b);
        return bits;
    };
    auto ascending_bits = [&](std::size_t mask) {
        std::vector<std::size_t> bits;
        for (std::size_t b = 0; b < n; ++b)
            if (mask & (std::size_t{1} << b)) bits.push_back(std::size_t{1} << b);
        return bits;
    };

    std::vector<GateOp> gates;
    auto emit_flip = [&](std::size_t state, std::size_t bit) {
        std::size_t bitpos = 0;
        while ((std::size_t{1} << bitpos) != bit) ++bitpos;
        const std::size_t target = n - 1 - bitpos;
        std::vector<std::size_t> controls;
        std::vector<int> polarities;
        for (std::size_t q = 0; q < n; ++q) {
            if (q == target) continue;
            controls.push_back(q);
            polarities.push_back(static_cast<int>((state >> (n - 1 - q)) & 1));
        }
        gates.push_back(make_mcx(controls, polarities, target));
    };

    // A chain may not pass through a source that has not moved yet, or it
    // would displace it. The canonical flip order is tried first; when
    // blocked, any collision-free path through the subcube spanned by the
    // differing bits is accepted, and failing that the mover is deferred.
    auto path_safe = [&](std::size_t src, const std::vector<std::size_t>& path) {
        std::size_t cur = src;
        for (std::size_t bit : path) {
            cur ^= bit;
            if (pending[cur] && cur != src) return false;
        }
        return true;
    };
    auto subcube_path = [&](std::size_t src,
                            std::size_t tgt) -> std::optional<std::vector<std::size_t>> {
        const std::vector<std::size_t> diff_bits = descending_bits(src ^ tgt);
        const std::size_t full = (std::size_t{1} << diff_bits.size()) - 1;
        std::map<std::size_t, std::pair<std::size_t, std::size_t>> parent;  // mask -> (prev, bit)
        std::deque<std::size_t> frontier{0};
        parent[0] = {0, 0};
        while (!frontier.empty()) {
            const std::size_t mask = frontier.front();
            frontier.pop_front();
            if (mask == full) {
                std::vector<std::size_t> path;
                for (std::size_t m = full; m != 0;) {
                    const auto [prev, bit] = parent[m];
                    path.push_back(bit);
                    m = prev;
                }
                std::reverse(path.begin(), path.end());
                return path;
            }
            for (std::size_t b = 0; b < diff_bits.size(); ++b) {
                const std::size_t next = mask | (std::size_t{1} << b);
                if (next == mask || parent.count(next)) continue;
                std::size_t state = src;
                for (std::size_t j = 0; j < diff_bits.size(); ++j)
                    if (next & (std::size_t{1} << j)) state ^= diff_bits[j];
                if (next != full && (pending[state] || occupied[state])) continue;
                parent[next] = {mask, diff_bits[b]};
                frontier.push_back(next);
            }
        }
        return std::nullopt;
    };

    std::size_t deferrals = 0;
    while (!movers.empty()) {
        const std::size_t src = movers.front();
        movers.pop_front();
        const std::size_t base = direction == PermutationEnd::Right ? (src & ~forced_mask)
                                                                    : (src | forced_mask);
        std::optional<std::vector<std::size_t>> chosen;
        std::size_t chosen_tgt = 0;
        for (std::size_t extra : free_masks) {
            const std::size_t tgt = base ^ extra;
            if (occupied[tgt]) continue;
            std::vector<std::size_t> canonical = descending_bits(extra);
            const std::size_t mid = src ^ extra;
            for (std::size_t bit : ascending_bits(mid ^ tgt)) canonical.push_back(bit);
            if (path_safe(src, canonical)) {
                chosen = std::move(canonical);
                chosen_tgt = tgt;
                break;
            }
            if (auto detour = subcube_path(src, tgt)) {
                chosen = std::move(detour);
                chosen_tgt = tgt;
                break;
            }
        }
        if (!chosen) {
            if (deferrals >= movers.size())
                throw InvalidInputError("permutation: routing failed");
            movers.push_back(src);
            ++deferrals;
            continue;
        }
        deferrals = 0;
        pending[src] = false;
        std::size_t cur = src;
        for (std::size_t bit : *chosen) {
            emit_flip(cur, bit);
            cur ^= bit;
        }
        occupied[chosen_tgt] = true;
    }
    return gates;
}

}  // namespace qlsys

#endif  // QLSYS_BLOCKENC_HPP
