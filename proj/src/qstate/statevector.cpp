// Copyright 2026 The QNAS Authors.

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "qnas/qstate/statevector.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

#include <fmt/format.h>

#include "qnas/error.hpp"

namespace qnas::qstate {

namespace {

// Spread the bits of `base` so that zeros land on every position in `sorted`.
inline std::size_t insert_zeros(std::size_t base, std::span<const std::uint32_t> sorted) {
    for (auto pos : sorted) {
        const std::size_t low = base & ((std::size_t{1} << pos) - 1);
        base = ((base >> pos) << (pos + 1)) | low;
    }
    return base;
}

void check_wires(std::span<const std::uint32_t> wires, std::size_t n_qubits) {
    for (std::size_t i = 0; i < wires.size(); ++i) {
        if (wires[i] >= n_qubits) {
            throw IndexError(fmt::format("wire {} out of range for {} qubit(s)", wires[i], n_qubits));
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (wires[j] == wires[i]) {
                throw IndexError(fmt::format("wire {} repeated", wires[i]));
            }
        }
    }
}

// Merge a gate unitary on `gate_wires` into a group matrix acting on `group`
// (both use wires[0]-is-MSB local ordering). Returns the group matrix for
// `group ∪ gate_wires` after the gate is applied.
Eigen::MatrixXcd embed(const Eigen::MatrixXcd &m, std::span<const std::uint32_t> from,
                       std::span<const std::uint32_t> to) {
    const std::size_t kt = to.size();
    const std::size_t kf = from.size();
    std::vector<std::size_t> pos(kf);
    for (std::size_t j = 0; j < kf; ++j) {
        pos[j] = static_cast<std::size_t>(std::find(to.begin(), to.end(), from[j]) - to.begin());
    }
    const std::size_t dim = std::size_t{1} << kt;
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim),
                                                  static_cast<Eigen::Index>(dim));
    auto sub_index = [&](std::size_t full) {
        std::size_t s = 0;
        for (std::size_t j = 0; j < kf; ++j) {
            s |= ((full >> (kt - 1 - pos[j])) & 1U) << (kf - 1 - j);
        }
        return s;
    };
    std::size_t mask = 0;
    for (std::size_t j = 0; j < kf; ++j) {
        mask |= std::size_t{1} << (kt - 1 - pos[j]);
    }
    for (std::size_t r = 0; r < dim; ++r) {
        for (std::size_t c = 0; c < dim; ++c) {
            if ((r & ~mask) != (c & ~mask)) {
                continue;
            }
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                m(static_cast<Eigen::Index>(sub_index(r)), static_cast<Eigen::Index>(sub_index(c)));
        }
    }
    return out;
}

} // namespace

void apply_matrix_1q(std::span<cplx> amps, std::uint32_t wire, const GateMatrix &m) {
    const cplx m00 = m(0, 0), m01 = m(0, 1), m10 = m(1, 0), m11 = m(1, 1);
    const std::size_t stride = std::size_t{1} << wire;
    const std::size_t n = amps.size();
    for (std::size_t hi = 0; hi < n; hi += 2 * stride) {
        for (std::size_t lo = 0; lo < stride; ++lo) {
            const std::size_t i0 = hi + lo;
            const std::size_t i1 = i0 + stride;
            const cplx a0 = amps[i0];
            const cplx a1 = amps[i1];
            amps[i0] = m00 * a0 + m01 * a1;
            amps[i1] = m10 * a0 + m11 * a1;
        }
    }
}

void apply_matrix_2q(std::span<cplx> amps, std::uint32_t w0, std::uint32_t w1,
                     const GateMatrix &m) {
    const std::array<std::uint32_t, 2> sorted{std::min(w0, w1), std::max(w0, w1)};
    const std::size_t s0 = std::size_t{1} << w0;
    const std::size_t s1 = std::size_t{1} << w1;
    const std::array<std::size_t, 4> off{0, s1, s0, s0 | s1};
    cplx mm[4][4];
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            mm[r][c] = m(r, c);
        }
    }
    const std::size_t blocks = amps.size() >> 2;
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::size_t base = insert_zeros(b, sorted);
        const cplx v[4] = {amps[base + off[0]], amps[base + off[1]], amps[base + off[2]],
                           amps[base + off[3]]};
        for (int r = 0; r < 4; ++r) {
            amps[base + off[r]] = mm[r][0] * v[0] + mm[r][1] * v[1] + mm[r][2] * v[2] + mm[r][3] * v[3];
        }
    }
}

void apply_matrix(std::span<cplx> amps, std::size_t n_qubits, std::span<const std::uint32_t> wires,
                  const Eigen::Ref<const Eigen::MatrixXcd> &m) {
    const std::size_t k = wires.size();
    check_wires(wires, n_qubits);
    const std::size_t dim = std::size_t{1} << k;
    if (static_cast<std::size_t>(m.rows()) != dim || static_cast<std::size_t>(m.cols()) != dim) {
        throw ArityError(fmt::format("matrix is {}x{}, expected {}x{}", m.rows(), m.cols(), dim, dim));
    }
    std::vector<std::uint32_t> sorted(wires.begin(), wires.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::size_t> off(dim, 0);
    for (std::size_t l = 0; l < dim; ++l) {
        for (std::size_t j = 0; j < k; ++j) {
            if ((l >> (k - 1 - j)) & 1U) {
                off[l] |= std::size_t{1} << wires[j];
            }
        }
    }
    Eigen::VectorXcd v(static_cast<Eigen::Index>(dim));
    Eigen::VectorXcd w(static_cast<Eigen::Index>(dim));
    const std::size_t blocks = amps.size() >> k;
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::size_t base = insert_zeros(b, sorted);
        for (std::size_t l = 0; l < dim; ++l) {
            v(static_cast<Eigen::Index>(l)) = amps[base + off[l]];
        }
        w.noalias() = m * v;
        for (std::size_t l = 0; l < dim; ++l) {
            amps[base + off[l]] = w(static_cast<Eigen::Index>(l));
        }
    }
}

Statevector::Statevector(std::size_t n_qubits) : n_qubits_(n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxStatevectorQubits) {
        throw CapacityError(fmt::format("statevector supports 1..{} qubits, got {}",
                                        kMaxStatevectorQubits, n_qubits));
    }
    amps_.assign(std::size_t{1} << n_qubits, cplx{0.0, 0.0});
    amps_[0] = 1.0;
}

Statevector::Statevector(std::vector<cplx> amps) : amps_(std::move(amps)) {
    if (amps_.size() < 2 || !std::has_single_bit(amps_.size())) {
        throw ArityError("amplitude count must be a power of two >= 2");
    }
    n_qubits_ = static_cast<std::size_t>(std::countr_zero(amps_.size()));
    if (n_qubits_ > kMaxStatevectorQubits) {
        throw CapacityError("statevector too large");
    }
}

double Statevector::norm_squared() const noexcept {
    return std::accumulate(amps_.begin(), amps_.end(), 0.0,
                           [](double acc, const cplx &a) { return acc + std::norm(a); });
}

std::vector<double> Statevector::probabilities() const {
    std::vector<double> p(amps_.size());
    std::transform(amps_.begin(), amps_.end(), p.begin(), [](const cplx &a) { return std::norm(a); });
    return p;
}

void Statevector::apply_unitary(std::span<const std::uint32_t> wires, const GateMatrix &u) {
    check_wires(wires, n_qubits_);
    if (wires.size() == 1) {
        apply_matrix_1q(amps_, wires[0], u);
    } else {
        apply_matrix_2q(amps_, wires[0], wires[1], u);
    }
}

void Statevector::apply(const Gate &gate, std::span<const double> params) {
    apply_unitary(gate.wire_span(), bound_unitary(gate, params));
}

Statevector new_zero_state(std::size_t n) { return Statevector(n); }

Statevector apply_gate(Statevector state, const Gate &gate, std::span<const double> params) {
    state.apply(gate, params);
    return state;
}

void run_into(Statevector &state, const Circuit &circuit, std::span<const double> params,
              ExecMode mode) {
    if (params.size() != circuit.n_params) {
        throw ArityError(fmt::format("circuit has {} parameter slot(s), got {} value(s)",
                                     circuit.n_params, params.size()));
    }
    if (mode.kind == ExecMode::Kind::Dynamic || mode.fuse_width < 2) {
        for (const Gate &g : circuit.gates) {
            state.apply(g, params);
        }
        return;
    }
    std::vector<std::uint32_t> group;
    Eigen::MatrixXcd acc;
    auto flush = [&] {
        if (group.empty()) {
            return;
        }
        if (group.size() <= 2) {
            state.apply_unitary(group, GateMatrix(acc));
        } else {
            apply_matrix(state.amps(), state.n_qubits(), group, acc);
        }
        group.clear();
    };
    for (const Gate &g : circuit.gates) {
        const auto wires = g.wire_span();
        check_wires(wires, state.n_qubits());
        std::vector<std::uint32_t> merged = group;
        for (auto w : wires) {
            if (std::find(merged.begin(), merged.end(), w) == merged.end()) {
                merged.push_back(w);
            }
        }
        if (merged.size() > mode.fuse_width) {
            flush();
            merged.assign(wires.begin(), wires.end());
        }
        const Eigen::MatrixXcd gu = bound_unitary(g, params);
        if (group.empty()) {
            acc = embed(gu, wires, merged);
        } else {
            acc = embed(gu, wires, merged) * embed(acc, group, merged);
        }
        group = std::move(merged);
    }
    flush();
}

Statevector run_circuit(const Circuit &circuit, std::span<const double> params, ExecMode mode) {
    Statevector state(circuit.n_qubits);
    run_into(state, circuit, params, mode);
    return state;
}

Statevector apply_pauli(const Statevector &state, const PauliString &obs) {
    Statevector out = state;
    auto amps = out.amps();
    for (const auto &[q, p] : obs.ops) {
        if (q >= state.n_qubits()) {
            throw IndexError(fmt::format("Pauli on qubit {} for {} qubit(s)", q, state.n_qubits()));
        }
        const std::size_t bit = std::size_t{1} << q;
        for (std::size_t i = 0; i < amps.size(); ++i) {
            const bool one = (i & bit) != 0;
            switch (p) {
            case Pauli::I:
                break;
            case Pauli::Z:
                if (one) amps[i] = -amps[i];
                break;
            case Pauli::X:
                if (!one) std::swap(amps[i], amps[i | bit]);
                break;
            case Pauli::Y:
                if (!one) {
                    const cplx a0 = amps[i];
                    const cplx a1 = amps[i | bit];
                    amps[i] = cplx{0, -1} * a1;
                    amps[i | bit] = cplx{0, 1} * a0;
                }
                break;
            }
        }
    }
    for (auto &a : amps) {
        a *= obs.coefficient;
    }
    return out;
}

double expectation(const Statevector &state, const PauliString &obs) {
    const Statevector p = apply_pauli(state, obs);
    cplx acc{0.0, 0.0};
    const auto a = state.amps();
    const auto b = p.amps();
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += std::conj(a[i]) * b[i];
    }
    return acc.real();
}

std::string bitstring(std::size_t index, std::size_t n_qubits) {
    std::string s(n_qubits, '0');
    for (std::size_t q = 0; q < n_qubits; ++q) {
        if ((index >> q) & 1U) {
            s[n_qubits - 1 - q] = '1';
        }
    }
    return s;
}

std::map<std::string, std::size_t> sample_counts(const Statevector &state, std::size_t shots,
                                                 std::mt19937_64 &rng) {
    if (shots == 0) {
        throw NumericError("shots must be >= 1");
    }
    const auto probs = state.probabilities();
    std::discrete_distribution<std::size_t> dist(probs.begin(), probs.end());
    std::vector<std::size_t> hits(probs.size(), 0);
    for (std::size_t s = 0; s < shots; ++s) {
        ++hits[dist(rng)];
    }
    std::map<std::string, std::size_t> counts;
    for (std::size_t i = 0; i < hits.size(); ++i) {
        if (hits[i] != 0) {
            counts.emplace(bitstring(i, state.n_qubits()), hits[i]);
        }
    }
    return counts;
}

} // namespace qnas::qstate
