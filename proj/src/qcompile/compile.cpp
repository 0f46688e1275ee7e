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
#include "qnas/qcompile/compile.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <optional>

#include <fmt/format.h>

#include "qnas/error.hpp"

namespace qnas::qcompile {

using qstate::cplx;
using qstate::Gate;
using qstate::GateKind;
using qstate::GateMatrix;
using qstate::make_gate;

namespace {

constexpr double kPi = std::numbers::pi;

bool is_zero(double a) { return std::abs(normalize_angle(a)) < kZeroAngle; }

Gate rz(double a, std::uint32_t w) { return make_gate(GateKind::RZ, {w}, {normalize_angle(a)}); }
Gate sx(std::uint32_t w) { return make_gate(GateKind::SX, {w}, {}); }
Gate cnot(std::uint32_t c, std::uint32_t t) { return make_gate(GateKind::CNOT, {c, t}, {}); }

void append(std::vector<Gate> &out, const std::vector<Gate> &more) {
    out.insert(out.end(), more.begin(), more.end());
}

GateMatrix fixed(GateKind kind) { return qstate::gate_unitary(kind, {}); }

std::vector<Gate> one_qubit(const GateMatrix &u, std::uint32_t w) {
    const auto a = unitary_to_u3(u);
    return decompose_u3(a[0], a[1], a[2], w);
}

/// exp(-i theta/2 P_a P_b) for P in {X, Y, Z}, via a basis change onto ZZ.
std::vector<Gate> pauli_pair_rotation(char pa, char pb, double theta, std::uint32_t a, std::uint32_t b) {
    auto to_z = [](char p) -> GateMatrix {
        // V with V Z V^dag = P; returns V
        if (p == 'X') return fixed(GateKind::H);
        if (p == 'Y') return fixed(GateKind::S) * fixed(GateKind::H);
        return GateMatrix::Identity(2, 2);
    };
    const GateMatrix va = to_z(pa), vb = to_z(pb);
    std::vector<Gate> out;
    if (pa != 'Z') append(out, one_qubit(va.adjoint(), a));
    if (pb != 'Z') append(out, one_qubit(vb.adjoint(), b));
    out.push_back(cnot(a, b));
    out.push_back(rz(theta, b));
    out.push_back(cnot(a, b));
    if (pa != 'Z') append(out, one_qubit(va, a));
    if (pb != 'Z') append(out, one_qubit(vb, b));
    return out;
}

std::vector<Gate> drop_identity_rz(std::vector<Gate> gates) {
    std::erase_if(gates, [](const Gate &g) { return g.kind == GateKind::RZ && is_zero(g.angles[0]); });
    return gates;
}

/// Merge pass that keeps the source tag of the first RZ of each run.
qstate::Circuit merge_tracked(const qstate::Circuit &in, std::vector<std::int32_t> *source) {
    qstate::Circuit out;
    out.n_qubits = in.n_qubits;
    std::vector<std::int32_t> out_src;
    // index in out.gates of a pending RZ per wire
    std::vector<std::optional<std::size_t>> pending(in.n_qubits);
    for (std::size_t i = 0; i < in.gates.size(); ++i) {
        const Gate &g = in.gates[i];
        if (g.kind == GateKind::RZ && g.slots[0] == qstate::kFixedAngle) {
            const auto w = g.wires[0];
            if (pending[w]) {
                auto &prev = out.gates[*pending[w]];
                prev.angles[0] = normalize_angle(prev.angles[0] + g.angles[0]);
            } else {
                pending[w] = out.gates.size();
                out.gates.push_back(g);
                out_src.push_back(source ? (*source)[i] : 0);
            }
            continue;
        }
        for (auto w : g.wire_span()) {
            pending[w].reset();
        }
        out.gates.push_back(g);
        out_src.push_back(source ? (*source)[i] : 0);
    }
    qstate::Circuit kept;
    kept.n_qubits = out.n_qubits;
    std::vector<std::int32_t> kept_src;
    for (std::size_t i = 0; i < out.gates.size(); ++i) {
        const Gate &g = out.gates[i];
        if (g.kind == GateKind::RZ && g.slots[0] == qstate::kFixedAngle && is_zero(g.angles[0])) {
            continue;
        }
        kept.gates.push_back(g);
        kept_src.push_back(out_src[i]);
    }
    if (source) {
        *source = std::move(kept_src);
    }
    return kept;
}

} // namespace

double normalize_angle(double a) {
    if (!std::isfinite(a)) {
        throw NumericError(fmt::format("non-finite angle {}", a));
    }
    double r = std::fmod(a + kPi, 2.0 * kPi);
    if (r < 0.0) {
        r += 2.0 * kPi;
    }
    r -= kPi;
    return r >= kPi ? r - 2.0 * kPi : r;
}

bool is_basis_kind(GateKind kind) noexcept {
    return kind == GateKind::CNOT || kind == GateKind::SX || kind == GateKind::RZ || kind == GateKind::X;
}

std::vector<Gate> decompose_u3(double theta, double phi, double lambda, std::uint32_t w) {
    const bool t0 = is_zero(theta), p0 = is_zero(phi), l0 = is_zero(lambda);
    if (t0) {
        if (p0 && l0) {
            return {};
        }
        if (p0) return {rz(lambda, w)};
        if (l0) return {rz(phi, w)};
        return {rz(phi + lambda, w)};
    }
    if (p0 && l0) {
        return {rz(kPi, w), sx(w), rz(kPi - theta, w), sx(w)};
    }
    if (p0) {
        // U3(theta, 0, lambda) = U3(-theta, pi, lambda + pi)
        return {rz(lambda + kPi, w), sx(w), rz(kPi - theta, w), sx(w)};
    }
    if (l0) {
        return {sx(w), rz(theta + kPi, w), sx(w), rz(phi + kPi, w)};
    }
    return {rz(lambda, w), sx(w), rz(theta + kPi, w), sx(w), rz(phi + kPi, w)};
}

std::array<double, 3> unitary_to_u3(const GateMatrix &u) {
    const double c = std::abs(u(0, 0));
    const double s = std::abs(u(1, 0));
    const double theta = 2.0 * std::atan2(s, c);
    double alpha = 0.0, phi = 0.0, lambda = 0.0;
    if (c > 1e-9) {
        alpha = std::arg(u(0, 0));
        const double sum = std::arg(u(1, 1)) - alpha;
        if (s > 1e-9) {
            phi = std::arg(u(1, 0)) - alpha;
            lambda = sum - phi;
        } else {
            lambda = sum;
        }
    } else {
        alpha = std::arg(u(1, 0));
        lambda = std::arg(-u(0, 1)) - alpha;
    }
    auto clean = [](double a) {
        const double n = normalize_angle(a);
        return std::abs(n) < 1e-11 ? 0.0 : n;
    };
    return {clean(theta), clean(phi), clean(lambda)};
}

std::vector<Gate> decompose_gate(const Gate &gate, std::span<const double> params) {
    std::array<double, 3> a{};
    for (std::size_t k = 0; k < gate.param_count(); ++k) {
        a[k] = gate.angle(k, params);
    }
    const auto w0 = gate.wires[0];
    const auto w1 = gate.wires[1];
    switch (gate.kind) {
    case GateKind::CNOT:
        return {cnot(w0, w1)};
    case GateKind::SX:
        return {sx(w0)};
    case GateKind::X:
        return {make_gate(GateKind::X, {w0}, {})};
    case GateKind::RZ:
    case GateKind::U1:
        return drop_identity_rz({rz(a[0], w0)});
    case GateKind::S:
        return {rz(kPi / 2, w0)};
    case GateKind::T:
        return {rz(kPi / 4, w0)};
    case GateKind::H:
        return {rz(kPi / 2, w0), sx(w0), rz(kPi / 2, w0)};
    case GateKind::RX:
        return decompose_u3(a[0], -kPi / 2, kPi / 2, w0);
    case GateKind::RY:
        return decompose_u3(a[0], 0.0, 0.0, w0);
    case GateKind::U3:
        return decompose_u3(a[0], a[1], a[2], w0);
    case GateKind::SH:
        return one_qubit(fixed(GateKind::SH), w0);
    case GateKind::CZ: {
        std::vector<Gate> out = decompose_gate(make_gate(GateKind::H, {w1}, {}));
        out.push_back(cnot(w0, w1));
        append(out, decompose_gate(make_gate(GateKind::H, {w1}, {})));
        return out;
    }
    case GateKind::SWAP:
        return {cnot(w0, w1), cnot(w1, w0), cnot(w0, w1)};
    case GateKind::RZZ:
        return pauli_pair_rotation('Z', 'Z', a[0], w0, w1);
    case GateKind::RXX:
        return pauli_pair_rotation('X', 'X', a[0], w0, w1);
    case GateKind::RZX:
        return pauli_pair_rotation('Z', 'X', a[0], w0, w1);
    case GateKind::SQSWAP: {
        // sqrt(SWAP) = exp(-i pi/8 (XX + YY + ZZ)) up to phase; the terms commute
        std::vector<Gate> out = pauli_pair_rotation('X', 'X', kPi / 4, w0, w1);
        append(out, pauli_pair_rotation('Y', 'Y', kPi / 4, w0, w1));
        append(out, pauli_pair_rotation('Z', 'Z', kPi / 4, w0, w1));
        return out;
    }
    case GateKind::CU3: {
        const double theta = a[0], phi = a[1], lambda = a[2];
        std::vector<Gate> out = drop_identity_rz({rz((lambda + phi) / 2, w0), rz((lambda - phi) / 2, w1)});
        out.push_back(cnot(w0, w1));
        append(out, decompose_u3(-theta / 2, 0.0, -(phi + lambda) / 2, w1));
        out.push_back(cnot(w0, w1));
        append(out, decompose_u3(theta / 2, phi, 0.0, w1));
        return out;
    }
    }
    throw UnsupportedGateError(fmt::format("no basis decomposition for {}", qstate::kind_name(gate.kind)));
}

qstate::Circuit decompose_circuit(const qstate::Circuit &circuit, std::span<const double> params) {
    if (params.size() != circuit.n_params) {
        throw ArityError(fmt::format("decompose: {} params for {} slots", params.size(), circuit.n_params));
    }
    qstate::Circuit out;
    out.n_qubits = circuit.n_qubits;
    for (const auto &g : circuit.gates) {
        append(out.gates, decompose_gate(g, params));
    }
    return out;
}

void QubitMapping::validate(std::size_t n_physical) const {
    std::vector<bool> seen(n_physical, false);
    for (std::size_t l = 0; l < assignment.size(); ++l) {
        const auto p = assignment[l];
        if (p >= n_physical) {
            throw ValidationError(fmt::format("mapping: logical {} -> physical {} outside {} qubits", l, p,
                                              n_physical));
        }
        if (seen[p]) {
            throw ValidationError(fmt::format("mapping: physical qubit {} assigned twice", p));
        }
        seen[p] = true;
    }
}

QubitMapping QubitMapping::identity(std::size_t n) {
    QubitMapping m;
    m.assignment.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        m.assignment[i] = i;
    }
    return m;
}

std::vector<std::uint32_t> CompiledCircuit::measured_qubits() const {
    return {final_layout.begin(), final_layout.begin() + static_cast<std::ptrdiff_t>(n_logical)};
}

CompiledCircuit route(const qstate::Circuit &circuit, std::span<const double> params,
                      const QubitMapping &mapping, const noise::DeviceModel &device) {
    if (mapping.size() < circuit.n_qubits) {
        throw ValidationError(fmt::format("mapping covers {} qubits, circuit has {}", mapping.size(),
                                          circuit.n_qubits));
    }
    mapping.validate(device.n_physical);
    if (params.size() != circuit.n_params) {
        throw ArityError(fmt::format("route: {} params for {} slots", params.size(), circuit.n_params));
    }
    const std::size_t np = device.n_physical;

    // complete the layout with ancillas on the unused physical qubits
    std::vector<std::uint32_t> layout(mapping.assignment.begin(),
                                      mapping.assignment.begin() + static_cast<std::ptrdiff_t>(circuit.n_qubits));
    {
        std::vector<bool> used(np, false);
        for (auto p : layout) used[p] = true;
        for (std::uint32_t p = 0; p < np; ++p) {
            if (!used[p]) layout.push_back(p);
        }
    }
    std::vector<std::uint32_t> owner(np);  // physical -> logical
    for (std::uint32_t l = 0; l < np; ++l) owner[layout[l]] = l;

    CompiledCircuit out;
    out.n_logical = circuit.n_qubits;
    out.initial_layout = layout;
    out.circuit.n_qubits = np;
    const auto adj = device.neighbors();

    auto shortest_path = [&](std::uint32_t from, std::uint32_t to) {
        std::vector<std::int64_t> parent(np, -1);
        std::deque<std::uint32_t> queue{from};
        parent[from] = from;
        while (!queue.empty()) {
            const auto v = queue.front();
            queue.pop_front();
            if (v == to) break;
            for (auto nb : adj[v]) {
                if (parent[nb] < 0) {
                    parent[nb] = v;
                    queue.push_back(nb);
                }
            }
        }
        if (parent[to] < 0) {
            throw RoutingError(fmt::format("physical qubits {} and {} are not connected on {}", from, to,
                                           device.name));
        }
        std::vector<std::uint32_t> path{to};
        while (path.back() != from) path.push_back(static_cast<std::uint32_t>(parent[path.back()]));
        std::reverse(path.begin(), path.end());
        return path;
    };

    for (std::size_t si = 0; si < circuit.gates.size(); ++si) {
        for (Gate g : decompose_gate(circuit.gates[si], params)) {
            if (g.arity() == 2) {
                auto pa = layout[g.wires[0]];
                const auto pb = layout[g.wires[1]];
                if (!device.coupled(pa, pb)) {
                    const auto path = shortest_path(pa, pb);
                    for (std::size_t k = 0; k + 2 < path.size(); ++k) {
                        const auto x = path[k], y = path[k + 1];
                        for (const auto &c : {cnot(x, y), cnot(y, x), cnot(x, y)}) {
                            out.circuit.gates.push_back(c);
                            out.source.push_back(kRoutingSwap);
                        }
                        std::swap(owner[x], owner[y]);
                        layout[owner[x]] = x;
                        layout[owner[y]] = y;
                        ++out.n_swaps;
                    }
                    pa = layout[g.wires[0]];
                }
                g.wires = {pa, pb};
            } else {
                g.wires[0] = layout[g.wires[0]];
            }
            out.circuit.gates.push_back(g);
            out.source.push_back(static_cast<std::int32_t>(si));
        }
    }
    out.circuit = merge_tracked(out.circuit, &out.source);
    out.final_layout = layout;
    return out;
}

qstate::Circuit merge_rotations(const qstate::Circuit &circuit) { return merge_tracked(circuit, nullptr); }

CircuitStats circuit_stats(const qstate::Circuit &circuit) {
    CircuitStats s;
    std::vector<std::size_t> level(circuit.n_qubits, 0);
    for (const auto &g : circuit.gates) {
        std::size_t l = 0;
        for (auto w : g.wire_span()) l = std::max(l, level.at(w));
        for (auto w : g.wire_span()) level[w] = l + 1;
        s.depth = std::max(s.depth, l + 1);
        ++s.n_gates;
        if (g.arity() == 1) {
            ++s.n_1q;
        } else {
            ++s.n_cnot;
        }
    }
    return s;
}

std::string format_stats(const CircuitStats &s) {
    return fmt::format("depth={} gates={} 1q={} cnot={}", s.depth, s.n_gates, s.n_1q, s.n_cnot);
}

} // namespace qnas::qcompile
