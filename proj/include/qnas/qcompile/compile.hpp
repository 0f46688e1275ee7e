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
/**
 * @file
 * Lowering to the device basis {CNOT, SX, RZ, X}, qubit mapping with greedy
 * SWAP insertion, light RZ clean-up passes and gate statistics.
 */
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qnas/noise/device.hpp"
#include "qnas/qstate/circuit.hpp"

namespace qnas::qcompile {

/// |angle| below this after wrapping to [-pi, pi) counts as zero.
inline constexpr double kZeroAngle = 1e-12;

/// Wraps into [-pi, pi).
[[nodiscard]] double normalize_angle(double a);

[[nodiscard]] bool is_basis_kind(qstate::GateKind kind) noexcept;

/**
 * Basis sequence (time order) for U3(theta, phi, lambda) on `wire`:
 * 5 gates in general, 4 when exactly one of theta's partners vanishes or
 * both do, 1 when theta vanishes, and nothing for the identity.
 */
[[nodiscard]] std::vector<qstate::Gate> decompose_u3(double theta, double phi, double lambda,
                                                     std::uint32_t wire = 0);

/// (theta, phi, lambda) with u = e^{i alpha} U3(theta, phi, lambda).
[[nodiscard]] std::array<double, 3> unitary_to_u3(const qstate::GateMatrix &u);

/// Basis sequence for any gate with bound angles; equal up to global phase.
[[nodiscard]] std::vector<qstate::Gate> decompose_gate(const qstate::Gate &gate,
                                                       std::span<const double> params = {});

/// Lowers every gate of a circuit; wires are unchanged.
[[nodiscard]] qstate::Circuit decompose_circuit(const qstate::Circuit &circuit,
                                                std::span<const double> params = {});

/// Logical index -> physical index.
struct QubitMapping {
    std::vector<std::uint32_t> assignment;

    [[nodiscard]] std::size_t size() const noexcept { return assignment.size(); }
    [[nodiscard]] bool operator==(const QubitMapping &) const = default;
    /// Throws ValidationError unless injective and within the device.
    void validate(std::size_t n_physical) const;
    [[nodiscard]] static QubitMapping identity(std::size_t n);
};

/// Marks compiled gates that belong to an inserted SWAP.
inline constexpr std::int32_t kRoutingSwap = -1;

struct CompiledCircuit {
    /// Over all physical qubits of the device, basis kinds only, angles fixed.
    qstate::Circuit circuit;
    /// Source gate index of each compiled gate, or kRoutingSwap.
    std::vector<std::int32_t> source;
    /// Position of every logical qubit (ancillas included, so both are
    /// permutations of the physical qubits) before and after the circuit.
    std::vector<std::uint32_t> initial_layout;
    std::vector<std::uint32_t> final_layout;
    std::size_t n_logical{0};
    std::size_t n_swaps{0};

    /// Physical qubits holding logical qubits 0..n_logical-1 at the end.
    [[nodiscard]] std::vector<std::uint32_t> measured_qubits() const;
};

/**
 * Lowers `circuit` to the basis, places logical qubit i on
 * mapping.assignment[i], and inserts SWAPs (3 CNOTs each) whenever a CNOT
 * targets an uncoupled pair: the first operand walks a BFS shortest path
 * toward the second, ties going to the lower physical index. Adjacent RZs
 * are then merged and identity RZs dropped.
 */
[[nodiscard]] CompiledCircuit route(const qstate::Circuit &circuit, std::span<const double> params,
                                    const QubitMapping &mapping, const noise::DeviceModel &device);

/// Merges consecutive RZs on a wire and drops those equal to the identity.
[[nodiscard]] qstate::Circuit merge_rotations(const qstate::Circuit &circuit);

struct CircuitStats {
    std::size_t depth{0};
    std::size_t n_gates{0};
    std::size_t n_1q{0};
    /// Two-qubit gates; all CNOTs once compiled.
    std::size_t n_cnot{0};

    [[nodiscard]] bool operator==(const CircuitStats &) const = default;
};

[[nodiscard]] CircuitStats circuit_stats(const qstate::Circuit &circuit);
[[nodiscard]] std::string format_stats(const CircuitStats &stats);

} // namespace qnas::qcompile
