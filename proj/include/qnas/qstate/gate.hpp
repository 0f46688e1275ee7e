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
 * Gate kinds, their unitaries, parameter derivatives and shift rules.
 *
 * Two-qubit matrices use the local index 2*b(wires[0]) + b(wires[1]), so
 * wires[0] is the control of CNOT/CZ/CU3 and the first factor of RXX/RZX/RZZ.
 */
#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace qnas::qstate {

using cplx = std::complex<double>;

/// Dense matrix of at most 4x4 entries; stays on the stack.
using GateMatrix =
    Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 4, 4>;

enum class GateKind : std::uint8_t {
    RX,
    RY,
    RZ,
    RXX,
    RZX,
    RZZ,
    U1,
    U3,
    CU3,
    CZ,
    CNOT,
    H,
    SH,
    SX,
    X,
    S,
    T,
    SWAP,
    SQSWAP,
};

inline constexpr std::array kAllGateKinds{
    GateKind::RX,  GateKind::RY,   GateKind::RZ, GateKind::RXX, GateKind::RZX,
    GateKind::RZZ, GateKind::U1,   GateKind::U3, GateKind::CU3, GateKind::CZ,
    GateKind::CNOT, GateKind::H,   GateKind::SH, GateKind::SX,  GateKind::X,
    GateKind::S,   GateKind::T,    GateKind::SWAP, GateKind::SQSWAP,
};

/// Number of wires the kind acts on (1 or 2).
[[nodiscard]] std::size_t arity(GateKind kind) noexcept;
/// Number of angles the kind takes (0..3).
[[nodiscard]] std::size_t param_count(GateKind kind) noexcept;
[[nodiscard]] std::string_view kind_name(GateKind kind) noexcept;
/// Accepts canonical names plus the aliases XX, ZX, ZZ, CX, SQH.
[[nodiscard]] std::optional<GateKind> parse_kind(std::string_view name);

/// Slot marker for an angle that is not trainable.
inline constexpr std::int32_t kFixedAngle = -1;

/**
 * One gate instance. Each angle is either fixed (its value lives in
 * `angles`) or bound to a trainable slot of the enclosing circuit.
 */
struct Gate {
    GateKind kind{GateKind::X};
    std::array<std::uint32_t, 2> wires{0, 0};
    std::array<double, 3> angles{0.0, 0.0, 0.0};
    std::array<std::int32_t, 3> slots{kFixedAngle, kFixedAngle, kFixedAngle};

    [[nodiscard]] std::size_t arity() const noexcept { return qstate::arity(kind); }
    [[nodiscard]] std::size_t param_count() const noexcept {
        return qstate::param_count(kind);
    }
    [[nodiscard]] std::span<const std::uint32_t> wire_span() const noexcept {
        return {wires.data(), arity()};
    }
    [[nodiscard]] bool is_trainable(std::size_t k) const noexcept {
        return slots[k] != kFixedAngle;
    }
    /// Angle k after binding trainable slots against `params`.
    [[nodiscard]] double angle(std::size_t k, std::span<const double> params) const {
        return is_trainable(k) ? params[static_cast<std::size_t>(slots[k])] : angles[k];
    }
    [[nodiscard]] bool operator==(const Gate &) const = default;
};

/// Gate with fixed angles only.
[[nodiscard]] Gate make_gate(GateKind kind, std::initializer_list<std::uint32_t> wires,
                             std::initializer_list<double> angles = {});
/// Gate whose angles are all bound to the given slots.
[[nodiscard]] Gate make_param_gate(GateKind kind, std::initializer_list<std::uint32_t> wires,
                                   std::initializer_list<std::int32_t> slots);

/// Unitary of `kind` at `params`; throws ArityError on a wrong angle count.
[[nodiscard]] GateMatrix gate_unitary(GateKind kind, std::span<const double> params);
/// Unitary of a gate with its angles bound against `params`.
[[nodiscard]] GateMatrix bound_unitary(const Gate &gate, std::span<const double> params);

/// dU/d(angle k) evaluated at `params`.
[[nodiscard]] GateMatrix gate_unitary_derivative(GateKind kind, std::span<const double> params,
                                                 std::size_t k);

/// One symmetric term of a shift rule: coeff * (f(x + shift) - f(x - shift)).
struct ShiftTerm {
    double shift;
    double coeff;
};

/**
 * Exact parameter-shift recipe for angle k of `kind` applied to expectation
 * values. Single-frequency angles get the two-term pi/2 rule; the controlled
 * rotation angle of CU3 needs the four-term rule.
 */
[[nodiscard]] std::vector<ShiftTerm> shift_rule(GateKind kind, std::size_t k);

} // namespace qnas::qstate
