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
#include "qnas/qstate/gate.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qnas/error.hpp"

namespace qnas::qstate {

namespace {

constexpr cplx kI{0.0, 1.0};

GateMatrix mat2(cplx a, cplx b, cplx c, cplx d) {
    GateMatrix m(2, 2);
    m << a, b, c, d;
    return m;
}

GateMatrix zeros(std::size_t dim) { return GateMatrix::Zero(dim, dim); }

GateMatrix pauli_x() { return mat2(0, 1, 1, 0); }
GateMatrix pauli_y() { return mat2(0, -kI, kI, 0); }
GateMatrix pauli_z() { return mat2(1, 0, 0, -1); }

GateMatrix kron(const GateMatrix &a, const GateMatrix &b) {
    GateMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

// exp(-i theta/2 G) for a generator with G^2 = I.
GateMatrix pauli_rotation(const GateMatrix &gen, double theta) {
    const auto dim = gen.rows();
    GateMatrix id = GateMatrix::Identity(dim, dim);
    return std::cos(theta / 2) * id - kI * std::sin(theta / 2) * gen;
}

// Generator of the single-angle Pauli-rotation kinds.
std::optional<GateMatrix> rotation_generator(GateKind kind) {
    switch (kind) {
    case GateKind::RX:
        return pauli_x();
    case GateKind::RY:
        return pauli_y();
    case GateKind::RZ:
        return pauli_z();
    case GateKind::RXX:
        return kron(pauli_x(), pauli_x());
    case GateKind::RZX:
        return kron(pauli_z(), pauli_x());
    case GateKind::RZZ:
        return kron(pauli_z(), pauli_z());
    default:
        return std::nullopt;
    }
}

GateMatrix u3(double theta, double phi, double lambda) {
    const double c = std::cos(theta / 2);
    const double s = std::sin(theta / 2);
    return mat2(c, -std::exp(kI * lambda) * s, std::exp(kI * phi) * s,
                std::exp(kI * (phi + lambda)) * c);
}

GateMatrix u3_derivative(double theta, double phi, double lambda, std::size_t k) {
    const double c = std::cos(theta / 2);
    const double s = std::sin(theta / 2);
    const cplx el = std::exp(kI * lambda);
    const cplx ep = std::exp(kI * phi);
    const cplx epl = std::exp(kI * (phi + lambda));
    switch (k) {
    case 0:
        return mat2(-s / 2, -el * c / 2.0, ep * c / 2.0, -epl * s / 2.0);
    case 1:
        return mat2(0, 0, kI * ep * s, kI * epl * c);
    default:
        return mat2(0, -kI * el * s, 0, kI * epl * c);
    }
}

GateMatrix controlled(const GateMatrix &u) {
    GateMatrix m = GateMatrix::Identity(4, 4);
    m.block(2, 2, 2, 2) = u;
    return m;
}

void check_params(GateKind kind, std::span<const double> params) {
    if (params.size() != param_count(kind)) {
        throw ArityError(std::string(kind_name(kind)) + " expects " +
                         std::to_string(param_count(kind)) + " angle(s), got " +
                         std::to_string(params.size()));
    }
}

} // namespace

std::size_t arity(GateKind kind) noexcept {
    switch (kind) {
    case GateKind::RXX:
    case GateKind::RZX:
    case GateKind::RZZ:
    case GateKind::CU3:
    case GateKind::CZ:
    case GateKind::CNOT:
    case GateKind::SWAP:
    case GateKind::SQSWAP:
        return 2;
    default:
        return 1;
    }
}

std::size_t param_count(GateKind kind) noexcept {
    switch (kind) {
    case GateKind::U3:
    case GateKind::CU3:
        return 3;
    case GateKind::U1:
    case GateKind::RX:
    case GateKind::RY:
    case GateKind::RZ:
    case GateKind::RXX:
    case GateKind::RZX:
    case GateKind::RZZ:
        return 1;
    default:
        return 0;
    }
}

std::string_view kind_name(GateKind kind) noexcept {
    switch (kind) {
    case GateKind::RX: return "RX";
    case GateKind::RY: return "RY";
    case GateKind::RZ: return "RZ";
    case GateKind::RXX: return "RXX";
    case GateKind::RZX: return "RZX";
    case GateKind::RZZ: return "RZZ";
    case GateKind::U1: return "U1";
    case GateKind::U3: return "U3";
    case GateKind::CU3: return "CU3";
    case GateKind::CZ: return "CZ";
    case GateKind::CNOT: return "CNOT";
    case GateKind::H: return "H";
    case GateKind::SH: return "SH";
    case GateKind::SX: return "SX";
    case GateKind::X: return "X";
    case GateKind::S: return "S";
    case GateKind::T: return "T";
    case GateKind::SWAP: return "SWAP";
    case GateKind::SQSWAP: return "SQSWAP";
    }
    return "?";
}

std::optional<GateKind> parse_kind(std::string_view name) {
    for (GateKind kind : kAllGateKinds) {
        if (kind_name(kind) == name) {
            return kind;
        }
    }
    if (name == "XX") return GateKind::RXX;
    if (name == "ZX") return GateKind::RZX;
    if (name == "ZZ") return GateKind::RZZ;
    if (name == "CX") return GateKind::CNOT;
    if (name == "SQH") return GateKind::SH;
    return std::nullopt;
}

Gate make_gate(GateKind kind, std::initializer_list<std::uint32_t> wires,
               std::initializer_list<double> angles) {
    if (wires.size() != arity(kind) || angles.size() != param_count(kind)) {
        throw ArityError("bad wire/angle count for " + std::string(kind_name(kind)));
    }
    Gate g;
    g.kind = kind;
    std::copy(wires.begin(), wires.end(), g.wires.begin());
    std::copy(angles.begin(), angles.end(), g.angles.begin());
    return g;
}

Gate make_param_gate(GateKind kind, std::initializer_list<std::uint32_t> wires,
                     std::initializer_list<std::int32_t> slots) {
    if (wires.size() != arity(kind) || slots.size() != param_count(kind)) {
        throw ArityError("bad wire/slot count for " + std::string(kind_name(kind)));
    }
    Gate g;
    g.kind = kind;
    std::copy(wires.begin(), wires.end(), g.wires.begin());
    std::copy(slots.begin(), slots.end(), g.slots.begin());
    return g;
}

GateMatrix gate_unitary(GateKind kind, std::span<const double> params) {
    check_params(kind, params);
    if (auto gen = rotation_generator(kind)) {
        return pauli_rotation(*gen, params[0]);
    }
    const double r2 = 1.0 / std::numbers::sqrt2;
    switch (kind) {
    case GateKind::U1:
        return mat2(1, 0, 0, std::exp(kI * params[0]));
    case GateKind::U3:
        return u3(params[0], params[1], params[2]);
    case GateKind::CU3:
        return controlled(u3(params[0], params[1], params[2]));
    case GateKind::CZ: {
        GateMatrix m = GateMatrix::Identity(4, 4);
        m(3, 3) = -1;
        return m;
    }
    case GateKind::CNOT:
        return controlled(pauli_x());
    case GateKind::H:
        return mat2(r2, r2, r2, -r2);
    case GateKind::SH: {
        // principal square root: P+ + i P- with P± = (I ± H)/2
        const GateMatrix h = mat2(r2, r2, r2, -r2);
        const GateMatrix id = GateMatrix::Identity(2, 2);
        return ((1.0 + kI) * id + (1.0 - kI) * h) / 2.0;
    }
    case GateKind::SX:
        return mat2((1.0 + kI) / 2.0, (1.0 - kI) / 2.0, (1.0 - kI) / 2.0, (1.0 + kI) / 2.0);
    case GateKind::X:
        return pauli_x();
    case GateKind::S:
        return mat2(1, 0, 0, kI);
    case GateKind::T:
        return mat2(1, 0, 0, std::exp(kI * (std::numbers::pi / 4)));
    case GateKind::SWAP: {
        GateMatrix m = zeros(4);
        m(0, 0) = m(1, 2) = m(2, 1) = m(3, 3) = 1;
        return m;
    }
    case GateKind::SQSWAP: {
        GateMatrix m = zeros(4);
        m(0, 0) = m(3, 3) = 1;
        m(1, 1) = m(2, 2) = (1.0 + kI) / 2.0;
        m(1, 2) = m(2, 1) = (1.0 - kI) / 2.0;
        return m;
    }
    default:
        break;
    }
    throw UnsupportedGateError("no unitary for " + std::string(kind_name(kind)));
}

GateMatrix bound_unitary(const Gate &gate, std::span<const double> params) {
    std::array<double, 3> a{};
    const std::size_t np = gate.param_count();
    for (std::size_t k = 0; k < np; ++k) {
        a[k] = gate.angle(k, params);
    }
    return gate_unitary(gate.kind, std::span<const double>(a.data(), np));
}

GateMatrix gate_unitary_derivative(GateKind kind, std::span<const double> params,
                                   std::size_t k) {
    check_params(kind, params);
    if (k >= params.size()) {
        throw IndexError("angle index out of range for " + std::string(kind_name(kind)));
    }
    if (auto gen = rotation_generator(kind)) {
        return (-kI / 2.0) * (*gen) * pauli_rotation(*gen, params[0]);
    }
    switch (kind) {
    case GateKind::U1:
        return mat2(0, 0, 0, kI * std::exp(kI * params[0]));
    case GateKind::U3:
        return u3_derivative(params[0], params[1], params[2], k);
    case GateKind::CU3: {
        GateMatrix m = zeros(4);
        m.block(2, 2, 2, 2) = u3_derivative(params[0], params[1], params[2], k);
        return m;
    }
    default:
        break;
    }
    throw UnsupportedGateError("no derivative for " + std::string(kind_name(kind)));
}

std::vector<ShiftTerm> shift_rule(GateKind kind, std::size_t k) {
    if (k >= param_count(kind)) {
        throw UnsupportedGateError(std::string(kind_name(kind)) + " has no trainable angle " +
                                   std::to_string(k));
    }
    constexpr double half_pi = std::numbers::pi / 2;
    if (kind == GateKind::CU3 && k == 0) {
        const double r2 = std::numbers::sqrt2;
        return {{half_pi, (r2 + 1.0) / (4.0 * r2)}, {3.0 * half_pi, (1.0 - r2) / (4.0 * r2)}};
    }
    return {{half_pi, 0.5}};
}

} // namespace qnas::qstate
