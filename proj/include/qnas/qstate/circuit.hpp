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
#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <vector>

#include "qnas/qstate/gate.hpp"

namespace qnas::qstate {

/**
 * Ordered gate list over `n_qubits` wires with `n_params` trainable slots.
 *
 * The type does not re-check itself on every push; call validate() (the
 * parser and the design-space builders do) before handing a circuit to
 * code that relies on the invariants.
 */
struct Circuit {
    std::size_t n_qubits{0};
    std::vector<Gate> gates;
    std::size_t n_params{0};

    /// Throws IndexError / ValidationError when a wire or slot is out of
    /// range, wires of a gate coincide, or a slot is never referenced.
    void validate() const;

    /// Appends `other` with its slots shifted by this circuit's n_params.
    void append(const Circuit &other);

    [[nodiscard]] bool operator==(const Circuit &) const = default;
};

/**
 * Parses the line format `KIND wire[,wire] [angle|@slot][,...]`.
 *
 * `#` starts a comment. An optional `QUBITS n` line fixes the width;
 * otherwise it is the largest wire + 1. n_params is the largest slot + 1.
 */
[[nodiscard]] Circuit parse_circuit(std::istream &in);
[[nodiscard]] Circuit parse_circuit_string(const std::string &text);
[[nodiscard]] Circuit load_circuit(const std::string &path);

/// Inverse of parse_circuit; fixed angles are written with 17 significant digits.
[[nodiscard]] std::string format_circuit(const Circuit &circuit);

} // namespace qnas::qstate
