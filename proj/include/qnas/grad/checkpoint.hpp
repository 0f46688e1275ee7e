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

#include <string>
#include <vector>

#include <json.hpp>

#include "qnas/grad/train.hpp"
#include "qnas/qstate/circuit.hpp"

namespace qnas::grad {

/**
 * Training checkpoint. Stored as JSON with the circuit in its text form,
 * parameters and Adam moments as decimal arrays, and a free-form `meta`
 * object used by later stages (design space, pruning mask, gene).
 * Doubles are written in shortest round-trip form, so reloading is exact.
 */
struct Checkpoint {
    qstate::Circuit circuit;
    std::vector<double> params;
    OptimizerState optimizer;
    std::size_t step{0};
    nlohmann::json meta = nlohmann::json::object();

    [[nodiscard]] bool operator==(const Checkpoint &) const = default;
};

[[nodiscard]] nlohmann::json checkpoint_to_json(const Checkpoint &ckpt);
[[nodiscard]] Checkpoint checkpoint_from_json(const nlohmann::json &j);

void save_checkpoint(const std::string &path, const Checkpoint &ckpt);
[[nodiscard]] Checkpoint load_checkpoint(const std::string &path);

} // namespace qnas::grad
