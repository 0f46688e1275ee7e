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
#include "qnas/grad/checkpoint.hpp"

#include <fstream>

#include <fmt/format.h>

#include "qnas/error.hpp"

namespace qnas::grad {

using nlohmann::json;

json checkpoint_to_json(const Checkpoint &ckpt) {
    json j;
    j["format"] = "qnas-checkpoint-1";
    j["circuit"] = qstate::format_circuit(ckpt.circuit);
    j["params"] = ckpt.params;
    j["step"] = ckpt.step;
    j["optimizer"] = {{"m", ckpt.optimizer.m}, {"v", ckpt.optimizer.v}, {"step", ckpt.optimizer.step}};
    j["meta"] = ckpt.meta;
    return j;
}

Checkpoint checkpoint_from_json(const json &j) {
    Checkpoint c;
    try {
        c.circuit = qstate::parse_circuit_string(j.at("circuit").get<std::string>());
        c.params = j.at("params").get<std::vector<double>>();
        c.step = j.at("step").get<std::size_t>();
        const auto &o = j.at("optimizer");
        c.optimizer.m = o.at("m").get<std::vector<double>>();
        c.optimizer.v = o.at("v").get<std::vector<double>>();
        c.optimizer.step = o.at("step").get<std::size_t>();
        c.meta = j.value("meta", json::object());
    } catch (const json::exception &e) {
        throw FormatError(fmt::format("malformed checkpoint: {}", e.what()));
    }
    if (c.params.size() != c.circuit.n_params) {
        throw FormatError(fmt::format("checkpoint has {} params for {} circuit slots", c.params.size(),
                                      c.circuit.n_params));
    }
    if (c.optimizer.m.size() != c.params.size() || c.optimizer.v.size() != c.params.size()) {
        throw FormatError("checkpoint optimizer moments do not match the parameter count");
    }
    return c;
}

void save_checkpoint(const std::string &path, const Checkpoint &ckpt) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError(fmt::format("cannot write checkpoint {}", path));
    }
    out << checkpoint_to_json(ckpt).dump(1) << '\n';
}

Checkpoint load_checkpoint(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(fmt::format("cannot open checkpoint {}", path));
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error &e) {
        throw FormatError(fmt::format("{}: {}", path, e.what()));
    }
    return checkpoint_from_json(j);
}

} // namespace qnas::grad
