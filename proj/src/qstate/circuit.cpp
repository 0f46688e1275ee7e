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
#include "qnas/qstate/circuit.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "qnas/error.hpp"

namespace qnas::qstate {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string &s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep)) {
        out.push_back(trim(item));
    }
    return out;
}

template <typename T> T parse_number(const std::string &tok, std::size_t line_no) {
    T value{};
    const auto *first = tok.data();
    const auto *last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw FormatError(fmt::format("circuit line {}: bad number '{}'", line_no, tok));
    }
    return value;
}

} // namespace

void Circuit::validate() const {
    std::vector<bool> used(n_params, false);
    for (std::size_t gi = 0; gi < gates.size(); ++gi) {
        const Gate &g = gates[gi];
        const auto wires = g.wire_span();
        for (auto w : wires) {
            if (w >= n_qubits) {
                throw IndexError(fmt::format("gate {} ({}) wire {} >= n_qubits {}", gi,
                                             kind_name(g.kind), w, n_qubits));
            }
        }
        if (wires.size() == 2 && wires[0] == wires[1]) {
            throw ValidationError(fmt::format("gate {} ({}) repeats wire {}", gi,
                                              kind_name(g.kind), wires[0]));
        }
        for (std::size_t k = 0; k < g.param_count(); ++k) {
            if (!g.is_trainable(k)) {
                continue;
            }
            const auto slot = static_cast<std::size_t>(g.slots[k]);
            if (g.slots[k] < 0 || slot >= n_params) {
                throw IndexError(fmt::format("gate {} slot {} >= n_params {}", gi, g.slots[k],
                                             n_params));
            }
            used[slot] = true;
        }
    }
    const auto it = std::find(used.begin(), used.end(), false);
    if (it != used.end()) {
        throw ValidationError(
            fmt::format("parameter slot {} is not referenced by any gate", it - used.begin()));
    }
}

void Circuit::append(const Circuit &other) {
    n_qubits = std::max(n_qubits, other.n_qubits);
    const auto offset = static_cast<std::int32_t>(n_params);
    for (Gate g : other.gates) {
        for (std::size_t k = 0; k < g.param_count(); ++k) {
            if (g.is_trainable(k)) {
                g.slots[k] += offset;
            }
        }
        gates.push_back(g);
    }
    n_params += other.n_params;
}

Circuit parse_circuit(std::istream &in) {
    Circuit c;
    std::size_t declared_qubits = 0;
    std::size_t max_wire_plus_one = 0;
    std::int64_t max_slot = -1;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = trim(raw.substr(0, raw.find('#')));
        if (line.empty()) {
            continue;
        }
        std::istringstream ls(line);
        std::string kind_tok;
        std::string wire_tok;
        std::string angle_tok;
        ls >> kind_tok >> wire_tok >> angle_tok;
        std::string extra;
        if (ls >> extra) {
            throw FormatError(fmt::format("circuit line {}: trailing token '{}'", line_no, extra));
        }
        if (kind_tok == "QUBITS") {
            declared_qubits = parse_number<std::size_t>(wire_tok, line_no);
            continue;
        }
        const auto kind = parse_kind(kind_tok);
        if (!kind) {
            throw FormatError(fmt::format("circuit line {}: unknown gate '{}'", line_no, kind_tok));
        }
        Gate g;
        g.kind = *kind;
        const auto wires = split(wire_tok, ',');
        if (wires.size() != arity(*kind)) {
            throw ArityError(fmt::format("circuit line {}: {} takes {} wire(s)", line_no,
                                         kind_tok, arity(*kind)));
        }
        for (std::size_t i = 0; i < wires.size(); ++i) {
            g.wires[i] = parse_number<std::uint32_t>(wires[i], line_no);
            max_wire_plus_one = std::max<std::size_t>(max_wire_plus_one, g.wires[i] + 1);
        }
        const auto angles = angle_tok.empty() ? std::vector<std::string>{} : split(angle_tok, ',');
        if (angles.size() != param_count(*kind)) {
            throw ArityError(fmt::format("circuit line {}: {} takes {} angle(s)", line_no,
                                         kind_tok, param_count(*kind)));
        }
        for (std::size_t k = 0; k < angles.size(); ++k) {
            if (!angles[k].empty() && angles[k][0] == '@') {
                g.slots[k] = parse_number<std::int32_t>(angles[k].substr(1), line_no);
                max_slot = std::max<std::int64_t>(max_slot, g.slots[k]);
            } else {
                g.angles[k] = parse_number<double>(angles[k], line_no);
            }
        }
        c.gates.push_back(g);
    }
    c.n_qubits = declared_qubits != 0 ? declared_qubits : max_wire_plus_one;
    c.n_params = static_cast<std::size_t>(max_slot + 1);
    c.validate();
    return c;
}

Circuit parse_circuit_string(const std::string &text) {
    std::istringstream in(text);
    return parse_circuit(in);
}

Circuit load_circuit(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open circuit file " + path);
    }
    return parse_circuit(in);
}

std::string format_circuit(const Circuit &circuit) {
    std::string out = fmt::format("QUBITS {}\n", circuit.n_qubits);
    for (const Gate &g : circuit.gates) {
        out += kind_name(g.kind);
        out += ' ';
        for (std::size_t i = 0; i < g.arity(); ++i) {
            out += (i ? "," : "") + std::to_string(g.wires[i]);
        }
        for (std::size_t k = 0; k < g.param_count(); ++k) {
            out += k ? ',' : ' ';
            out += g.is_trainable(k) ? fmt::format("@{}", g.slots[k])
                                     : fmt::format("{:.17g}", g.angles[k]);
        }
        out += '\n';
    }
    return out;
}

} // namespace qnas::qstate
