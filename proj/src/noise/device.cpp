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
#include "qnas/noise/device.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "qnas/error.hpp"

namespace qnas::noise {

using qstate::GateKind;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::pair<std::uint32_t, std::uint32_t> ordered(std::uint32_t a, std::uint32_t b) {
    return a < b ? std::pair{a, b} : std::pair{b, a};
}

void grow(DeviceModel &d, std::size_t n) {
    if (n <= d.n_physical) {
        return;
    }
    d.n_physical = n;
    d.err_1q.resize(n);
    d.t1.resize(n, kInf);
    d.t2.resize(n, kInf);
    d.readout.resize(n, {1.0, 0.0, 0.0, 1.0});
}

struct LineReader {
    const std::string &source;
    std::size_t line_no;

    [[noreturn]] void fail(const std::string &msg) const {
        throw FormatError(fmt::format("{}:{}: {}", source, line_no, msg));
    }

    double number(const std::string &tok) const {
        double v = 0.0;
        const auto *end = tok.data() + tok.size();
        const auto [ptr, ec] = std::from_chars(tok.data(), end, v);
        if (ec != std::errc() || ptr != end) {
            if (tok == "inf") {
                return kInf;
            }
            fail(fmt::format("expected a number, got '{}'", tok));
        }
        return v;
    }

    std::uint32_t qubit(const std::string &tok) const {
        std::uint32_t v = 0;
        const auto *end = tok.data() + tok.size();
        const auto [ptr, ec] = std::from_chars(tok.data(), end, v);
        if (ec != std::errc() || ptr != end) {
            fail(fmt::format("expected a qubit index, got '{}'", tok));
        }
        return v;
    }
};

/// Whitespace/comma separated fields; an edge written "a-b" becomes two fields.
std::vector<std::string> tokens_of(const std::string &line) {
    std::string body = line.substr(0, line.find('#'));
    std::replace(body.begin(), body.end(), ',', ' ');
    std::istringstream ss(body);
    std::vector<std::string> out;
    std::string t;
    while (ss >> t) {
        const auto dash = t.find('-');
        const bool edge = dash != std::string::npos && dash > 0 &&
                          std::all_of(t.begin(), t.end(), [](char c) { return std::isdigit(c) || c == '-'; });
        if (edge) {
            out.push_back(t.substr(0, dash));
            out.push_back(t.substr(dash + 1));
        } else {
            out.push_back(t);
        }
    }
    return out;
}

std::string kind_key(const std::string &tok) {
    if (tok == "*") {
        return tok;
    }
    const auto kind = qstate::parse_kind(tok);
    if (!kind) {
        throw UnsupportedGateError(fmt::format("unknown gate kind '{}'", tok));
    }
    return std::string(qstate::kind_name(*kind));
}

} // namespace

bool DeviceModel::coupled(std::uint32_t a, std::uint32_t b) const {
    return std::binary_search(coupling.begin(), coupling.end(), ordered(a, b));
}

double DeviceModel::error_1q(std::uint32_t q, GateKind kind) const {
    if (q >= n_physical) {
        throw IndexError(fmt::format("qubit {} outside device of {} qubits", q, n_physical));
    }
    const auto &row = err_1q[q];
    const std::string name(qstate::kind_name(kind));
    if (auto it = row.find(name); it != row.end()) {
        return it->second;
    }
    if (kind == GateKind::RZ) {
        return 0.0;
    }
    if (auto it = row.find("*"); it != row.end()) {
        return it->second;
    }
    return 0.0;
}

double DeviceModel::error_2q(std::uint32_t a, std::uint32_t b) const {
    if (!coupled(a, b)) {
        throw RoutingError(fmt::format("qubits {} and {} are not coupled on {}", a, b, name));
    }
    const auto it = err_2q.find(ordered(a, b));
    return it == err_2q.end() ? 0.0 : it->second;
}

double DeviceModel::error_of(const qstate::Gate &gate) const {
    return gate.arity() == 1 ? error_1q(gate.wires[0], gate.kind)
                             : error_2q(gate.wires[0], gate.wires[1]);
}

double DeviceModel::duration(GateKind kind) const {
    const std::string name(qstate::kind_name(kind));
    if (auto it = gate_time.find(name); it != gate_time.end()) {
        return it->second;
    }
    if (kind == GateKind::RZ) {
        return 0.0;
    }
    const char *cls = qstate::arity(kind) == 1 ? "1q" : "2q";
    if (auto it = gate_time.find(cls); it != gate_time.end()) {
        return it->second;
    }
    return qstate::arity(kind) == 1 ? kDefaultDuration1q : kDefaultDuration2q;
}

Eigen::Matrix2d DeviceModel::confusion(std::uint32_t q) const {
    if (q >= n_physical) {
        throw IndexError(fmt::format("qubit {} outside device of {} qubits", q, n_physical));
    }
    const auto &r = readout[q];
    Eigen::Matrix2d m;
    m << r[0], r[1], r[2], r[3];
    return m;
}

std::vector<std::vector<std::uint32_t>> DeviceModel::neighbors() const {
    std::vector<std::vector<std::uint32_t>> adj(n_physical);
    for (const auto &[a, b] : coupling) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    for (auto &row : adj) {
        std::sort(row.begin(), row.end());
    }
    return adj;
}

void DeviceModel::validate() const {
    auto bad = [this](const std::string &field, const std::string &msg) {
        throw ValidationError(fmt::format("{}: {}: {}", name, field, msg));
    };
    auto check_prob = [&](const std::string &field, double p) {
        if (!(p >= 0.0 && p <= 1.0)) {
            bad(field, fmt::format("probability {} outside [0, 1]", p));
        }
    };
    if (n_physical == 0) {
        bad("topology", "device has no qubits");
    }
    if (err_1q.size() != n_physical || t1.size() != n_physical || t2.size() != n_physical ||
        readout.size() != n_physical) {
        bad("qubits", "per-qubit tables do not match the qubit count");
    }
    for (std::size_t i = 0; i < coupling.size(); ++i) {
        const auto [a, b] = coupling[i];
        if (a >= b || b >= n_physical) {
            bad("topology", fmt::format("edge {}-{} invalid for {} qubits", a, b, n_physical));
        }
        if (i > 0 && coupling[i - 1] >= coupling[i]) {
            bad("topology", "edges must be unique and sorted");
        }
    }
    for (std::size_t q = 0; q < n_physical; ++q) {
        for (const auto &[kind, p] : err_1q[q]) {
            check_prob(fmt::format("errors_1q[{}][{}]", q, kind), p);
        }
        if (!(t1[q] > 0.0)) {
            bad(fmt::format("relaxation[{}].t1", q), "must be positive");
        }
        if (!(t2[q] > 0.0)) {
            bad(fmt::format("relaxation[{}].t2", q), "must be positive");
        }
        if (std::isfinite(t2[q]) && t2[q] > 2.0 * t1[q] * (1.0 + 1e-12)) {
            bad(fmt::format("relaxation[{}].t2", q),
                fmt::format("t2 = {} exceeds 2 * t1 = {}", t2[q], 2.0 * t1[q]));
        }
        if (!std::isfinite(t2[q]) && std::isfinite(t1[q])) {
            bad(fmt::format("relaxation[{}].t2", q), "infinite t2 requires infinite t1");
        }
        const auto &r = readout[q];
        for (std::size_t k = 0; k < 4; ++k) {
            check_prob(fmt::format("readout[{}]", q), r[k]);
        }
        if (std::abs(r[0] + r[1] - 1.0) > 1e-9 || std::abs(r[2] + r[3] - 1.0) > 1e-9) {
            bad(fmt::format("readout[{}]", q), "confusion-matrix rows must sum to 1");
        }
    }
    for (const auto &[pair, p] : err_2q) {
        const std::string field = fmt::format("errors_2q[{}-{}]", pair.first, pair.second);
        check_prob(field, p);
        if (!coupled(pair.first, pair.second)) {
            bad(field, "pair is not in the topology");
        }
    }
    for (const auto &[kind, t] : gate_time) {
        if (!(t >= 0.0) || !std::isfinite(t)) {
            bad(fmt::format("durations[{}]", kind), "must be finite and non-negative");
        }
    }
}

DeviceModel noiseless_device(std::size_t n, std::vector<std::pair<std::uint32_t, std::uint32_t>> edges) {
    DeviceModel d;
    d.name = "noiseless";
    grow(d, n);
    for (auto &e : edges) {
        e = ordered(e.first, e.second);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    d.coupling = std::move(edges);
    d.validate();
    return d;
}

DeviceModel ideal_device(std::size_t n) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    for (std::uint32_t a = 0; a < n; ++a) {
        for (std::uint32_t b = a + 1; b < n; ++b) {
            edges.emplace_back(a, b);
        }
    }
    auto d = noiseless_device(n, std::move(edges));
    d.name = "ideal";
    return d;
}

DeviceModel parse_device_model(std::istream &in, const std::string &name) {
    DeviceModel d;
    d.name = name;
    std::string section;
    std::string line;
    std::size_t line_no = 0;
    std::set<std::pair<std::uint32_t, std::uint32_t>> edges;
    std::size_t declared = 0;
    std::vector<std::pair<std::string, double>> wildcard_1q;
    std::vector<std::pair<std::uint32_t, std::pair<double, double>>> relax;
    while (std::getline(in, line)) {
        ++line_no;
        const LineReader r{name, line_no};
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }
        if (line[first] == '[') {
            const auto close = line.find(']', first);
            if (close == std::string::npos) {
                r.fail("unterminated section header");
            }
            section = line.substr(first + 1, close - first - 1);
            static const std::set<std::string> known{"topology", "errors_1q", "errors_2q",
                                                     "relaxation", "readout", "durations"};
            if (!known.contains(section)) {
                r.fail(fmt::format("unknown section [{}]", section));
            }
            continue;
        }
        const auto tok = tokens_of(line);
        if (tok.empty()) {
            continue;
        }
        auto need = [&](std::size_t k) {
            if (tok.size() != k) {
                r.fail(fmt::format("[{}] expects {} fields, got {}", section, k, tok.size()));
            }
        };
        if (section == "topology") {
            if (tok[0] == "qubits") {
                need(2);
                declared = r.qubit(tok[1]);
                grow(d, declared);
                continue;
            }
            if (tok[0] == "name") {
                need(2);
                d.name = tok[1];
                continue;
            }
            need(2);
            const auto a = r.qubit(tok[0]);
            const auto b = r.qubit(tok[1]);
            if (a == b) {
                r.fail(fmt::format("self-loop on qubit {}", a));
            }
            edges.insert(ordered(a, b));
            grow(d, std::max(a, b) + 1);
        } else if (section == "errors_1q") {
            need(3);
            const double p = r.number(tok[2]);
            std::string kind;
            try {
                kind = kind_key(tok[1]);
            } catch (const Error &e) {
                r.fail(e.what());
            }
            if (tok[0] == "*") {
                wildcard_1q.emplace_back(kind, p);
            } else {
                const auto q = r.qubit(tok[0]);
                grow(d, q + 1);
                d.err_1q[q][kind] = p;
            }
        } else if (section == "errors_2q") {
            need(3);
            const auto a = r.qubit(tok[0]);
            const auto b = r.qubit(tok[1]);
            grow(d, std::max(a, b) + 1);
            d.err_2q[ordered(a, b)] = r.number(tok[2]);
        } else if (section == "relaxation") {
            need(3);
            const auto q = r.qubit(tok[0]);
            grow(d, q + 1);
            relax.push_back({q, {r.number(tok[1]), r.number(tok[2])}});
        } else if (section == "readout") {
            if (tok.size() != 3 && tok.size() != 5) {
                r.fail("[readout] expects 'q P(1|0) P(0|1)' or a full 2x2 confusion matrix");
            }
            const auto q = r.qubit(tok[0]);
            grow(d, q + 1);
            if (tok.size() == 3) {
                const double p10 = r.number(tok[1]);
                const double p01 = r.number(tok[2]);
                d.readout[q] = {1.0 - p10, p10, p01, 1.0 - p01};
            } else {
                d.readout[q] = {r.number(tok[1]), r.number(tok[2]), r.number(tok[3]), r.number(tok[4])};
            }
        } else if (section == "durations") {
            need(2);
            std::string key = tok[0];
            if (key != "1q" && key != "2q" && key != "measure") {
                try {
                    key = kind_key(key);
                } catch (const Error &e) {
                    r.fail(e.what());
                }
            }
            d.gate_time[key] = r.number(tok[1]);
        } else {
            r.fail("data outside of any section");
        }
    }
    if (declared != 0 && d.n_physical > declared) {
        throw ValidationError(fmt::format("{}: topology: qubit index {} exceeds declared count {}", d.name,
                                          d.n_physical - 1, declared));
    }
    for (const auto &[kind, p] : wildcard_1q) {
        for (auto &row : d.err_1q) {
            if (!row.contains(kind)) {
                row[kind] = p;
            }
        }
    }
    for (const auto &[q, t] : relax) {
        d.t1[q] = t.first;
        d.t2[q] = t.second;
    }
    d.coupling.assign(edges.begin(), edges.end());
    d.validate();
    return d;
}

DeviceModel load_device_model(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(fmt::format("cannot open device file {}", path));
    }
    auto stem = path.substr(path.find_last_of('/') + 1);
    stem = stem.substr(0, stem.find('.'));
    return parse_device_model(in, stem);
}

std::string format_device_model(const DeviceModel &d) {
    std::string out = fmt::format("[topology]\nname {}\nqubits {}\n", d.name, d.n_physical);
    for (const auto &[a, b] : d.coupling) {
        out += fmt::format("{} {}\n", a, b);
    }
    out += "[errors_1q]\n";
    for (std::size_t q = 0; q < d.n_physical; ++q) {
        for (const auto &[k, p] : d.err_1q[q]) {
            out += fmt::format("{} {} {:.17g}\n", q, k, p);
        }
    }
    out += "[errors_2q]\n";
    for (const auto &[pair, p] : d.err_2q) {
        out += fmt::format("{} {} {:.17g}\n", pair.first, pair.second, p);
    }
    out += "[relaxation]\n";
    for (std::size_t q = 0; q < d.n_physical; ++q) {
        out += fmt::format("{} {:.17g} {:.17g}\n", q, d.t1[q], d.t2[q]);
    }
    out += "[readout]\n";
    for (std::size_t q = 0; q < d.n_physical; ++q) {
        const auto &r = d.readout[q];
        out += fmt::format("{} {:.17g} {:.17g} {:.17g} {:.17g}\n", q, r[0], r[1], r[2], r[3]);
    }
    out += "[durations]\n";
    for (const auto &[k, t] : d.gate_time) {
        out += fmt::format("{} {:.17g}\n", k, t);
    }
    return out;
}

} // namespace qnas::noise
