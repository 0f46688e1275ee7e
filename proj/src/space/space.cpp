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
#include "qnas/space/space.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "qnas/error.hpp"

namespace qnas::space {

using qstate::GateKind;

namespace {

std::string canonical(std::string_view name) {
    std::string out;
    for (char c : name) {
        if (c == '+' || c == '-' || c == '_' || c == ' ') continue;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

struct NamedSpace {
    const char *name;
    std::vector<GateKind> layers;
    std::vector<GateKind> prefix;
    std::size_t default_blocks;
    bool front;
};

const std::vector<NamedSpace> &named_spaces() {
    static const std::vector<NamedSpace> spaces{
        {"U3+CU3", {GateKind::U3, GateKind::CU3}, {}, 8, true},
        {"ZZ+RY", {GateKind::RZZ, GateKind::RY}, {}, 8, true},
        {"RXYZ", {GateKind::RX, GateKind::RY, GateKind::RZ, GateKind::CZ}, {GateKind::SH}, 8, true},
        {"ZX+XX", {GateKind::RZX, GateKind::RXX}, {}, 8, true},
        {"RXYZ+U1+CU3",
         {GateKind::RX, GateKind::S, GateKind::CNOT, GateKind::RY, GateKind::T, GateKind::SWAP, GateKind::RZ,
          GateKind::H, GateKind::SQSWAP, GateKind::U1, GateKind::CU3},
         {},
         4,
         true},
        {"IBMQ-Basis", {GateKind::RZ, GateKind::X, GateKind::RZ, GateKind::SX, GateKind::RZ, GateKind::CNOT}, {}, 20,
         false},
    };
    return spaces;
}

std::size_t parse_count(std::string_view tok, std::string_view what) {
    while (!tok.empty() && std::isspace(static_cast<unsigned char>(tok.front()))) tok.remove_prefix(1);
    while (!tok.empty() && std::isspace(static_cast<unsigned char>(tok.back()))) tok.remove_suffix(1);
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty()) {
        throw FormatError(fmt::format("spec: bad {} '{}'", what, tok));
    }
    return v;
}

qstate::Gate gate_for(GateKind kind, std::array<std::uint32_t, 2> wires, std::size_t &next_slot) {
    qstate::Gate g;
    g.kind = kind;
    g.wires = wires;
    for (std::size_t k = 0; k < g.param_count(); ++k) {
        g.slots[k] = static_cast<std::int32_t>(next_slot++);
    }
    return g;
}

} // namespace

std::size_t DesignSpace::capacity(GateKind kind) const noexcept {
    if (qstate::arity(kind) == 1) return n_qubits;
    return n_qubits >= 2 ? n_qubits : 0;
}

std::array<std::uint32_t, 2> DesignSpace::wires_at(GateKind kind, std::size_t position) const {
    const auto p = static_cast<std::uint32_t>(position);
    if (qstate::arity(kind) == 1) return {p, 0};
    return {p, static_cast<std::uint32_t>((position + 1) % n_qubits)};
}

DesignSpace make_space(std::string_view name, std::size_t n_qubits, std::optional<std::size_t> n_blocks) {
    const auto key = canonical(name);
    for (const auto &s : named_spaces()) {
        if (canonical(s.name) == key) {
            if (n_qubits == 0) throw ConfigError("design space needs at least one qubit");
            DesignSpace d;
            d.name = s.name;
            d.n_qubits = n_qubits;
            d.n_blocks = n_blocks.value_or(s.default_blocks);
            if (d.n_blocks == 0) throw ConfigError("design space needs at least one block");
            d.layers = s.layers;
            d.prefix = s.prefix;
            d.front_sampling = s.front;
            return d;
        }
    }
    throw ConfigError(fmt::format("unknown design space '{}'; expected one of {}", name,
                                  fmt::join(space_names(), ", ")));
}

std::vector<std::string> space_names() {
    std::vector<std::string> out;
    for (const auto &s : named_spaces()) out.emplace_back(s.name);
    return out;
}

nlohmann::json space_to_json(const DesignSpace &space) {
    std::vector<std::string> layers, prefix;
    for (auto k : space.layers) layers.emplace_back(qstate::kind_name(k));
    for (auto k : space.prefix) prefix.emplace_back(qstate::kind_name(k));
    return {{"name", space.name},       {"n_qubits", space.n_qubits}, {"n_blocks", space.n_blocks},
            {"layers", layers},         {"prefix", prefix},           {"front_sampling", space.front_sampling}};
}

DesignSpace space_from_json(const nlohmann::json &j) {
    try {
        DesignSpace d;
        d.name = j.at("name").get<std::string>();
        d.n_qubits = j.at("n_qubits").get<std::size_t>();
        d.n_blocks = j.at("n_blocks").get<std::size_t>();
        d.front_sampling = j.value("front_sampling", true);
        auto kinds = [](const nlohmann::json &arr) {
            std::vector<GateKind> out;
            for (const auto &s : arr) {
                const auto k = qstate::parse_kind(s.get<std::string>());
                if (!k) throw ConfigError(fmt::format("unknown gate kind '{}' in space", s.get<std::string>()));
                out.push_back(*k);
            }
            return out;
        };
        if (j.contains("layers")) {
            d.layers = kinds(j.at("layers"));
            d.prefix = kinds(j.value("prefix", nlohmann::json::array()));
        } else {
            d = make_space(d.name, d.n_qubits, d.n_blocks);
        }
        if (d.layers.empty() || d.n_blocks == 0 || d.n_qubits == 0) {
            throw ConfigError("design space needs qubits, blocks and layers");
        }
        return d;
    } catch (const nlohmann::json::exception &e) {
        throw FormatError(fmt::format("malformed design space: {}", e.what()));
    }
}

boost::multiprecision::cpp_int space_cardinality(const DesignSpace &space) {
    if (!space.front_sampling) {
        throw SpecError(fmt::format("{} has no front sampling; its SubCircuits are not counted", space.name));
    }
    boost::multiprecision::cpp_int total = 1;
    for (std::size_t b = 0; b < space.n_blocks; ++b) {
        for (std::size_t l = 0; l < space.n_layers(); ++l) {
            total *= std::max<std::size_t>(1, space.layer_capacity(l));
        }
    }
    return total;
}

std::size_t SubCircuitSpec::effective_width(std::size_t block, std::size_t layer, std::size_t n_layers) const {
    return block < n_blocks ? widths.at(block * n_layers + layer) : 0;
}

void validate_spec(const DesignSpace &space, const SubCircuitSpec &spec) {
    const std::size_t expected = space.n_blocks * space.n_layers();
    if (spec.widths.size() != expected) {
        throw SpecError(fmt::format("spec has {} widths, {} needs {}", spec.widths.size(), space.name, expected));
    }
    if (spec.n_blocks > space.n_blocks) {
        throw SpecError(fmt::format("spec uses {} blocks, {} has {}", spec.n_blocks, space.name, space.n_blocks));
    }
    for (std::size_t i = 0; i < spec.widths.size(); ++i) {
        const auto cap = space.layer_capacity(i % space.n_layers());
        if (spec.widths[i] > cap) {
            throw SpecError(fmt::format("width {} at block {} layer {} exceeds capacity {}", spec.widths[i],
                                        i / space.n_layers(), i % space.n_layers(), cap));
        }
    }
}

SubCircuitSpec full_spec(const DesignSpace &space) {
    SubCircuitSpec s;
    s.n_blocks = space.n_blocks;
    for (std::size_t b = 0; b < space.n_blocks; ++b) {
        for (std::size_t l = 0; l < space.n_layers(); ++l) s.widths.push_back(space.layer_capacity(l));
    }
    return s;
}

std::string format_spec(const SubCircuitSpec &spec) {
    return fmt::format("blocks={}; widths={}", spec.n_blocks, fmt::join(spec.widths, ","));
}

SubCircuitSpec parse_spec(std::string_view text) {
    const auto semi = text.find(';');
    if (semi == std::string_view::npos) throw FormatError(fmt::format("spec '{}' lacks ';'", text));
    auto field = [&](std::string_view part, std::string_view key) {
        while (!part.empty() && std::isspace(static_cast<unsigned char>(part.front()))) part.remove_prefix(1);
        if (part.substr(0, key.size()) != key || part.substr(key.size(), 1) != "=") {
            throw FormatError(fmt::format("spec '{}': expected '{}='", text, key));
        }
        return part.substr(key.size() + 1);
    };
    SubCircuitSpec s;
    s.n_blocks = parse_count(field(text.substr(0, semi), "blocks"), "block count");
    auto rest = field(text.substr(semi + 1), "widths");
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        s.widths.push_back(parse_count(rest.substr(0, comma), "width"));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    return s;
}

std::size_t layer_difference(const DesignSpace &space, const SubCircuitSpec &a, const SubCircuitSpec &b) {
    const std::size_t nl = space.n_layers();
    std::size_t diff = 0;
    for (std::size_t blk = 0; blk < space.n_blocks; ++blk) {
        const bool in_a = blk < a.n_blocks, in_b = blk < b.n_blocks;
        for (std::size_t l = 0; l < nl; ++l) {
            if (in_a != in_b) {
                ++diff;
            } else if (in_a && a.effective_width(blk, l, nl) != b.effective_width(blk, l, nl)) {
                ++diff;
            }
        }
    }
    return diff;
}

std::size_t SuperCircuit::gate_at(std::size_t block, std::size_t layer, std::size_t position) const {
    const auto idx = gate_index.at((block * space.n_layers() + layer) * space.n_qubits + position);
    if (idx < 0) throw SpecError(fmt::format("no gate at block {} layer {} position {}", block, layer, position));
    return static_cast<std::size_t>(idx);
}

SuperCircuit build_supercircuit(const DesignSpace &space, std::mt19937_64 *rng) {
    if (space.layers.empty()) throw ConfigError(fmt::format("design space {} has no layers", space.name));
    SuperCircuit s;
    s.space = space;
    s.circuit.n_qubits = space.n_qubits;
    std::size_t slot = 0;
    for (auto kind : space.prefix) {
        for (std::size_t p = 0; p < space.capacity(kind); ++p) {
            s.circuit.gates.push_back(gate_for(kind, space.wires_at(kind, p), slot));
        }
    }
    s.n_prefix_gates = s.circuit.gates.size();
    s.gate_index.assign(space.n_blocks * space.n_layers() * space.n_qubits, -1);
    for (std::size_t b = 0; b < space.n_blocks; ++b) {
        for (std::size_t l = 0; l < space.n_layers(); ++l) {
            const auto kind = space.layers[l];
            for (std::size_t p = 0; p < space.capacity(kind); ++p) {
                s.gate_index[(b * space.n_layers() + l) * space.n_qubits + p] =
                    static_cast<std::int64_t>(s.circuit.gates.size());
                s.circuit.gates.push_back(gate_for(kind, space.wires_at(kind, p), slot));
            }
        }
    }
    s.circuit.n_params = slot;
    s.params = std::make_shared<std::vector<double>>(
        rng != nullptr ? grad::init_params(slot, *rng) : std::vector<double>(slot, 0.0));
    return s;
}

SubCircuitSpec sample_front(const SuperCircuit &super, std::mt19937_64 &rng, std::size_t lower_bound) {
    const auto &sp = super.space;
    lower_bound = std::clamp<std::size_t>(lower_bound, 1, sp.n_blocks);
    SubCircuitSpec s;
    s.n_blocks = std::uniform_int_distribution<std::size_t>(lower_bound, sp.n_blocks)(rng);
    s.widths.reserve(sp.n_blocks * sp.n_layers());
    for (std::size_t b = 0; b < sp.n_blocks; ++b) {
        for (std::size_t l = 0; l < sp.n_layers(); ++l) {
            const auto cap = sp.layer_capacity(l);
            s.widths.push_back(cap == 0 ? 0 : std::uniform_int_distribution<std::size_t>(1, cap)(rng));
        }
    }
    return s;
}

SubCircuitSpec sample_restricted(const SuperCircuit &super, const SubCircuitSpec &prev, std::mt19937_64 &rng,
                                 std::size_t lower_bound) {
    const auto &sp = super.space;
    validate_spec(sp, prev);
    if (super.max_layer_diff == 0) return prev;
    for (std::size_t attempt = 0; attempt < kRestrictedSamplingTries; ++attempt) {
        auto cand = sample_front(super, rng, lower_bound);
        if (layer_difference(sp, prev, cand) <= super.max_layer_diff) return cand;
    }
    // redraw a few active layers of prev
    SubCircuitSpec s = prev;
    std::vector<std::size_t> positions(prev.n_blocks * sp.n_layers());
    std::iota(positions.begin(), positions.end(), 0);
    std::shuffle(positions.begin(), positions.end(), rng);
    const auto k = std::uniform_int_distribution<std::size_t>(
        1, std::min(super.max_layer_diff, positions.size()))(rng);
    for (std::size_t i = 0; i < k; ++i) {
        const auto pos = positions[i];
        const auto cap = sp.layer_capacity(pos % sp.n_layers());
        if (cap > 0) s.widths[pos] = std::uniform_int_distribution<std::size_t>(1, cap)(rng);
    }
    return s;
}

SubCircuit::SubCircuit(const SuperCircuit &super, SubCircuitSpec spec)
    : spec_(std::move(spec)), active_(super.n_params(), 0), storage_(super.params) {
    const auto &sp = super.space;
    validate_spec(sp, spec_);
    circuit_.n_qubits = sp.n_qubits;
    circuit_.n_params = super.n_params();
    for (std::size_t g = 0; g < super.n_prefix_gates; ++g) circuit_.gates.push_back(super.circuit.gates[g]);
    for (std::size_t b = 0; b < spec_.n_blocks; ++b) {
        for (std::size_t l = 0; l < sp.n_layers(); ++l) {
            const auto w = spec_.effective_width(b, l, sp.n_layers());
            for (std::size_t p = 0; p < w; ++p) {
                circuit_.gates.push_back(super.circuit.gates[super.gate_at(b, l, p)]);
            }
        }
    }
    for (const auto &g : circuit_.gates) {
        for (std::size_t k = 0; k < g.param_count(); ++k) {
            if (g.is_trainable(k)) active_[static_cast<std::size_t>(g.slots[k])] = 1;
        }
    }
    n_active_ = static_cast<std::size_t>(std::count(active_.begin(), active_.end(), 1));
}

std::pair<qstate::Circuit, std::vector<double>> SubCircuit::extract() const {
    qstate::Circuit c = circuit_;
    std::vector<std::int64_t> remap(circuit_.n_params, -1);
    std::vector<double> values;
    for (auto &g : c.gates) {
        for (std::size_t k = 0; k < g.param_count(); ++k) {
            if (!g.is_trainable(k)) continue;
            auto &r = remap[static_cast<std::size_t>(g.slots[k])];
            if (r < 0) {
                r = static_cast<std::int64_t>(values.size());
                values.push_back((*storage_)[static_cast<std::size_t>(g.slots[k])]);
            }
            g.slots[k] = static_cast<std::int32_t>(r);
        }
    }
    c.n_params = values.size();
    return {std::move(c), std::move(values)};
}

SubCircuit instantiate(const SuperCircuit &super, const SubCircuitSpec &spec) { return SubCircuit(super, spec); }

std::size_t block_lower_bound(std::size_t step, std::size_t total_steps, std::size_t n_blocks) {
    if (n_blocks <= 1) return 1;
    const double half = std::max(1.0, static_cast<double>(total_steps) / 2.0);
    const double frac = std::min(1.0, static_cast<double>(step) / half);
    const double lb = static_cast<double>(n_blocks) - frac * static_cast<double>(n_blocks - 1);
    return std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(lb)), 1, n_blocks);
}

SuperTrainResult train_supercircuit(SuperCircuit &super, const grad::TrainTask &task,
                                    const grad::TrainConfig &cfg) {
    SuperTrainResult result;
    result.optimizer = grad::OptimizerState(super.n_params());
    if (cfg.epochs == 0) return result;
    const std::size_t n = task.train.n_samples;
    const auto sched = grad::make_schedule(cfg, n);
    const std::size_t batch = std::max<std::size_t>(1, std::min(cfg.batch_size, n));
    std::mt19937_64 shuffle_rng(cfg.seed);
    std::mt19937_64 spec_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::optional<SubCircuitSpec> prev;
    auto &params = *super.params;
    std::size_t step = 0;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        for (std::size_t start = 0; start < n; start += batch) {
            SubCircuitSpec spec;
            if (!super.space.front_sampling) {
                spec = full_spec(super.space);
            } else {
                const auto lb = block_lower_bound(step, sched.total_steps, super.space.n_blocks);
                spec = prev ? sample_restricted(super, *prev, spec_rng, lb) : sample_front(super, spec_rng, lb);
            }
            const SubCircuit sub(super, spec);
            const std::size_t end = std::min(n, start + batch);
            const std::span<const std::size_t> idx(order.data() + start, end - start);
            const auto lg = grad::loss_and_grad(sub.circuit(), task.train, params, cfg.method, idx);
            const double lr = grad::lr_schedule(step, sched);
            grad::adam_step(result.optimizer, params, lg.grad, lr, cfg.weight_decay, sub.active());
            result.history.push_back({step, epoch, lr, lg.loss, spec});
            prev = std::move(spec);
            ++step;
        }
    }
    return result;
}

} // namespace qnas::space
