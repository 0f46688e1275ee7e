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
 * Design spaces, the SuperCircuit that holds every gate of a space, and the
 * SubCircuits sampled from it.
 */
#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include "qnas/grad/train.hpp"
#include "qnas/qstate/circuit.hpp"

namespace qnas::space {

/**
 * A block template repeated `n_blocks` times. Single-qubit layers hold one
 * gate per qubit; two-qubit layers connect (i, i+1 mod n) in a ring.
 * `prefix` layers are applied once, in full, before block 0.
 */
struct DesignSpace {
    std::string name;
    std::size_t n_qubits{4};
    std::size_t n_blocks{8};
    std::vector<qstate::GateKind> layers;
    std::vector<qstate::GateKind> prefix;
    bool front_sampling{true};

    [[nodiscard]] std::size_t n_layers() const noexcept { return layers.size(); }
    /// Gates a full layer of this kind holds.
    [[nodiscard]] std::size_t capacity(qstate::GateKind kind) const noexcept;
    [[nodiscard]] std::size_t layer_capacity(std::size_t layer) const { return capacity(layers.at(layer)); }
    /// Wires of the gate at `position` in a layer of `kind`.
    [[nodiscard]] std::array<std::uint32_t, 2> wires_at(qstate::GateKind kind, std::size_t position) const;
    [[nodiscard]] bool operator==(const DesignSpace &) const = default;
};

/// The six named spaces; "U3+CU3", "ZZ+RY", "RXYZ", "ZX+XX", "RXYZ+U1+CU3",
/// "IBMQ-Basis". Case, '+', '-', '_' and spaces are ignored when matching.
/// Without `n_blocks` the space's default depth is used.
[[nodiscard]] DesignSpace make_space(std::string_view name, std::size_t n_qubits = 4,
                                     std::optional<std::size_t> n_blocks = std::nullopt);
[[nodiscard]] std::vector<std::string> space_names();

[[nodiscard]] nlohmann::json space_to_json(const DesignSpace &space);
[[nodiscard]] DesignSpace space_from_json(const nlohmann::json &j);

/// Number of SubCircuits: product over every (block, layer) of its capacity.
[[nodiscard]] boost::multiprecision::cpp_int space_cardinality(const DesignSpace &space);

/**
 * Active depth plus a width for every (block, layer) of the SuperCircuit.
 * Widths of blocks at or beyond `n_blocks` are carried along (genes keep a
 * fixed shape) but have no effect.
 */
struct SubCircuitSpec {
    std::size_t n_blocks{0};
    std::vector<std::size_t> widths;

    [[nodiscard]] bool operator==(const SubCircuitSpec &) const = default;
    /// Width in effect: 0 for blocks beyond n_blocks.
    [[nodiscard]] std::size_t effective_width(std::size_t block, std::size_t layer, std::size_t n_layers) const;
};

/// Throws SpecError unless the spec fits the space.
void validate_spec(const DesignSpace &space, const SubCircuitSpec &spec);
[[nodiscard]] SubCircuitSpec full_spec(const DesignSpace &space);

/// `blocks=<k>; widths=<w,w,...>` in block-major, layer-major order.
[[nodiscard]] std::string format_spec(const SubCircuitSpec &spec);
[[nodiscard]] SubCircuitSpec parse_spec(std::string_view text);

/// (block, layer) positions whose effective widths differ.
[[nodiscard]] std::size_t layer_difference(const DesignSpace &space, const SubCircuitSpec &a,
                                           const SubCircuitSpec &b);

inline constexpr std::size_t kDefaultMaxLayerDiff = 7;
inline constexpr std::size_t kRestrictedSamplingTries = 1000;

/**
 * Every gate of every block, in block-major, layer-major, qubit-major
 * order after the prefix. One parameter slot per gate angle, held in
 * storage shared with every SubCircuit view.
 */
struct SuperCircuit {
    DesignSpace space;
    qstate::Circuit circuit;
    std::shared_ptr<std::vector<double>> params;
    /// gate_index[(block * n_layers + layer) * capacity_max + position].
    std::vector<std::int64_t> gate_index;
    std::size_t n_prefix_gates{0};
    std::size_t max_layer_diff{kDefaultMaxLayerDiff};

    [[nodiscard]] std::size_t n_params() const noexcept { return circuit.n_params; }
    [[nodiscard]] std::size_t gate_at(std::size_t block, std::size_t layer, std::size_t position) const;
};

/// Parameters start at zero, or uniform in [-pi/36, pi/36] when `rng` is given.
[[nodiscard]] SuperCircuit build_supercircuit(const DesignSpace &space, std::mt19937_64 *rng = nullptr);

/// Depth uniform in [lower_bound, n_blocks], every width uniform in [1, capacity].
[[nodiscard]] SubCircuitSpec sample_front(const SuperCircuit &super, std::mt19937_64 &rng,
                                          std::size_t lower_bound = 1);

/**
 * A front sample within `max_layer_diff` layers of `prev`: rejection over
 * sample_front, then, if no draw qualified, `prev` with up to
 * max_layer_diff of its active layers redrawn.
 */
[[nodiscard]] SubCircuitSpec sample_restricted(const SuperCircuit &super, const SubCircuitSpec &prev,
                                               std::mt19937_64 &rng, std::size_t lower_bound = 1);

/**
 * View of a SubCircuit. Its circuit uses the SuperCircuit's slot numbering
 * and reads the shared storage, so writes through any view are seen by all.
 */
class SubCircuit {
  public:
    SubCircuit(const SuperCircuit &super, SubCircuitSpec spec);

    [[nodiscard]] const SubCircuitSpec &spec() const noexcept { return spec_; }
    [[nodiscard]] const qstate::Circuit &circuit() const noexcept { return circuit_; }
    /// 1 for each SuperCircuit slot the view uses.
    [[nodiscard]] const std::vector<std::uint8_t> &active() const noexcept { return active_; }
    [[nodiscard]] std::size_t n_active() const noexcept { return n_active_; }
    [[nodiscard]] std::span<const double> params() const noexcept { return *storage_; }
    [[nodiscard]] std::span<double> params() noexcept { return *storage_; }
    [[nodiscard]] double get(std::size_t slot) const { return storage_->at(slot); }
    void set(std::size_t slot, double value) { storage_->at(slot) = value; }

    /// Standalone copy with slots renumbered 0..n_active-1 in first-use order.
    [[nodiscard]] std::pair<qstate::Circuit, std::vector<double>> extract() const;

  private:
    SubCircuitSpec spec_;
    qstate::Circuit circuit_;
    std::vector<std::uint8_t> active_;
    std::size_t n_active_{0};
    std::shared_ptr<std::vector<double>> storage_;
};

/// Throws SpecError when the spec breaks the front rule for this space.
[[nodiscard]] SubCircuit instantiate(const SuperCircuit &super, const SubCircuitSpec &spec);

/// Depth lower bound: n_blocks at step 0, linearly down to 1 at half of training.
[[nodiscard]] std::size_t block_lower_bound(std::size_t step, std::size_t total_steps, std::size_t n_blocks);

struct SuperStep {
    std::size_t step{0};
    std::size_t epoch{0};
    double lr{0.0};
    double loss{0.0};
    SubCircuitSpec spec;
};

struct SuperTrainResult {
    std::vector<SuperStep> history;
    grad::OptimizerState optimizer;
};

/**
 * Trains the shared parameters: each step draws a spec (restricted against
 * the previous one; the full circuit for spaces without front sampling),
 * and takes one Adam step on that spec's slots only.
 */
SuperTrainResult train_supercircuit(SuperCircuit &super, const grad::TrainTask &task,
                                    const grad::TrainConfig &cfg);

} // namespace qnas::space
