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
 * Evolutionary co-search of SubCircuit specs and qubit mappings, scored by a
 * noise-aware estimator that inherits SuperCircuit parameters.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qnas/noise/device.hpp"
#include "qnas/qcompile/compile.hpp"
#include "qnas/space/space.hpp"
#include "qnas/tasks/task.hpp"

namespace qnas::evo {

/// Circuit sub-gene (depth and every layer width) plus mapping sub-gene.
struct Gene {
    space::SubCircuitSpec spec;
    std::vector<std::uint32_t> mapping;

    [[nodiscard]] bool operator==(const Gene &) const = default;
};

/// `blocks=k; widths=a,b,...; mapping=p,q,...`
[[nodiscard]] std::string format_gene(const Gene &g);
[[nodiscard]] Gene parse_gene(std::string_view text);

/// ValidationError unless the spec fits the space and the mapping is an
/// injective assignment of n_qubits logical qubits into n_physical.
void validate_gene(const Gene &g, const space::DesignSpace &space, std::size_t n_physical);

struct EvoConfig {
    std::size_t iterations{40};
    std::size_t population{40};
    std::size_t parents{10};
    std::size_t mutation_count{20};
    double mutation_prob{0.4};
    std::size_t crossover_count{10};
    std::uint64_t seed{0};
    /// Concurrent estimator evaluations.
    std::size_t jobs{1};

    /// ConfigError unless parents + mutations + crossovers = population etc.
    void validate() const;
};

/**
 * Keeps the first occurrence of every value; each later duplicate becomes
 * the smallest physical index absent from the current sequence, scanning
 * left to right. InfeasibleError if the mapping is longer than n_physical,
 * ValidationError for a value outside the device.
 */
[[nodiscard]] std::vector<std::uint32_t> repair_mapping(std::vector<std::uint32_t> m,
                                                        std::size_t n_physical);

/// Front-rule depth and widths, uniform injective mapping.
[[nodiscard]] Gene random_gene(const space::DesignSpace &space, std::size_t n_physical,
                               std::mt19937_64 &rng);

/// Each element resampled from its domain with probability `prob`, then repaired.
[[nodiscard]] Gene mutate(const Gene &g, const space::DesignSpace &space, std::size_t n_physical,
                          double prob, std::mt19937_64 &rng);

/// Element-wise uniform pick between parents, then repaired.
[[nodiscard]] Gene crossover(const Gene &a, const Gene &b, std::size_t n_physical, std::mt19937_64 &rng);

enum class EstimatorKind { Auto, NoisySim, SuccessRate, NoiseFree };

[[nodiscard]] EstimatorKind parse_estimator_kind(const std::string &name);
[[nodiscard]] std::string estimator_kind_name(EstimatorKind kind);

/// Circuits of at most this many qubits are scored by noisy simulation.
inline constexpr std::size_t kNoisySimMaxQubits = 10;

struct EstimatorConfig {
    EstimatorKind kind{EstimatorKind::Auto};
    tasks::Split split{tasks::Split::Valid};
    /// Cap on scored samples per gene (0 uses the whole split).
    std::size_t max_samples{0};
    bool readout{true};
};

/**
 * Scores genes (lower is better) by instantiating the spec with inherited
 * parameters, routing it with the gene's mapping and
 *   NoisySim:    the split loss (QML) or energy (VQE) on the noisy simulator;
 *   SuccessRate: the noise-free loss divided by the success rate (QML), or
 *                the noise-free energy with its non-constant part scaled by
 *                the success rate (VQE);
 *   NoiseFree:   the noise-free loss, ignoring the device.
 * Routing, capacity and spec errors score +inf. Results are cached by gene.
 * score() is safe to call from several threads. The estimator keeps its own
 * copies of its inputs; the SuperCircuit copy still shares parameter storage.
 */
class Estimator {
  public:
    Estimator(const space::SuperCircuit &super, const noise::DeviceModel &device, const tasks::Task &task,
              EstimatorConfig cfg = {});

    [[nodiscard]] double score(const Gene &g);
    /// Scores a population, running up to `jobs` uncached genes at once.
    [[nodiscard]] std::vector<double> score_all(std::span<const Gene> genes, std::size_t jobs = 1);
    /// Uncached score; pure in its inputs.
    [[nodiscard]] double compute(const Gene &g) const;

    [[nodiscard]] EstimatorKind kind() const noexcept { return kind_; }
    [[nodiscard]] const space::SuperCircuit &super() const noexcept { return super_; }
    [[nodiscard]] const noise::DeviceModel &device() const noexcept { return device_; }
    [[nodiscard]] const tasks::Task &task() const noexcept { return task_; }
    /// Scoring requests, cache hits included.
    [[nodiscard]] std::size_t n_evaluations() const;
    /// Genes actually simulated.
    [[nodiscard]] std::size_t n_simulations() const;
    /// Genes scored +inf, with the reason.
    [[nodiscard]] std::vector<std::pair<std::string, std::string>> culled() const;

  private:
    space::SuperCircuit super_;
    noise::DeviceModel device_;
    tasks::Task task_;
    EstimatorConfig cfg_;
    EstimatorKind kind_;
    mutable std::mutex mu_;
    std::map<std::string, double> cache_;
    std::vector<std::pair<std::string, std::string>> culled_;
    std::size_t n_evaluations_{0};
};

struct EvoIteration {
    std::size_t iteration{0};
    /// Best score seen so far.
    double best_score{std::numeric_limits<double>::infinity()};
    /// Mean over this population's finite scores (+inf if none).
    double mean_score{std::numeric_limits<double>::infinity()};
    Gene best_gene;
};

struct EvoResult {
    Gene best;
    double best_score{std::numeric_limits<double>::infinity()};
    std::vector<EvoIteration> history;
    /// population x (iterations + 1) for evolve; the budget for random_search.
    std::size_t n_evaluations{0};
};

/**
 * Iteration 0 is random. Each iteration scores the population, keeps the top
 * `parents` (stable by score), adds mutations of uniformly chosen parents and
 * crossovers of two distinct uniformly chosen parents.
 */
[[nodiscard]] EvoResult evolve(Estimator &est, const EvoConfig &cfg);

/// `budget` random genes scored in chunks of `chunk`; one history row per chunk.
[[nodiscard]] EvoResult random_search(Estimator &est, std::size_t budget, std::size_t chunk, std::uint64_t seed,
                                      std::size_t jobs = 1);

/// iteration,best_score,mean_score,best_gene
void write_history_csv(const std::filesystem::path &path, std::span<const EvoIteration> history);

} // namespace qnas::evo
