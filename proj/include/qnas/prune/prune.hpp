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
 * Iterative magnitude pruning of rotation angles with a cubic ratio schedule
 * and finetuning of the surviving angles.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qnas/grad/train.hpp"
#include "qnas/qstate/circuit.hpp"

namespace qnas::prune {

inline constexpr double kDefaultInitialRatio = 0.05;

struct PruneSchedule {
    double r_initial{kDefaultInitialRatio};
    double r_final{0.5};
    std::size_t s_begin{0};
    std::size_t s_end{1};
    std::size_t total_steps{2};

    /// ConfigError unless 0 <= r_initial <= r_final <= 1 and s_begin < s_end <= total_steps.
    void validate() const;
};

/// s_end at half of `total_steps`; r_initial is lowered to r_final when larger.
[[nodiscard]] PruneSchedule make_prune_schedule(double r_final, std::size_t total_steps,
                                                double r_initial = kDefaultInitialRatio);

/// r_final + (r_initial - r_final)(1 - (s - s_begin)/(s_end - s_begin))^3, with s clamped to [s_begin, s_end].
[[nodiscard]] double prune_ratio(std::size_t s_now, const PruneSchedule &sched);

/// 1 marks a pruned slot.
using PruneMask = std::vector<std::uint8_t>;

[[nodiscard]] std::size_t pruned_count(const PruneMask &mask);
/// floor(ratio * n), guarded against rounding just below an integer.
[[nodiscard]] std::size_t target_count(double ratio, std::size_t n);

/**
 * Extends `prev` (empty = nothing pruned) until target_count(ratio, n) slots
 * are pruned, choosing the unpruned slots of smallest |angle| after wrapping
 * to [-pi, pi), lower slot first on ties.
 */
[[nodiscard]] PruneMask select_mask(std::span<const double> params, double ratio, const PruneMask &prev = {});

/// "0110..." text form, slot 0 first.
[[nodiscard]] std::string format_mask(const PruneMask &mask);
[[nodiscard]] PruneMask parse_mask(const std::string &text);

struct PruneStep {
    std::size_t step{0};
    double ratio{0.0};
    std::size_t n_pruned{0};
    double loss{0.0};
};

struct PruneResult {
    std::vector<double> params;
    PruneMask mask;
    std::vector<PruneStep> history;
};

/**
 * Each step sets the ratio from the schedule, extends the mask, zeroes the
 * pruned slots and takes one AdamW step on the rest. Batching, shuffling and
 * the learning-rate schedule follow grad::train. The schedule's total_steps
 * is overwritten with the run's step count; s_end keeps its value unless it
 * no longer fits, in which case half the run is used. Pruned slots are
 * exactly 0.0 in the output. Returns the final parameters.
 */
[[nodiscard]] PruneResult prune_finetune(const qstate::Circuit &circuit, std::vector<double> params,
                                         const grad::TrainTask &task, PruneSchedule sched,
                                         const grad::TrainConfig &cfg);

/// Noise-free validation metrics used for the non-degradation check.
struct Quality {
    double loss{0.0};
    /// Classification accuracy; NaN for VQE.
    double accuracy{0.0};
};

struct SweepCandidate {
    double ratio{0.0};
    PruneResult result;
    Quality quality;
    double noisy_score{0.0};
    bool degraded{false};
};

struct SweepResult {
    /// Ratio 0 (plain finetuning) first, then the requested ratios.
    std::vector<SweepCandidate> candidates;
    std::size_t selected{0};

    [[nodiscard]] const SweepCandidate &best() const { return candidates.at(selected); }
};

inline constexpr double kScoreTie = 1e-12;

struct SweepConfig {
    double r_initial{kDefaultInitialRatio};
    /// Allowed rise of the noise-free loss (energy for VQE) over the unpruned run.
    double loss_tolerance{1e-3};
};

/**
 * Runs prune_finetune for every ratio from the same start. A candidate is
 * degraded if its noise-free validation accuracy falls below the unpruned
 * one (QML) or its loss rises by more than the tolerance (VQE). The
 * non-degraded candidate with the lowest noisy score wins; scores within
 * kScoreTie count as ties, which go to the larger ratio.
 */
[[nodiscard]] SweepResult sweep_ratios(const qstate::Circuit &circuit, const std::vector<double> &params,
                                       const grad::TrainTask &task, std::span<const double> ratios,
                                       const grad::TrainConfig &cfg,
                                       const std::function<Quality(const std::vector<double> &)> &quality,
                                       const std::function<double(const std::vector<double> &)> &noisy_score,
                                       const SweepConfig &sweep = {});

} // namespace qnas::prune
