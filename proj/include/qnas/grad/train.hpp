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
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "qnas/grad/gradient.hpp"
#include "qnas/grad/loss.hpp"

namespace qnas::grad {

/**
 * Optimizer and schedule settings. One epoch is one pass over the training
 * samples in batches of `batch_size`; a single-sample loss (VQE) therefore
 * takes one step per epoch. Warm-up is measured in epochs.
 */
struct TrainConfig {
    double lr0{5e-3};
    double weight_decay{1e-4};
    std::size_t epochs{200};
    std::size_t batch_size{256};
    std::size_t warmup_epochs{0};
    std::uint64_t seed{0};
    GradMethod method{GradMethod::Adjoint};
};

/// Linear warm-up then cosine decay, in optimizer steps.
struct LrSchedule {
    double lr0{5e-3};
    std::size_t warmup_steps{0};
    std::size_t total_steps{1};
};

[[nodiscard]] std::size_t steps_per_epoch(std::size_t n_samples, std::size_t batch_size);
[[nodiscard]] LrSchedule make_schedule(const TrainConfig &cfg, std::size_t n_train_samples);

/// 0 -> lr0 linearly over the warm-up, then lr0 * (1 + cos(pi * progress)) / 2.
[[nodiscard]] double lr_schedule(std::size_t step, const LrSchedule &sched);

struct OptimizerState {
    std::vector<double> m;
    std::vector<double> v;
    std::size_t step{0};

    explicit OptimizerState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
    [[nodiscard]] bool operator==(const OptimizerState &) const = default;
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

/**
 * One Adam update with decoupled weight decay at learning rate `lr`.
 * Slots with `active[i] == 0` keep their value and moments. A non-finite
 * gradient throws NumericError before anything is modified.
 */
void adam_step(OptimizerState &opt, std::span<double> params, std::span<const double> grads,
               double lr, double weight_decay, std::span<const std::uint8_t> active = {});

/// Same update with the learning rate taken from the schedule at `step`.
void adam_step(OptimizerState &opt, std::span<double> params, std::span<const double> grads,
               const TrainConfig &cfg, const LrSchedule &sched, std::size_t step,
               std::span<const std::uint8_t> active = {});

/// Uniform in [-pi/36, pi/36].
[[nodiscard]] std::vector<double> init_params(std::size_t n, std::mt19937_64 &rng);

struct TrainTask {
    LossFn train;
    /// Present for QML: best validation loss picks the returned parameters.
    std::optional<LossFn> valid;
};

struct StepRecord {
    std::size_t step{0};
    std::size_t epoch{0};
    double lr{0.0};
    double loss{0.0};
};

struct TrainResult {
    std::vector<double> params;
    std::vector<StepRecord> history;
    std::vector<double> valid_history;
    double best_valid{0.0};
    OptimizerState optimizer;
};

/**
 * Plain training loop. Per epoch the training samples are shuffled with a
 * generator seeded from cfg.seed; each batch is one gradient + Adam step.
 * Only slots flagged in `active` (all when empty) are updated.
 */
[[nodiscard]] TrainResult train(const qstate::Circuit &circuit, std::vector<double> params,
                                const TrainTask &task, const TrainConfig &cfg,
                                std::span<const std::uint8_t> active = {});

} // namespace qnas::grad
