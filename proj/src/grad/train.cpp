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
#include "qnas/grad/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <fmt/format.h>

#include "qnas/error.hpp"

namespace qnas::grad {

std::size_t steps_per_epoch(std::size_t n_samples, std::size_t batch_size) {
    const std::size_t b = std::max<std::size_t>(1, std::min(batch_size, n_samples));
    return (n_samples + b - 1) / b;
}

LrSchedule make_schedule(const TrainConfig &cfg, std::size_t n_train_samples) {
    if (!(cfg.lr0 > 0.0)) {
        throw ConfigError("lr0 must be positive");
    }
    const std::size_t spe = steps_per_epoch(n_train_samples, cfg.batch_size);
    LrSchedule s;
    s.lr0 = cfg.lr0;
    s.total_steps = std::max<std::size_t>(1, cfg.epochs * spe);
    s.warmup_steps = cfg.warmup_epochs * spe;
    if (s.warmup_steps >= s.total_steps && s.warmup_steps != 0) {
        throw ConfigError(fmt::format("warm-up ({} steps) must be shorter than training ({} steps)",
                                      s.warmup_steps, s.total_steps));
    }
    return s;
}

double lr_schedule(std::size_t step, const LrSchedule &sched) {
    step = std::min(step, sched.total_steps);
    if (step < sched.warmup_steps) {
        return sched.lr0 * static_cast<double>(step) / static_cast<double>(sched.warmup_steps);
    }
    const double span = static_cast<double>(sched.total_steps - sched.warmup_steps);
    const double progress = static_cast<double>(step - sched.warmup_steps) / span;
    return sched.lr0 * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

void adam_step(OptimizerState &opt, std::span<double> params, std::span<const double> grads,
               double lr, double weight_decay, std::span<const std::uint8_t> active) {
    if (grads.size() != params.size() || opt.m.size() != params.size() ||
        (!active.empty() && active.size() != params.size())) {
        throw ArityError(fmt::format("adam_step dimension mismatch: {} params, {} grads, {} moments",
                                     params.size(), grads.size(), opt.m.size()));
    }
    for (double g : grads) {
        if (!std::isfinite(g)) {
            throw NumericError("non-finite gradient passed to adam_step");
        }
    }
    ++opt.step;
    const double t = static_cast<double>(opt.step);
    const double bc1 = 1.0 - std::pow(kAdamBeta1, t);
    const double bc2 = 1.0 - std::pow(kAdamBeta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!active.empty() && active[i] == 0) {
            continue;
        }
        opt.m[i] = kAdamBeta1 * opt.m[i] + (1.0 - kAdamBeta1) * grads[i];
        opt.v[i] = kAdamBeta2 * opt.v[i] + (1.0 - kAdamBeta2) * grads[i] * grads[i];
        const double mhat = opt.m[i] / bc1;
        const double vhat = opt.v[i] / bc2;
        params[i] -= lr * (mhat / (std::sqrt(vhat) + kAdamEps) + weight_decay * params[i]);
    }
}

void adam_step(OptimizerState &opt, std::span<double> params, std::span<const double> grads,
               const TrainConfig &cfg, const LrSchedule &sched, std::size_t step,
               std::span<const std::uint8_t> active) {
    adam_step(opt, params, grads, lr_schedule(step, sched), cfg.weight_decay, active);
}

std::vector<double> init_params(std::size_t n, std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> u(-std::numbers::pi / 36.0, std::numbers::pi / 36.0);
    std::vector<double> p(n);
    for (auto &x : p) {
        x = u(rng);
    }
    return p;
}

TrainResult train(const qstate::Circuit &circuit, std::vector<double> params, const TrainTask &task,
                  const TrainConfig &cfg, std::span<const std::uint8_t> active) {
    if (params.size() != circuit.n_params) {
        throw ArityError(fmt::format("train: {} params for {} slots", params.size(), circuit.n_params));
    }
    TrainResult result;
    result.optimizer = OptimizerState(params.size());
    result.params = params;
    result.best_valid = std::numeric_limits<double>::infinity();
    if (cfg.epochs == 0) {
        return result;
    }
    const std::size_t n = task.train.n_samples;
    const LrSchedule sched = make_schedule(cfg, n);
    const std::size_t batch = std::max<std::size_t>(1, std::min(cfg.batch_size, n));
    std::mt19937_64 rng(cfg.seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::size_t step = 0;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t end = std::min(n, start + batch);
            const std::span<const std::size_t> idx(order.data() + start, end - start);
            const auto lg = loss_and_grad(circuit, task.train, params, cfg.method, idx);
            const double lr = lr_schedule(step, sched);
            adam_step(result.optimizer, params, lg.grad, lr, cfg.weight_decay, active);
            result.history.push_back({step, epoch, lr, lg.loss});
            ++step;
        }
        if (task.valid) {
            const double v = evaluate_loss(circuit, params, *task.valid);
            result.valid_history.push_back(v);
            if (v < result.best_valid) {
                result.best_valid = v;
                result.params = params;
            }
        }
    }
    if (!task.valid) {
        result.params = params;
        result.best_valid = evaluate_loss(circuit, params, task.train);
    }
    return result;
}

} // namespace qnas::grad
