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
#include "qnas/prune/prune.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "qnas/error.hpp"
#include "qnas/grad/gradient.hpp"
#include "qnas/qcompile/compile.hpp"

namespace qnas::prune {

void PruneSchedule::validate() const {
    if (!(0.0 <= r_initial && r_initial <= r_final && r_final <= 1.0)) {
        throw ConfigError(fmt::format("prune ratios need 0 <= r_initial ({}) <= r_final ({}) <= 1", r_initial, r_final));
    }
    if (!(s_begin < s_end && s_end <= total_steps)) {
        throw ConfigError(fmt::format("prune steps need s_begin ({}) < s_end ({}) <= total ({})", s_begin, s_end,
                                      total_steps));
    }
}

PruneSchedule make_prune_schedule(double r_final, std::size_t total_steps, double r_initial) {
    PruneSchedule s;
    s.r_final = r_final;
    s.r_initial = std::min(r_initial, r_final);
    s.total_steps = std::max<std::size_t>(total_steps, 1);
    s.s_end = std::max<std::size_t>(s.total_steps / 2, 1);
    s.validate();
    return s;
}

double prune_ratio(std::size_t s_now, const PruneSchedule &sched) {
    if (s_now >= sched.s_end) {
        return sched.r_final;
    }
    if (s_now <= sched.s_begin) {
        return sched.r_initial;
    }
    const double frac = static_cast<double>(s_now - sched.s_begin) / static_cast<double>(sched.s_end - sched.s_begin);
    const double rest = 1.0 - frac;
    return sched.r_final + (sched.r_initial - sched.r_final) * rest * rest * rest;
}

std::size_t pruned_count(const PruneMask &mask) {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

std::size_t target_count(double ratio, std::size_t n) {
    if (!(ratio >= 0.0 && ratio <= 1.0)) {
        throw NumericError(fmt::format("prune ratio {} outside [0, 1]", ratio));
    }
    return std::min(n, static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 1e-9)));
}

PruneMask select_mask(std::span<const double> params, double ratio, const PruneMask &prev) {
    const std::size_t n = params.size();
    PruneMask mask = prev.empty() ? PruneMask(n, 0) : prev;
    if (mask.size() != n) {
        throw ArityError(fmt::format("mask of {} slots for {} parameters", mask.size(), n));
    }
    const std::size_t target = target_count(ratio, n);
    std::size_t have = pruned_count(mask);
    if (have >= target) {
        return mask;
    }
    std::vector<std::size_t> free;
    std::vector<double> mag(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!mask[i]) {
            free.push_back(i);
            mag[i] = std::abs(qcompile::normalize_angle(params[i]));
        }
    }
    std::stable_sort(free.begin(), free.end(), [&](std::size_t a, std::size_t b) { return mag[a] < mag[b]; });
    for (std::size_t k = 0; have < target; ++k, ++have) {
        mask[free[k]] = 1;
    }
    return mask;
}

std::string format_mask(const PruneMask &mask) {
    std::string s(mask.size(), '0');
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i]) s[i] = '1';
    }
    return s;
}

PruneMask parse_mask(const std::string &text) {
    PruneMask m;
    m.reserve(text.size());
    for (char c : text) {
        if (c != '0' && c != '1') {
            throw FormatError(fmt::format("prune mask has character '{}'", c));
        }
        m.push_back(c == '1' ? 1 : 0);
    }
    return m;
}

PruneResult prune_finetune(const qstate::Circuit &circuit, std::vector<double> params, const grad::TrainTask &task,
                           PruneSchedule sched, const grad::TrainConfig &cfg) {
    if (params.size() != circuit.n_params) {
        throw ArityError(fmt::format("prune: {} params for {} slots", params.size(), circuit.n_params));
    }
    const std::size_t n = task.train.n_samples;
    const std::size_t spe = grad::steps_per_epoch(n, cfg.batch_size);
    const std::size_t total = std::max<std::size_t>(1, cfg.epochs * spe);
    sched.total_steps = total;
    if (sched.s_end > total || sched.s_end <= sched.s_begin) {
        sched.s_begin = 0;
        sched.s_end = std::max<std::size_t>(total / 2, 1);
    }
    sched.validate();

    PruneResult res;
    res.mask.assign(params.size(), 0);
    grad::OptimizerState opt(params.size());
    std::vector<std::uint8_t> active(params.size(), 1);
    auto apply_mask = [&](double ratio) {
        res.mask = select_mask(params, ratio, res.mask);
        for (std::size_t i = 0; i < params.size(); ++i) {
            if (res.mask[i]) {
                params[i] = 0.0;
                active[i] = 0;
            }
        }
    };
    if (cfg.epochs > 0) {
        const auto lr_sched = grad::make_schedule(cfg, n);
        const std::size_t batch = std::max<std::size_t>(1, std::min(cfg.batch_size, n));
        std::mt19937_64 rng(cfg.seed);
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::size_t step = 0;
        for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
            std::shuffle(order.begin(), order.end(), rng);
            for (std::size_t start = 0; start < n; start += batch) {
                const double ratio = prune_ratio(step, sched);
                apply_mask(ratio);
                const std::span<const std::size_t> idx(order.data() + start, std::min(n, start + batch) - start);
                auto lg = grad::loss_and_grad(circuit, task.train, params, cfg.method, idx);
                for (std::size_t i = 0; i < params.size(); ++i) {
                    if (res.mask[i]) lg.grad[i] = 0.0;
                }
                grad::adam_step(opt, params, lg.grad, grad::lr_schedule(step, lr_sched), cfg.weight_decay, active);
                res.history.push_back({step, ratio, pruned_count(res.mask), lg.loss});
                ++step;
            }
        }
    }
    apply_mask(sched.r_final);
    res.params = std::move(params);
    return res;
}

SweepResult sweep_ratios(const qstate::Circuit &circuit, const std::vector<double> &params, const grad::TrainTask &task,
                         std::span<const double> ratios, const grad::TrainConfig &cfg,
                         const std::function<Quality(const std::vector<double> &)> &quality,
                         const std::function<double(const std::vector<double> &)> &noisy_score,
                         const SweepConfig &sweep) {
    if (ratios.empty()) {
        throw ConfigError("sweep_ratios needs at least one ratio");
    }
    const std::size_t n = task.train.n_samples;
    const std::size_t total = std::max<std::size_t>(1, cfg.epochs * grad::steps_per_epoch(n, cfg.batch_size));
    auto run = [&](double r) {
        SweepCandidate c;
        c.ratio = r;
        c.result = prune_finetune(circuit, params, task, make_prune_schedule(r, total, sweep.r_initial), cfg);
        c.quality = quality(c.result.params);
        c.noisy_score = noisy_score(c.result.params);
        return c;
    };
    SweepResult out;
    out.candidates.push_back(run(0.0));
    for (double r : ratios) {
        if (r == 0.0) continue;
        out.candidates.push_back(run(r));
    }
    const auto &base = out.candidates[0].quality;
    for (auto &c : out.candidates) {
        if (std::isnan(base.accuracy)) {
            c.degraded = c.quality.loss > base.loss + sweep.loss_tolerance;
        } else {
            c.degraded = c.quality.accuracy < base.accuracy;
        }
    }
    out.selected = 0;
    for (std::size_t i = 1; i < out.candidates.size(); ++i) {
        const auto &c = out.candidates[i];
        const auto &b = out.candidates[out.selected];
        if (c.degraded) continue;
        const double diff = c.noisy_score - b.noisy_score;
        if (diff < -kScoreTie || (std::abs(diff) <= kScoreTie && c.ratio > b.ratio)) {
            out.selected = i;
        }
    }
    return out;
}

} // namespace qnas::prune
