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
#include "qnas/evo/evo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numeric>
#include <thread>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "qnas/error.hpp"
#include "qnas/noise/simulate.hpp"

namespace qnas::evo {

namespace {

constexpr std::string_view kMappingKey = "; mapping=";

std::size_t width_domain(const space::DesignSpace &sp, std::size_t index) {
    return sp.layer_capacity(index % sp.n_layers());
}

std::size_t draw_width(std::size_t cap, std::mt19937_64 &rng) {
    return cap == 0 ? 0 : std::uniform_int_distribution<std::size_t>(1, cap)(rng);
}

} // namespace

std::string format_gene(const Gene &g) {
    return fmt::format("{}{}{}", space::format_spec(g.spec), kMappingKey, fmt::join(g.mapping, ","));
}

Gene parse_gene(std::string_view text) {
    const auto pos = text.find(kMappingKey);
    if (pos == std::string_view::npos) {
        throw FormatError(fmt::format("gene '{}' has no mapping", text));
    }
    Gene g;
    g.spec = space::parse_spec(text.substr(0, pos));
    std::string_view rest = text.substr(pos + kMappingKey.size());
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        const std::string tok(rest.substr(0, comma));
        std::size_t used = 0;
        unsigned long v = 0;
        try {
            v = std::stoul(tok, &used);
        } catch (const std::exception &) {
            used = 0;
        }
        if (used == 0 || used != tok.size()) {
            throw FormatError(fmt::format("bad mapping entry '{}' in gene", tok));
        }
        g.mapping.push_back(static_cast<std::uint32_t>(v));
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
    }
    return g;
}

void validate_gene(const Gene &g, const space::DesignSpace &sp, std::size_t n_physical) {
    try {
        space::validate_spec(sp, g.spec);
    } catch (const SpecError &e) {
        throw ValidationError(e.what());
    }
    if (g.spec.n_blocks == 0) {
        throw ValidationError("gene has zero blocks");
    }
    if (g.mapping.size() != sp.n_qubits) {
        throw ValidationError(fmt::format("mapping has {} entries for {} qubits", g.mapping.size(), sp.n_qubits));
    }
    qcompile::QubitMapping{g.mapping}.validate(n_physical);
}

void EvoConfig::validate() const {
    if (parents + mutation_count + crossover_count != population) {
        throw ConfigError(fmt::format("evo: parents ({}) + mutations ({}) + crossovers ({}) must equal the "
                                      "population ({})", parents, mutation_count, crossover_count, population));
    }
    if (parents == 0) {
        throw ConfigError("evo: parents must be positive");
    }
    if (crossover_count > 0 && parents < 2) {
        throw ConfigError("evo: crossover needs at least two parents");
    }
    if (!(mutation_prob >= 0.0 && mutation_prob <= 1.0)) {
        throw ConfigError(fmt::format("evo: mutation_prob {} outside [0, 1]", mutation_prob));
    }
    if (jobs == 0) {
        throw ConfigError("evo: jobs must be positive");
    }
}

std::vector<std::uint32_t> repair_mapping(std::vector<std::uint32_t> m, std::size_t n_physical) {
    if (m.size() > n_physical) {
        throw InfeasibleError(fmt::format("{} logical qubits do not fit {} physical qubits", m.size(), n_physical));
    }
    for (auto v : m) {
        if (v >= n_physical) {
            throw ValidationError(fmt::format("mapping entry {} outside {} physical qubits", v, n_physical));
        }
    }
    std::vector<std::uint8_t> seen(n_physical, 0);
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (!seen[m[i]]) {
            seen[m[i]] = 1;
            continue;
        }
        // smallest index not present anywhere in the current sequence
        std::vector<std::uint8_t> present(n_physical, 0);
        for (auto v : m) present[v] = 1;
        const auto free = static_cast<std::uint32_t>(std::find(present.begin(), present.end(), 0) - present.begin());
        m[i] = free;
        seen[free] = 1;
    }
    return m;
}

Gene random_gene(const space::DesignSpace &sp, std::size_t n_physical, std::mt19937_64 &rng) {
    if (sp.n_qubits > n_physical) {
        throw InfeasibleError(fmt::format("{} logical qubits do not fit {} physical qubits", sp.n_qubits, n_physical));
    }
    Gene g;
    g.spec.n_blocks = std::uniform_int_distribution<std::size_t>(1, sp.n_blocks)(rng);
    for (std::size_t i = 0; i < sp.n_blocks * sp.n_layers(); ++i) {
        g.spec.widths.push_back(draw_width(width_domain(sp, i), rng));
    }
    std::vector<std::uint32_t> perm(n_physical);
    std::iota(perm.begin(), perm.end(), 0U);
    std::shuffle(perm.begin(), perm.end(), rng);
    g.mapping.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(sp.n_qubits));
    return g;
}

Gene mutate(const Gene &g, const space::DesignSpace &sp, std::size_t n_physical, double prob,
            std::mt19937_64 &rng) {
    std::bernoulli_distribution hit(prob);
    Gene out = g;
    for (std::size_t i = 0; i < out.spec.widths.size(); ++i) {
        if (hit(rng)) out.spec.widths[i] = draw_width(width_domain(sp, i), rng);
    }
    if (hit(rng)) {
        out.spec.n_blocks = std::uniform_int_distribution<std::size_t>(1, sp.n_blocks)(rng);
    }
    std::uniform_int_distribution<std::uint32_t> phys(0, static_cast<std::uint32_t>(n_physical - 1));
    for (auto &v : out.mapping) {
        if (hit(rng)) v = phys(rng);
    }
    out.mapping = repair_mapping(std::move(out.mapping), n_physical);
    return out;
}

Gene crossover(const Gene &a, const Gene &b, std::size_t n_physical, std::mt19937_64 &rng) {
    if (a.spec.widths.size() != b.spec.widths.size() || a.mapping.size() != b.mapping.size()) {
        throw ArityError("crossover of genes with different shapes");
    }
    std::bernoulli_distribution coin(0.5);
    Gene out = a;
    for (std::size_t i = 0; i < out.spec.widths.size(); ++i) {
        if (coin(rng)) out.spec.widths[i] = b.spec.widths[i];
    }
    if (coin(rng)) out.spec.n_blocks = b.spec.n_blocks;
    for (std::size_t i = 0; i < out.mapping.size(); ++i) {
        if (coin(rng)) out.mapping[i] = b.mapping[i];
    }
    out.mapping = repair_mapping(std::move(out.mapping), n_physical);
    return out;
}

EstimatorKind parse_estimator_kind(const std::string &name) {
    if (name == "auto") return EstimatorKind::Auto;
    if (name == "noisy_sim") return EstimatorKind::NoisySim;
    if (name == "success_rate") return EstimatorKind::SuccessRate;
    if (name == "noise_free") return EstimatorKind::NoiseFree;
    throw ConfigError(fmt::format("unknown estimator '{}' (auto, noisy_sim, success_rate, noise_free)", name));
}

std::string estimator_kind_name(EstimatorKind kind) {
    switch (kind) {
    case EstimatorKind::Auto: return "auto";
    case EstimatorKind::NoisySim: return "noisy_sim";
    case EstimatorKind::SuccessRate: return "success_rate";
    case EstimatorKind::NoiseFree: return "noise_free";
    }
    return "?";
}

Estimator::Estimator(const space::SuperCircuit &super, const noise::DeviceModel &device, const tasks::Task &task,
                     EstimatorConfig cfg)
    : super_(super), device_(device), task_(task), cfg_(cfg), kind_(cfg.kind) {
    if (task_.n_qubits != super_.space.n_qubits) {
        throw ConfigError(fmt::format("task has {} qubits but space {} has {}", task_.n_qubits, super_.space.name,
                                      super_.space.n_qubits));
    }
    if (super_.space.n_qubits > device_.n_physical) {
        throw InfeasibleError(fmt::format("space needs {} qubits, device {} has {}", super_.space.n_qubits,
                                          device_.name, device_.n_physical));
    }
    if (kind_ == EstimatorKind::Auto) {
        kind_ = task_.n_qubits <= kNoisySimMaxQubits ? EstimatorKind::NoisySim : EstimatorKind::SuccessRate;
    }
    if (kind_ == EstimatorKind::NoisySim && task_.n_qubits > kNoisySimMaxQubits) {
        throw ConfigError(fmt::format("noisy simulation supports at most {} qubits", kNoisySimMaxQubits));
    }
    if (cfg_.max_samples > 0 && task_.kind == tasks::TaskKind::Qml) {
        auto trim = [&](tasks::Dataset &d) {
            if (d.size() > cfg_.max_samples) {
                d.features.resize(cfg_.max_samples);
                d.labels.resize(cfg_.max_samples);
            }
        };
        trim(task_.data.train);
        trim(task_.data.valid);
        trim(task_.data.test);
    }
}

double Estimator::compute(const Gene &g) const {
    validate_gene(g, super_.space, device_.n_physical);
    const auto sub = space::instantiate(super_, g.spec);
    const auto &params = *super_.params;
    if (kind_ == EstimatorKind::NoiseFree) {
        return tasks::evaluate(task_, sub.circuit(), params, cfg_.split).loss;
    }
    const auto compiled = qcompile::route(sub.circuit(), params, qcompile::QubitMapping{g.mapping}, device_);
    if (kind_ == EstimatorKind::NoisySim) {
        tasks::NoisyOptions opts;
        opts.readout = cfg_.readout;
        return tasks::evaluate_noisy(task_, compiled, device_, cfg_.split, opts).loss;
    }
    const double r = noise::success_rate(compiled.circuit, device_);
    const double l = tasks::evaluate(task_, sub.circuit(), params, cfg_.split).loss;
    if (task_.kind == tasks::TaskKind::Vqe) {
        const double c = task_.hamiltonian.constant();
        return c + r * (l - c);
    }
    return noise::augmented_loss(l, r);
}

double Estimator::score(const Gene &g) {
    const std::string key = format_gene(g);
    {
        std::lock_guard lock(mu_);
        ++n_evaluations_;
        if (const auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    double s = std::numeric_limits<double>::infinity();
    std::string reason;
    try {
        s = compute(g);
    } catch (const RoutingError &e) {
        reason = e.what();
    } catch (const CapacityError &e) {
        reason = e.what();
    } catch (const SpecError &e) {
        reason = e.what();
    } catch (const ValidationError &e) {
        reason = e.what();
    }
    if (std::isnan(s)) {
        s = std::numeric_limits<double>::infinity();
        reason = "score is NaN";
    }
    std::lock_guard lock(mu_);
    cache_.emplace(key, s);
    if (!reason.empty()) culled_.emplace_back(key, reason);
    return s;
}

std::vector<double> Estimator::score_all(std::span<const Gene> genes, std::size_t jobs) {
    std::vector<double> out(genes.size());
    if (jobs <= 1 || genes.size() <= 1) {
        for (std::size_t i = 0; i < genes.size(); ++i) out[i] = score(genes[i]);
        return out;
    }
    std::atomic<std::size_t> next{0};
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < std::min(jobs, genes.size()); ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < genes.size(); i = next++) out[i] = score(genes[i]);
            });
        }
    }
    return out;
}

std::size_t Estimator::n_evaluations() const {
    std::lock_guard lock(mu_);
    return n_evaluations_;
}

std::size_t Estimator::n_simulations() const {
    std::lock_guard lock(mu_);
    return cache_.size();
}

std::vector<std::pair<std::string, std::string>> Estimator::culled() const {
    std::lock_guard lock(mu_);
    return culled_;
}

namespace {

void record(EvoResult &res, std::size_t iteration, std::span<const Gene> pop, std::span<const double> scores) {
    double sum = 0.0;
    std::size_t finite = 0;
    for (std::size_t i = 0; i < pop.size(); ++i) {
        if (scores[i] < res.best_score) {
            res.best_score = scores[i];
            res.best = pop[i];
        }
        if (std::isfinite(scores[i])) {
            sum += scores[i];
            ++finite;
        }
    }
    if (res.best.mapping.empty() && !pop.empty()) {
        res.best = pop[0];  // every gene so far was culled
    }
    EvoIteration row;
    row.iteration = iteration;
    row.best_score = res.best_score;
    row.mean_score = finite ? sum / static_cast<double>(finite) : std::numeric_limits<double>::infinity();
    row.best_gene = res.best;
    res.history.push_back(row);
}

} // namespace

EvoResult evolve(Estimator &est, const EvoConfig &cfg) {
    cfg.validate();
    const auto &sp = est.super().space;
    const std::size_t n_phys = est.device().n_physical;
    std::mt19937_64 rng(cfg.seed);
    std::vector<Gene> pop;
    pop.reserve(cfg.population);
    for (std::size_t i = 0; i < cfg.population; ++i) pop.push_back(random_gene(sp, n_phys, rng));

    EvoResult res;
    for (std::size_t it = 0;; ++it) {
        const auto scores = est.score_all(pop, cfg.jobs);
        res.n_evaluations += pop.size();
        record(res, it, pop, scores);
        if (it == cfg.iterations) break;

        std::vector<std::size_t> order(pop.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
        std::vector<Gene> parents;
        for (std::size_t k = 0; k < cfg.parents; ++k) parents.push_back(pop[order[k]]);

        std::vector<Gene> next = parents;
        std::uniform_int_distribution<std::size_t> pick(0, parents.size() - 1);
        for (std::size_t k = 0; k < cfg.mutation_count; ++k) {
            next.push_back(mutate(parents[pick(rng)], sp, n_phys, cfg.mutation_prob, rng));
        }
        for (std::size_t k = 0; k < cfg.crossover_count; ++k) {
            const std::size_t a = pick(rng);
            std::size_t b = std::uniform_int_distribution<std::size_t>(0, parents.size() - 2)(rng);
            if (b >= a) ++b;
            next.push_back(crossover(parents[a], parents[b], n_phys, rng));
        }
        pop = std::move(next);
    }
    return res;
}

EvoResult random_search(Estimator &est, std::size_t budget, std::size_t chunk, std::uint64_t seed,
                        std::size_t jobs) {
    if (chunk == 0) {
        throw ConfigError("random search chunk must be positive");
    }
    const auto &sp = est.super().space;
    std::mt19937_64 rng(seed);
    EvoResult res;
    for (std::size_t done = 0, it = 0; done < budget; ++it) {
        const std::size_t n = std::min(chunk, budget - done);
        std::vector<Gene> genes;
        for (std::size_t i = 0; i < n; ++i) genes.push_back(random_gene(sp, est.device().n_physical, rng));
        const auto scores = est.score_all(genes, jobs);
        record(res, it, genes, scores);
        done += n;
        res.n_evaluations += n;
    }
    return res;
}

void write_history_csv(const std::filesystem::path &path, std::span<const EvoIteration> history) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError(fmt::format("cannot write {}", path.string()));
    }
    out << "iteration,best_score,mean_score,best_gene\n";
    for (const auto &row : history) {
        out << fmt::format("{},{:.12g},{:.12g},\"{}\"\n", row.iteration, row.best_score, row.mean_score,
                           format_gene(row.best_gene));
    }
}

} // namespace qnas::evo
