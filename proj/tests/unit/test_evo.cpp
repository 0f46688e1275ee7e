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
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include <catch_amalgamated.hpp>

#include "qnas/error.hpp"
#include "qnas/evo/evo.hpp"
#include "qnas/noise/device.hpp"
#include "qnas/tasks/dataset.hpp"
#include "qnas/tasks/task.hpp"

using namespace qnas;
using namespace qnas::evo;
using Catch::Approx;

namespace {

const std::string kDataDir = QNAS_TEST_DATA_DIR;

tasks::Task small_task() {
    return tasks::make_qml_task(tasks::synthetic_dataset(60, 2, 16, 3), tasks::mnist4_encoder());
}

space::SuperCircuit trained_like_super(std::size_t blocks, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto super = space::build_supercircuit(space::make_space("U3+CU3", 4, blocks));
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (auto &p : *super.params) p = u(rng);
    return super;
}

EvoConfig tiny_config(std::uint64_t seed) {
    EvoConfig cfg;
    cfg.iterations = 3;
    cfg.population = 8;
    cfg.parents = 2;
    cfg.mutation_count = 4;
    cfg.crossover_count = 2;
    cfg.seed = seed;
    return cfg;
}

} // namespace

TEST_CASE("Mapping repair keeps first occurrences", "[repair]") {
    using V = std::vector<std::uint32_t>;
    CHECK(repair_mapping(V{2, 0, 1, 3}, 5) == V{2, 0, 1, 3});
    CHECK(repair_mapping(V{1, 1, 3, 0}, 5) == V{1, 2, 3, 0});
    CHECK(repair_mapping(V{0, 0, 0, 0}, 5) == V{0, 1, 2, 3});
    CHECK(repair_mapping(V{3, 3, 0, 1}, 4) == V{3, 2, 0, 1});
    CHECK_THROWS_AS(repair_mapping(V{0, 1, 2, 3, 4, 0}, 5), InfeasibleError);
    CHECK_THROWS_AS(repair_mapping(V{7}, 5), ValidationError);
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<std::uint32_t> u(0, 4);
    for (int t = 0; t < 1000; ++t) {
        V m{u(rng), u(rng), u(rng), u(rng)};
        const auto r = repair_mapping(m, 5);
        CHECK(std::set<std::uint32_t>(r.begin(), r.end()).size() == 4);
    }
}

TEST_CASE("EvoConfig defaults and validation", "[evo]") {
    const EvoConfig cfg;
    CHECK(cfg.iterations == 40);
    CHECK(cfg.population == 40);
    CHECK(cfg.parents == 10);
    CHECK(cfg.mutation_count == 20);
    CHECK(cfg.mutation_prob == 0.4);
    CHECK(cfg.crossover_count == 10);
    CHECK_NOTHROW(cfg.validate());
    EvoConfig bad = cfg;
    bad.parents = 11;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.mutation_prob = 1.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("Gene text format", "[gene]") {
    const auto sp = space::make_space("U3+CU3", 4, 2);
    std::mt19937_64 rng(2);
    for (int t = 0; t < 50; ++t) {
        const auto g = random_gene(sp, 5, rng);
        CHECK_NOTHROW(validate_gene(g, sp, 5));
        CHECK(parse_gene(format_gene(g)) == g);
    }
    CHECK(format_gene(Gene{{1, {4, 2, 1, 1}}, {3, 1, 0, 2}}) == "blocks=1; widths=4,2,1,1; mapping=3,1,0,2");
    CHECK_THROWS_AS(parse_gene("blocks=1; widths=4,2,1,1"), FormatError);
    CHECK_THROWS_AS(parse_gene("blocks=1; widths=4,2,1,1; mapping=3,x"), FormatError);
    CHECK_THROWS_AS(validate_gene(Gene{{1, {4, 2, 1, 1}}, {3, 3, 0, 2}}, sp, 5), ValidationError);
}

TEST_CASE("Mutation probabilities", "[mutate]") {
    const auto sp = space::make_space("U3+CU3", 4, 2);
    std::mt19937_64 rng(3);
    const auto g = random_gene(sp, 5, rng);
    for (int t = 0; t < 100; ++t) CHECK(mutate(g, sp, 5, 0.0, rng) == g);
    for (int t = 0; t < 200; ++t) {
        const auto m = mutate(g, sp, 5, 1.0, rng);
        CHECK_NOTHROW(validate_gene(m, sp, 5));
    }
    // widths have domain {1..4}: observed change rate is 0.4 * (1 - 1/4)
    std::size_t changed = 0, total = 0;
    for (int t = 0; t < 10000; ++t) {
        const auto m = mutate(g, sp, 5, 0.4, rng);
        for (std::size_t i = 0; i < g.spec.widths.size(); ++i) {
            changed += m.spec.widths[i] != g.spec.widths[i] ? 1 : 0;
            ++total;
        }
    }
    const double rate = static_cast<double>(changed) / static_cast<double>(total) / 0.75;
    CHECK(std::abs(rate - 0.4) <= 0.02);
}

TEST_CASE("Crossover picks parent elements", "[crossover]") {
    const auto sp = space::make_space("U3+CU3", 4, 3);
    std::mt19937_64 rng(4);
    for (int t = 0; t < 200; ++t) {
        const auto a = random_gene(sp, 5, rng);
        const auto b = random_gene(sp, 5, rng);
        CHECK(crossover(a, a, 5, rng) == a);
        const auto c = crossover(a, b, 5, rng);
        for (std::size_t i = 0; i < c.spec.widths.size(); ++i) {
            CHECK((c.spec.widths[i] == a.spec.widths[i] || c.spec.widths[i] == b.spec.widths[i]));
        }
        CHECK((c.spec.n_blocks == a.spec.n_blocks || c.spec.n_blocks == b.spec.n_blocks));
        CHECK_NOTHROW(validate_gene(c, sp, 5));
    }
}

TEST_CASE("Estimator reductions", "[estimate]") {
    const auto task = small_task();
    const auto super = trained_like_super(2, 5);
    const auto clean = noise::load_device_model(kDataDir + "/devices/t5_noiseless.dev");
    Estimator noisy_sim(super, clean, task, {EstimatorKind::NoisySim});
    Estimator free(super, clean, task, {EstimatorKind::NoiseFree});
    Estimator rate(super, clean, task, {EstimatorKind::SuccessRate});
    CHECK(Estimator(super, clean, task).kind() == EstimatorKind::NoisySim);
    std::mt19937_64 rng(6);
    for (int t = 0; t < 5; ++t) {
        const auto g = random_gene(super.space, 5, rng);
        CHECK(noisy_sim.score(g) == Approx(free.score(g)).margin(1e-6));
        CHECK(rate.score(g) == Approx(free.score(g)).epsilon(1e-12));
    }
}

TEST_CASE("Deeper genes score worse under the success-rate estimator", "[estimate]") {
    const auto task = small_task();
    auto super = space::build_supercircuit(space::make_space("U3+CU3", 4, 2));
    const auto dev = noise::load_device_model(kDataDir + "/devices/t5_noisy.dev");
    Estimator est(super, dev, task, {EstimatorKind::SuccessRate});
    const Gene shallow{{1, {4, 4, 4, 4}}, {0, 1, 2, 3}};
    Gene deep = shallow;
    deep.spec.n_blocks = 2;
    CHECK(est.score(deep) > est.score(shallow));
}

TEST_CASE("Estimator purity, caching and culling", "[estimate]") {
    const auto task = small_task();
    const auto super = trained_like_super(2, 7);
    const auto dev = noise::load_device_model(kDataDir + "/devices/t5_noisy.dev");
    Estimator est(super, dev, task, {EstimatorKind::NoisySim, tasks::Split::Valid, 6});
    std::mt19937_64 rng(8);
    const auto g = random_gene(super.space, 5, rng);
    const double a = est.score(g);
    CHECK(est.score(g) == a);
    CHECK(est.compute(g) == a);
    CHECK(est.n_evaluations() == 2);
    CHECK(est.n_simulations() == 1);

    // two disconnected islands: an interaction across them cannot be routed
    const auto split = noise::noiseless_device(5, {{0, 1}, {2, 3}, {3, 4}});
    Estimator cut(super, split, task, {EstimatorKind::NoisySim, tasks::Split::Valid, 6});
    const Gene across{{1, {4, 4, 4, 4}}, {0, 2, 3, 4}};
    CHECK(std::isinf(cut.score(across)));
    REQUIRE(cut.culled().size() == 1);
    CHECK(cut.culled()[0].first == format_gene(across));

    const auto big = tasks::make_qml_task(tasks::synthetic_dataset(20, 2, 16, 1), tasks::rotation_encoder(5, 16));
    CHECK_THROWS_AS(Estimator(super, dev, big), ConfigError);
}

TEST_CASE("Evolution loop bookkeeping", "[evolve]") {
    const auto task = small_task();
    const auto super = trained_like_super(2, 9);
    const auto dev = noise::load_device_model(kDataDir + "/devices/t5_noisy.dev");
    const EstimatorConfig ecfg{EstimatorKind::NoisySim, tasks::Split::Valid, 6};

    Estimator e0(super, dev, task, ecfg);
    auto cfg = tiny_config(11);
    cfg.iterations = 0;
    const auto r0 = evolve(e0, cfg);
    REQUIRE(r0.history.size() == 1);
    CHECK(r0.n_evaluations == 8);
    {
        std::mt19937_64 rng(11);
        double best = INFINITY;
        for (int i = 0; i < 8; ++i) best = std::min(best, e0.compute(random_gene(super.space, 5, rng)));
        CHECK(r0.best_score == best);
    }

    Estimator e1(super, dev, task, ecfg);
    const auto r1 = evolve(e1, tiny_config(12));
    CHECK(r1.history.size() == 4);
    CHECK(r1.n_evaluations == 8 * 4);
    CHECK(e1.n_evaluations() == 8 * 4);
    for (std::size_t i = 1; i < r1.history.size(); ++i) {
        CHECK(r1.history[i].best_score <= r1.history[i - 1].best_score);
    }
    CHECK(e1.compute(r1.best) == r1.best_score);

    Estimator e2(super, dev, task, ecfg);
    auto par = tiny_config(12);
    par.jobs = 4;
    const auto r2 = evolve(e2, par);
    REQUIRE(r2.history.size() == r1.history.size());
    for (std::size_t i = 0; i < r1.history.size(); ++i) {
        CHECK(r2.history[i].best_score == r1.history[i].best_score);
        CHECK(r2.history[i].mean_score == r1.history[i].mean_score);
        CHECK(r2.history[i].best_gene == r1.history[i].best_gene);
    }

    Estimator e3(super, dev, task, ecfg);
    const auto rs = random_search(e3, 20, 8, 3);
    CHECK(rs.n_evaluations == 20);
    CHECK(rs.history.size() == 3);

    const auto path = std::filesystem::temp_directory_path() / "qnas_evo_history.csv";
    write_history_csv(path, r1.history);
    std::ifstream in(path);
    std::string header, first;
    std::getline(in, header);
    std::getline(in, first);
    CHECK(header == "iteration,best_score,mean_score,best_gene");
    CHECK(first.rfind("0,", 0) == 0);
}
