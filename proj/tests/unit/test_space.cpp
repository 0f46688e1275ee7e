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
#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <catch_amalgamated.hpp>

#include "qnas/error.hpp"
#include "qnas/grad/gradient.hpp"
#include "qnas/space/space.hpp"

using namespace qnas;
using namespace qnas::space;
using namespace qnas::qstate;
using Catch::Approx;

namespace {

/// Two-class NLL on 4 qubits: logits (<Z0>+<Z1>, <Z2>+<Z3>), RY-encoded features.
grad::LossFn toy_task(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.15);
    std::vector<std::array<double, 4>> xs;
    std::vector<int> ys;
    for (std::size_t i = 0; i < n; ++i) {
        const int y = static_cast<int>(i % 2);
        const double s = y == 0 ? 0.8 : -0.8;
        xs.push_back({s + noise(rng), s + noise(rng), -s + noise(rng), -s + noise(rng)});
        ys.push_back(y);
    }
    grad::LossFn loss;
    loss.kind = grad::LossKind::QmlNll;
    loss.n_qubits = 4;
    loss.n_samples = n;
    for (std::uint32_t q = 0; q < 4; ++q) {
        PauliString z;
        z.ops[q] = Pauli::Z;
        loss.observables.push_back(z);
    }
    loss.prepare = [xs](std::size_t i, Statevector &st) {
        for (std::uint32_t q = 0; q < 4; ++q) st.apply(make_gate(GateKind::RY, {q}, {xs[i][q]}));
    };
    loss.head = [ys](std::span<const double> ev, std::size_t i, std::span<double> dev) {
        const double a = ev[0] + ev[1], b = ev[2] + ev[3];
        const double m = std::max(a, b);
        const double lz = m + std::log(std::exp(a - m) + std::exp(b - m));
        const double pa = std::exp(a - lz), pb = std::exp(b - lz);
        const double ga = pa - (ys[i] == 0 ? 1.0 : 0.0);
        const double gb = pb - (ys[i] == 1 ? 1.0 : 0.0);
        dev[0] = dev[1] = ga;
        dev[2] = dev[3] = gb;
        return lz - (ys[i] == 0 ? a : b);
    };
    return loss;
}

} // namespace

TEST_CASE("Named design spaces", "[space]") {
    CHECK(space_names().size() == 6);
    const auto u = make_space("u3+cu3");
    CHECK(u.name == "U3+CU3");
    CHECK(u.n_blocks == 8);
    CHECK(make_space("RXYZ+U1+CU3").n_blocks == 4);
    CHECK(make_space("RXYZ+U1+CU3").n_layers() == 11);
    CHECK(make_space("IBMQ-Basis").n_blocks == 20);
    CHECK_FALSE(make_space("ibmq_basis").front_sampling);
    CHECK(make_space("RXYZ").prefix == std::vector<GateKind>{GateKind::SH});
    CHECK_THROWS_AS(make_space("nope"), ConfigError);
    CHECK_THROWS_AS(make_space("ZZ+RY", 4, 0), ConfigError);
    const auto j = space_to_json(make_space("ZX+XX", 5, 3));
    CHECK(space_from_json(j) == make_space("ZX+XX", 5, 3));
}

TEST_CASE("SuperCircuit layout", "[space]") {
    const auto s = build_supercircuit(make_space("U3+CU3", 4, 8));
    CHECK(s.circuit.gates.size() == 64);
    CHECK(s.n_params() == 192);
    CHECK(s.params->size() == 192);
    // block 0: U3 on 0..3 then CU3 ring
    CHECK(s.circuit.gates[0].kind == GateKind::U3);
    CHECK(s.circuit.gates[4].kind == GateKind::CU3);
    CHECK(s.circuit.gates[7].wires == std::array<std::uint32_t, 2>{3, 0});
    CHECK(s.circuit.gates[8].kind == GateKind::U3);
    CHECK(s.gate_at(1, 1, 2) == 14);

    const auto zz = build_supercircuit(make_space("ZZ+RY", 4, 1));
    CHECK(zz.circuit.gates.size() == 8);
    const auto rxyz = build_supercircuit(make_space("RXYZ", 4, 2));
    CHECK(rxyz.n_prefix_gates == 4);
    for (std::size_t g = 0; g < 4; ++g) CHECK(rxyz.circuit.gates[g].kind == GateKind::SH);
    CHECK(rxyz.circuit.gates[4].kind == GateKind::RX);
    CHECK(rxyz.n_params() == 2 * 12);
}

TEST_CASE("Space cardinality", "[space]") {
    using boost::multiprecision::cpp_int;
    const auto big = space_cardinality(make_space("RXYZ+U1+CU3", 4, 4));
    CHECK(big == cpp_int(1) << 88);
    CHECK(big.convert_to<double>() == Approx(3.09e26).epsilon(1e-2));
    DesignSpace one;
    one.n_qubits = 4;
    one.n_blocks = 1;
    one.layers = {GateKind::RY};
    CHECK(space_cardinality(one) == 4);
    DesignSpace two;
    two.n_qubits = 2;
    two.n_blocks = 2;
    two.layers = {GateKind::RY, GateKind::CNOT};
    CHECK(space_cardinality(two) == 16);
    CHECK_THROWS_AS(space_cardinality(make_space("IBMQ-Basis")), SpecError);
}

TEST_CASE("Spec text format", "[space]") {
    SubCircuitSpec s{3, {4, 4, 2, 1, 3, 3}};
    CHECK(format_spec(s) == "blocks=3; widths=4,4,2,1,3,3");
    CHECK(parse_spec(format_spec(s)) == s);
    CHECK(parse_spec("blocks=1;widths=2").widths == std::vector<std::size_t>{2});
    CHECK_THROWS_AS(parse_spec("blocks=x; widths=1"), FormatError);
    CHECK_THROWS_AS(parse_spec("blocks=1 widths=1"), FormatError);
    CHECK_THROWS_AS(parse_spec("depth=1; widths=1"), FormatError);
}

TEST_CASE("Front sampling", "[space]") {
    const auto super = build_supercircuit(make_space("U3+CU3", 4, 8));
    std::mt19937_64 rng(1);
    std::vector<std::vector<std::size_t>> seen(16, std::vector<std::size_t>(5, 0));
    std::set<std::size_t> depths;
    for (int i = 0; i < 10000; ++i) {
        const auto s = sample_front(super, rng);
        CHECK_NOTHROW(validate_spec(super.space, s));
        depths.insert(s.n_blocks);
        for (std::size_t k = 0; k < 16; ++k) ++seen[k][s.widths[k]];
    }
    CHECK(depths.size() == 8);
    for (const auto &row : seen) {
        CHECK(row[0] == 0);
        for (std::size_t w = 1; w <= 4; ++w) CHECK(row[w] > 0);
    }
    for (int i = 0; i < 200; ++i) CHECK(sample_front(super, rng, 8).n_blocks == 8);
    std::mt19937_64 a(5), b(5);
    CHECK(sample_front(super, a) == sample_front(super, b));
}

TEST_CASE("Restricted sampling bounds layer changes", "[space]") {
    auto super = build_supercircuit(make_space("U3+CU3", 4, 8));
    std::mt19937_64 rng(2);
    auto prev = sample_front(super, rng);
    std::size_t worst = 0;
    for (int i = 0; i < 10000; ++i) {
        const auto next = sample_restricted(super, prev, rng);
        worst = std::max(worst, layer_difference(super.space, prev, next));
        prev = next;
    }
    CHECK(worst <= 7);

    super.max_layer_diff = 0;
    CHECK(sample_restricted(super, prev, rng) == prev);

    auto wide = build_supercircuit(make_space("RXYZ+U1+CU3", 4, 4));
    wide.max_layer_diff = 1;
    const auto full = full_spec(wide.space);
    for (int i = 0; i < 200; ++i) CHECK(layer_difference(wide.space, full, sample_restricted(wide, full, rng)) <= 1);
}

TEST_CASE("Layer difference counts blocks present in one spec", "[space]") {
    const auto sp = make_space("U3+CU3", 4, 3);
    SubCircuitSpec a{2, {4, 4, 4, 4, 1, 1}};
    SubCircuitSpec b{3, {4, 3, 4, 4, 1, 1}};
    CHECK(layer_difference(sp, a, b) == 3);
    CHECK(layer_difference(sp, a, a) == 0);
}

TEST_CASE("Instantiation follows the front rule", "[space]") {
    const auto super = build_supercircuit(make_space("U3+CU3", 4, 2));
    const auto full = instantiate(super, full_spec(super.space));
    CHECK(full.circuit().gates == super.circuit.gates);
    CHECK(full.n_active() == super.n_params());

    const auto sub = instantiate(super, SubCircuitSpec{1, {4, 2, 4, 4}});
    REQUIRE(sub.circuit().gates.size() == 6);
    CHECK(sub.circuit().gates[4].kind == GateKind::CU3);
    CHECK(sub.circuit().gates[4].wires == std::array<std::uint32_t, 2>{0, 1});
    CHECK(sub.circuit().gates[5].wires == std::array<std::uint32_t, 2>{1, 2});
    CHECK(sub.n_active() == 18);

    const auto [standalone, values] = sub.extract();
    CHECK(standalone.n_params == 18);
    CHECK_NOTHROW(standalone.validate());
    CHECK(values.size() == 18);

    CHECK_THROWS_AS(instantiate(super, SubCircuitSpec{3, {4, 4, 4, 4}}), SpecError);
    CHECK_THROWS_AS(instantiate(super, SubCircuitSpec{1, {5, 4, 4, 4}}), SpecError);
    CHECK_THROWS_AS(instantiate(super, SubCircuitSpec{1, {4, 4}}), SpecError);
}

TEST_CASE("SubCircuit views alias shared storage", "[space]") {
    const auto super = build_supercircuit(make_space("U3+CU3", 4, 2));
    auto a = instantiate(super, SubCircuitSpec{1, {4, 4, 4, 4}});
    const auto b = instantiate(super, SubCircuitSpec{2, {2, 1, 3, 1}});
    a.set(0, 1.25);
    CHECK(b.get(0) == 1.25);
    CHECK((*super.params)[0] == 1.25);
    const auto [c, v] = b.extract();
    CHECK(v[0] == 1.25);
}

TEST_CASE("Block lower-bound schedule", "[space]") {
    CHECK(block_lower_bound(0, 100, 8) == 8);
    CHECK(block_lower_bound(50, 100, 8) == 1);
    CHECK(block_lower_bound(99, 100, 8) == 1);
    for (std::size_t s = 0; s < 100; ++s) CHECK(block_lower_bound(s + 1, 100, 8) <= block_lower_bound(s, 100, 8));
    CHECK(block_lower_bound(5, 10, 1) == 1);
}

TEST_CASE("SuperCircuit training updates only sampled slots", "[space]") {
    std::mt19937_64 init(3);
    auto super = build_supercircuit(make_space("U3+CU3", 4, 2), &init);
    const auto before = *super.params;
    grad::TrainTask task{toy_task(16, 1), std::nullopt};
    grad::TrainConfig cfg;
    cfg.epochs = 1;
    cfg.batch_size = 16;
    cfg.lr0 = 0.05;
    cfg.seed = 4;
    const auto r = train_supercircuit(super, task, cfg);
    REQUIRE(r.history.size() == 1);
    const auto sub = instantiate(super, r.history[0].spec);
    for (std::size_t i = 0; i < before.size(); ++i) {
        if (!sub.active()[i]) CHECK((*super.params)[i] == before[i]);
    }
    CHECK(r.history[0].spec.n_blocks == 2);  // lower bound starts at full depth
}

TEST_CASE("One full-spec step equals a plain training step", "[space]") {
    std::mt19937_64 init(3);
    auto super = build_supercircuit(make_space("IBMQ-Basis", 4, 1), &init);
    const auto start = *super.params;
    grad::TrainTask task{toy_task(8, 2), std::nullopt};
    grad::TrainConfig cfg;
    cfg.epochs = 1;
    cfg.batch_size = 8;
    cfg.lr0 = 0.05;
    (void)train_supercircuit(super, task, cfg);
    const auto plain = grad::train(build_supercircuit(make_space("IBMQ-Basis", 4, 1)).circuit, start, task, cfg);
    CHECK(*super.params == plain.params);
}

TEST_CASE("SuperCircuit training lowers inherited validation loss", "[space]") {
    std::mt19937_64 init(7);
    auto super = build_supercircuit(make_space("U3+CU3", 4, 2), &init);
    grad::TrainTask task{toy_task(32, 11), std::nullopt};
    const auto valid = toy_task(32, 12);
    std::mt19937_64 rng(8);
    std::vector<SubCircuitSpec> specs;
    for (int i = 0; i < 20; ++i) specs.push_back(sample_front(super, rng));
    auto median_loss = [&] {
        std::vector<double> losses;
        for (const auto &s : specs) {
            const auto sub = instantiate(super, s);
            losses.push_back(grad::evaluate_loss(sub.circuit(), sub.params(), valid));
        }
        std::nth_element(losses.begin(), losses.begin() + 10, losses.end());
        return losses[10];
    };
    const double before = median_loss();
    grad::TrainConfig cfg;
    cfg.epochs = 100;
    cfg.batch_size = 16;
    cfg.lr0 = 0.05;
    cfg.warmup_epochs = 5;
    cfg.seed = 9;
    (void)train_supercircuit(super, task, cfg);
    CHECK(median_loss() < before);
}
