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
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>

#include <catch_amalgamated.hpp>
#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "qnas/error.hpp"
#include "qnas/grad/gradient.hpp"
#include "qnas/noise/simulate.hpp"
#include "qnas/qcompile/compile.hpp"
#include "qnas/tasks/dataset.hpp"
#include "qnas/tasks/hamiltonian.hpp"
#include "qnas/tasks/qml.hpp"
#include "qnas/tasks/task.hpp"
#include "support/oracles.hpp"

using namespace qnas;
using namespace qnas::tasks;
using qstate::GateKind;
using Catch::Approx;

namespace {

const std::filesystem::path kData{QNAS_TEST_DATA_DIR};

std::filesystem::path temp_dir(const std::string &name) {
    auto p = std::filesystem::temp_directory_path() / ("qnas_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

std::vector<std::uint8_t> file_bytes(const std::filesystem::path &p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

IdxImages fake_images(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> px(0, 255);
    IdxImages imgs{28, 28, {}};
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::uint8_t> img(784);
        for (auto &b : img) b = static_cast<std::uint8_t>(px(rng));
        imgs.images.push_back(img);
    }
    return imgs;
}

qstate::Circuit ansatz(std::size_t n, std::size_t layers) {
    qstate::Circuit c;
    c.n_qubits = n;
    for (std::size_t l = 0; l < layers; ++l) {
        for (std::uint32_t q = 0; q < n; ++q) {
            qstate::Gate g;
            g.kind = GateKind::U3;
            g.wires[0] = q;
            for (std::size_t k = 0; k < 3; ++k) g.slots[k] = static_cast<std::int32_t>(c.n_params++);
            c.gates.push_back(g);
        }
        for (std::uint32_t q = 0; q < n; ++q) {
            c.gates.push_back(qstate::make_gate(GateKind::CNOT, {q, static_cast<std::uint32_t>((q + 1) % n)}));
        }
    }
    return c;
}

// Parity-based VQE reference: explicit basis change, full readout channel.
double forward_noisy_energy(const Hamiltonian &h, const qcompile::CompiledCircuit &cc,
                            const noise::DeviceModel &dev) {
    const auto measured = cc.measured_qubits();
    const auto rho = noise::dm_run(cc.circuit, dev, {}, measured);
    const double r2 = 1.0 / std::numbers::sqrt2;
    Eigen::MatrixXcd hm(2, 2), sdg(2, 2);
    hm << r2, r2, r2, -r2;
    sdg << 1, 0, 0, qstate::cplx(0, -1);
    double e = 0.0;
    for (const auto &t : h.terms) {
        auto r = rho;
        std::size_t mask = 0;
        for (const auto &[q, p] : t.ops) {
            const auto phys = measured[q];
            const auto l = static_cast<std::uint32_t>(
                std::find(r.physical.begin(), r.physical.end(), phys) - r.physical.begin());
            const std::array<std::uint32_t, 1> w{l};
            if (p == qstate::Pauli::X) r.apply_unitary(w, hm);
            if (p == qstate::Pauli::Y) r.apply_unitary(w, hm * sdg);
            if (p != qstate::Pauli::I) mask |= std::size_t{1} << l;
        }
        const auto probs = noise::apply_readout_error(r.probabilities(), dev, r.physical);
        double acc = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            acc += (std::popcount(i & mask) % 2 ? -1.0 : 1.0) * probs[i];
        }
        e += t.coefficient * acc;
    }
    return e;
}

} // namespace

TEST_CASE("Encoder layers and feature order", "[encoder]") {
    const auto spec = mnist4_encoder();
    CHECK(spec.n_features() == 16);
    CHECK(format_encoder(spec) == "4RY,4RZ,4RX,4RY");
    CHECK(parse_encoder("4RY, 4RZ,4RX,4RY", 4) == spec);
    CHECK_THROWS_AS(parse_encoder("4CNOT", 4), FormatError);
    CHECK_THROWS_AS(parse_encoder("RY", 4), FormatError);

    std::vector<double> x(16);
    std::iota(x.begin(), x.end(), 0.0);
    const auto gates = encode(x, spec);
    REQUIRE(gates.size() == 16);
    for (std::size_t i = 0; i < 16; ++i) {
        CHECK(gates[i].wires[0] == i % 4);
        CHECK(gates[i].angles[0] == x[i]);
        CHECK_FALSE(gates[i].is_trainable(0));
    }
    CHECK(gates[4].kind == GateKind::RZ);
    CHECK(gates[8].kind == GateKind::RX);
    CHECK_THROWS_AS(encode(std::vector<double>(15), spec), ArityError);

    auto st = qstate::new_zero_state(4);
    for (const auto &g : encode(std::vector<double>(16, 0.0), spec)) st.apply(g);
    CHECK(std::abs(st.amps()[0] - qstate::cplx(1.0)) < 1e-15);

    const auto gen = rotation_encoder(4, 36);
    CHECK(gen.n_features() == 36);
    CHECK(gen.layers.size() == 9);
}

TEST_CASE("IDX files round-trip and reject bad input", "[idx]") {
    const auto dir = temp_dir("idx");
    const auto imgs = fake_images(5, 1);
    const std::vector<std::uint8_t> labels{3, 6, 3, 1, 0};
    write_idx_images(dir / "img", imgs);
    write_idx_labels(dir / "lbl", labels);
    const auto back = read_idx_images(dir / "img");
    CHECK(back.rows == 28);
    CHECK(back.images == imgs.images);
    CHECK(read_idx_labels(dir / "lbl") == labels);

    // re-serialise a subset and compare bytes with the source
    IdxImages sub{28, 28, {imgs.images[0], imgs.images[1]}};
    write_idx_images(dir / "sub", sub);
    const auto src = file_bytes(dir / "img");
    const auto out = file_bytes(dir / "sub");
    REQUIRE(out.size() == 16 + 2 * 784);
    CHECK(std::equal(out.begin() + 16, out.end(), src.begin() + 16));

    const auto d = load_mnist_idx(dir / "img", dir / "lbl");
    CHECK(d.size() == 5);
    CHECK(d.features[0][0] == Approx(imgs.images[0][0] / 255.0));
    CHECK(d.labels[1] == 6);

    auto bytes = file_bytes(dir / "img");
    bytes.pop_back();
    std::ofstream(dir / "trunc", std::ios::binary).write(reinterpret_cast<const char *>(bytes.data()),
                                                         static_cast<std::streamsize>(bytes.size()));
    CHECK_THROWS_AS(read_idx_images(dir / "trunc"), FormatError);
    CHECK_THROWS_AS(read_idx_images(dir / "lbl"), FormatError);
    CHECK_THROWS_AS(read_idx_labels(dir / "img"), FormatError);
    CHECK_THROWS_AS(read_idx_labels(dir / "missing"), ConfigError);
}

TEST_CASE("Crop and average pooling", "[preprocess]") {
    for (double v : preprocess(std::vector<double>(784, 0.3), 4)) CHECK(v == Approx(0.3));
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> img(784);
    for (auto &x : img) x = u(rng);
    double crop = 0.0;
    for (std::size_t r = 2; r < 26; ++r)
        for (std::size_t c = 2; c < 26; ++c) crop += img[r * 28 + c];
    crop /= 576.0;
    for (std::size_t t : {4, 6}) {
        const auto p = preprocess(img, t);
        CHECK(p.size() == t * t);
        CHECK(std::accumulate(p.begin(), p.end(), 0.0) / static_cast<double>(p.size()) == Approx(crop).epsilon(1e-12));
    }
    // top-left 6x6 window of the crop
    double tl = 0.0;
    for (std::size_t r = 2; r < 8; ++r)
        for (std::size_t c = 2; c < 8; ++c) tl += img[r * 28 + c];
    CHECK(preprocess(img, 4)[0] == Approx(tl / 36.0));
    CHECK_THROWS_AS(preprocess(img, 5), ConfigError);
    CHECK(preprocess(img, 4) == preprocess(img, 4));
}

TEST_CASE("MNIST loading filters, relabels and standardises", "[mnist]") {
    const auto dir = temp_dir("mnist");
    std::vector<std::uint8_t> train_l, test_l;
    for (int i = 0; i < 200; ++i) train_l.push_back(static_cast<std::uint8_t>(i % 10));
    for (int i = 0; i < 100; ++i) test_l.push_back(static_cast<std::uint8_t>(i % 10));
    write_idx_images(dir / "train-images-idx3-ubyte", fake_images(200, 3));
    write_idx_labels(dir / "train-labels-idx1-ubyte", train_l);
    write_idx_images(dir / "t10k-images-idx3-ubyte", fake_images(100, 4));
    write_idx_labels(dir / "t10k-labels-idx1-ubyte", test_l);
    const std::vector<int> digits{3, 6};
    const auto d = load_mnist(dir, digits, 4, 7, 15);
    CHECK(d.train.size() == 38);
    CHECK(d.valid.size() == 2);
    CHECK(d.test.size() == 15);
    CHECK(d.train.dim() == 16);
    CHECK_NOTHROW(d.train.validate());
    double sum = 0.0, sq = 0.0;
    for (const auto &row : d.train.features)
        for (double x : row) { sum += x; sq += x * x; }
    const double n = 38.0 * 16.0;
    CHECK(sum / n == Approx(0.0).margin(1e-12));
    CHECK(std::sqrt(sq / n) == Approx(std::numbers::pi));
    const auto again = load_mnist(dir, digits, 4, 7, 15);
    CHECK(again.train.features == d.train.features);
    CHECK(load_mnist(dir, digits, 4, 7, 15, 10).train.size() == 10);

    ::setenv("QNAS_DATA_DIR", dir.c_str(), 1);
    CHECK(data_dir() == dir);
    ::unsetenv("QNAS_DATA_DIR");
    CHECK(data_dir() == "data");
}

TEST_CASE("Synthetic dataset construction", "[synthetic]") {
    const auto d = synthetic_dataset(300, 2, 16, 5);
    CHECK(d.train.size() == 180);
    CHECK(d.valid.size() == 60);
    CHECK(d.test.size() == 60);
    std::array<int, 2> counts{};
    for (const auto *s : {&d.train, &d.valid, &d.test})
        for (int l : s->labels) ++counts[static_cast<std::size_t>(l)];
    CHECK(counts[0] == 150);
    CHECK(counts[1] == 150);

    // margin: every point is >= 0.5 from the bisector between its center and any other
    for (std::size_t k : {2, 4}) {
        const auto data = synthetic_dataset(300, k, 16, 9);
        const auto centers = synthetic_centers(k, 16, 9);
        double worst = 1e9;
        for (const auto *s : {&data.train, &data.valid, &data.test}) {
            for (std::size_t i = 0; i < s->size(); ++i) {
                const Eigen::Map<const Eigen::VectorXd> x(s->features[i].data(), 16);
                const auto own = static_cast<std::size_t>(s->labels[i]);
                const Eigen::Map<const Eigen::VectorXd> a(centers[own].data(), 16);
                for (std::size_t c = 0; c < k; ++c) {
                    if (c == own) continue;
                    const Eigen::Map<const Eigen::VectorXd> b(centers[c].data(), 16);
                    const Eigen::VectorXd w = (a - b).normalized();
                    worst = std::min(worst, w.dot(x - (a + b) / 2.0));
                }
            }
        }
        CHECK(worst >= 0.5);
    }

    const auto again = synthetic_dataset(300, 2, 16, 5);
    CHECK(again.train.features == d.train.features);
    CHECK(again.test.labels == d.test.labels);
    CHECK(synthetic_dataset(300, 2, 16, 6).train.features != d.train.features);
    CHECK_THROWS_AS(synthetic_dataset(300, 1, 16, 5), ConfigError);
}

TEST_CASE("Classification readout", "[readout]") {
    const auto st = qstate::new_zero_state(4);
    for (double p : qml_readout(st, 4)) CHECK(p == Approx(0.25));
    auto s2 = qstate::new_zero_state(4);
    s2.apply(qstate::make_gate(GateKind::X, {0}));
    s2.apply(qstate::make_gate(GateKind::X, {1}));
    const auto p2 = qml_readout(s2, 2);
    CHECK(p2[1] == Approx(1.0 / (1.0 + std::exp(-4.0))).epsilon(1e-12));
    CHECK(p2[1] == Approx(0.982).margin(5e-4));
    CHECK(p2[0] + p2[1] == Approx(1.0));
    CHECK_THROWS_AS(qml_logits(std::vector<double>(4), 3), ConfigError);
    CHECK_THROWS_AS(qml_logits(std::vector<double>(3), 2), ArityError);

    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> l{u(rng), u(rng), u(rng), u(rng)};
        const auto p = softmax(l);
        double s = 0.0;
        for (double x : p) { CHECK(x >= 0.0); s += x; }
        CHECK(s == Approx(1.0));
        std::vector<double> perm{l[2], l[0], l[3], l[1]};
        const auto q = softmax(perm);
        CHECK(q[0] == Approx(p[2]));
        CHECK(q[1] == Approx(p[0]));
        CHECK(q[3] == Approx(p[1]));
    }

    // density-matrix readout without a device equals the statevector path
    const auto rho = noise::DensityMatrix::from_statevector(s2);
    const auto pd = qml_readout(rho, 2);
    CHECK(pd[1] == Approx(p2[1]).epsilon(1e-12));
}

TEST_CASE("QML loss gradients match finite differences", "[loss]") {
    const auto data = synthetic_dataset(20, 2, 16, 1);
    const auto loss = qml_loss(data.train, mnist4_encoder());
    const auto c = ansatz(4, 2);
    std::mt19937_64 rng(3);
    const auto params = testing::random_angles(c.n_params, rng);
    const auto ps = grad::param_shift_grad(c, loss, params);
    const auto fd = grad::finite_diff_grad(c, loss, params, 1e-5);
    for (std::size_t i = 0; i < fd.size(); ++i) CHECK(ps.grad[i] == Approx(fd[i]).margin(1e-7));

    const auto four = synthetic_dataset(40, 4, 16, 2);
    const auto loss4 = qml_loss(four.train, mnist4_encoder());
    const auto ps4 = grad::param_shift_grad(c, loss4, params);
    const auto fd4 = grad::finite_diff_grad(c, loss4, params, 1e-5);
    for (std::size_t i = 0; i < fd4.size(); ++i) CHECK(ps4.grad[i] == Approx(fd4[i]).margin(1e-7));

    CHECK_THROWS_AS(qml_loss(synthetic_dataset(20, 2, 8, 1).train, mnist4_encoder()), ConfigError);
}

TEST_CASE("Hamiltonian files", "[hamiltonian]") {
    const auto z = parse_hamiltonian_string("1.0 Z\n");
    CHECK(z.n_qubits == 1);
    REQUIRE(z.terms.size() == 1);
    CHECK(z.terms[0].ops.at(0) == qstate::Pauli::Z);
    const auto xy = parse_hamiltonian_string("0.5 XX\n0.5 YY  # singlet\n");
    CHECK(xy.n_qubits == 2);
    CHECK(xy.terms.size() == 2);
    const auto ziz = parse_hamiltonian_string("-0.4804 ZIZ");
    CHECK(ziz.terms[0].ops.size() == 2);
    CHECK(pauli_word(parse_hamiltonian_string("1 XIY").terms[0], 3) == "XIY");
    CHECK(parse_hamiltonian_string("1 XI").terms[0].ops.at(1) == qstate::Pauli::X);
    CHECK_THROWS_AS(parse_hamiltonian_string("1 Z\n1 ZZ"), FormatError);
    CHECK_THROWS_AS(parse_hamiltonian_string("1 ZQ"), FormatError);
    CHECK_THROWS_AS(parse_hamiltonian_string("x ZZ"), FormatError);
    CHECK_THROWS_AS(parse_hamiltonian_string("# nothing\n"), FormatError);

    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-1, 1);
    std::uniform_int_distribution<int> pick(0, 3);
    for (int t = 0; t < 20; ++t) {
        std::string text;
        for (int k = 0; k < 6; ++k) {
            std::string w;
            for (int q = 0; q < 3; ++q) w += "IXYZ"[pick(rng)];
            text += fmt::format("{:.17g} {}\n", u(rng), w);
        }
        const auto h = parse_hamiltonian_string(text);
        CHECK(parse_hamiltonian_string(format_hamiltonian(h)) == h);
    }
}

TEST_CASE("Exact ground energies", "[hamiltonian]") {
    CHECK(exact_ground_energy(parse_hamiltonian_string("1 Z")) == Approx(-1.0));
    CHECK(exact_ground_energy(parse_hamiltonian_string("0.5 XX\n0.5 YY")) == Approx(-1.0));
    const auto h2 = load_hamiltonian(kData / "h2.ham");
    CHECK(h2.n_qubits == 2);
    CHECK(std::abs(exact_ground_energy(h2) - (-1.85)) <= 0.01);
    CHECK(exact_ground_energy(h2) == Approx(-1.8572750302).margin(1e-8));
    Hamiltonian big{13, {qstate::PauliString{}}};
    CHECK_THROWS_AS(exact_ground_energy(big), CapacityError);
}

TEST_CASE("VQE expectation matches the dense Hamiltonian", "[vqe]") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1, 1);
    std::uniform_int_distribution<int> pick(0, 3);
    for (int t = 0; t < 20; ++t) {
        std::string text = "0.3 III\n";
        for (int k = 0; k < 8; ++k) {
            std::string w;
            for (int q = 0; q < 3; ++q) w += "IXYZ"[pick(rng)];
            text += fmt::format("{:.17g} {}\n", u(rng), w);
        }
        const auto h = parse_hamiltonian_string(text);
        const auto c = testing::random_circuit(3, 20, rng);
        const auto params = testing::random_angles(c.n_params, rng);
        const Eigen::VectorXcd psi = testing::circuit_full(c, params) * testing::zero_state(3);
        // dense oracle from Kronecker products, independent of dense_hamiltonian
        Eigen::MatrixXcd hd = Eigen::MatrixXcd::Zero(8, 8);
        for (const auto &term : h.terms) {
            Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(1, 1);
            for (std::uint32_t q = 3; q-- > 0;) {
                Eigen::MatrixXcd f = Eigen::MatrixXcd::Identity(2, 2);
                if (term.ops.count(q)) {
                    switch (term.ops.at(q)) {
                    case qstate::Pauli::X: f << 0, 1, 1, 0; break;
                    case qstate::Pauli::Y: f << 0, qstate::cplx(0, -1), qstate::cplx(0, 1), 0; break;
                    case qstate::Pauli::Z: f << 1, 0, 0, -1; break;
                    default: break;
                    }
                }
                m = testing::kron(m, f);
            }
            hd += term.coefficient * m;
        }
        CHECK((hd - dense_hamiltonian(h)).norm() < 1e-12);
        const double ref = (psi.adjoint() * hd * psi)(0, 0).real();
        CHECK(std::abs(vqe_expectation(c, params, h) - ref) < 1e-9);
    }
    const auto z0 = parse_hamiltonian_string("1 Z");
    qstate::Circuit id1;
    id1.n_qubits = 1;
    CHECK(vqe_expectation(id1, {}, z0) == Approx(1.0));
    const auto c2 = ansatz(2, 1);
    const auto constant = parse_hamiltonian_string("-0.7 II");
    CHECK(vqe_expectation(c2, testing::random_angles(c2.n_params, rng), constant) == Approx(-0.7));
    CHECK_THROWS_AS(vqe_expectation(ansatz(3, 1), std::vector<double>(9), z0), ArityError);
}

TEST_CASE("Variational principle on the bundled H2", "[vqe]") {
    const auto h2 = load_hamiltonian(kData / "h2.ham");
    const double e0 = exact_ground_energy(h2);
    const auto c = ansatz(2, 2);
    std::mt19937_64 rng(10);
    for (int t = 0; t < 100; ++t) {
        CHECK(vqe_expectation(c, testing::random_angles(c.n_params, rng), h2) >= e0 - 1e-12);
    }
}

TEST_CASE("Task metrics: noise-free and noiseless-device agree", "[task]") {
    const auto task = make_qml_task(synthetic_dataset(60, 2, 16, 3), mnist4_encoder());
    CHECK(task.train_task().valid.has_value());
    const auto c = ansatz(4, 1);
    std::mt19937_64 rng(5);
    const auto params = testing::random_angles(c.n_params, rng);
    const auto clean = evaluate(task, c, params, Split::Valid);
    CHECK(clean.loss == Approx(grad::evaluate_loss(c, params, task.loss(Split::Valid))).epsilon(1e-12));
    CHECK(clean.accuracy >= 0.0);

    const auto dev = noise::load_device_model(kData / "devices/t5_noiseless.dev");
    const auto cc = qcompile::route(c, params, qcompile::QubitMapping{{4, 3, 1, 0}}, dev);
    const auto noisy = evaluate_noisy(task, cc, dev, Split::Valid);
    CHECK(noisy.loss == Approx(clean.loss).margin(1e-6));
    CHECK(noisy.accuracy == clean.accuracy);

    const auto vqe = make_vqe_task(load_hamiltonian(kData / "h2.ham"));
    CHECK_FALSE(vqe.train_task().valid.has_value());
    const auto c2 = ansatz(2, 2);
    const auto p2 = testing::random_angles(c2.n_params, rng);
    const auto cc2 = qcompile::route(c2, p2, qcompile::QubitMapping{{3, 1}}, dev);
    CHECK(evaluate_noisy(vqe, cc2, dev, Split::Test).loss ==
          Approx(evaluate(vqe, c2, p2, Split::Test).loss).margin(1e-9));
}

TEST_CASE("Noisy QML metrics match a forward density-matrix run", "[task]") {
    const auto task = make_qml_task(synthetic_dataset(40, 2, 16, 4), mnist4_encoder());
    const auto dev = noise::load_device_model(kData / "devices/t5_noisy.dev");
    const auto c = ansatz(4, 2);
    std::mt19937_64 rng(6);
    const auto params = testing::random_angles(c.n_params, rng);
    const qcompile::QubitMapping mapping{{2, 1, 3, 0}};
    const auto cc = qcompile::route(c, params, mapping, dev);
    const auto fast = evaluate_noisy(task, cc, dev, Split::Valid);

    double total = 0.0;
    std::size_t correct = 0;
    const auto &valid = task.data.valid;
    for (std::size_t i = 0; i < valid.size(); ++i) {
        qstate::Circuit full;
        full.n_qubits = 4;
        for (const auto &g : encode(valid.features[i], task.encoder)) full.gates.push_back(g);
        full.append(c);
        const auto routed = qcompile::route(full, params, mapping, dev);
        REQUIRE(routed.measured_qubits() == cc.measured_qubits());
        const auto rho = noise::dm_run(routed.circuit, dev, {}, routed.measured_qubits());
        std::vector<std::uint32_t> local;
        for (auto q : routed.measured_qubits()) {
            local.push_back(static_cast<std::uint32_t>(
                std::find(rho.physical.begin(), rho.physical.end(), q) - rho.physical.begin()));
        }
        const auto p = qml_readout(rho, 2, local, &dev);
        const auto label = static_cast<std::size_t>(valid.labels[i]);
        total += -std::log(p[label]);
        correct += (p[label] >= p[1 - label]) == true ? 1 : 0;
    }
    CHECK(fast.loss == Approx(total / static_cast<double>(valid.size())).epsilon(1e-9));
    CHECK(fast.accuracy == Approx(static_cast<double>(correct) / static_cast<double>(valid.size())));

    NoisyOptions few;
    few.max_samples = 3;
    CHECK_NOTHROW(evaluate_noisy(task, cc, dev, Split::Valid, few));
    NoisyOptions no_readout;
    no_readout.readout = false;
    CHECK(evaluate_noisy(task, cc, dev, Split::Valid, no_readout).loss != fast.loss);
}

TEST_CASE("Noisy VQE energy matches explicit basis-change readout", "[task]") {
    const auto h = parse_hamiltonian_string("0.2 III\n-0.5 ZIZ\n0.3 XYI\n0.7 IYX\n-0.4 ZZZ\n0.25 XIX\n");
    const auto task = make_vqe_task(h);
    const auto dev = noise::load_device_model(kData / "devices/t5_noisy.dev");
    const auto c = ansatz(3, 2);
    std::mt19937_64 rng(12);
    const auto params = testing::random_angles(c.n_params, rng);
    const auto cc = qcompile::route(c, params, qcompile::QubitMapping{{0, 2, 3}}, dev);
    const double e = evaluate_noisy(task, cc, dev, Split::Test).loss;
    CHECK(e == Approx(forward_noisy_energy(h, cc, dev)).epsilon(1e-9));
    CHECK(std::abs(e - evaluate(task, c, params, Split::Test).loss) > 1e-4);
}
