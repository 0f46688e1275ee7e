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
 * @file acceptance.cpp
 * Acceptance checks. Prints one PASS/FAIL line per criterion with the
 * measured numbers, and exits non-zero if any criterion fails.
 */
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "qnas/cli/pipeline.hpp"
#include "qnas/error.hpp"
#include "qnas/evo/evo.hpp"
#include "qnas/grad/train.hpp"
#include "qnas/noise/simulate.hpp"
#include "qnas/prune/prune.hpp"
#include "qnas/qcompile/compile.hpp"
#include "qnas/space/space.hpp"
#include "qnas/tasks/hamiltonian.hpp"
#include "qnas/tasks/task.hpp"
#include "support/oracles.hpp"

using namespace qnas;
namespace fs = std::filesystem;

namespace {

const std::string kSource = QNAS_SOURCE_DIR;
const std::string kData = kSource + "/data";
constexpr std::array<std::uint64_t, 3> kSeeds{0, 1, 2};

struct Outcome {
    bool pass{false};
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string list(const std::vector<double> &v, int digits = 4) {
    std::string s;
    for (double x : v) s += fmt::format("{}{:.{}f}", s.empty() ? "" : ",", x, digits);
    return "[" + s + "]";
}

std::vector<double> ranks(const std::vector<double> &x) {
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] < x[b]; });
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

double spearman(const std::vector<double> &a, const std::vector<double> &b) {
    const auto ra = ranks(a), rb = ranks(b);
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

fs::path scratch(const std::string &name) {
    const auto dir = fs::temp_directory_path() / "qnas_acceptance" / name;
    fs::remove_all(dir);
    return dir;
}

/// The shipped synthetic QML config, redirected to a scratch run directory.
cli::RunConfig qml_config(std::uint64_t seed, const std::string &name, const std::string &estimator = "auto") {
    auto cfg = cli::load_config(kSource + "/configs/synthetic_qml.json");
    cfg.seed = seed;
    cfg.run_dir = scratch(name);
    cfg.search.estimator.kind = evo::parse_estimator_kind(estimator);
    return cfg;
}

cli::RunConfig vqe_config(std::uint64_t seed, const std::string &name) {
    auto cfg = cli::load_config(kSource + "/configs/h2_vqe.json");
    cfg.seed = seed;
    cfg.run_dir = scratch(name);
    return cfg;
}

/// SuperCircuit trained by the train-super stage of `cfg`, plus its task.
std::pair<space::SuperCircuit, tasks::Task> trained_super(const cli::RunConfig &cfg) {
    (void)cli::cmd_train_super(cfg);
    return {cli::load_super(cfg, cli::RunPaths{cfg.run_dir}.super_ckpt()), cli::build_task(cfg)};
}

// ---------------------------------------------------------------- criteria

Outcome simulator_correctness() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<std::size_t> len(1, 50);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const auto c = testing::random_circuit(4, len(rng), rng);
        const auto p = testing::random_angles(c.n_params, rng);
        const auto psi = qstate::run_circuit(c, p);
        const Eigen::VectorXcd ref = testing::circuit_full(c, p) * testing::zero_state(4);
        for (Eigen::Index k = 0; k < ref.size(); ++k) {
            worst = std::max(worst, std::abs(psi.amps()[static_cast<std::size_t>(k)] - ref[k]));
        }
    }
    const double dt = seconds_since(t0);
    return {worst < 1e-10 && dt < 10.0, fmt::format("50 circuits, max|damp| = {:.2e}, {:.2f} s", worst, dt)};
}

Outcome gradient_fidelity() {
    const auto rep = cli::grad_check(50, 202);
    return {rep.max_rel_error < 1e-5,
            fmt::format("{} circuits, {} params, max rel err = {:.2e}", rep.n_circuits, rep.n_params, rep.max_rel_error)};
}

/// max deviation from trace preservation and the most negative Choi eigenvalue.
std::pair<double, double> cptp_error(const Eigen::MatrixXcd &s, std::size_t w) {
    const std::size_t d = std::size_t{1} << w;
    Eigen::MatrixXcd choi(d * d, d * d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t k = 0; k < d; ++k)
                for (std::size_t l = 0; l < d; ++l) {
                    choi(static_cast<Eigen::Index>(i * d + k), static_cast<Eigen::Index>(j * d + l)) =
                        s(static_cast<Eigen::Index>((i << w) | j), static_cast<Eigen::Index>((k << w) | l));
                }
    double tp = 0.0;
    for (std::size_t k = 0; k < d; ++k)
        for (std::size_t l = 0; l < d; ++l) {
            qstate::cplx sum = 0.0;
            for (std::size_t i = 0; i < d; ++i) sum += s(static_cast<Eigen::Index>((i << w) | i), static_cast<Eigen::Index>((k << w) | l));
            tp = std::max(tp, std::abs(sum - (k == l ? 1.0 : 0.0)));
        }
    const double herm = (choi - choi.adjoint()).cwiseAbs().maxCoeff();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (choi + choi.adjoint()));
    return {std::max(tp, herm), std::min(0.0, es.eigenvalues().minCoeff())};
}

Outcome noise_backend() {
    std::mt19937_64 rng(303);
    const auto clean = noise::load_device_model(kData + "/devices/t5_noiseless.dev");
    const auto noisy = noise::load_device_model(kData + "/devices/t5_noisy.dev");
    const std::array<qstate::GateKind, 8> kinds{qstate::GateKind::U3, qstate::GateKind::CU3, qstate::GateKind::CNOT,
                                                qstate::GateKind::RX, qstate::GateKind::RZ, qstate::GateKind::SX,
                                                qstate::GateKind::H, qstate::GateKind::X};
    auto coupled_circuit = [&](std::size_t n_gates) {
        qstate::Circuit c;
        c.n_qubits = 5;
        std::uniform_int_distribution<std::size_t> pick(0, kinds.size() - 1), edge(0, noisy.coupling.size() - 1);
        std::uniform_int_distribution<std::uint32_t> wire(0, 4);
        std::uniform_real_distribution<double> ang(-3.0, 3.0);
        for (std::size_t i = 0; i < n_gates; ++i) {
            qstate::Gate g;
            g.kind = kinds[pick(rng)];
            if (g.arity() == 2) {
                auto [a, b] = noisy.coupling[edge(rng)];
                g.wires = {a, b};
            } else {
                g.wires[0] = wire(rng);
            }
            for (std::size_t k = 0; k < g.param_count(); ++k) g.angles[k] = ang(rng);
            c.gates.push_back(g);
        }
        return c;
    };
    const std::vector<std::uint32_t> all{0, 1, 2, 3, 4};
    double proj = 0.0;
    for (int t = 0; t < 20; ++t) {
        const auto c = coupled_circuit(30);
        const auto rho = noise::dm_run(c, clean, {}, all);
        const auto ref = noise::DensityMatrix::from_statevector(qstate::run_circuit(c, {}));
        for (std::size_t i = 0; i < rho.data().size(); ++i) proj = std::max(proj, std::abs(rho.data()[i] - ref.data()[i]));
    }
    double mixed = 0.0;
    std::uniform_real_distribution<double> ang(-3.0, 3.0);
    for (int t = 0; t < 20; ++t) {
        noise::DensityMatrix rho(1);
        const std::array a{ang(rng), ang(rng), ang(rng)};
        rho.apply_unitary(std::vector<std::uint32_t>{0}, qstate::gate_unitary(qstate::GateKind::U3, a));
        rho.apply_channel(noise::depolarizing_kraus(0.75, 1));
        mixed = std::max({mixed, std::abs(rho.at(0, 0) - 0.5), std::abs(rho.at(1, 1) - 0.5), std::abs(rho.at(0, 1))});
    }
    double tp = 0.0, neg = 0.0;
    auto check = [&](const noise::NoiseChannel &ch) {
        const auto [e, m] = cptp_error(noise::superoperator(ch), ch.kraus.front().rows() == 2 ? 1 : 2);
        tp = std::max(tp, e);
        neg = std::min(neg, m);
    };
    for (double p : {0.0, 1e-3, 0.05, 0.5, 0.75, 1.0}) {
        check(noise::depolarizing_kraus(p, 1));
        check(noise::depolarizing_kraus(p, 2));
    }
    for (double t : {0.0, 3.5e-8, 3e-7, 1e-6, 1e-4}) {
        check(noise::thermal_relaxation_kraus(80e-6, 60e-6, t));
        check(noise::thermal_relaxation_kraus(50e-6, 100e-6, t));
    }
    std::size_t n_ops = 0;
    for (int t = 0; t < 5; ++t) {
        const auto prog = noise::build_noisy_program(coupled_circuit(20), noisy, {}, all);
        for (const auto &op : prog.ops) {
            const auto [e, m] = cptp_error(op.superop, op.wires.size());
            tp = std::max(tp, e);
            neg = std::min(neg, m);
            ++n_ops;
        }
    }
    const bool ok = proj < 1e-9 && mixed < 1e-9 && tp < 1e-9 && neg > -1e-9;
    return {ok, fmt::format("projector {:.1e}, p=3/4 mixed {:.1e}, TP/Hermitian {:.1e}, min Choi eig {:.1e} "
                            "({} fused gate channels)",
                            proj, mixed, tp, neg, n_ops)};
}

Outcome u3_counts() {
    const double t = 0.7, p = -1.3, l = 2.1;
    const std::array<std::array<double, 3>, 7> cases{
        {{t, p, l}, {0, p, l}, {t, p, 0}, {t, 0, l}, {t, 0, 0}, {0, p, 0}, {0, 0, l}}};
    std::vector<std::size_t> counts;
    double worst = 0.0;
    for (const auto &[a, b, c] : cases) {
        const auto seq = qcompile::decompose_u3(a, b, c);
        counts.push_back(seq.size());
        testing::Dense u = testing::Dense::Identity(2, 2);
        for (const auto &g : seq) u = testing::gate_full(g, {}, 1) * u;
        const testing::Dense ref = qstate::gate_unitary(qstate::GateKind::U3, std::array{a, b, c});
        worst = std::max(worst, std::abs(testing::phase_fidelity(ref, u) - 1.0));
    }
    const bool ok = counts == std::vector<std::size_t>{5, 1, 4, 4, 4, 1, 1} && worst < 1e-10;
    return {ok, fmt::format("counts {}, max |fidelity - 1| = {:.1e}", fmt::join(counts, ","), worst)};
}

Outcome prune_schedule() {
    const prune::PruneSchedule s{0.05, 0.5, 0, 100, 100};
    const double mid = prune::prune_ratio(50, s);
    const bool ok = prune::prune_ratio(0, s) == 0.05 && prune::prune_ratio(100, s) == 0.5 &&
                    std::abs(mid - 0.443750) < 1e-12;
    return {ok, fmt::format("r(0) = {}, r(end) = {}, r(mid) = {:.12f}", prune::prune_ratio(0, s),
                            prune::prune_ratio(100, s), mid)};
}

/// Active slots of a SubCircuit are exactly the first `width` gates of every layer.
bool front_rule_holds(const space::SuperCircuit &super, const space::SubCircuitSpec &spec) {
    const auto sub = space::instantiate(super, spec);
    std::vector<std::uint8_t> want(super.n_params(), 0);
    std::size_t n_gates = 0;
    const auto &sp = super.space;
    for (std::size_t b = 0; b < spec.n_blocks; ++b) {
        for (std::size_t l = 0; l < sp.n_layers(); ++l) {
            const std::size_t w = spec.effective_width(b, l, sp.n_layers());
            for (std::size_t pos = 0; pos < w; ++pos) {
                const auto &g = super.circuit.gates[super.gate_at(b, l, pos)];
                for (std::size_t k = 0; k < g.param_count(); ++k) {
                    if (g.is_trainable(k)) want[static_cast<std::size_t>(g.slots[k])] = 1;
                }
                ++n_gates;
            }
        }
    }
    return sub.active() == want && sub.circuit().gates.size() == n_gates + super.n_prefix_gates;
}

Outcome sampling_rules() {
    const auto super = space::build_supercircuit(space::make_space("U3+CU3", 4, 8));
    std::mt19937_64 rng(606);
    auto prev = space::sample_front(super, rng);
    std::size_t worst = 0;
    bool front = front_rule_holds(super, prev);
    for (int i = 0; i < 10000; ++i) {
        const auto next = space::sample_restricted(super, prev, rng);
        worst = std::max(worst, space::layer_difference(super.space, prev, next));
        front = front && front_rule_holds(super, next);
        prev = next;
    }
    for (int i = 0; i < 2000; ++i) front = front && front_rule_holds(super, space::sample_front(super, rng));
    return {worst <= 7 && front, fmt::format("max layer diff {} over 10^4 restricted samples, front rule {}", worst,
                                             front ? "held" : "violated")};
}

Outcome repair_rule() {
    const auto a = evo::repair_mapping({1, 1, 3, 0}, 4);
    const auto b = evo::repair_mapping({0, 0, 0, 0}, 4);
    const bool ok = a == std::vector<std::uint32_t>{1, 2, 3, 0} && b == std::vector<std::uint32_t>{0, 1, 2, 3};
    return {ok, fmt::format("[1,1,3,0] -> [{}], [0,0,0,0] -> [{}]", fmt::join(a, ","), fmt::join(b, ","))};
}

Outcome ranking_fidelity() {
    const auto t0 = Clock::now();
    std::vector<double> rhos;
    for (auto seed : kSeeds) {
        const auto cfg = qml_config(seed, fmt::format("rank_{}", seed));
        const auto [super, task] = trained_super(cfg);
        std::mt19937_64 rng(seed + 1000);
        std::vector<double> inherited, scratch_loss;
        std::vector<std::string> seen;
        while (inherited.size() < 20) {
            const auto spec = space::sample_front(super, rng);
            const auto key = space::format_spec(spec);
            if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
            seen.push_back(key);
            const auto [circ, params] = space::instantiate(super, spec).extract();
            inherited.push_back(tasks::evaluate(task, circ, params, tasks::Split::Valid).loss);
            std::mt19937_64 init(seed + 1);
            const auto fresh = space::build_supercircuit(super.space, &init);
            const auto [c2, p2] = space::instantiate(fresh, spec).extract();
            auto tc = cfg.train_sub;
            tc.seed = seed;
            tc.epochs = 50;
            const auto res = grad::train(c2, p2, task.train_task(), tc);
            scratch_loss.push_back(tasks::evaluate(task, c2, res.params, tasks::Split::Valid).loss);
        }
        rhos.push_back(spearman(inherited, scratch_loss));
    }
    const double m = median(rhos);
    const double dt = seconds_since(t0);
    return {m >= 0.5 && dt < 1800.0,
            fmt::format("Spearman per seed {}, median {:.3f}, {:.1f} s", list(rhos, 3), m, dt)};
}

Outcome search_quality() {
    std::vector<double> evo_best, rnd_best;
    for (auto seed : kSeeds) {
        const auto cfg = qml_config(seed, fmt::format("search_{}", seed));
        const auto [super, task] = trained_super(cfg);
        const auto device = noise::load_device_model(kData + "/devices/t5_noisy.dev");
        evo::EvoConfig ec;
        ec.seed = seed;
        ec.jobs = 4;
        evo::EstimatorConfig est_cfg;
        est_cfg.max_samples = cfg.search.estimator.max_samples;
        evo::Estimator a(super, device, task, est_cfg);
        evo::Estimator b(super, device, task, est_cfg);
        const auto e = evo::evolve(a, ec);
        const auto r = evo::random_search(b, ec.population * (ec.iterations + 1), ec.population, seed + 77, ec.jobs);
        evo_best.push_back(e.best_score);
        rnd_best.push_back(r.best_score);
    }
    const double me = median(evo_best), mr = median(rnd_best);
    return {me <= mr, fmt::format("evo {} median {:.5f} vs random {} median {:.5f} (noisy valid loss, 1640 evals)",
                                  list(evo_best, 5), me, list(rnd_best, 5), mr)};
}

Outcome vqe_h2() {
    const auto h = tasks::load_hamiltonian(kData + "/h2.ham");
    const double exact = tasks::exact_ground_energy(h);
    std::vector<double> clean, searched, baseline;
    for (auto seed : kSeeds) {
        auto cfg = vqe_config(seed, fmt::format("h2_{}", seed));
        (void)cli::cmd_train_super(cfg);
        (void)cli::cmd_search(cfg);
        (void)cli::cmd_train_sub(cfg);
        const cli::RunPaths p{cfg.run_dir};
        const auto s = cli::cmd_eval(cfg, p.sub_ckpt());
        clean.push_back(s.noise_free.loss);
        searched.push_back(s.noisy.loss);

        auto base = vqe_config(seed, fmt::format("h2_full_{}", seed));
        base.circuit = "file:" + kSource + "/configs/genes/u3cu3_full_2x4.txt";
        (void)cli::cmd_search(base);
        (void)cli::cmd_train_sub(base);
        baseline.push_back(cli::cmd_eval(base, cli::RunPaths{base.run_dir}.sub_ckpt()).noisy.loss);
    }
    const double gap = median(clean) - exact;
    const bool ok = std::abs(exact + 1.85) <= 0.01 && std::abs(gap) <= 0.02 && median(searched) <= median(baseline);
    return {ok, fmt::format("exact {:.6f}; trained noise-free {} (median gap {:.4f}); noisy searched {} median {:.4f} "
                            "vs full-depth {} median {:.4f}",
                            exact, list(clean), gap, list(searched), median(searched), list(baseline),
                            median(baseline))};
}

Outcome pruning_payoff() {
    const auto cfg = qml_config(0, "prune_payoff");
    (void)cli::cmd_train_super(cfg);
    (void)cli::cmd_search(cfg);
    (void)cli::cmd_train_sub(cfg);
    const auto sweep = cli::cmd_prune(cfg);
    const cli::RunPaths p{cfg.run_dir};
    const auto ck = grad::load_checkpoint(p.sub_ckpt().string());
    const auto gene = evo::parse_gene(ck.meta.at("gene").get<std::string>());
    const auto task = cli::build_task(cfg);
    const auto device = cli::build_device(cfg);
    auto measure = [&](const std::vector<double> &params) {
        const auto clean = tasks::evaluate(task, ck.circuit, params, tasks::Split::Test);
        const auto cc = qcompile::route(ck.circuit, params, qcompile::QubitMapping{gene.mapping}, device);
        const auto noisy = tasks::evaluate_noisy(task, cc, device, tasks::Split::Test);
        return std::tuple{clean, noisy, qcompile::circuit_stats(cc.circuit)};
    };
    const auto &sel = sweep.best();
    const auto [c0, n0, s0] = measure(sweep.candidates[0].result.params);
    const auto [c1, n1, s1] = measure(sel.result.params);
    const bool ok = sel.ratio > 0.0 && !sel.degraded && c1.accuracy >= c0.accuracy && s1.n_gates < s0.n_gates &&
                    n1.accuracy >= n0.accuracy;
    return {ok, fmt::format("ratio {} ({} of {} pruned); test acc {:.4f} vs {:.4f}; gates {} vs {}; noisy acc {:.4f} "
                            "vs {:.4f} (noisy loss {:.4f} vs {:.4f})",
                            sel.ratio, prune::pruned_count(sel.result.mask), sel.result.mask.size(), c1.accuracy,
                            c0.accuracy, s1.n_gates, s0.n_gates, n1.accuracy, n0.accuracy, n1.loss, n0.loss)};
}

Outcome noise_adaptive_gain() {
    std::vector<double> aware, unaware, aware_loss, unaware_loss;
    for (auto seed : kSeeds) {
        const auto a = cli::run_pipeline(qml_config(seed, fmt::format("aware_{}", seed)));
        const auto u = cli::run_pipeline(qml_config(seed, fmt::format("unaware_{}", seed), "noise_free"));
        aware.push_back(a.noisy.accuracy);
        unaware.push_back(u.noisy.accuracy);
        aware_loss.push_back(a.noisy.loss);
        unaware_loss.push_back(u.noisy.loss);
    }
    const double ma = median(aware), mu = median(unaware);
    // pass/fail is on accuracy alone; the noisy loss is reported for context
    return {ma > mu, fmt::format("noisy test accuracy aware {} median {:.4f} vs noise-unaware {} median {:.4f}; "
                                 "noisy test loss aware median {:.4f} vs noise-unaware {:.4f}",
                                 list(aware), ma, list(unaware), mu, median(aware_loss), median(unaware_loss))};
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism() {
    auto a = qml_config(5, "determinism_a");
    auto b = qml_config(5, "determinism_b");
    a.jobs = 1;
    b.jobs = 4;
    (void)cli::run_pipeline(a);
    (void)cli::run_pipeline(b);
    std::size_t n = 0;
    std::vector<std::string> diff;
    for (const auto &entry : fs::directory_iterator(a.run_dir)) {
        const auto name = entry.path().filename();
        ++n;
        if (name == "config.json") {
            auto ja = nlohmann::json::parse(slurp(entry.path()));
            auto jb = nlohmann::json::parse(slurp(b.run_dir / name));
            for (auto *j : {&ja, &jb}) {
                j->erase("run_dir");
                j->erase("jobs");
            }
            if (ja != jb) diff.push_back(name.string());
        } else if (slurp(entry.path()) != slurp(b.run_dir / name)) {
            diff.push_back(name.string());
        }
    }
    return {diff.empty() && n >= 14,
            fmt::format("{} artifacts compared (jobs 1 vs 4){}", n,
                        diff.empty() ? ", all identical" : ", differing: " + fmt::format("{}", fmt::join(diff, " ")))};
}

} // namespace

int main(int argc, char **argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"simulator correctness", simulator_correctness},
        {"gradient fidelity", gradient_fidelity},
        {"noise backend", noise_backend},
        {"U3 compilation counts", u3_counts},
        {"pruning schedule", prune_schedule},
        {"sampling rules", sampling_rules},
        {"repair rule", repair_rule},
        {"ranking fidelity", ranking_fidelity},
        {"search quality", search_quality},
        {"VQE H2", vqe_h2},
        {"pruning payoff", pruning_payoff},
        {"noise-adaptive gain", noise_adaptive_gain},
        {"end-to-end determinism", determinism},
    };
    // optional filter: criterion numbers on the command line
    std::vector<std::size_t> only;
    for (int i = 1; i < argc; ++i) only.push_back(static_cast<std::size_t>(std::stoul(argv[i])));
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (!only.empty() && std::find(only.begin(), only.end(), i + 1) == only.end()) continue;
        const auto t0 = Clock::now();
        Outcome out;
        try {
            out = criteria[i].second();
        } catch (const std::exception &e) {
            out = {false, fmt::format("exception: {}", e.what())};
        }
        failures += out.pass ? 0 : 1;
        fmt::print("{} {:2} {}: {} [{:.1f} s]\n", out.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, out.detail,
                   seconds_since(t0));
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
