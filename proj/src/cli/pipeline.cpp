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
#include "qnas/cli/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "qnas/error.hpp"
#include "qnas/grad/gradient.hpp"
#include "qnas/noise/simulate.hpp"
#include "qnas/tasks/dataset.hpp"
#include "qnas/tasks/hamiltonian.hpp"

namespace qnas::cli {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double x) { return fmt::format("{:.12g}", x); }

void check_keys(const json &j, std::initializer_list<std::string_view> allowed, const std::string &where) {
    if (!j.is_object()) {
        throw ConfigError(fmt::format("{}: expected an object", where));
    }
    for (const auto &[key, _] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError(fmt::format("{}: unknown field '{}'", where, key));
        }
    }
}

template <typename T> void read(const json &j, const char *key, T &out, const std::string &where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception &) {
        throw ConfigError(fmt::format("{}.{}: wrong type", where, key));
    }
}

std::string resolve(const std::string &p, const fs::path &base) {
    if (p.empty() || base.empty() || fs::path(p).is_absolute()) return p;
    return (base / p).lexically_normal().string();
}

grad::GradMethod parse_method(const std::string &name, const std::string &where) {
    if (name == "adjoint") return grad::GradMethod::Adjoint;
    if (name == "param_shift") return grad::GradMethod::ParamShift;
    throw ConfigError(fmt::format("{}.method: unknown '{}' (adjoint, param_shift)", where, name));
}

std::string method_name(grad::GradMethod m) {
    return m == grad::GradMethod::Adjoint ? "adjoint" : "param_shift";
}

grad::TrainConfig train_from_json(const json &j, grad::TrainConfig t, const std::string &where) {
    check_keys(j, {"lr0", "weight_decay", "epochs", "batch_size", "warmup_epochs", "method"}, where);
    read(j, "lr0", t.lr0, where);
    read(j, "weight_decay", t.weight_decay, where);
    read(j, "epochs", t.epochs, where);
    read(j, "batch_size", t.batch_size, where);
    read(j, "warmup_epochs", t.warmup_epochs, where);
    if (j.contains("method")) {
        std::string m;
        read(j, "method", m, where);
        t.method = parse_method(m, where);
    }
    return t;
}

json train_to_json(const grad::TrainConfig &t) {
    return {{"lr0", t.lr0},
            {"weight_decay", t.weight_decay},
            {"epochs", t.epochs},
            {"batch_size", t.batch_size},
            {"warmup_epochs", t.warmup_epochs},
            {"method", method_name(t.method)}};
}

void validate_train(const grad::TrainConfig &t, const std::string &where) {
    if (!(t.lr0 > 0.0) || !std::isfinite(t.lr0)) throw ConfigError(where + ".lr0 must be positive");
    if (t.weight_decay < 0.0) throw ConfigError(where + ".weight_decay must be non-negative");
    if (t.epochs == 0) throw ConfigError(where + ".epochs must be positive");
    if (t.batch_size == 0) throw ConfigError(where + ".batch_size must be positive");
    if (t.warmup_epochs >= t.epochs) throw ConfigError(where + ".warmup_epochs must be below epochs");
}

void require_file(const std::string &path, const std::string &field) {
    if (!fs::is_regular_file(path)) {
        throw ConfigError(fmt::format("{}: file '{}' not found", field, path));
    }
}

std::string read_text(const fs::path &path, const std::string &what) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(fmt::format("{} '{}' not found; run the earlier stage first", what, path.string()));
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::ofstream open_out(const fs::path &path) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError(fmt::format("cannot write {}", path.string()));
    }
    return out;
}

std::string trim(std::string s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    return s;
}

bool bypass_search(const RunConfig &cfg) { return cfg.circuit.rfind("file:", 0) == 0; }

std::string bypass_file(const RunConfig &cfg) { return cfg.circuit.substr(5); }

evo::Gene read_gene(const RunPaths &paths) { return evo::parse_gene(trim(read_text(paths.gene(), "gene file"))); }

evo::Gene gene_of(const grad::Checkpoint &ck, const fs::path &path) {
    if (!ck.meta.contains("gene")) {
        throw ConfigError(fmt::format("checkpoint {} carries no gene", path.string()));
    }
    return evo::parse_gene(ck.meta.at("gene").get<std::string>());
}

grad::Checkpoint load_stage_ckpt(const fs::path &path, std::initializer_list<std::string_view> stages) {
    if (!fs::is_regular_file(path)) {
        throw ConfigError(fmt::format("checkpoint '{}' not found; run the earlier stage first", path.string()));
    }
    auto ck = grad::load_checkpoint(path.string());
    const auto stage = ck.meta.value("stage", std::string{});
    if (std::find(stages.begin(), stages.end(), stage) == stages.end()) {
        throw ConfigError(fmt::format("checkpoint {} comes from stage '{}'", path.string(), stage));
    }
    return ck;
}

} // namespace

// ---------------------------------------------------------------- config

RunConfig config_from_json(const json &j, const fs::path &base_dir) {
    check_keys(j, {"run_dir", "seed", "task", "space", "n_qubits", "n_blocks", "max_layer_diff", "device",
                   "train_super", "train_sub", "search", "prune", "circuit", "jobs"},
               "config");
    RunConfig cfg;
    cfg.train_super.warmup_epochs = 0;
    std::string run_dir = cfg.run_dir.string();
    read(j, "run_dir", run_dir, "config");
    cfg.run_dir = resolve(run_dir, base_dir);
    read(j, "seed", cfg.seed, "config");
    read(j, "space", cfg.space, "config");
    read(j, "n_qubits", cfg.n_qubits, "config");
    if (j.contains("n_blocks") && !j.at("n_blocks").is_null()) {
        std::size_t b = 0;
        read(j, "n_blocks", b, "config");
        cfg.n_blocks = b;
    }
    read(j, "max_layer_diff", cfg.max_layer_diff, "config");
    read(j, "device", cfg.device, "config");
    if (cfg.device != "ideal") cfg.device = resolve(cfg.device, base_dir);
    read(j, "circuit", cfg.circuit, "config");
    if (bypass_search(cfg)) cfg.circuit = "file:" + resolve(bypass_file(cfg), base_dir);
    read(j, "jobs", cfg.jobs, "config");

    if (j.contains("task")) {
        const auto &t = j.at("task");
        check_keys(t, {"kind", "dataset", "n_samples", "n_classes", "dim", "digits", "image_size", "n_test",
                       "max_train", "data_dir", "encoder", "data_seed", "hamiltonian"},
                   "task");
        auto &tc = cfg.task;
        read(t, "kind", tc.kind, "task");
        read(t, "dataset", tc.dataset, "task");
        read(t, "n_samples", tc.n_samples, "task");
        read(t, "n_classes", tc.n_classes, "task");
        read(t, "dim", tc.dim, "task");
        read(t, "digits", tc.digits, "task");
        read(t, "image_size", tc.image_size, "task");
        read(t, "n_test", tc.n_test, "task");
        read(t, "max_train", tc.max_train, "task");
        read(t, "data_dir", tc.data_dir, "task");
        tc.data_dir = resolve(tc.data_dir, base_dir);
        read(t, "encoder", tc.encoder, "task");
        if (t.contains("data_seed") && !t.at("data_seed").is_null()) {
            std::uint64_t s = 0;
            read(t, "data_seed", s, "task");
            tc.data_seed = s;
        }
        read(t, "hamiltonian", tc.hamiltonian, "task");
        tc.hamiltonian = resolve(tc.hamiltonian, base_dir);
    }
    if (j.contains("train_super")) cfg.train_super = train_from_json(j.at("train_super"), cfg.train_super, "train_super");
    if (j.contains("train_sub")) cfg.train_sub = train_from_json(j.at("train_sub"), cfg.train_sub, "train_sub");
    if (j.contains("search")) {
        const auto &s = j.at("search");
        check_keys(s, {"method", "estimator", "split", "max_samples", "readout", "iterations", "population",
                       "parents", "mutation_count", "mutation_prob", "crossover_count"},
                   "search");
        auto &sc = cfg.search;
        read(s, "method", sc.method, "search");
        if (s.contains("estimator")) {
            std::string k;
            read(s, "estimator", k, "search");
            sc.estimator.kind = evo::parse_estimator_kind(k);
        }
        if (s.contains("split")) {
            std::string k;
            read(s, "split", k, "search");
            sc.estimator.split = tasks::parse_split(k);
        }
        read(s, "max_samples", sc.estimator.max_samples, "search");
        read(s, "readout", sc.estimator.readout, "search");
        read(s, "iterations", sc.evo.iterations, "search");
        read(s, "population", sc.evo.population, "search");
        read(s, "parents", sc.evo.parents, "search");
        read(s, "mutation_count", sc.evo.mutation_count, "search");
        read(s, "mutation_prob", sc.evo.mutation_prob, "search");
        read(s, "crossover_count", sc.evo.crossover_count, "search");
    }
    if (j.contains("prune")) {
        const auto &p = j.at("prune");
        check_keys(p, {"ratios", "r_initial", "loss_tolerance", "epochs"}, "prune");
        read(p, "ratios", cfg.prune.ratios, "prune");
        read(p, "r_initial", cfg.prune.r_initial, "prune");
        read(p, "loss_tolerance", cfg.prune.loss_tolerance, "prune");
        if (p.contains("epochs") && !p.at("epochs").is_null()) {
            std::size_t e = 0;
            read(p, "epochs", e, "prune");
            cfg.prune.epochs = e;
        }
    }
    return cfg;
}

json config_to_json(const RunConfig &cfg) {
    const auto &t = cfg.task;
    json task = {{"kind", t.kind},
                 {"dataset", t.dataset},
                 {"n_samples", t.n_samples},
                 {"n_classes", t.n_classes},
                 {"dim", t.dim},
                 {"digits", t.digits},
                 {"image_size", t.image_size},
                 {"n_test", t.n_test},
                 {"max_train", t.max_train},
                 {"data_dir", t.data_dir},
                 {"encoder", t.encoder},
                 {"data_seed", t.data_seed ? json(*t.data_seed) : json(nullptr)},
                 {"hamiltonian", t.hamiltonian}};
    const auto &s = cfg.search;
    json search = {{"method", s.method},
                   {"estimator", evo::estimator_kind_name(s.estimator.kind)},
                   {"split", tasks::split_name(s.estimator.split)},
                   {"max_samples", s.estimator.max_samples},
                   {"readout", s.estimator.readout},
                   {"iterations", s.evo.iterations},
                   {"population", s.evo.population},
                   {"parents", s.evo.parents},
                   {"mutation_count", s.evo.mutation_count},
                   {"mutation_prob", s.evo.mutation_prob},
                   {"crossover_count", s.evo.crossover_count}};
    json prune = {{"ratios", cfg.prune.ratios},
                  {"r_initial", cfg.prune.r_initial},
                  {"loss_tolerance", cfg.prune.loss_tolerance},
                  {"epochs", cfg.prune.epochs ? json(*cfg.prune.epochs) : json(nullptr)}};
    return {{"run_dir", cfg.run_dir.string()},
            {"seed", cfg.seed},
            {"task", task},
            {"space", cfg.space},
            {"n_qubits", cfg.n_qubits},
            {"n_blocks", cfg.n_blocks ? json(*cfg.n_blocks) : json(nullptr)},
            {"max_layer_diff", cfg.max_layer_diff},
            {"device", cfg.device},
            {"train_super", train_to_json(cfg.train_super)},
            {"train_sub", train_to_json(cfg.train_sub)},
            {"search", search},
            {"prune", prune},
            {"circuit", cfg.circuit},
            {"jobs", cfg.jobs}};
}

RunConfig load_config(const fs::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(fmt::format("config file '{}' not found", path.string()));
    }
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error &e) {
        throw FormatError(fmt::format("{}: {}", path.string(), e.what()));
    }
    return config_from_json(j, fs::absolute(path).parent_path());
}

void RunConfig::validate() const {
    if (run_dir.empty()) throw ConfigError("run_dir must not be empty");
    if (jobs == 0) throw ConfigError("jobs must be at least 1");
    if (n_qubits == 0) throw ConfigError("n_qubits must be positive");
    if (max_layer_diff == 0) throw ConfigError("max_layer_diff must be positive");
    if (device != "ideal") require_file(device, "device");
    if (task.kind == "qml") {
        if (task.dataset == "synthetic") {
            if (task.n_classes != 2 && task.n_classes != 4) throw ConfigError("task.n_classes must be 2 or 4");
            if (task.n_samples < 10) throw ConfigError("task.n_samples must be at least 10");
            if (task.dim == 0) throw ConfigError("task.dim must be positive");
        } else if (task.dataset == "mnist") {
            if (task.digits.size() != 2 && task.digits.size() != 4) {
                throw ConfigError("task.digits must list 2 or 4 digits");
            }
            if (task.image_size != 4 && task.image_size != 6) throw ConfigError("task.image_size must be 4 or 6");
        } else {
            throw ConfigError(fmt::format("task.dataset: unknown '{}' (synthetic, mnist)", task.dataset));
        }
    } else if (task.kind == "vqe") {
        if (task.hamiltonian.empty()) throw ConfigError("task.hamiltonian is required for vqe");
        require_file(task.hamiltonian, "task.hamiltonian");
    } else {
        throw ConfigError(fmt::format("task.kind: unknown '{}' (qml, vqe)", task.kind));
    }
    validate_train(train_super, "train_super");
    validate_train(train_sub, "train_sub");
    if (search.method != "evo" && search.method != "random") {
        throw ConfigError(fmt::format("search.method: unknown '{}' (evo, random)", search.method));
    }
    search.evo.validate();
    if (prune.ratios.empty()) throw ConfigError("prune.ratios must not be empty");
    for (double r : prune.ratios) {
        if (!(r >= 0.0 && r < 1.0)) throw ConfigError(fmt::format("prune.ratios: {} outside [0, 1)", r));
    }
    if (!(prune.r_initial >= 0.0 && prune.r_initial < 1.0)) throw ConfigError("prune.r_initial outside [0, 1)");
    if (!(prune.loss_tolerance >= 0.0)) throw ConfigError("prune.loss_tolerance must be non-negative");
    if (prune.epochs && *prune.epochs == 0) throw ConfigError("prune.epochs must be positive");
    if (!circuit.empty()) {
        if (!bypass_search(*this)) throw ConfigError("circuit must look like file:<gene file>");
        require_file(bypass_file(*this), "circuit");
    }
    (void)space::make_space(space, n_qubits, n_blocks);
}

RunPaths prepare_run(const RunConfig &cfg) {
    cfg.validate();
    RunPaths paths{cfg.run_dir};
    fs::create_directories(paths.dir);
    auto out = open_out(paths.config());
    out << config_to_json(cfg).dump(2) << '\n';
    return paths;
}

// ---------------------------------------------------------------- builders

tasks::Task build_task(const RunConfig &cfg) {
    const auto &t = cfg.task;
    if (t.kind == "vqe") {
        auto h = tasks::load_hamiltonian(t.hamiltonian);
        if (h.n_qubits != cfg.n_qubits) {
            throw ConfigError(fmt::format("task.hamiltonian acts on {} qubits but n_qubits is {}", h.n_qubits,
                                          cfg.n_qubits));
        }
        return tasks::make_vqe_task(std::move(h));
    }
    const std::uint64_t seed = t.data_seed.value_or(cfg.seed);
    tasks::DatasetSplits data;
    if (t.dataset == "mnist") {
        const fs::path dir = t.data_dir.empty() ? tasks::data_dir() : fs::path(t.data_dir);
        data = tasks::load_mnist(dir, t.digits, t.image_size, seed, t.n_test, t.max_train);
    } else {
        data = tasks::synthetic_dataset(t.n_samples, t.n_classes, t.dim, seed);
    }
    const std::size_t dim = data.train.dim();
    tasks::EncoderSpec enc;
    if (!t.encoder.empty()) {
        enc = tasks::parse_encoder(t.encoder, cfg.n_qubits);
    } else if (dim == 16 && cfg.n_qubits == 4) {
        enc = tasks::mnist4_encoder();
    } else {
        enc = tasks::rotation_encoder(cfg.n_qubits, dim);
    }
    if (enc.n_features() != dim) {
        throw ConfigError(fmt::format("task.encoder takes {} features but the data has {}", enc.n_features(), dim));
    }
    return tasks::make_qml_task(std::move(data), std::move(enc));
}

noise::DeviceModel build_device(const RunConfig &cfg) {
    if (cfg.device == "ideal") return noise::ideal_device(cfg.n_qubits);
    auto dev = noise::load_device_model(cfg.device);
    if (dev.n_physical < cfg.n_qubits) {
        throw ConfigError(fmt::format("device has {} qubits, fewer than n_qubits = {}", dev.n_physical, cfg.n_qubits));
    }
    return dev;
}

space::DesignSpace build_space(const RunConfig &cfg) { return space::make_space(cfg.space, cfg.n_qubits, cfg.n_blocks); }

space::SuperCircuit load_super(const RunConfig &cfg, const fs::path &path) {
    const auto ck = load_stage_ckpt(path, {"train-super"});
    const auto want = build_space(cfg);
    const auto have = space::space_from_json(ck.meta.at("space"));
    if (!(have == want)) {
        throw ConfigError(fmt::format("checkpoint space '{}' ({} qubits, {} blocks) does not match config space "
                                      "'{}' ({} qubits, {} blocks)",
                                      have.name, have.n_qubits, have.n_blocks, want.name, want.n_qubits,
                                      want.n_blocks));
    }
    auto super = space::build_supercircuit(want);
    if (!(super.circuit == ck.circuit)) {
        throw ConfigError(fmt::format("checkpoint {} circuit does not match its design space", path.string()));
    }
    *super.params = ck.params;
    super.max_layer_diff = ck.meta.value("max_layer_diff", cfg.max_layer_diff);
    return super;
}

// ---------------------------------------------------------------- stages

space::SuperTrainResult cmd_train_super(const RunConfig &cfg) {
    const auto paths = prepare_run(cfg);
    const auto task = build_task(cfg);
    const auto sp = build_space(cfg);
    std::mt19937_64 rng(cfg.seed);
    auto super = space::build_supercircuit(sp, &rng);
    super.max_layer_diff = cfg.max_layer_diff;
    auto tc = cfg.train_super;
    tc.seed = cfg.seed;
    auto res = space::train_supercircuit(super, task.train_task(), tc);

    grad::Checkpoint ck;
    ck.circuit = super.circuit;
    ck.params = *super.params;
    ck.optimizer = res.optimizer;
    ck.step = res.history.size();
    ck.meta = {{"stage", "train-super"},
               {"space", space::space_to_json(sp)},
               {"seed", cfg.seed},
               {"max_layer_diff", cfg.max_layer_diff}};
    grad::save_checkpoint(paths.super_ckpt().string(), ck);

    auto out = open_out(paths.super_history());
    out << "step,epoch,lr,loss,spec\n";
    for (const auto &r : res.history) {
        out << fmt::format("{},{},{},{},\"{}\"\n", r.step, r.epoch, num(r.lr), num(r.loss), space::format_spec(r.spec));
    }
    return res;
}

SearchOutcome cmd_search(const RunConfig &cfg) {
    const auto paths = prepare_run(cfg);
    const auto sp = build_space(cfg);
    const auto device = build_device(cfg);
    SearchOutcome outcome;
    if (bypass_search(cfg)) {
        outcome.gene = evo::parse_gene(trim(read_text(bypass_file(cfg), "circuit file")));
        evo::validate_gene(outcome.gene, sp, device.n_physical);
        outcome.score = kNaN;
        for (const auto &stale : {paths.search_history(), paths.search_summary(), paths.culled()}) {
            fs::remove(stale);
        }
    } else {
        const auto super = load_super(cfg, paths.super_ckpt());
        const auto task = build_task(cfg);
        evo::Estimator est(super, device, task, cfg.search.estimator);
        auto ec = cfg.search.evo;
        ec.seed = cfg.seed;
        ec.jobs = cfg.jobs;
        const auto res = cfg.search.method == "random"
                             ? evo::random_search(est, ec.population * (ec.iterations + 1), ec.population, ec.seed,
                                                  ec.jobs)
                             : evo::evolve(est, ec);
        outcome.gene = res.best;
        outcome.score = res.best_score;
        outcome.n_evaluations = res.n_evaluations;
        outcome.n_simulations = est.n_simulations();
        outcome.history = res.history;
        evo::write_history_csv(paths.search_history(), res.history);
        auto culled = open_out(paths.culled());
        culled << "gene,reason\n";
        for (const auto &[g, why] : est.culled()) {
            std::string reason = why;
            std::replace(reason.begin(), reason.end(), '"', '\'');
            culled << fmt::format("\"{}\",\"{}\"\n", g, reason);
        }
        auto summary = open_out(paths.search_summary());
        summary << json{{"method", cfg.search.method},
                        {"estimator", evo::estimator_kind_name(est.kind())},
                        {"best_score", res.best_score},
                        {"best_gene", evo::format_gene(res.best)},
                        {"n_evaluations", res.n_evaluations},
                        {"n_simulations", est.n_simulations()},
                        {"n_culled", est.culled().size()}}
                       .dump(2)
                << '\n';
    }
    auto out = open_out(paths.gene());
    out << evo::format_gene(outcome.gene) << '\n';
    return outcome;
}

grad::TrainResult cmd_train_sub(const RunConfig &cfg) {
    const auto paths = prepare_run(cfg);
    const auto sp = build_space(cfg);
    const auto device = build_device(cfg);
    const auto gene = read_gene(paths);
    evo::validate_gene(gene, sp, device.n_physical);
    const auto task = build_task(cfg);

    // from scratch: fresh initial angles, independent of the SuperCircuit
    std::mt19937_64 rng(cfg.seed + 1);
    const auto super = space::build_supercircuit(sp, &rng);
    const auto [circuit, params] = space::instantiate(super, gene.spec).extract();
    auto tc = cfg.train_sub;
    tc.seed = cfg.seed;
    auto res = grad::train(circuit, params, task.train_task(), tc);

    grad::Checkpoint ck;
    ck.circuit = circuit;
    ck.params = res.params;
    ck.optimizer = res.optimizer;
    ck.step = res.history.size();
    ck.meta = {{"stage", "train-sub"}, {"gene", evo::format_gene(gene)}, {"space", space::space_to_json(sp)}};
    grad::save_checkpoint(paths.sub_ckpt().string(), ck);

    auto out = open_out(paths.sub_history());
    out << "step,epoch,lr,loss\n";
    for (const auto &r : res.history) {
        out << fmt::format("{},{},{},{}\n", r.step, r.epoch, num(r.lr), num(r.loss));
    }
    if (!res.valid_history.empty()) {
        auto v = open_out(paths.sub_valid());
        v << "epoch,valid_loss\n";
        for (std::size_t e = 0; e < res.valid_history.size(); ++e) {
            v << fmt::format("{},{}\n", e, num(res.valid_history[e]));
        }
    }
    return res;
}

namespace {

/// Noisy-device score of one parameter vector, matching the search estimator.
double device_score(const RunConfig &cfg, const tasks::Task &task, const qstate::Circuit &circuit,
                    const std::vector<double> &params, const evo::Gene &gene, const noise::DeviceModel &device) {
    const auto est = cfg.search.estimator;
    const auto noise_free = [&] { return tasks::evaluate(task, circuit, params, est.split).loss; };
    if (est.kind == evo::EstimatorKind::NoiseFree) return noise_free();
    const auto compiled = qcompile::route(circuit, params, qcompile::QubitMapping{gene.mapping}, device);
    auto success_rate_score = [&] {
        const double r = noise::success_rate(compiled.circuit, device);
        const double l = noise_free();
        if (task.kind == tasks::TaskKind::Qml) return l / r;
        const double c = task.hamiltonian.constant();
        return c + r * (l - c);
    };
    if (est.kind == evo::EstimatorKind::SuccessRate) return success_rate_score();
    try {
        return tasks::evaluate_noisy(task, compiled, device, est.split, {est.readout, est.max_samples}).loss;
    } catch (const CapacityError &) {
        if (est.kind == evo::EstimatorKind::NoisySim) throw;
        return success_rate_score();
    }
}

} // namespace

prune::SweepResult cmd_prune(const RunConfig &cfg) {
    const auto paths = prepare_run(cfg);
    const auto ck = load_stage_ckpt(paths.sub_ckpt(), {"train-sub"});
    const auto gene = gene_of(ck, paths.sub_ckpt());
    const auto device = build_device(cfg);
    const auto task = build_task(cfg);
    auto tc = cfg.train_sub;
    tc.seed = cfg.seed;
    if (cfg.prune.epochs) tc.epochs = *cfg.prune.epochs;
    tc.warmup_epochs = 0;

    auto quality = [&](const std::vector<double> &p) {
        const auto m = tasks::evaluate(task, ck.circuit, p, tasks::Split::Valid);
        return prune::Quality{m.loss, m.accuracy};
    };
    auto noisy = [&](const std::vector<double> &p) { return device_score(cfg, task, ck.circuit, p, gene, device); };
    const auto sweep = prune::sweep_ratios(ck.circuit, ck.params, task.train_task(), cfg.prune.ratios, tc, quality,
                                           noisy, {cfg.prune.r_initial, cfg.prune.loss_tolerance});
    const auto &best = sweep.best();

    grad::Checkpoint out_ck;
    out_ck.circuit = ck.circuit;
    out_ck.params = best.result.params;
    out_ck.optimizer = grad::OptimizerState(out_ck.params.size());
    out_ck.step = best.result.history.size();
    out_ck.meta = {{"stage", "prune"},
                   {"gene", evo::format_gene(gene)},
                   {"ratio", best.ratio},
                   {"mask", prune::format_mask(best.result.mask)}};
    grad::save_checkpoint(paths.pruned_ckpt().string(), out_ck);
    open_out(paths.mask()) << prune::format_mask(best.result.mask) << '\n';

    const bool baseline_requested =
        std::find(cfg.prune.ratios.begin(), cfg.prune.ratios.end(), 0.0) != cfg.prune.ratios.end();
    auto csv = open_out(paths.prune_sweep());
    csv << "ratio,n_pruned,n_params,loss,accuracy,noisy_score,degraded,selected\n";
    for (std::size_t i = 0; i < sweep.candidates.size(); ++i) {
        if (i == 0 && !baseline_requested) continue;
        const auto &c = sweep.candidates[i];
        csv << fmt::format("{},{},{},{},{},{},{},{}\n", num(c.ratio), prune::pruned_count(c.result.mask),
                           c.result.mask.size(), num(c.quality.loss), num(c.quality.accuracy), num(c.noisy_score),
                           c.degraded ? 1 : 0, i == sweep.selected ? 1 : 0);
    }
    auto hist = open_out(paths.prune_history());
    hist << "step,ratio,n_pruned,loss\n";
    for (const auto &s : best.result.history) {
        hist << fmt::format("{},{},{},{}\n", s.step, num(s.ratio), s.n_pruned, num(s.loss));
    }
    return sweep;
}

std::vector<std::string> eval_columns() {
    return {"stage", "gene",   "n_params", "n_pruned", "loss",    "accuracy", "noisy_loss",
            "noisy_accuracy", "depth", "n_gates", "n_1q", "n_cnot", "n_swaps", "success_rate"};
}

EvalReport cmd_eval(const RunConfig &cfg, const fs::path &ckpt, const std::string &device_path) {
    const auto paths = prepare_run(cfg);
    fs::path path = ckpt;
    if (path.empty()) path = fs::exists(paths.pruned_ckpt()) ? paths.pruned_ckpt() : paths.sub_ckpt();
    const auto ck = load_stage_ckpt(path, {"train-sub", "prune"});
    const auto gene = gene_of(ck, path);
    auto dcfg = cfg;
    if (!device_path.empty()) {
        dcfg.device = device_path;
        if (dcfg.device != "ideal") require_file(dcfg.device, "device");
    }
    const auto device = build_device(dcfg);
    const auto task = build_task(cfg);

    EvalReport rep;
    rep.stage = ck.meta.value("stage", std::string{});
    rep.gene = evo::format_gene(gene);
    rep.n_params = ck.params.size();
    rep.n_pruned = ck.meta.contains("mask")
                       ? prune::pruned_count(prune::parse_mask(ck.meta.at("mask").get<std::string>()))
                       : 0;
    rep.noise_free = tasks::evaluate(task, ck.circuit, ck.params, tasks::Split::Test);
    const auto compiled = qcompile::route(ck.circuit, ck.params, qcompile::QubitMapping{gene.mapping}, device);
    rep.stats = qcompile::circuit_stats(compiled.circuit);
    rep.n_swaps = compiled.n_swaps;
    rep.success_rate = noise::success_rate(compiled.circuit, device);
    try {
        rep.noisy = tasks::evaluate_noisy(task, compiled, device, tasks::Split::Test);
    } catch (const CapacityError &) {
        rep.noisy = {kNaN, kNaN};
    }

    auto csv = open_out(paths.eval_csv());
    const auto cols = eval_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) csv << (i ? "," : "") << cols[i];
    csv << '\n';
    csv << fmt::format("{},\"{}\",{},{},{},{},{},{},{},{},{},{},{},{}\n", rep.stage, rep.gene, rep.n_params,
                       rep.n_pruned, num(rep.noise_free.loss), num(rep.noise_free.accuracy), num(rep.noisy.loss),
                       num(rep.noisy.accuracy), rep.stats.depth, rep.stats.n_gates, rep.stats.n_1q, rep.stats.n_cnot,
                       rep.n_swaps, num(rep.success_rate));

    const bool qml = task.kind == tasks::TaskKind::Qml;
    auto txt = open_out(paths.eval_txt());
    txt << fmt::format("checkpoint   {} ({})\n", path.filename().string(), rep.stage);
    txt << fmt::format("gene         {}\n", rep.gene);
    txt << fmt::format("device       {}\n", device.name);
    txt << fmt::format("params       {} ({} pruned)\n", rep.n_params, rep.n_pruned);
    if (qml) {
        txt << fmt::format("noise-free   loss {:.6f}  accuracy {:.4f}\n", rep.noise_free.loss, rep.noise_free.accuracy);
        txt << fmt::format("noisy        loss {:.6f}  accuracy {:.4f}\n", rep.noisy.loss, rep.noisy.accuracy);
    } else {
        txt << fmt::format("noise-free   energy {:.6f}\n", rep.noise_free.loss);
        txt << fmt::format("noisy        energy {:.6f}\n", rep.noisy.loss);
    }
    txt << fmt::format("compiled     {}  swaps {}\n", qcompile::format_stats(rep.stats), rep.n_swaps);
    txt << fmt::format("success rate {:.6f}\n", rep.success_rate);
    return rep;
}

EvalReport run_pipeline(const RunConfig &cfg) {
    if (!bypass_search(cfg)) (void)cmd_train_super(cfg);
    (void)cmd_search(cfg);
    (void)cmd_train_sub(cfg);
    (void)cmd_prune(cfg);
    return cmd_eval(cfg);
}

// ---------------------------------------------------------------- diagnostics

GradCheckReport grad_check(std::size_t n_circuits, std::uint64_t seed) {
    using qstate::GateKind;
    static constexpr std::array kinds{GateKind::RX,  GateKind::RY,  GateKind::RZ, GateKind::RXX, GateKind::RZX,
                                      GateKind::RZZ, GateKind::U1,  GateKind::U3, GateKind::CU3, GateKind::CNOT,
                                      GateKind::H,   GateKind::SX,  GateKind::CZ};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(-3.14159, 3.14159);
    GradCheckReport rep;
    for (std::size_t t = 0; t < n_circuits; ++t) {
        const std::size_t n = 2 + t % 3;
        qstate::Circuit c;
        c.n_qubits = n;
        std::uniform_int_distribution<std::size_t> pick(0, kinds.size() - 1);
        std::uniform_int_distribution<std::uint32_t> wire(0, static_cast<std::uint32_t>(n - 1));
        while (c.gates.size() < 12) {
            qstate::Gate g;
            g.kind = kinds[pick(rng)];
            g.wires[0] = wire(rng);
            if (g.arity() == 2) {
                do {
                    g.wires[1] = wire(rng);
                } while (g.wires[1] == g.wires[0]);
            }
            for (std::size_t k = 0; k < g.param_count(); ++k) g.slots[k] = static_cast<std::int32_t>(c.n_params++);
            c.gates.push_back(g);
        }
        std::vector<double> p(c.n_params);
        for (auto &x : p) x = angle(rng);
        qstate::PauliString z0;
        z0.ops[0] = qstate::Pauli::Z;
        z0.coefficient = 0.7;
        qstate::PauliString xy;
        xy.ops[0] = qstate::Pauli::X;
        xy.ops[static_cast<std::uint32_t>(n - 1)] = qstate::Pauli::Y;
        xy.coefficient = -0.4;
        const auto loss = grad::expectation_loss(n, {z0, xy});
        const auto ps = grad::param_shift_grad(c, loss, p);
        const auto fd = grad::finite_diff_grad(c, loss, p, 1e-5);
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double a = ps.grad[i], b = fd[i];
            double err = 0.0;
            if (std::abs(a) < 1e-6 && std::abs(b) < 1e-6) {
                err = std::abs(a - b);
            } else {
                err = std::abs(a - b) / std::max(std::abs(a), std::abs(b));
            }
            rep.max_rel_error = std::max(rep.max_rel_error, err);
        }
        rep.n_params += p.size();
        ++rep.n_circuits;
    }
    return rep;
}

std::string cost_report(const RunConfig &cfg, std::size_t n_devices) {
    cfg.validate();
    const RunPaths paths{cfg.run_dir};
    const auto task = build_task(cfg);
    const std::size_t n_train = task.kind == tasks::TaskKind::Qml ? task.data.train.size() : 1;
    const std::size_t super_steps = cfg.train_super.epochs * grad::steps_per_epoch(n_train, cfg.train_super.batch_size);
    const std::size_t sub_steps = cfg.train_sub.epochs * grad::steps_per_epoch(n_train, cfg.train_sub.batch_size);
    const auto &ec = cfg.search.evo;
    std::size_t evaluations = ec.population * (ec.iterations + 1);
    std::string measured;
    if (fs::exists(paths.search_summary())) {
        const auto s = json::parse(read_text(paths.search_summary(), "search summary"));
        evaluations = s.at("n_evaluations").get<std::size_t>();
        measured = fmt::format("  distinct simulations run    {}\n  infeasible genes culled     {}\n",
                               s.at("n_simulations").get<std::size_t>(), s.at("n_culled").get<std::size_t>());
    }
    std::string out;
    out += fmt::format("cost report for {}\n", cfg.run_dir.string());
    out += fmt::format("  devices                     {}\n", n_devices);
    out += fmt::format("  SuperCircuit training steps {} (paid once for all devices)\n", super_steps);
    out += fmt::format("  search evaluations          {} per device (population x (iterations + 1))\n", evaluations);
    out += measured;
    out += fmt::format("  SubCircuit training steps   {}\n", sub_steps);
    out += fmt::format("  with SuperCircuit           {} training steps + {} inherited-parameter evaluations\n",
                       super_steps, n_devices * evaluations);
    out += fmt::format("  training each candidate     {} training steps\n", n_devices * evaluations * sub_steps);
    out += fmt::format("  trainings saved             {} = devices x evaluations\n", n_devices * evaluations);
    return out;
}

int exit_code_for(const std::exception &e) noexcept {
    if (dynamic_cast<const CapacityError *>(&e)) return 4;
    if (dynamic_cast<const NumericError *>(&e)) return 3;
    if (dynamic_cast<const ConfigError *>(&e)) return 2;
    if (dynamic_cast<const json::exception *>(&e)) return 2;
    return 1;
}

} // namespace qnas::cli
