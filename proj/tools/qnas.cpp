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
 * @file qnas.cpp
 * Command-line front end for the search pipeline.
 *
 * Precedence: command-line flags override the config file, which overrides
 * built-in defaults.
 */
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "qnas/cli/pipeline.hpp"
#include "qnas/error.hpp"

namespace {

using namespace qnas;

struct Common {
    std::string config;
    std::optional<std::string> run_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> jobs;
    std::optional<std::string> device;
    std::optional<std::string> estimator;
    std::optional<std::string> circuit;
};

void add_common(CLI::App *cmd, Common &c) {
    cmd->add_option("-c,--config", c.config, "Run configuration (JSON)")->required();
    cmd->add_option("--run-dir", c.run_dir, "Override run_dir");
    cmd->add_option("--seed", c.seed, "Override seed");
    cmd->add_option("--jobs", c.jobs, "Cap on concurrent estimator evaluations");
    cmd->add_option("--device", c.device, "Override the device-model file");
    cmd->add_option("--estimator", c.estimator, "auto, noisy_sim, success_rate or noise_free");
    cmd->add_option("--circuit", c.circuit, "file:<gene file> to skip the search");
}

cli::RunConfig resolve(const Common &c) {
    auto cfg = cli::load_config(c.config);
    if (c.run_dir) cfg.run_dir = *c.run_dir;
    if (c.seed) cfg.seed = *c.seed;
    if (c.jobs) cfg.jobs = *c.jobs;
    if (c.device) cfg.device = *c.device;
    if (c.estimator) cfg.search.estimator.kind = evo::parse_estimator_kind(*c.estimator);
    if (c.circuit) cfg.circuit = *c.circuit;
    cfg.validate();
    return cfg;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Noise-adaptive search, training and pruning of parameterized quantum circuits"};
    app.require_subcommand(1);

    Common common;
    auto *train_super = app.add_subcommand("train-super", "Train the SuperCircuit");
    auto *search = app.add_subcommand("search", "Evolutionary co-search of SubCircuit and qubit mapping");
    auto *train_sub = app.add_subcommand("train-sub", "Train the searched SubCircuit from scratch");
    auto *prune = app.add_subcommand("prune", "Prune and finetune over a ratio sweep");
    auto *eval = app.add_subcommand("eval", "Noise-free and noisy metrics plus compiled statistics");
    auto *all = app.add_subcommand("run", "All five stages in order");
    auto *cost = app.add_subcommand("cost-report", "Evaluation-count bookkeeping of a run");
    for (auto *cmd : {train_super, search, train_sub, prune, eval, all, cost}) add_common(cmd, common);

    std::string ckpt;
    std::string backend;
    eval->add_option("--checkpoint", ckpt, "Checkpoint to evaluate (default: pruned, else trained)");
    eval->add_option("--backend", backend, "Device-model file for the noisy metrics");

    std::size_t n_devices = 1;
    cost->add_option("--devices", n_devices, "Number of target devices")->check(CLI::PositiveNumber);

    auto *grad_check = app.add_subcommand("grad-check", "Parameter shift against finite differences");
    std::size_t n_circuits = 50;
    std::uint64_t gc_seed = 0;
    double tolerance = 1e-5;
    grad_check->add_option("--circuits", n_circuits, "Number of random circuits");
    grad_check->add_option("--seed", gc_seed, "Seed of the random circuits");
    grad_check->add_option("--tolerance", tolerance, "Largest accepted relative error");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (grad_check->parsed()) {
            const auto rep = cli::grad_check(n_circuits, gc_seed);
            fmt::print("grad-check: {} circuits, {} parameters, max relative error {:.3e}\n", rep.n_circuits,
                       rep.n_params, rep.max_rel_error);
            if (!(rep.max_rel_error < tolerance)) {
                throw NumericError(fmt::format("gradient mismatch {:.3e} exceeds {:.1e}", rep.max_rel_error, tolerance));
            }
            return 0;
        }
        const auto cfg = resolve(common);
        if (train_super->parsed()) {
            const auto res = cli::cmd_train_super(cfg);
            fmt::print("train-super: {} steps, final loss {:.6f}\n", res.history.size(),
                       res.history.empty() ? 0.0 : res.history.back().loss);
        } else if (search->parsed()) {
            const auto res = cli::cmd_search(cfg);
            if (std::isnan(res.score)) {
                fmt::print("search: skipped, gene {}\n", evo::format_gene(res.gene));
            } else {
                fmt::print("search: best score {:.6f} after {} evaluations\n  gene {}\n", res.score, res.n_evaluations,
                           evo::format_gene(res.gene));
            }
        } else if (train_sub->parsed()) {
            const auto res = cli::cmd_train_sub(cfg);
            fmt::print("train-sub: {} steps, final loss {:.6f}\n", res.history.size(),
                       res.history.empty() ? 0.0 : res.history.back().loss);
        } else if (prune->parsed()) {
            const auto res = cli::cmd_prune(cfg);
            const auto &b = res.best();
            fmt::print("prune: selected ratio {} ({} of {} pruned), noisy score {:.6f}\n", b.ratio,
                       qnas::prune::pruned_count(b.result.mask), b.result.mask.size(), b.noisy_score);
        } else if (eval->parsed()) {
            (void)cli::cmd_eval(cfg, ckpt, backend);
            std::cout << std::ifstream(cli::RunPaths{cfg.run_dir}.eval_txt()).rdbuf();
        } else if (all->parsed()) {
            (void)cli::run_pipeline(cfg);
            std::cout << std::ifstream(cli::RunPaths{cfg.run_dir}.eval_txt()).rdbuf();
        } else if (cost->parsed()) {
            std::cout << cli::cost_report(cfg, n_devices);
        }
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::exit_code_for(e);
    }
    return 0;
}
