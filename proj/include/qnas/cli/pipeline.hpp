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
 * @file pipeline.hpp
 * Run configuration and the five pipeline stages behind the `qnas` tool.
 *
 * Every stage reads its inputs from files in the run directory and writes
 * its outputs there, so stages can be rerun or swapped independently.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qnas/evo/evo.hpp"
#include "qnas/grad/checkpoint.hpp"
#include "qnas/grad/train.hpp"
#include "qnas/noise/device.hpp"
#include "qnas/prune/prune.hpp"
#include "qnas/qcompile/compile.hpp"
#include "qnas/space/space.hpp"
#include "qnas/tasks/task.hpp"

namespace qnas::cli {

namespace fs = std::filesystem;

struct TaskConfig {
    std::string kind{"qml"};
    /// "synthetic" or "mnist".
    std::string dataset{"synthetic"};
    std::size_t n_samples{200};
    std::size_t n_classes{2};
    std::size_t dim{16};
    std::vector<int> digits{3, 6};
    std::size_t image_size{4};
    std::size_t n_test{300};
    std::size_t max_train{0};
    /// MNIST directory; empty means QNAS_DATA_DIR or ./data.
    std::string data_dir;
    /// Layer string such as "4RY,4RZ,4RX,4RY"; empty picks a default.
    std::string encoder;
    std::optional<std::uint64_t> data_seed;
    std::string hamiltonian;
};

struct SearchConfig {
    /// "evo" or "random" (budget-matched to the evolution).
    std::string method{"evo"};
    evo::EvoConfig evo;
    evo::EstimatorConfig estimator;
};

struct PruneConfig {
    std::vector<double> ratios{0.1, 0.2, 0.3, 0.4, 0.5};
    double r_initial{prune::kDefaultInitialRatio};
    double loss_tolerance{1e-3};
    /// Finetuning epochs; unset reuses train_sub.epochs.
    std::optional<std::size_t> epochs;
};

/**
 * Everything one run needs. Relative paths in a config file are resolved
 * against the directory holding that file.
 */
struct RunConfig {
    fs::path run_dir{"run"};
    std::uint64_t seed{0};
    TaskConfig task;
    std::string space{"U3+CU3"};
    std::size_t n_qubits{4};
    std::optional<std::size_t> n_blocks;
    std::size_t max_layer_diff{space::kDefaultMaxLayerDiff};
    /// Device-model file, or "ideal" for a noiseless all-to-all device.
    std::string device{"ideal"};
    grad::TrainConfig train_super;
    grad::TrainConfig train_sub;
    SearchConfig search;
    PruneConfig prune;
    /// "file:<gene file>" skips the search stage (human or random baselines).
    std::string circuit;
    std::size_t jobs{1};

    /// Checks value ranges and that referenced files exist; errors name the field.
    void validate() const;
};

[[nodiscard]] RunConfig config_from_json(const nlohmann::json &j, const fs::path &base_dir = {});
[[nodiscard]] nlohmann::json config_to_json(const RunConfig &cfg);
[[nodiscard]] RunConfig load_config(const fs::path &path);

/// File names inside the run directory.
struct RunPaths {
    fs::path dir;

    [[nodiscard]] fs::path config() const { return dir / "config.json"; }
    [[nodiscard]] fs::path super_ckpt() const { return dir / "super.ckpt.json"; }
    [[nodiscard]] fs::path super_history() const { return dir / "super_history.csv"; }
    [[nodiscard]] fs::path gene() const { return dir / "gene.txt"; }
    [[nodiscard]] fs::path search_history() const { return dir / "search_history.csv"; }
    [[nodiscard]] fs::path search_summary() const { return dir / "search_summary.json"; }
    [[nodiscard]] fs::path culled() const { return dir / "culled.csv"; }
    [[nodiscard]] fs::path sub_ckpt() const { return dir / "sub.ckpt.json"; }
    [[nodiscard]] fs::path sub_history() const { return dir / "sub_history.csv"; }
    [[nodiscard]] fs::path sub_valid() const { return dir / "sub_valid.csv"; }
    [[nodiscard]] fs::path pruned_ckpt() const { return dir / "pruned.ckpt.json"; }
    [[nodiscard]] fs::path mask() const { return dir / "mask.txt"; }
    [[nodiscard]] fs::path prune_sweep() const { return dir / "prune_sweep.csv"; }
    [[nodiscard]] fs::path prune_history() const { return dir / "prune_history.csv"; }
    [[nodiscard]] fs::path eval_csv() const { return dir / "eval.csv"; }
    [[nodiscard]] fs::path eval_txt() const { return dir / "eval.txt"; }
};

/// Creates the run directory and writes the resolved config copy.
RunPaths prepare_run(const RunConfig &cfg);

[[nodiscard]] tasks::Task build_task(const RunConfig &cfg);
[[nodiscard]] noise::DeviceModel build_device(const RunConfig &cfg);
[[nodiscard]] space::DesignSpace build_space(const RunConfig &cfg);

/// SuperCircuit restored from a train-super checkpoint; the space must match `cfg`.
[[nodiscard]] space::SuperCircuit load_super(const RunConfig &cfg, const fs::path &path);

space::SuperTrainResult cmd_train_super(const RunConfig &cfg);

struct SearchOutcome {
    evo::Gene gene;
    double score{0.0};
    std::size_t n_evaluations{0};
    std::size_t n_simulations{0};
    std::vector<evo::EvoIteration> history;
};

SearchOutcome cmd_search(const RunConfig &cfg);

grad::TrainResult cmd_train_sub(const RunConfig &cfg);

prune::SweepResult cmd_prune(const RunConfig &cfg);

struct EvalReport {
    std::string stage;
    std::string gene;
    tasks::Metrics noise_free;
    /// NaN when the device is too large for density-matrix simulation.
    tasks::Metrics noisy;
    qcompile::CircuitStats stats;
    std::size_t n_swaps{0};
    double success_rate{0.0};
    std::size_t n_params{0};
    std::size_t n_pruned{0};
};

/// Column names of eval.csv, in order.
[[nodiscard]] std::vector<std::string> eval_columns();

/**
 * Evaluates a train-sub or prune checkpoint on the test split. An empty
 * `ckpt` picks the pruned checkpoint when present, else the trained one;
 * `device` overrides the configured device file.
 */
EvalReport cmd_eval(const RunConfig &cfg, const fs::path &ckpt = {}, const std::string &device = {});

/// Runs all five stages in order.
EvalReport run_pipeline(const RunConfig &cfg);

struct GradCheckReport {
    std::size_t n_circuits{0};
    std::size_t n_params{0};
    double max_rel_error{0.0};
};

/**
 * Parameter-shift against central differences on random circuits. Pairs
 * where both values are below 1e-6 are compared absolutely instead.
 */
[[nodiscard]] GradCheckReport grad_check(std::size_t n_circuits, std::uint64_t seed);

/// Evaluation-count bookkeeping of the run against training every candidate.
[[nodiscard]] std::string cost_report(const RunConfig &cfg, std::size_t n_devices = 1);

/// Exit code for an exception: 2 config, 3 numeric, 4 capacity, 1 otherwise.
[[nodiscard]] int exit_code_for(const std::exception &e) noexcept;

} // namespace qnas::cli
