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
 * @file
 * A benchmark task (classification or VQE) and its noise-free and noisy
 * metrics.
 */
#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>

#include "qnas/grad/loss.hpp"
#include "qnas/grad/train.hpp"
#include "qnas/noise/device.hpp"
#include "qnas/qcompile/compile.hpp"
#include "qnas/qstate/circuit.hpp"
#include "qnas/tasks/dataset.hpp"
#include "qnas/tasks/hamiltonian.hpp"

namespace qnas::tasks {

enum class TaskKind { Qml, Vqe };

struct Task {
    TaskKind kind{TaskKind::Qml};
    std::size_t n_qubits{4};
    EncoderSpec encoder;
    DatasetSplits data;
    Hamiltonian hamiltonian;

    /// Classification loss on a split, or the Hamiltonian for VQE (any split).
    [[nodiscard]] grad::LossFn loss(Split split = Split::Train) const;
    /// Train split with the validation split attached for QML.
    [[nodiscard]] grad::TrainTask train_task() const;
    [[nodiscard]] std::size_t n_classes() const noexcept { return data.train.n_classes; }
};

[[nodiscard]] Task make_qml_task(DatasetSplits data, EncoderSpec encoder);
[[nodiscard]] Task make_vqe_task(Hamiltonian h);

/// `loss` is the mean NLL (QML) or the energy (VQE); accuracy is NaN for VQE.
struct Metrics {
    double loss{0.0};
    double accuracy{std::numeric_limits<double>::quiet_NaN()};
};

/// Statevector metrics of a logical circuit on a split.
[[nodiscard]] Metrics evaluate(const Task &task, const qstate::Circuit &circuit,
                               std::span<const double> params, Split split);

struct NoisyOptions {
    /// Read measured qubits through the device's confusion matrices.
    bool readout{true};
    /// Use only the first n samples of the split (0 uses all).
    std::size_t max_samples{0};
};

/**
 * Density-matrix metrics of a routed circuit. For QML, each sample's encoder
 * is lowered to the basis and placed on the initial layout ahead of the
 * circuit; the measured observables are pulled back through the circuit's
 * noisy channel once and reused for every sample. For VQE, Pauli terms are
 * read after an ideal basis change with the product readout channel.
 */
[[nodiscard]] Metrics evaluate_noisy(const Task &task, const qcompile::CompiledCircuit &compiled,
                                     const noise::DeviceModel &device, Split split,
                                     const NoisyOptions &opts = {});

} // namespace qnas::tasks
