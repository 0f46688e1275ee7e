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
 * Classification readout: Z expectations to logits to Softmax probabilities,
 * and the matching negative log-likelihood loss.
 */
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qnas/grad/loss.hpp"
#include "qnas/noise/device.hpp"
#include "qnas/noise/simulate.hpp"
#include "qnas/qstate/statevector.hpp"
#include "qnas/tasks/dataset.hpp"

namespace qnas::tasks {

/// Qubits whose Z expectations feed the logits.
inline constexpr std::size_t kReadoutQubits = 4;

/**
 * 2 classes: (<Z0>+<Z1>, <Z2>+<Z3>). 4 classes: (<Z0>, ..., <Z3>).
 * ConfigError for other class counts, ArityError for fewer than 4 values.
 */
[[nodiscard]] std::vector<double> qml_logits(std::span<const double> z, std::size_t n_classes);
[[nodiscard]] std::vector<double> softmax(std::span<const double> logits);
/// Index of the largest logit, lowest index on ties.
[[nodiscard]] std::size_t predicted_class(std::span<const double> logits);
/// -log softmax(logits)[label]; writes d/dlogits into `grad` when non-empty.
double nll(std::span<const double> logits, std::size_t label, std::span<double> grad = {});

[[nodiscard]] std::vector<double> qml_readout(const qstate::Statevector &state, std::size_t n_classes);

/**
 * Class probabilities from a density matrix. `measured` gives the local
 * index of logical qubits 0..3 (identity when empty). With a device, each
 * qubit is read through the confusion matrix of its physical qubit first.
 */
[[nodiscard]] std::vector<double> qml_readout(const noise::DensityMatrix &rho, std::size_t n_classes,
                                              std::span<const std::uint32_t> measured = {},
                                              const noise::DeviceModel *device = nullptr);

/// (alpha, beta) with <Z>_read = alpha + beta <Z> under q's confusion matrix.
[[nodiscard]] std::array<double, 2> readout_affine(const noise::DeviceModel &device, std::uint32_t q);

/// Mean NLL over the dataset; samples are prepared by the encoder.
[[nodiscard]] grad::LossFn qml_loss(const Dataset &data, const EncoderSpec &encoder);

} // namespace qnas::tasks
