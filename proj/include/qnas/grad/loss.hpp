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
#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "qnas/qstate/circuit.hpp"
#include "qnas/qstate/statevector.hpp"

namespace qnas::grad {

enum class LossKind { QmlNll, VqeExpectation };

/**
 * A loss over a set of samples, factored through expectation values.
 *
 * For sample i the state is |0..0>, then `prepare(i, state)` (fixed encoder
 * gates, may be empty), then the trainable circuit. The expectation values
 * of `observables` (coefficients included) feed `head`, which returns the
 * sample loss and writes dloss/d(expectation) into its last argument.
 * Everything is analytic: no shot noise.
 */
struct LossFn {
    LossKind kind{LossKind::VqeExpectation};
    std::size_t n_qubits{0};
    std::size_t n_samples{1};
    std::vector<qstate::PauliString> observables;
    std::function<void(std::size_t, qstate::Statevector &)> prepare;
    std::function<double(std::span<const double>, std::size_t, std::span<double>)> head;
};

/// Loss equal to the sum of the observables' expectations (a Hamiltonian).
[[nodiscard]] LossFn expectation_loss(std::size_t n_qubits,
                                      std::vector<qstate::PauliString> observables);

/// Final state of sample i.
[[nodiscard]] qstate::Statevector sample_state(const qstate::Circuit &circuit,
                                               std::span<const double> params, const LossFn &loss,
                                               std::size_t sample);

/// Expectation of every observable on sample i.
[[nodiscard]] std::vector<double> sample_expectations(const qstate::Circuit &circuit,
                                                      std::span<const double> params,
                                                      const LossFn &loss, std::size_t sample);

/// Mean loss over `batch` (all samples when empty).
[[nodiscard]] double evaluate_loss(const qstate::Circuit &circuit, std::span<const double> params,
                                   const LossFn &loss, std::span<const std::size_t> batch = {});

} // namespace qnas::grad
