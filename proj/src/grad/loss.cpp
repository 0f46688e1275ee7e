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
#include "qnas/grad/loss.hpp"

#include <numeric>

#include "qnas/error.hpp"

namespace qnas::grad {

LossFn expectation_loss(std::size_t n_qubits, std::vector<qstate::PauliString> observables) {
    LossFn loss;
    loss.kind = LossKind::VqeExpectation;
    loss.n_qubits = n_qubits;
    loss.n_samples = 1;
    loss.observables = std::move(observables);
    loss.head = [](std::span<const double> ev, std::size_t, std::span<double> dev) {
        std::fill(dev.begin(), dev.end(), 1.0);
        return std::accumulate(ev.begin(), ev.end(), 0.0);
    };
    return loss;
}

qstate::Statevector sample_state(const qstate::Circuit &circuit, std::span<const double> params,
                                 const LossFn &loss, std::size_t sample) {
    qstate::Statevector state(std::max(circuit.n_qubits, loss.n_qubits));
    if (loss.prepare) {
        loss.prepare(sample, state);
    }
    qstate::run_into(state, circuit, params);
    return state;
}

std::vector<double> sample_expectations(const qstate::Circuit &circuit,
                                        std::span<const double> params, const LossFn &loss,
                                        std::size_t sample) {
    const auto state = sample_state(circuit, params, loss, sample);
    std::vector<double> ev;
    ev.reserve(loss.observables.size());
    for (const auto &obs : loss.observables) {
        ev.push_back(qstate::expectation(state, obs));
    }
    return ev;
}

double evaluate_loss(const qstate::Circuit &circuit, std::span<const double> params,
                     const LossFn &loss, std::span<const std::size_t> batch) {
    std::vector<std::size_t> all;
    if (batch.empty()) {
        all.resize(loss.n_samples);
        std::iota(all.begin(), all.end(), 0);
        batch = all;
    }
    std::vector<double> dev(loss.observables.size());
    double total = 0.0;
    for (auto s : batch) {
        const auto ev = sample_expectations(circuit, params, loss, s);
        total += loss.head(ev, s, dev);
    }
    const double mean = total / static_cast<double>(batch.size());
    if (!std::isfinite(mean)) {
        throw NumericError("loss evaluated to a non-finite value");
    }
    return mean;
}

} // namespace qnas::grad
