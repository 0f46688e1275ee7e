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
#include "qnas/tasks/qml.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include <fmt/format.h>

#include "qnas/error.hpp"

namespace qnas::tasks {

std::vector<double> qml_logits(std::span<const double> z, std::size_t n_classes) {
    if (z.size() < kReadoutQubits) {
        throw ArityError(fmt::format("readout needs {} measured qubits, got {}", kReadoutQubits, z.size()));
    }
    if (n_classes == 2) {
        return {z[0] + z[1], z[2] + z[3]};
    }
    if (n_classes == 4) {
        return {z[0], z[1], z[2], z[3]};
    }
    throw ConfigError(fmt::format("readout supports 2 or 4 classes, got {}", n_classes));
}

std::vector<double> softmax(std::span<const double> logits) {
    const double m = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = std::exp(logits[i] - m);
        sum += p[i];
    }
    for (auto &x : p) {
        x /= sum;
    }
    return p;
}

std::size_t predicted_class(std::span<const double> logits) {
    return static_cast<std::size_t>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

double nll(std::span<const double> logits, std::size_t label, std::span<double> grad) {
    if (label >= logits.size()) {
        throw IndexError(fmt::format("label {} with {} classes", label, logits.size()));
    }
    const double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double l : logits) {
        sum += std::exp(l - m);
    }
    const double lse = m + std::log(sum);
    if (!grad.empty()) {
        for (std::size_t i = 0; i < logits.size(); ++i) {
            grad[i] = std::exp(logits[i] - lse) - (i == label ? 1.0 : 0.0);
        }
    }
    return lse - logits[label];
}

std::vector<double> qml_readout(const qstate::Statevector &state, std::size_t n_classes) {
    std::vector<double> z(kReadoutQubits);
    for (std::uint32_t q = 0; q < kReadoutQubits; ++q) {
        qstate::PauliString obs;
        obs.ops[q] = qstate::Pauli::Z;
        z[q] = qstate::expectation(state, obs);
    }
    return softmax(qml_logits(z, n_classes));
}

std::vector<double> qml_readout(const noise::DensityMatrix &rho, std::size_t n_classes,
                                std::span<const std::uint32_t> measured, const noise::DeviceModel *device) {
    std::vector<std::uint32_t> local(measured.begin(), measured.end());
    if (local.empty()) {
        for (std::uint32_t q = 0; q < kReadoutQubits; ++q) local.push_back(q);
    }
    if (local.size() < kReadoutQubits) {
        throw ArityError(fmt::format("readout needs {} measured qubits, got {}", kReadoutQubits, local.size()));
    }
    std::vector<double> probs = rho.probabilities();
    if (device != nullptr) {
        probs = noise::apply_readout_error(probs, *device, rho.physical);
    }
    std::vector<double> z(kReadoutQubits, 0.0);
    for (std::size_t q = 0; q < kReadoutQubits; ++q) {
        if (local[q] >= rho.n_qubits()) {
            throw IndexError(fmt::format("measured qubit {} outside a {}-qubit state", local[q], rho.n_qubits()));
        }
        const std::size_t bit = std::size_t{1} << local[q];
        for (std::size_t i = 0; i < probs.size(); ++i) {
            z[q] += (i & bit) ? -probs[i] : probs[i];
        }
    }
    return softmax(qml_logits(z, n_classes));
}

std::array<double, 2> readout_affine(const noise::DeviceModel &device, std::uint32_t q) {
    // c(t, m) = P(read m | true t); <Z>_read = P'(0) - P'(1)
    const auto c = device.confusion(q);
    const double d0 = c(0, 0) - c(0, 1);
    const double d1 = c(1, 0) - c(1, 1);
    return {(d0 + d1) / 2.0, (d0 - d1) / 2.0};
}

grad::LossFn qml_loss(const Dataset &data, const EncoderSpec &encoder) {
    data.validate();
    if (encoder.n_qubits < kReadoutQubits) {
        throw ConfigError(fmt::format("classification needs at least {} qubits, got {}", kReadoutQubits,
                                      encoder.n_qubits));
    }
    if (data.size() > 0 && data.dim() != encoder.n_features()) {
        throw ConfigError(fmt::format("dataset has {} features but the encoder {} takes {}", data.dim(),
                                      format_encoder(encoder), encoder.n_features()));
    }
    const std::size_t n_classes = data.n_classes;
    (void)qml_logits(std::vector<double>(kReadoutQubits, 0.0), n_classes);

    // Encoded gates are built once and shared by every copy of the loss.
    auto gates = std::make_shared<std::vector<std::vector<qstate::Gate>>>();
    gates->reserve(data.size());
    for (const auto &x : data.features) {
        gates->push_back(encode(x, encoder));
    }
    auto labels = std::make_shared<const std::vector<int>>(data.labels);

    grad::LossFn loss;
    loss.kind = grad::LossKind::QmlNll;
    loss.n_qubits = encoder.n_qubits;
    loss.n_samples = data.size();
    for (std::uint32_t q = 0; q < kReadoutQubits; ++q) {
        qstate::PauliString z;
        z.ops[q] = qstate::Pauli::Z;
        loss.observables.push_back(z);
    }
    loss.prepare = [gates](std::size_t i, qstate::Statevector &st) {
        for (const auto &g : (*gates)[i]) {
            st.apply(g);
        }
    };
    loss.head = [labels, n_classes](std::span<const double> ev, std::size_t i, std::span<double> dev) {
        const auto logits = qml_logits(ev, n_classes);
        std::vector<double> dl(n_classes);
        const double l = nll(logits, static_cast<std::size_t>((*labels)[i]), dl);
        if (n_classes == 2) {
            dev[0] = dev[1] = dl[0];
            dev[2] = dev[3] = dl[1];
        } else {
            std::copy(dl.begin(), dl.end(), dev.begin());
        }
        return l;
    };
    return loss;
}

} // namespace qnas::tasks
