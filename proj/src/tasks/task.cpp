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
#include "qnas/tasks/task.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "qnas/error.hpp"
#include "qnas/noise/simulate.hpp"
#include "qnas/tasks/qml.hpp"

namespace qnas::tasks {

using Eigen::MatrixXcd;
using qstate::Pauli;

namespace {

std::size_t local_index(std::span<const std::uint32_t> physical, std::uint32_t q) {
    const auto it = std::find(physical.begin(), physical.end(), q);
    if (it == physical.end()) {
        throw IndexError(fmt::format("physical qubit {} was not simulated", q));
    }
    return static_cast<std::size_t>(it - physical.begin());
}

MatrixXcd pauli_matrix(Pauli p) {
    MatrixXcd m(2, 2);
    switch (p) {
    case Pauli::I: m << 1, 0, 0, 1; break;
    case Pauli::X: m << 0, 1, 1, 0; break;
    case Pauli::Y: m << 0, qstate::cplx(0, -1), qstate::cplx(0, 1), 0; break;
    case Pauli::Z: m << 1, 0, 0, -1; break;
    }
    return m;
}

MatrixXcd kron(const MatrixXcd &a, const MatrixXcd &b) {
    MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

/**
 * Dense observable over the simulated qubits: factor alpha I + beta P on the
 * local qubit holding each Pauli of the term. Basis changes X -> Z and
 * Y -> Z commute with this form, so it also covers readout of X and Y.
 */
MatrixXcd noisy_term(const qstate::PauliString &term, std::span<const std::uint32_t> logical_to_phys,
                     std::span<const std::uint32_t> physical, const noise::DeviceModel *device) {
    std::vector<MatrixXcd> factor(physical.size(), MatrixXcd::Identity(2, 2));
    for (const auto &[q, p] : term.ops) {
        if (p == Pauli::I) continue;
        const std::uint32_t phys = logical_to_phys[q];
        const std::size_t l = local_index(physical, phys);
        std::array<double, 2> ab{0.0, 1.0};
        if (device != nullptr) ab = readout_affine(*device, phys);
        factor[l] = ab[0] * MatrixXcd::Identity(2, 2) + ab[1] * pauli_matrix(p);
    }
    MatrixXcd out = MatrixXcd::Identity(1, 1);
    for (std::size_t l = physical.size(); l-- > 0;) {
        out = kron(out, factor[l]);
    }
    return term.coefficient * out;
}

} // namespace

grad::LossFn Task::loss(Split split) const {
    if (kind == TaskKind::Vqe) {
        return grad::expectation_loss(hamiltonian.n_qubits, hamiltonian.terms);
    }
    return qml_loss(split_of(data, split), encoder);
}

grad::TrainTask Task::train_task() const {
    grad::TrainTask t{loss(Split::Train), std::nullopt};
    if (kind == TaskKind::Qml && data.valid.size() > 0) {
        t.valid = loss(Split::Valid);
    }
    return t;
}

Task make_qml_task(DatasetSplits data, EncoderSpec encoder) {
    Task t;
    t.kind = TaskKind::Qml;
    t.n_qubits = encoder.n_qubits;
    t.encoder = std::move(encoder);
    t.data = std::move(data);
    (void)qml_loss(t.data.train, t.encoder);
    return t;
}

Task make_vqe_task(Hamiltonian h) {
    Task t;
    t.kind = TaskKind::Vqe;
    t.n_qubits = h.n_qubits;
    t.hamiltonian = std::move(h);
    return t;
}

Metrics evaluate(const Task &task, const qstate::Circuit &circuit, std::span<const double> params,
                 Split split) {
    if (circuit.n_qubits != task.n_qubits) {
        throw ArityError(fmt::format("circuit has {} qubits, task {}", circuit.n_qubits, task.n_qubits));
    }
    Metrics m;
    if (task.kind == TaskKind::Vqe) {
        m.loss = vqe_expectation(circuit, params, task.hamiltonian);
        return m;
    }
    const Dataset &d = split_of(task.data, split);
    const auto loss = qml_loss(d, task.encoder);
    std::size_t correct = 0;
    double total = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto z = grad::sample_expectations(circuit, params, loss, i);
        const auto logits = qml_logits(z, d.n_classes);
        total += nll(logits, static_cast<std::size_t>(d.labels[i]));
        correct += predicted_class(logits) == static_cast<std::size_t>(d.labels[i]) ? 1 : 0;
    }
    const double n = static_cast<double>(std::max<std::size_t>(1, d.size()));
    m.loss = total / n;
    m.accuracy = static_cast<double>(correct) / n;
    return m;
}

Metrics evaluate_noisy(const Task &task, const qcompile::CompiledCircuit &compiled,
                       const noise::DeviceModel &device, Split split, const NoisyOptions &opts) {
    if (compiled.n_logical != task.n_qubits) {
        throw ArityError(fmt::format("compiled circuit has {} logical qubits, task {}", compiled.n_logical,
                                     task.n_qubits));
    }
    const auto measured = compiled.measured_qubits();
    const noise::DeviceModel *readout = opts.readout ? &device : nullptr;
    Metrics m;

    if (task.kind == TaskKind::Vqe) {
        const auto prog = noise::build_noisy_program(compiled.circuit, device, {}, measured);
        noise::DensityMatrix rho(prog.physical.size());
        noise::run_program(rho, prog);
        const auto d = static_cast<Eigen::Index>(rho.dim());
        MatrixXcd h = MatrixXcd::Zero(d, d);
        for (const auto &term : task.hamiltonian.terms) {
            h += noisy_term(term, measured, prog.physical, readout);
        }
        m.loss = noise::DensityMatrix::from_matrix(h).trace_product(rho);
        return m;
    }

    const Dataset &data = split_of(task.data, split);
    const std::size_t n = opts.max_samples ? std::min(opts.max_samples, data.size()) : data.size();
    std::vector<std::uint32_t> keep(measured.begin(), measured.end());
    keep.insert(keep.end(), compiled.initial_layout.begin(),
                compiled.initial_layout.begin() + static_cast<std::ptrdiff_t>(task.n_qubits));
    const auto prog = noise::build_noisy_program(compiled.circuit, device, {}, keep);

    std::vector<noise::DensityMatrix> pulled;
    for (std::uint32_t q = 0; q < kReadoutQubits; ++q) {
        qstate::PauliString z;
        z.ops[q] = Pauli::Z;
        auto obs = noise::DensityMatrix::from_matrix(noisy_term(z, measured, prog.physical, readout));
        noise::run_program_adjoint(obs, prog);
        pulled.push_back(std::move(obs));
    }

    std::size_t correct = 0;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        qstate::Circuit enc;
        enc.n_qubits = device.n_physical;
        for (auto g : encode(data.features[i], task.encoder)) {
            g.wires[0] = compiled.initial_layout[g.wires[0]];
            for (const auto &b : qcompile::decompose_gate(g)) {
                enc.gates.push_back(b);
            }
        }
        enc = qcompile::merge_rotations(enc);
        const auto enc_prog = noise::build_noisy_program(enc, device, {}, prog.physical);
        noise::DensityMatrix rho(enc_prog.physical.size());
        noise::run_program(rho, enc_prog);
        std::vector<double> z(kReadoutQubits);
        for (std::size_t q = 0; q < kReadoutQubits; ++q) {
            z[q] = pulled[q].trace_product(rho);
        }
        const auto logits = qml_logits(z, data.n_classes);
        total += nll(logits, static_cast<std::size_t>(data.labels[i]));
        correct += predicted_class(logits) == static_cast<std::size_t>(data.labels[i]) ? 1 : 0;
    }
    const double denom = static_cast<double>(std::max<std::size_t>(1, n));
    m.loss = total / denom;
    m.accuracy = static_cast<double>(correct) / denom;
    return m;
}

} // namespace qnas::tasks
