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
#include "qnas/noise/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "qnas/error.hpp"

namespace qnas::noise {

using qstate::cplx;
using Eigen::MatrixXcd;

namespace {

MatrixXcd kron(const MatrixXcd &a, const MatrixXcd &b) {
    MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

std::array<MatrixXcd, 4> paulis() {
    const cplx i{0.0, 1.0};
    MatrixXcd id = MatrixXcd::Identity(2, 2);
    MatrixXcd x(2, 2), y(2, 2), z(2, 2);
    x << 0, 1, 1, 0;
    y << 0, -i, i, 0;
    z << 1, 0, 0, -1;
    return {id, x, y, z};
}

double decay_rate(double t) { return std::isfinite(t) ? 1.0 / t : 0.0; }

} // namespace

double NoiseChannel::trace_preservation_error() const {
    if (kraus.empty()) {
        return 1.0;
    }
    MatrixXcd sum = MatrixXcd::Zero(kraus[0].cols(), kraus[0].cols());
    for (const auto &k : kraus) {
        sum += k.adjoint() * k;
    }
    return (sum - MatrixXcd::Identity(sum.rows(), sum.cols())).cwiseAbs().maxCoeff();
}

NoiseChannel depolarizing_kraus(double p, std::size_t n_wires) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw NumericError(fmt::format("depolarizing probability {} outside [0, 1]", p));
    }
    if (n_wires != 1 && n_wires != 2) {
        throw ArityError(fmt::format("depolarizing channel on {} wires", n_wires));
    }
    const auto ps = paulis();
    NoiseChannel ch;
    if (n_wires == 1) {
        ch.wires = {0};
        ch.kraus.push_back(std::sqrt(1.0 - p) * ps[0]);
        if (p > 0.0) {
            for (std::size_t k = 1; k < 4; ++k) {
                ch.kraus.push_back(std::sqrt(p / 3.0) * ps[k]);
            }
        }
        return ch;
    }
    ch.wires = {0, 1};
    ch.kraus.push_back(std::sqrt(1.0 - p) * kron(ps[0], ps[0]));
    if (p > 0.0) {
        for (std::size_t a = 0; a < 4; ++a) {
            for (std::size_t b = 0; b < 4; ++b) {
                if (a == 0 && b == 0) {
                    continue;
                }
                ch.kraus.push_back(std::sqrt(p / 15.0) * kron(ps[a], ps[b]));
            }
        }
    }
    return ch;
}

NoiseChannel thermal_relaxation_kraus(double t1, double t2, double t_gate) {
    if (!(t1 > 0.0) || !(t2 > 0.0)) {
        throw NumericError(fmt::format("relaxation times must be positive (t1 = {}, t2 = {})", t1, t2));
    }
    if (std::isfinite(t2) && t2 > 2.0 * t1 * (1.0 + 1e-12)) {
        throw NumericError(fmt::format("t2 = {} exceeds 2 * t1 = {}", t2, 2.0 * t1));
    }
    if (!(t_gate >= 0.0) || !std::isfinite(t_gate)) {
        throw NumericError(fmt::format("gate time {} must be finite and non-negative", t_gate));
    }
    const double gamma = 1.0 - std::exp(-t_gate * decay_rate(t1));
    const double phi_rate = std::max(0.0, decay_rate(t2) - 0.5 * decay_rate(t1));
    const double lambda = 1.0 - std::exp(-t_gate * phi_rate);

    MatrixXcd a0 = MatrixXcd::Zero(2, 2), a1 = MatrixXcd::Zero(2, 2);
    a0(0, 0) = 1.0;
    a0(1, 1) = std::sqrt(1.0 - gamma);
    a1(0, 1) = std::sqrt(gamma);
    const auto ps = paulis();
    const MatrixXcd d0 = std::sqrt(1.0 - lambda / 2.0) * ps[0];
    const MatrixXcd d1 = std::sqrt(lambda / 2.0) * ps[3];

    NoiseChannel ch;
    ch.wires = {0};
    for (const auto *d : {&d0, &d1}) {
        for (const auto *a : {&a0, &a1}) {
            MatrixXcd k = (*d) * (*a);
            if (k.cwiseAbs().maxCoeff() > 0.0) {
                ch.kraus.push_back(std::move(k));
            }
        }
    }
    return ch;
}

MatrixXcd superoperator(const NoiseChannel &channel) {
    const auto d = channel.kraus.at(0).rows();
    MatrixXcd s = MatrixXcd::Zero(d * d, d * d);
    for (const auto &k : channel.kraus) {
        s += kron(k, k.conjugate());
    }
    return s;
}

DensityMatrix::DensityMatrix(std::size_t n_qubits) : n_(n_qubits) {
    if (n_qubits == 0 || n_qubits > kMaxDensityQubits) {
        throw CapacityError(fmt::format(
            "density-matrix simulation supports 1 to {} qubits, got {}; use the success-rate estimator",
            kMaxDensityQubits, n_qubits));
    }
    data_.assign(dim() * dim(), cplx{0.0, 0.0});
    data_[0] = 1.0;
    physical.resize(n_);
    std::iota(physical.begin(), physical.end(), 0);
}

DensityMatrix DensityMatrix::from_statevector(const qstate::Statevector &psi) {
    DensityMatrix rho(psi.n_qubits());
    const auto a = psi.amps();
    const std::size_t d = rho.dim();
    for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            rho.data_[r * d + c] = a[r] * std::conj(a[c]);
        }
    }
    return rho;
}

DensityMatrix DensityMatrix::from_matrix(const MatrixXcd &m) {
    std::size_t n = 0;
    while ((Eigen::Index{1} << n) < m.rows()) {
        ++n;
    }
    if (m.rows() != m.cols() || (Eigen::Index{1} << n) != m.rows()) {
        throw ArityError(fmt::format("{}x{} matrix is not a square over whole qubits", m.rows(), m.cols()));
    }
    DensityMatrix rho(n);
    const auto d = static_cast<Eigen::Index>(rho.dim());
    for (Eigen::Index r = 0; r < d; ++r) {
        for (Eigen::Index c = 0; c < d; ++c) {
            rho.data_[static_cast<std::size_t>(r * d + c)] = m(r, c);
        }
    }
    return rho;
}

double DensityMatrix::trace_product(const DensityMatrix &other) const {
    if (other.n_ != n_) {
        throw ArityError(fmt::format("trace of a {}-qubit by a {}-qubit matrix", n_, other.n_));
    }
    const std::size_t d = dim();
    double acc = 0.0;
    for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            acc += (data_[r * d + c] * other.data_[c * d + r]).real();
        }
    }
    return acc;
}

MatrixXcd DensityMatrix::matrix() const {
    const auto d = static_cast<Eigen::Index>(dim());
    MatrixXcd m(d, d);
    for (Eigen::Index r = 0; r < d; ++r) {
        for (Eigen::Index c = 0; c < d; ++c) {
            m(r, c) = data_[static_cast<std::size_t>(r * d + c)];
        }
    }
    return m;
}

cplx DensityMatrix::trace() const {
    cplx t{0.0, 0.0};
    for (std::size_t i = 0; i < dim(); ++i) {
        t += at(i, i);
    }
    return t;
}

double DensityMatrix::hermiticity_error() const {
    double worst = 0.0;
    for (std::size_t r = 0; r < dim(); ++r) {
        for (std::size_t c = r; c < dim(); ++c) {
            worst = std::max(worst, std::abs(at(r, c) - std::conj(at(c, r))));
        }
    }
    return worst;
}

double DensityMatrix::min_eigenvalue() const {
    const MatrixXcd m = matrix();
    const MatrixXcd h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

std::vector<double> DensityMatrix::probabilities() const {
    std::vector<double> p(dim());
    double total = 0.0;
    for (std::size_t i = 0; i < dim(); ++i) {
        p[i] = std::max(0.0, at(i, i).real());
        total += p[i];
    }
    if (!(total > 0.0) || !std::isfinite(total)) {
        throw NumericError("density matrix has no probability mass");
    }
    for (auto &x : p) {
        x /= total;
    }
    return p;
}

double DensityMatrix::expectation(const qstate::PauliString &obs) const {
    std::size_t flip = 0;
    for (const auto &[q, op] : obs.ops) {
        if (q >= n_) {
            throw IndexError(fmt::format("Pauli on qubit {} of a {}-qubit density matrix", q, n_));
        }
        if (op == qstate::Pauli::X || op == qstate::Pauli::Y) {
            flip |= std::size_t{1} << q;
        }
    }
    cplx total{0.0, 0.0};
    for (std::size_t c = 0; c < dim(); ++c) {
        // P|c> = phase |c ^ flip>
        cplx phase{1.0, 0.0};
        for (const auto &[q, op] : obs.ops) {
            const bool bit = (c >> q) & 1U;
            if (op == qstate::Pauli::Z && bit) {
                phase = -phase;
            } else if (op == qstate::Pauli::Y) {
                phase *= bit ? cplx{0.0, -1.0} : cplx{0.0, 1.0};
            }
        }
        total += at(c, c ^ flip) * phase;
    }
    return obs.coefficient * total.real();
}

void DensityMatrix::apply_unitary(std::span<const std::uint32_t> wires, const MatrixXcd &u) {
    std::vector<std::uint32_t> rows(wires.begin(), wires.end());
    for (auto &w : rows) {
        w += static_cast<std::uint32_t>(n_);
    }
    qstate::apply_matrix(data_, 2 * n_, rows, u);
    qstate::apply_matrix(data_, 2 * n_, wires, u.conjugate());
}

void DensityMatrix::apply_channel(const NoiseChannel &channel) {
    apply_superoperator(channel.wires, superoperator(channel));
}

void DensityMatrix::apply_superoperator(std::span<const std::uint32_t> wires, const MatrixXcd &s) {
    std::vector<std::uint32_t> all;
    all.reserve(2 * wires.size());
    for (auto w : wires) {
        if (w >= n_) {
            throw IndexError(fmt::format("wire {} outside {}-qubit density matrix", w, n_));
        }
        all.push_back(w + static_cast<std::uint32_t>(n_));
    }
    all.insert(all.end(), wires.begin(), wires.end());
    qstate::apply_matrix(data_, 2 * n_, all, s);
}

NoisyProgram build_noisy_program(const qstate::Circuit &circuit, const DeviceModel &device,
                                 std::span<const double> params, std::span<const std::uint32_t> keep) {
    if (params.size() != circuit.n_params) {
        throw ArityError(fmt::format("dm_run: {} params for {} slots", params.size(), circuit.n_params));
    }
    std::set<std::uint32_t> used(keep.begin(), keep.end());
    for (const auto &g : circuit.gates) {
        for (auto w : g.wire_span()) {
            used.insert(w);
        }
    }
    if (used.empty()) {
        used.insert(0);
    }
    for (auto w : used) {
        if (w >= device.n_physical) {
            throw IndexError(fmt::format("wire {} outside device {} with {} qubits", w, device.name,
                                         device.n_physical));
        }
    }
    if (used.size() > kMaxDensityQubits) {
        throw CapacityError(fmt::format("noisy simulation touches {} qubits; the limit is {}", used.size(),
                                        kMaxDensityQubits));
    }
    NoisyProgram prog;
    prog.physical.assign(used.begin(), used.end());
    std::vector<std::uint32_t> local(device.n_physical, 0);
    for (std::uint32_t i = 0; i < prog.physical.size(); ++i) {
        local[prog.physical[i]] = i;
    }

    prog.ops.reserve(circuit.gates.size());
    for (const auto &g : circuit.gates) {
        const auto wires = g.wire_span();
        const std::size_t k = wires.size();
        NoisyOp op;
        op.wires.resize(k);
        for (std::size_t j = 0; j < k; ++j) {
            op.wires[j] = local[wires[j]];
        }
        const MatrixXcd u = qstate::bound_unitary(g, params);
        op.superop = kron(u, u.conjugate());
        const double p = device.error_of(g);
        if (p > 0.0) {
            op.superop = superoperator(depolarizing_kraus(p, k)) * op.superop;
        }
        const double t = device.duration(g.kind);
        if (t > 0.0) {
            NoiseChannel relax;
            relax.kraus = {MatrixXcd::Identity(1, 1)};
            bool any = false;
            for (std::size_t j = 0; j < k; ++j) {
                const auto q = wires[j];
                NoiseChannel one{{MatrixXcd::Identity(2, 2)}, {0}};
                if (std::isfinite(device.t1[q]) || std::isfinite(device.t2[q])) {
                    one = thermal_relaxation_kraus(device.t1[q], device.t2[q], t);
                    any = true;
                }
                std::vector<MatrixXcd> next;
                for (const auto &a : relax.kraus) {
                    for (const auto &b : one.kraus) {
                        next.push_back(kron(a, b));
                    }
                }
                relax.kraus = std::move(next);
            }
            if (any) {
                op.superop = superoperator(relax) * op.superop;
            }
        }
        prog.ops.push_back(std::move(op));
    }
    return prog;
}

void run_program(DensityMatrix &rho, const NoisyProgram &prog) {
    if (rho.n_qubits() != prog.physical.size()) {
        throw ArityError(fmt::format("program over {} qubits applied to a {}-qubit state",
                                     prog.physical.size(), rho.n_qubits()));
    }
    for (const auto &op : prog.ops) {
        rho.apply_superoperator(op.wires, op.superop);
    }
    rho.physical = prog.physical;
}

void run_program_adjoint(DensityMatrix &observable, const NoisyProgram &prog) {
    if (observable.n_qubits() != prog.physical.size()) {
        throw ArityError(fmt::format("program over {} qubits applied to a {}-qubit observable",
                                     prog.physical.size(), observable.n_qubits()));
    }
    for (auto it = prog.ops.rbegin(); it != prog.ops.rend(); ++it) {
        observable.apply_superoperator(it->wires, it->superop.adjoint());
    }
    observable.physical = prog.physical;
}

DensityMatrix dm_run(const qstate::Circuit &circuit, const DeviceModel &device,
                     std::span<const double> params, std::span<const std::uint32_t> keep) {
    const NoisyProgram prog = build_noisy_program(circuit, device, params, keep);
    DensityMatrix rho(prog.physical.size());
    run_program(rho, prog);
    return rho;
}

std::vector<double> apply_readout_error(std::span<const double> probs, const DeviceModel &device,
                                        std::span<const std::uint32_t> physical) {
    std::size_t n = 0;
    while ((std::size_t{1} << n) < probs.size()) {
        ++n;
    }
    if ((std::size_t{1} << n) != probs.size()) {
        throw ArityError(fmt::format("distribution of size {} is not over whole qubits", probs.size()));
    }
    if (!physical.empty() && physical.size() != n) {
        throw ArityError(fmt::format("{} physical labels for {} qubits", physical.size(), n));
    }
    std::vector<double> out(probs.begin(), probs.end());
    for (std::size_t q = 0; q < n; ++q) {
        const auto c = device.confusion(physical.empty() ? static_cast<std::uint32_t>(q) : physical[q]);
        const std::size_t bit = std::size_t{1} << q;
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (i & bit) {
                continue;
            }
            const double p0 = out[i];
            const double p1 = out[i | bit];
            out[i] = p0 * c(0, 0) + p1 * c(1, 0);
            out[i | bit] = p0 * c(0, 1) + p1 * c(1, 1);
        }
    }
    return out;
}

double success_rate(const qstate::Circuit &circuit, const DeviceModel &device) {
    double r = 1.0;
    for (const auto &g : circuit.gates) {
        r *= 1.0 - device.error_of(g);
    }
    return r;
}

double augmented_loss(double l_noise_free, double r_overall) {
    if (!(r_overall > 0.0)) {
        throw NumericError(fmt::format("success rate {} must be positive", r_overall));
    }
    return l_noise_free / r_overall;
}

} // namespace qnas::noise
