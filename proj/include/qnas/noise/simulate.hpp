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

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qnas/noise/device.hpp"
#include "qnas/qstate/circuit.hpp"
#include "qnas/qstate/statevector.hpp"

namespace qnas::noise {

/// Kraus operators on 1 or 2 wires; wires[0] is the most significant local bit.
struct NoiseChannel {
    std::vector<Eigen::MatrixXcd> kraus;
    std::vector<std::uint32_t> wires;

    /// max |sum K^dag K - I|.
    [[nodiscard]] double trace_preservation_error() const;
};

/// {sqrt(1-p) I, sqrt(p/3) X, sqrt(p/3) Y, sqrt(p/3) Z} on one wire, or the
/// 16-term two-qubit Pauli analogue with weight p/15 off the identity.
[[nodiscard]] NoiseChannel depolarizing_kraus(double p, std::size_t n_wires);

/// Amplitude damping followed by pure dephasing over a gate of length `t_gate`.
[[nodiscard]] NoiseChannel thermal_relaxation_kraus(double t1, double t2, double t_gate);

/// sum_k K (x) conj(K): acts on the vectorised density matrix (row wires, then column wires).
[[nodiscard]] Eigen::MatrixXcd superoperator(const NoiseChannel &channel);

inline constexpr std::size_t kMaxDensityQubits = 10;

/**
 * Density matrix stored row-major as one vector, so the column index occupies
 * the low n bits and the row index the high n bits. Gates and channels reuse
 * the statevector kernel on this 2n-qubit buffer.
 */
class DensityMatrix {
  public:
    /// |0..0><0..0|; throws CapacityError outside [1, 10].
    explicit DensityMatrix(std::size_t n_qubits);
    [[nodiscard]] static DensityMatrix from_statevector(const qstate::Statevector &psi);
    /// Any square 2^n matrix, e.g. an observable for run_program_adjoint; not checked for positivity.
    [[nodiscard]] static DensityMatrix from_matrix(const Eigen::MatrixXcd &m);

    [[nodiscard]] std::size_t n_qubits() const noexcept { return n_; }
    [[nodiscard]] std::size_t dim() const noexcept { return std::size_t{1} << n_; }
    [[nodiscard]] qstate::cplx at(std::size_t row, std::size_t col) const { return data_[row * dim() + col]; }
    [[nodiscard]] std::span<const qstate::cplx> data() const noexcept { return data_; }
    [[nodiscard]] Eigen::MatrixXcd matrix() const;

    [[nodiscard]] qstate::cplx trace() const;
    [[nodiscard]] double hermiticity_error() const;
    [[nodiscard]] double min_eigenvalue() const;
    /// Diagonal, clipped at 0 and renormalised against rounding.
    [[nodiscard]] std::vector<double> probabilities() const;
    [[nodiscard]] double expectation(const qstate::PauliString &obs) const;
    /// Re tr(this * other); with `this` an observable and `other` a state, the expectation.
    [[nodiscard]] double trace_product(const DensityMatrix &other) const;

    void apply_unitary(std::span<const std::uint32_t> wires, const Eigen::MatrixXcd &u);
    void apply_channel(const NoiseChannel &channel);
    /// `s` acts on 2k local wires: the row copies of `wires`, then the column copies.
    void apply_superoperator(std::span<const std::uint32_t> wires, const Eigen::MatrixXcd &s);

    /// Physical qubit of each local qubit (identity unless set by dm_run).
    std::vector<std::uint32_t> physical;

  private:
    std::size_t n_;
    std::vector<qstate::cplx> data_;
};

/// One gate fused with its noise: a superoperator on the row copies, then
/// the column copies, of local `wires`.
struct NoisyOp {
    std::vector<std::uint32_t> wires;
    Eigen::MatrixXcd superop;
};

/// A circuit lowered to fused superoperators over the compacted qubits `physical`.
struct NoisyProgram {
    std::vector<std::uint32_t> physical;
    std::vector<NoisyOp> ops;
};

/// The noise model of dm_run, built once so it can be reused across inputs.
[[nodiscard]] NoisyProgram build_noisy_program(const qstate::Circuit &circuit, const DeviceModel &device,
                                               std::span<const double> params = {},
                                               std::span<const std::uint32_t> keep = {});
void run_program(DensityMatrix &rho, const NoisyProgram &prog);
/// Heisenberg picture: O -> E^dagger(O), so that tr(E^dagger(O) rho) = tr(O E(rho)).
void run_program_adjoint(DensityMatrix &observable, const NoisyProgram &prog);

/**
 * Noisy simulation of a circuit whose wires are physical qubits of `device`.
 * Each gate is followed by depolarizing noise at its calibrated error rate,
 * then thermal relaxation on each of its wires for the gate's duration.
 * Only wires touched by the circuit, plus `keep`, are simulated; the result
 * lists them in ascending order in `physical`.
 */
[[nodiscard]] DensityMatrix dm_run(const qstate::Circuit &circuit, const DeviceModel &device,
                                   std::span<const double> params = {},
                                   std::span<const std::uint32_t> keep = {});

/// Product readout channel. probs is indexed by local basis index; local
/// qubit i is read through the confusion matrix of physical[i] (i when empty).
[[nodiscard]] std::vector<double> apply_readout_error(std::span<const double> probs,
                                                      const DeviceModel &device,
                                                      std::span<const std::uint32_t> physical = {});

/// prod over gates of (1 - gate error); RoutingError on an uncoupled pair.
[[nodiscard]] double success_rate(const qstate::Circuit &circuit, const DeviceModel &device);

/// l / r; NumericError unless r > 0.
[[nodiscard]] double augmented_loss(double l_noise_free, double r_overall);

} // namespace qnas::noise
