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
 * Noise-free statevector simulation. Qubit 0 is the least-significant bit of
 * the basis index; bitstrings print the highest qubit first.
 */
#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qnas/qstate/circuit.hpp"
#include "qnas/qstate/gate.hpp"

namespace qnas::qstate {

inline constexpr std::size_t kMaxStatevectorQubits = 24;

/**
 * Applies a dense 2^k x 2^k matrix to the listed wires of an amplitude
 * buffer over `n_qubits` qubits. Local index bit (k-1-j) is wire j, so
 * wires[0] is the most significant local bit. Works for non-unitary
 * matrices too (the density-matrix backend feeds superoperators here).
 */
void apply_matrix(std::span<cplx> amps, std::size_t n_qubits,
                  std::span<const std::uint32_t> wires, const Eigen::Ref<const Eigen::MatrixXcd> &m);
void apply_matrix_1q(std::span<cplx> amps, std::uint32_t wire, const GateMatrix &m);
void apply_matrix_2q(std::span<cplx> amps, std::uint32_t w0, std::uint32_t w1,
                     const GateMatrix &m);

class Statevector {
  public:
    /// |0...0> on n qubits; throws CapacityError outside [1, 24].
    explicit Statevector(std::size_t n_qubits);
    /// Takes ownership of amplitudes; size must be a power of two.
    explicit Statevector(std::vector<cplx> amps);

    [[nodiscard]] std::size_t n_qubits() const noexcept { return n_qubits_; }
    [[nodiscard]] std::span<const cplx> amps() const noexcept { return amps_; }
    [[nodiscard]] std::span<cplx> amps() noexcept { return amps_; }
    [[nodiscard]] double norm_squared() const noexcept;
    [[nodiscard]] std::vector<double> probabilities() const;

    /// In place: U on the gate's wires. Throws IndexError for bad wires.
    void apply(const Gate &gate, std::span<const double> params = {});
    void apply_unitary(std::span<const std::uint32_t> wires, const GateMatrix &u);

  private:
    std::size_t n_qubits_;
    std::vector<cplx> amps_;
};

[[nodiscard]] Statevector new_zero_state(std::size_t n);
/// Functional form: returns U|state>.
[[nodiscard]] Statevector apply_gate(Statevector state, const Gate &gate,
                                     std::span<const double> params = {});

/// Dynamic: one gate at a time. Static: consecutive gates whose wire union
/// stays within `fuse_width` are multiplied into one unitary first.
struct ExecMode {
    enum class Kind { Dynamic, Static } kind{Kind::Dynamic};
    std::size_t fuse_width{2};

    static ExecMode dynamic() { return {}; }
    static ExecMode fused(std::size_t width = 2) { return {Kind::Static, width}; }
};

/// Throws ArityError if params.size() != circuit.n_params.
[[nodiscard]] Statevector run_circuit(const Circuit &circuit, std::span<const double> params,
                                      ExecMode mode = ExecMode::dynamic());
/// Applies the circuit's gates to an existing state in place.
void run_into(Statevector &state, const Circuit &circuit, std::span<const double> params,
              ExecMode mode = ExecMode::dynamic());

enum class Pauli : std::uint8_t { I, X, Y, Z };

/// Weighted tensor product of Paulis; qubits absent from `ops` carry identity.
struct PauliString {
    std::map<std::uint32_t, Pauli> ops;
    double coefficient{1.0};

    [[nodiscard]] bool operator==(const PauliString &) const = default;
};

/// coefficient * <psi|P|psi>.
[[nodiscard]] double expectation(const Statevector &state, const PauliString &obs);
/// coefficient * P|psi>; used by the adjoint gradient.
[[nodiscard]] Statevector apply_pauli(const Statevector &state, const PauliString &obs);

/// Bitstring label of basis index `index` on n qubits, qubit 0 rightmost.
[[nodiscard]] std::string bitstring(std::size_t index, std::size_t n_qubits);

/// Multinomial draw of `shots` outcomes from |amp|^2.
[[nodiscard]] std::map<std::string, std::size_t> sample_counts(const Statevector &state,
                                                               std::size_t shots,
                                                               std::mt19937_64 &rng);

} // namespace qnas::qstate
