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
 * Weighted Pauli-string Hamiltonians, the VQE objective and an exact
 * diagonalisation reference.
 */
#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qnas/qstate/circuit.hpp"
#include "qnas/qstate/statevector.hpp"

namespace qnas::tasks {

struct Hamiltonian {
    std::size_t n_qubits{0};
    std::vector<qstate::PauliString> terms;

    /// Sum of the coefficients of identity terms.
    [[nodiscard]] double constant() const noexcept;
    [[nodiscard]] bool operator==(const Hamiltonian &) const = default;
};

/**
 * Lines of `coefficient word`, the word over {I,X,Y,Z} with its rightmost
 * character acting on qubit 0. `#` starts a comment. FormatError on a bad
 * symbol, a missing coefficient or words of different lengths.
 */
[[nodiscard]] Hamiltonian parse_hamiltonian(std::istream &in);
[[nodiscard]] Hamiltonian parse_hamiltonian_string(const std::string &text);
[[nodiscard]] Hamiltonian load_hamiltonian(const std::filesystem::path &path);
/// Inverse of parse_hamiltonian; coefficients keep 17 significant digits.
[[nodiscard]] std::string format_hamiltonian(const Hamiltonian &h);

/// Pauli word of a term over n qubits, qubit 0 rightmost.
[[nodiscard]] std::string pauli_word(const qstate::PauliString &term, std::size_t n_qubits);

/// Sum_k c_k <P_k> on a prepared state.
[[nodiscard]] double energy(const qstate::Statevector &state, const Hamiltonian &h);

/// Noise-free VQE objective; ArityError when the widths differ.
[[nodiscard]] double vqe_expectation(const qstate::Circuit &circuit, std::span<const double> params,
                                     const Hamiltonian &h);

inline constexpr std::size_t kMaxExactQubits = 12;

/// Dense 2^n x 2^n matrix; CapacityError beyond kMaxExactQubits.
[[nodiscard]] Eigen::MatrixXcd dense_hamiltonian(const Hamiltonian &h);
[[nodiscard]] double exact_ground_energy(const Hamiltonian &h);

} // namespace qnas::tasks
