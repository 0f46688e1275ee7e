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
#include "qnas/tasks/hamiltonian.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "qnas/error.hpp"

namespace qnas::tasks {

using qstate::Pauli;
using qstate::PauliString;

double Hamiltonian::constant() const noexcept {
    double c = 0.0;
    for (const auto &t : terms) {
        if (t.ops.empty()) c += t.coefficient;
    }
    return c;
}

Hamiltonian parse_hamiltonian(std::istream &in) {
    Hamiltonian h;
    bool sized = false;
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream ls(line);
        std::string coef_tok, word, extra;
        if (!(ls >> coef_tok)) continue;
        if (!(ls >> word) || (ls >> extra)) {
            throw FormatError(fmt::format("hamiltonian line {}: expected 'coefficient word'", lineno));
        }
        double coef = 0.0;
        const auto [end, ec] = std::from_chars(coef_tok.data(), coef_tok.data() + coef_tok.size(), coef);
        if (ec != std::errc{} || end != coef_tok.data() + coef_tok.size()) {
            throw FormatError(fmt::format("hamiltonian line {}: bad coefficient '{}'", lineno, coef_tok));
        }
        if (sized && word.size() != h.n_qubits) {
            throw FormatError(fmt::format("hamiltonian line {}: word '{}' has {} qubits, expected {}",
                                          lineno, word, word.size(), h.n_qubits));
        }
        h.n_qubits = word.size();
        sized = true;
        PauliString term;
        term.coefficient = coef;
        for (std::size_t i = 0; i < word.size(); ++i) {
            const auto q = static_cast<std::uint32_t>(word.size() - 1 - i);
            switch (std::toupper(static_cast<unsigned char>(word[i]))) {
            case 'I': break;
            case 'X': term.ops[q] = Pauli::X; break;
            case 'Y': term.ops[q] = Pauli::Y; break;
            case 'Z': term.ops[q] = Pauli::Z; break;
            default:
                throw FormatError(fmt::format("hamiltonian line {}: bad Pauli symbol '{}'", lineno, word[i]));
            }
        }
        h.terms.push_back(std::move(term));
    }
    if (h.terms.empty()) {
        throw FormatError("hamiltonian has no terms");
    }
    return h;
}

Hamiltonian parse_hamiltonian_string(const std::string &text) {
    std::istringstream in(text);
    return parse_hamiltonian(in);
}

Hamiltonian load_hamiltonian(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(fmt::format("cannot open hamiltonian file {}", path.string()));
    }
    return parse_hamiltonian(in);
}

std::string pauli_word(const PauliString &term, std::size_t n_qubits) {
    std::string w(n_qubits, 'I');
    for (const auto &[q, p] : term.ops) {
        if (q >= n_qubits) {
            throw IndexError(fmt::format("Pauli on qubit {} outside {} qubits", q, n_qubits));
        }
        w[n_qubits - 1 - q] = "IXYZ"[static_cast<int>(p)];
    }
    return w;
}

std::string format_hamiltonian(const Hamiltonian &h) {
    std::string out;
    for (const auto &t : h.terms) {
        out += fmt::format("{:.17g} {}\n", t.coefficient, pauli_word(t, h.n_qubits));
    }
    return out;
}

double energy(const qstate::Statevector &state, const Hamiltonian &h) {
    double e = 0.0;
    for (const auto &t : h.terms) {
        e += qstate::expectation(state, t);
    }
    return e;
}

double vqe_expectation(const qstate::Circuit &circuit, std::span<const double> params,
                       const Hamiltonian &h) {
    if (circuit.n_qubits != h.n_qubits) {
        throw ArityError(fmt::format("circuit has {} qubits, hamiltonian {}", circuit.n_qubits, h.n_qubits));
    }
    return energy(qstate::run_circuit(circuit, params), h);
}

Eigen::MatrixXcd dense_hamiltonian(const Hamiltonian &h) {
    if (h.n_qubits == 0 || h.n_qubits > kMaxExactQubits) {
        throw CapacityError(fmt::format("exact diagonalisation supports 1..{} qubits, got {}",
                                        kMaxExactQubits, h.n_qubits));
    }
    const std::size_t dim = std::size_t{1} << h.n_qubits;
    const auto d = static_cast<Eigen::Index>(dim);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
    for (const auto &t : h.terms) {
        // P|c> = phase(c) |c ^ flip>
        std::size_t flip = 0;
        for (const auto &[q, p] : t.ops) {
            if (p == Pauli::X || p == Pauli::Y) flip |= std::size_t{1} << q;
        }
        for (std::size_t c = 0; c < dim; ++c) {
            qstate::cplx phase = t.coefficient;
            for (const auto &[q, p] : t.ops) {
                const bool one = ((c >> q) & 1U) != 0;
                if (p == Pauli::Z && one) phase = -phase;
                if (p == Pauli::Y) phase *= one ? qstate::cplx(0, -1) : qstate::cplx(0, 1);
            }
            m(static_cast<Eigen::Index>(c ^ flip), static_cast<Eigen::Index>(c)) += phase;
        }
    }
    return m;
}

double exact_ground_energy(const Hamiltonian &h) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense_hamiltonian(h), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

} // namespace qnas::tasks
