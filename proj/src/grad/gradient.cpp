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
#include "qnas/grad/gradient.hpp"

#include <cmath>
#include <numeric>

#include "qnas/error.hpp"

namespace qnas::grad {

using qstate::Circuit;
using qstate::Gate;
using qstate::GateMatrix;
using qstate::Statevector;

namespace {

std::vector<std::size_t> resolve_batch(const LossFn &loss, std::span<const std::size_t> batch) {
    if (!batch.empty()) {
        return {batch.begin(), batch.end()};
    }
    std::vector<std::size_t> all(loss.n_samples);
    std::iota(all.begin(), all.end(), 0);
    return all;
}

Statevector prepared_state(const Circuit &circuit, const LossFn &loss, std::size_t sample) {
    Statevector state(std::max(circuit.n_qubits, loss.n_qubits));
    if (loss.prepare) {
        loss.prepare(sample, state);
    }
    return state;
}

std::vector<double> expectations_of(const Statevector &state, const LossFn &loss) {
    std::vector<double> ev;
    ev.reserve(loss.observables.size());
    for (const auto &obs : loss.observables) {
        ev.push_back(qstate::expectation(state, obs));
    }
    return ev;
}

void check_finite(std::span<const double> values, const char *what) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw NumericError(std::string("non-finite ") + what);
        }
    }
}

} // namespace

LossAndGrad param_shift_grad(const Circuit &circuit, const LossFn &loss,
                             std::span<const double> params, std::span<const std::size_t> batch) {
    const auto samples = resolve_batch(loss, batch);
    const std::size_t m = loss.observables.size();
    LossAndGrad out;
    out.grad.assign(circuit.n_params, 0.0);
    std::vector<double> dev(m);
    for (auto s : samples) {
        // states before each gate
        std::vector<Statevector> before;
        before.reserve(circuit.gates.size() + 1);
        before.push_back(prepared_state(circuit, loss, s));
        for (const Gate &g : circuit.gates) {
            Statevector next = before.back();
            next.apply(g, params);
            before.push_back(std::move(next));
        }
        const auto ev = expectations_of(before.back(), loss);
        out.loss += loss.head(ev, s, dev);

        for (std::size_t gi = 0; gi < circuit.gates.size(); ++gi) {
            const Gate &g = circuit.gates[gi];
            for (std::size_t k = 0; k < g.param_count(); ++k) {
                if (!g.is_trainable(k)) {
                    continue;
                }
                std::vector<double> dev_dtheta(m, 0.0);
                for (const auto &term : qstate::shift_rule(g.kind, k)) {
                    for (double sign : {1.0, -1.0}) {
                        Gate shifted = g;
                        for (std::size_t j = 0; j < g.param_count(); ++j) {
                            shifted.angles[j] = g.angle(j, params);
                            shifted.slots[j] = qstate::kFixedAngle;
                        }
                        shifted.angles[k] += sign * term.shift;
                        Statevector st = before[gi];
                        st.apply(shifted);
                        for (std::size_t gj = gi + 1; gj < circuit.gates.size(); ++gj) {
                            st.apply(circuit.gates[gj], params);
                        }
                        const auto ev_shift = expectations_of(st, loss);
                        for (std::size_t j = 0; j < m; ++j) {
                            dev_dtheta[j] += sign * term.coeff * ev_shift[j];
                        }
                    }
                }
                double d = 0.0;
                for (std::size_t j = 0; j < m; ++j) {
                    d += dev[j] * dev_dtheta[j];
                }
                out.grad[static_cast<std::size_t>(g.slots[k])] += d;
            }
        }
    }
    const double scale = 1.0 / static_cast<double>(samples.size());
    out.loss *= scale;
    for (auto &g : out.grad) {
        g *= scale;
    }
    check_finite(out.grad, "gradient");
    return out;
}

std::vector<double> finite_diff_grad(const Circuit &circuit, const LossFn &loss,
                                     std::span<const double> params, double h,
                                     std::span<const std::size_t> batch) {
    if (!(h > 0.0)) {
        throw NumericError("finite-difference step must be positive");
    }
    std::vector<double> p(params.begin(), params.end());
    std::vector<double> grad(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double orig = p[i];
        p[i] = orig + h;
        const double up = evaluate_loss(circuit, p, loss, batch);
        p[i] = orig - h;
        const double down = evaluate_loss(circuit, p, loss, batch);
        p[i] = orig;
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

LossAndGrad adjoint_grad(const Circuit &circuit, const LossFn &loss, std::span<const double> params,
                         std::span<const std::size_t> batch) {
    const auto samples = resolve_batch(loss, batch);
    const std::size_t m = loss.observables.size();
    LossAndGrad out;
    out.grad.assign(circuit.n_params, 0.0);
    std::vector<double> dev(m);
    std::vector<GateMatrix> unitaries;
    unitaries.reserve(circuit.gates.size());
    for (const Gate &g : circuit.gates) {
        unitaries.push_back(qstate::bound_unitary(g, params));
    }
    for (auto s : samples) {
        Statevector psi = prepared_state(circuit, loss, s);
        for (std::size_t gi = 0; gi < circuit.gates.size(); ++gi) {
            psi.apply_unitary(circuit.gates[gi].wire_span(), unitaries[gi]);
        }
        const auto ev = expectations_of(psi, loss);
        out.loss += loss.head(ev, s, dev);

        // lambda = (sum_j dev_j O_j) psi
        Statevector lambda(std::vector<qstate::cplx>(psi.amps().size(), qstate::cplx{0.0, 0.0}));
        for (std::size_t j = 0; j < m; ++j) {
            if (dev[j] == 0.0) {
                continue;
            }
            const Statevector op = qstate::apply_pauli(psi, loss.observables[j]);
            auto la = lambda.amps();
            const auto oa = op.amps();
            for (std::size_t i = 0; i < la.size(); ++i) {
                la[i] += dev[j] * oa[i];
            }
        }
        for (std::size_t gi = circuit.gates.size(); gi-- > 0;) {
            const Gate &g = circuit.gates[gi];
            const auto wires = g.wire_span();
            const GateMatrix udag = unitaries[gi].adjoint();
            psi.apply_unitary(wires, udag);
            const std::size_t np = g.param_count();
            if (np > 0) {
                std::array<double, 3> angles{};
                for (std::size_t k = 0; k < np; ++k) {
                    angles[k] = g.angle(k, params);
                }
                for (std::size_t k = 0; k < np; ++k) {
                    if (!g.is_trainable(k)) {
                        continue;
                    }
                    Statevector mu = psi;
                    mu.apply_unitary(wires, qstate::gate_unitary_derivative(
                                                g.kind, std::span<const double>(angles.data(), np), k));
                    qstate::cplx overlap{0.0, 0.0};
                    const auto la = lambda.amps();
                    const auto ma = mu.amps();
                    for (std::size_t i = 0; i < la.size(); ++i) {
                        overlap += std::conj(la[i]) * ma[i];
                    }
                    out.grad[static_cast<std::size_t>(g.slots[k])] += 2.0 * overlap.real();
                }
            }
            lambda.apply_unitary(wires, udag);
        }
    }
    const double scale = 1.0 / static_cast<double>(samples.size());
    out.loss *= scale;
    for (auto &g : out.grad) {
        g *= scale;
    }
    check_finite(out.grad, "gradient");
    return out;
}

LossAndGrad loss_and_grad(const Circuit &circuit, const LossFn &loss, std::span<const double> params,
                          GradMethod method, std::span<const std::size_t> batch) {
    return method == GradMethod::Adjoint ? adjoint_grad(circuit, loss, params, batch)
                                         : param_shift_grad(circuit, loss, params, batch);
}

} // namespace qnas::grad
