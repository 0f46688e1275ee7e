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

#include <span>
#include <vector>

#include "qnas/grad/loss.hpp"

namespace qnas::grad {

enum class GradMethod { ParamShift, Adjoint };

struct LossAndGrad {
    double loss{0.0};
    std::vector<double> grad;
};

/**
 * Parameter-shift gradient of the mean batch loss. Each angle occurrence
 * is shifted on its own and the chain rule is applied through `head`, so
 * nonlinear heads (softmax NLL) are handled exactly.
 */
[[nodiscard]] LossAndGrad param_shift_grad(const qstate::Circuit &circuit, const LossFn &loss,
                                           std::span<const double> params,
                                           std::span<const std::size_t> batch = {});

/// Central differences (L(θ+h) - L(θ-h)) / 2h per slot. Test oracle.
[[nodiscard]] std::vector<double> finite_diff_grad(const qstate::Circuit &circuit,
                                                   const LossFn &loss,
                                                   std::span<const double> params, double h,
                                                   std::span<const std::size_t> batch = {});

/// Reverse-mode (adjoint) gradient: one forward and one backward sweep per sample.
[[nodiscard]] LossAndGrad adjoint_grad(const qstate::Circuit &circuit, const LossFn &loss,
                                       std::span<const double> params,
                                       std::span<const std::size_t> batch = {});

[[nodiscard]] LossAndGrad loss_and_grad(const qstate::Circuit &circuit, const LossFn &loss,
                                        std::span<const double> params, GradMethod method,
                                        std::span<const std::size_t> batch = {});

} // namespace qnas::grad
