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

#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qnas/qstate/gate.hpp"

namespace qnas::noise {

/// Default gate durations in seconds.
inline constexpr double kDefaultDuration1q = 35e-9;
inline constexpr double kDefaultDuration2q = 300e-9;
inline constexpr double kDefaultDurationMeasure = 1000e-9;

/**
 * Calibration snapshot of a device.
 *
 * Single-qubit error rates are keyed by gate kind name, with `*` as the
 * per-qubit fallback. RZ is a virtual frame change: it only picks up an
 * error or a duration when the file names RZ explicitly.
 */
struct DeviceModel {
    std::string name;
    std::size_t n_physical{0};
    /// Undirected pairs stored with first < second, sorted.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> coupling;
    std::vector<std::map<std::string, double>> err_1q;
    std::map<std::pair<std::uint32_t, std::uint32_t>, double> err_2q;
    std::vector<double> t1;
    std::vector<double> t2;
    /// Keys: gate kind names, or the classes "1q", "2q", "measure".
    std::map<std::string, double> gate_time;
    /// Per qubit confusion matrix, row-major {P(0|0), P(1|0), P(0|1), P(1|1)}.
    std::vector<std::array<double, 4>> readout;

    [[nodiscard]] bool coupled(std::uint32_t a, std::uint32_t b) const;
    [[nodiscard]] double error_1q(std::uint32_t q, qstate::GateKind kind) const;
    /// Throws RoutingError for an uncoupled pair.
    [[nodiscard]] double error_2q(std::uint32_t a, std::uint32_t b) const;
    [[nodiscard]] double error_of(const qstate::Gate &gate) const;
    [[nodiscard]] double duration(qstate::GateKind kind) const;
    /// Rows = true state, columns = reported state.
    [[nodiscard]] Eigen::Matrix2d confusion(std::uint32_t q) const;
    /// Adjacency lists indexed by physical qubit.
    [[nodiscard]] std::vector<std::vector<std::uint32_t>> neighbors() const;

    /// Throws ValidationError naming the offending field.
    void validate() const;
};

/// A device with `n` qubits, the given edges and no noise at all.
[[nodiscard]] DeviceModel noiseless_device(std::size_t n,
                                           std::vector<std::pair<std::uint32_t, std::uint32_t>> edges);
/// All-to-all noiseless device, used when no device is configured.
[[nodiscard]] DeviceModel ideal_device(std::size_t n);

[[nodiscard]] DeviceModel parse_device_model(std::istream &in, const std::string &name = "device");
[[nodiscard]] DeviceModel load_device_model(const std::string &path);
[[nodiscard]] std::string format_device_model(const DeviceModel &device);

} // namespace qnas::noise
