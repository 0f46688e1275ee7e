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
 * Feature encoders and classification datasets: IDX ingestion, image
 * preprocessing and a seeded synthetic stand-in.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qnas/qstate/gate.hpp"

namespace qnas::tasks {

/**
 * Fixed rotation layers that consume input features in order. Within a
 * layer, feature j lands on qubit j mod n_qubits.
 */
struct EncoderSpec {
    std::size_t n_qubits{4};
    std::vector<std::pair<qstate::GateKind, std::size_t>> layers;

    [[nodiscard]] std::size_t n_features() const noexcept;
    [[nodiscard]] bool operator==(const EncoderSpec &) const = default;
};

/// 4RY, 4RZ, 4RX, 4RY on 4 qubits: 16 features from a 4x4 image.
[[nodiscard]] EncoderSpec mnist4_encoder();
/// Cycles RY, RZ, RX, RY layers of n_qubits gates until `n_features` are consumed.
[[nodiscard]] EncoderSpec rotation_encoder(std::size_t n_qubits, std::size_t n_features);
/// "4RY,4RZ,4RX,4RY" style text, as used in configs.
[[nodiscard]] EncoderSpec parse_encoder(const std::string &text, std::size_t n_qubits);
[[nodiscard]] std::string format_encoder(const EncoderSpec &spec);

/// Non-trainable rotations with angle = feature value; ArityError on a size mismatch.
[[nodiscard]] std::vector<qstate::Gate> encode(std::span<const double> features,
                                               const EncoderSpec &spec);

struct Dataset {
    std::vector<std::vector<double>> features;
    std::vector<int> labels;
    std::size_t n_classes{2};

    [[nodiscard]] std::size_t size() const noexcept { return labels.size(); }
    [[nodiscard]] std::size_t dim() const noexcept { return features.empty() ? 0 : features[0].size(); }
    /// Throws ValidationError on ragged features or out-of-range labels.
    void validate() const;
};

struct DatasetSplits {
    Dataset train;
    Dataset valid;
    Dataset test;
};

enum class Split { Train, Valid, Test };

[[nodiscard]] const Dataset &split_of(const DatasetSplits &d, Split s);
[[nodiscard]] Split parse_split(const std::string &name);
[[nodiscard]] std::string split_name(Split s);

/**
 * Gaussian blobs whose centers sit on a circle in a random 2-d plane of
 * feature space. In-plane noise is truncated so every point is at least 0.5
 * from the bisector between its center and each neighbour, which makes the
 * classes separable with that margin. Labels are balanced; the shuffled
 * samples are split 60/20/20.
 */
[[nodiscard]] DatasetSplits synthetic_dataset(std::size_t n, std::size_t n_classes, std::size_t dim,
                                              std::uint64_t seed);

/// Class centers synthetic_dataset draws for the same (n_classes, dim, seed).
[[nodiscard]] std::vector<std::vector<double>> synthetic_centers(std::size_t n_classes, std::size_t dim,
                                                                 std::uint64_t seed);

/// Radius of the circle of class centers in synthetic_dataset.
inline constexpr double kSyntheticRadius = 2.0;
inline constexpr double kSyntheticMargin = 0.5;

struct IdxImages {
    std::size_t rows{0};
    std::size_t cols{0};
    std::vector<std::vector<std::uint8_t>> images;
};

/// IDX3 unsigned-byte images; FormatError on bad magic or length.
[[nodiscard]] IdxImages read_idx_images(const std::filesystem::path &path);
/// IDX1 unsigned-byte labels; FormatError on bad magic or length.
[[nodiscard]] std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path &path);
void write_idx_images(const std::filesystem::path &path, const IdxImages &images);
void write_idx_labels(const std::filesystem::path &path, std::span<const std::uint8_t> labels);

/// Images scaled to [0, 1]; labels are the raw digits (n_classes = 10).
[[nodiscard]] Dataset load_mnist_idx(const std::filesystem::path &images_path,
                                     const std::filesystem::path &labels_path);

/**
 * Center-crops a 28x28 image to 24x24 and average-pools it to target x target
 * (target 4 or 6), flattened row-major. ConfigError for other sizes.
 */
[[nodiscard]] std::vector<double> preprocess(std::span<const double> image, std::size_t target);

/// Scalar mean and standard deviation over every feature of a dataset.
struct Standardizer {
    double mean{0.0};
    double stddev{1.0};

    [[nodiscard]] static Standardizer fit(const Dataset &train);
    /// (x - mean) / stddev * pi for every feature.
    void apply(Dataset &d) const;
};

/**
 * MNIST subset from `dir` (train-images-idx3-ubyte etc.): keeps `digits`,
 * relabels them 0..k-1, preprocesses to target x target, splits the training
 * file 95/5 into train/valid and samples `n_test` test images, all seeded.
 * `max_train` caps the training split (0 keeps everything).
 */
[[nodiscard]] DatasetSplits load_mnist(const std::filesystem::path &dir,
                                       std::span<const int> digits, std::size_t target,
                                       std::uint64_t seed, std::size_t n_test = 300,
                                       std::size_t max_train = 0);

/// $QNAS_DATA_DIR when set, else "data".
[[nodiscard]] std::filesystem::path data_dir();

} // namespace qnas::tasks
