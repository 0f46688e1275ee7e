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
#include "qnas/tasks/dataset.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <numbers>
#include <numeric>
#include <random>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "qnas/error.hpp"

namespace qnas::tasks {

using qstate::GateKind;

namespace {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;
constexpr std::size_t kMnistSide = 28;
constexpr std::size_t kCropSide = 24;

bool is_encoder_kind(GateKind k) {
    return k == GateKind::RX || k == GateKind::RY || k == GateKind::RZ;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError(fmt::format("cannot open {}", path.string()));
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<std::uint8_t> &buf, std::size_t offset) {
    return (std::uint32_t{buf[offset]} << 24) | (std::uint32_t{buf[offset + 1]} << 16) |
           (std::uint32_t{buf[offset + 2]} << 8) | std::uint32_t{buf[offset + 3]};
}

void put_be32(std::ofstream &out, std::uint32_t v) {
    const std::array<char, 4> b{static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                                static_cast<char>(v >> 8), static_cast<char>(v)};
    out.write(b.data(), 4);
}

std::ofstream open_out(const std::filesystem::path &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError(fmt::format("cannot write {}", path.string()));
    }
    return out;
}

Dataset take(const Dataset &src, std::span<const std::size_t> idx) {
    Dataset d;
    d.n_classes = src.n_classes;
    for (std::size_t i : idx) {
        d.features.push_back(src.features[i]);
        d.labels.push_back(src.labels[i]);
    }
    return d;
}

} // namespace

std::size_t EncoderSpec::n_features() const noexcept {
    std::size_t n = 0;
    for (const auto &[kind, count] : layers) {
        n += count;
    }
    return n;
}

EncoderSpec mnist4_encoder() {
    return {4, {{GateKind::RY, 4}, {GateKind::RZ, 4}, {GateKind::RX, 4}, {GateKind::RY, 4}}};
}

EncoderSpec rotation_encoder(std::size_t n_qubits, std::size_t n_features) {
    if (n_qubits == 0) {
        throw ConfigError("encoder needs at least one qubit");
    }
    constexpr std::array<GateKind, 4> cycle{GateKind::RY, GateKind::RZ, GateKind::RX, GateKind::RY};
    EncoderSpec spec{n_qubits, {}};
    for (std::size_t used = 0, l = 0; used < n_features; ++l) {
        const std::size_t c = std::min(n_qubits, n_features - used);
        spec.layers.emplace_back(cycle[l % cycle.size()], c);
        used += c;
    }
    return spec;
}

EncoderSpec parse_encoder(const std::string &text, std::size_t n_qubits) {
    EncoderSpec spec{n_qubits, {}};
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find(',', pos);
        if (end == std::string::npos) end = text.size();
        std::string tok;
        for (std::size_t i = pos; i < end; ++i) {
            if (!std::isspace(static_cast<unsigned char>(text[i]))) tok += text[i];
        }
        pos = end + 1;
        if (tok.empty()) continue;
        std::size_t digits = 0;
        while (digits < tok.size() && std::isdigit(static_cast<unsigned char>(tok[digits]))) ++digits;
        const auto kind = qstate::parse_kind(tok.substr(digits));
        if (digits == 0 || !kind || !is_encoder_kind(*kind)) {
            throw FormatError(fmt::format("bad encoder layer '{}' (expected e.g. 4RY)", tok));
        }
        spec.layers.emplace_back(*kind, std::stoul(tok.substr(0, digits)));
    }
    if (spec.layers.empty()) {
        throw FormatError("empty encoder spec");
    }
    return spec;
}

std::string format_encoder(const EncoderSpec &spec) {
    std::string out;
    for (const auto &[kind, count] : spec.layers) {
        if (!out.empty()) out += ',';
        out += fmt::format("{}{}", count, qstate::kind_name(kind));
    }
    return out;
}

std::vector<qstate::Gate> encode(std::span<const double> features, const EncoderSpec &spec) {
    if (features.size() != spec.n_features()) {
        throw ArityError(fmt::format("encoder takes {} features, got {}", spec.n_features(),
                                     features.size()));
    }
    std::vector<qstate::Gate> gates;
    gates.reserve(features.size());
    std::size_t f = 0;
    for (const auto &[kind, count] : spec.layers) {
        if (!is_encoder_kind(kind)) {
            throw UnsupportedGateError(fmt::format("{} cannot encode features", qstate::kind_name(kind)));
        }
        for (std::size_t j = 0; j < count; ++j, ++f) {
            qstate::Gate g;
            g.kind = kind;
            g.wires[0] = static_cast<std::uint32_t>(j % spec.n_qubits);
            g.angles[0] = features[f];
            gates.push_back(g);
        }
    }
    return gates;
}

void Dataset::validate() const {
    if (features.size() != labels.size()) {
        throw ValidationError(fmt::format("dataset has {} feature rows but {} labels",
                                          features.size(), labels.size()));
    }
    for (std::size_t i = 0; i < size(); ++i) {
        if (features[i].size() != dim()) {
            throw ValidationError(fmt::format("dataset row {} has {} features, expected {}", i,
                                              features[i].size(), dim()));
        }
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= n_classes) {
            throw ValidationError(fmt::format("dataset label {} out of range at row {}", labels[i], i));
        }
    }
}

const Dataset &split_of(const DatasetSplits &d, Split s) {
    switch (s) {
    case Split::Train: return d.train;
    case Split::Valid: return d.valid;
    case Split::Test: return d.test;
    }
    return d.test;
}

Split parse_split(const std::string &name) {
    if (name == "train") return Split::Train;
    if (name == "valid") return Split::Valid;
    if (name == "test") return Split::Test;
    throw ConfigError(fmt::format("unknown split '{}' (train, valid, test)", name));
}

std::string split_name(Split s) {
    switch (s) {
    case Split::Train: return "train";
    case Split::Valid: return "valid";
    case Split::Test: return "test";
    }
    return "train";
}

namespace {

void check_synthetic(std::size_t n, std::size_t n_classes, std::size_t dim) {
    if (n_classes < 2 || dim < 2 || n < n_classes) {
        throw ConfigError(fmt::format("synthetic dataset needs n >= classes >= 2 and dim >= 2 "
                                      "(n={}, classes={}, dim={})", n, n_classes, dim));
    }
}

// Orthonormal basis of the plane holding the class centers; consumes the
// first 2*dim normal draws of the generator.
std::pair<Eigen::VectorXd, Eigen::VectorXd> center_plane(std::size_t dim, std::mt19937_64 &rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto d = static_cast<Eigen::Index>(dim);
    Eigen::VectorXd u(d), v(d);
    for (Eigen::Index i = 0; i < d; ++i) u(i) = gauss(rng);
    for (Eigen::Index i = 0; i < d; ++i) v(i) = gauss(rng);
    u.normalize();
    v -= u.dot(v) * u;
    v.normalize();
    return {u, v};
}

Eigen::VectorXd center_of(std::size_t label, std::size_t n_classes, const Eigen::VectorXd &u,
                          const Eigen::VectorXd &v) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(label) / static_cast<double>(n_classes);
    return kSyntheticRadius * (std::cos(a) * u + std::sin(a) * v);
}

} // namespace

std::vector<std::vector<double>> synthetic_centers(std::size_t n_classes, std::size_t dim,
                                                   std::uint64_t seed) {
    check_synthetic(n_classes, n_classes, dim);
    std::mt19937_64 rng(seed);
    const auto [u, v] = center_plane(dim, rng);
    std::vector<std::vector<double>> out;
    for (std::size_t c = 0; c < n_classes; ++c) {
        const Eigen::VectorXd x = center_of(c, n_classes, u, v);
        out.emplace_back(x.data(), x.data() + x.size());
    }
    return out;
}

DatasetSplits synthetic_dataset(std::size_t n, std::size_t n_classes, std::size_t dim,
                                std::uint64_t seed) {
    check_synthetic(n, n_classes, dim);
    std::mt19937_64 rng(seed);
    const auto [u, v] = center_plane(dim, rng);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto d = static_cast<Eigen::Index>(dim);
    const double sigma = 0.5;
    const double max_inplane =
        kSyntheticRadius * std::sin(std::numbers::pi / static_cast<double>(n_classes)) - kSyntheticMargin;
    Dataset all;
    all.n_classes = n_classes;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t label = i % n_classes;
        Eigen::VectorXd x(d);
        do {
            for (Eigen::Index k = 0; k < d; ++k) x(k) = sigma * gauss(rng);
        } while (std::hypot(x.dot(u), x.dot(v)) > max_inplane);
        x += center_of(label, n_classes, u, v);
        all.features.emplace_back(x.data(), x.data() + d);
        all.labels.push_back(static_cast<int>(label));
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t n_train = n * 6 / 10;
    const std::size_t n_valid = n * 2 / 10;
    const std::span<const std::size_t> o(order);
    return {take(all, o.subspan(0, n_train)), take(all, o.subspan(n_train, n_valid)),
            take(all, o.subspan(n_train + n_valid))};
}

IdxImages read_idx_images(const std::filesystem::path &path) {
    const auto buf = read_file(path);
    if (buf.size() < 16 || be32(buf, 0) != kIdxImagesMagic) {
        throw FormatError(fmt::format("{}: not an IDX3 unsigned-byte image file", path.string()));
    }
    const std::size_t count = be32(buf, 4);
    IdxImages out;
    out.rows = be32(buf, 8);
    out.cols = be32(buf, 12);
    const std::size_t px = out.rows * out.cols;
    if (buf.size() != 16 + count * px) {
        throw FormatError(fmt::format("{}: header promises {} images of {}x{} but the file has {} bytes",
                                      path.string(), count, out.rows, out.cols, buf.size()));
    }
    out.images.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto first = buf.begin() + static_cast<std::ptrdiff_t>(16 + i * px);
        out.images.emplace_back(first, first + static_cast<std::ptrdiff_t>(px));
    }
    return out;
}

std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path &path) {
    const auto buf = read_file(path);
    if (buf.size() < 8 || be32(buf, 0) != kIdxLabelsMagic) {
        throw FormatError(fmt::format("{}: not an IDX1 unsigned-byte label file", path.string()));
    }
    const std::size_t count = be32(buf, 4);
    if (buf.size() != 8 + count) {
        throw FormatError(fmt::format("{}: header promises {} labels but the file has {} bytes",
                                      path.string(), count, buf.size()));
    }
    return {buf.begin() + 8, buf.end()};
}

void write_idx_images(const std::filesystem::path &path, const IdxImages &images) {
    auto out = open_out(path);
    put_be32(out, kIdxImagesMagic);
    put_be32(out, static_cast<std::uint32_t>(images.images.size()));
    put_be32(out, static_cast<std::uint32_t>(images.rows));
    put_be32(out, static_cast<std::uint32_t>(images.cols));
    for (const auto &img : images.images) {
        if (img.size() != images.rows * images.cols) {
            throw ValidationError("IDX image size does not match rows x cols");
        }
        out.write(reinterpret_cast<const char *>(img.data()), static_cast<std::streamsize>(img.size()));
    }
}

void write_idx_labels(const std::filesystem::path &path, std::span<const std::uint8_t> labels) {
    auto out = open_out(path);
    put_be32(out, kIdxLabelsMagic);
    put_be32(out, static_cast<std::uint32_t>(labels.size()));
    out.write(reinterpret_cast<const char *>(labels.data()), static_cast<std::streamsize>(labels.size()));
}

Dataset load_mnist_idx(const std::filesystem::path &images_path,
                       const std::filesystem::path &labels_path) {
    const auto images = read_idx_images(images_path);
    const auto labels = read_idx_labels(labels_path);
    if (images.images.size() != labels.size()) {
        throw FormatError(fmt::format("{} images but {} labels", images.images.size(), labels.size()));
    }
    Dataset d;
    d.n_classes = 10;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        std::vector<double> px(images.images[i].size());
        std::transform(images.images[i].begin(), images.images[i].end(), px.begin(),
                       [](std::uint8_t b) { return b / 255.0; });
        d.features.push_back(std::move(px));
        d.labels.push_back(labels[i]);
    }
    return d;
}

std::vector<double> preprocess(std::span<const double> image, std::size_t target) {
    if (target != 4 && target != 6) {
        throw ConfigError(fmt::format("preprocess target must be 4 or 6, got {}", target));
    }
    if (image.size() != kMnistSide * kMnistSide) {
        throw ArityError(fmt::format("preprocess expects a 28x28 image, got {} pixels", image.size()));
    }
    const std::size_t off = (kMnistSide - kCropSide) / 2;
    const std::size_t k = kCropSide / target;
    std::vector<double> out(target * target, 0.0);
    for (std::size_t r = 0; r < kCropSide; ++r) {
        for (std::size_t c = 0; c < kCropSide; ++c) {
            out[(r / k) * target + c / k] += image[(r + off) * kMnistSide + c + off];
        }
    }
    for (auto &x : out) {
        x /= static_cast<double>(k * k);
    }
    return out;
}

Standardizer Standardizer::fit(const Dataset &train) {
    double sum = 0.0, sq = 0.0;
    std::size_t n = 0;
    for (const auto &row : train.features) {
        for (double x : row) {
            sum += x;
            sq += x * x;
            ++n;
        }
    }
    Standardizer s;
    if (n == 0) return s;
    s.mean = sum / static_cast<double>(n);
    const double var = sq / static_cast<double>(n) - s.mean * s.mean;
    s.stddev = var > 1e-24 ? std::sqrt(var) : 1.0;
    return s;
}

void Standardizer::apply(Dataset &d) const {
    for (auto &row : d.features) {
        for (auto &x : row) {
            x = (x - mean) / stddev * std::numbers::pi;
        }
    }
}

DatasetSplits load_mnist(const std::filesystem::path &dir, std::span<const int> digits,
                         std::size_t target, std::uint64_t seed, std::size_t n_test,
                         std::size_t max_train) {
    if (digits.size() < 2) {
        throw ConfigError("MNIST task needs at least two digits");
    }
    auto filter = [&](const Dataset &raw) {
        Dataset d;
        d.n_classes = digits.size();
        for (std::size_t i = 0; i < raw.size(); ++i) {
            const auto it = std::find(digits.begin(), digits.end(), raw.labels[i]);
            if (it == digits.end()) continue;
            d.features.push_back(preprocess(raw.features[i], target));
            d.labels.push_back(static_cast<int>(it - digits.begin()));
        }
        return d;
    };
    const Dataset train_all = filter(load_mnist_idx(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte"));
    const Dataset test_all = filter(load_mnist_idx(dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte"));

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> order(train_all.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t n_train = order.size() * 95 / 100;
    const std::span<const std::size_t> o(order);
    DatasetSplits out;
    out.train = take(train_all, o.subspan(0, max_train ? std::min(max_train, n_train) : n_train));
    out.valid = take(train_all, o.subspan(n_train));

    std::vector<std::size_t> test_order(test_all.size());
    std::iota(test_order.begin(), test_order.end(), 0);
    std::shuffle(test_order.begin(), test_order.end(), rng);
    out.test = take(test_all, std::span<const std::size_t>(test_order).first(std::min(n_test, test_order.size())));

    const auto s = Standardizer::fit(out.train);
    s.apply(out.train);
    s.apply(out.valid);
    s.apply(out.test);
    return out;
}

std::filesystem::path data_dir() {
    if (const char *env = std::getenv("QNAS_DATA_DIR"); env != nullptr && *env != '\0') {
        return env;
    }
    return "data";
}

} // namespace qnas::tasks
