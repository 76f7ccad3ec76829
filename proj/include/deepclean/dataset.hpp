// Copyright 2026 The DeepClean Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#ifndef DEEPCLEAN_DATASET_HPP
#define DEEPCLEAN_DATASET_HPP

#include "deepclean/common.hpp"
#include "deepclean/random.hpp"
#include "deepclean/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace deepclean {

/// Images in [0, 1] with integer class labels.
///
/// `origin` records each sample's position in the dataset it was carved
/// from, so partitions can be checked at the index level.
struct LabeledDataset {
    Tensor<float> images;  // N x C x H x W
    std::vector<int> labels;
    int class_count = 0;
    std::vector<std::size_t> origin;

    std::size_t size() const { return labels.size(); }
    bool empty() const { return labels.empty(); }

    /// Per-sample shape C x H x W.
    Shape sample_shape() const { return Shape(images.shape().begin() + 1, images.shape().end()); }
    Index sample_size() const { return images.size() / static_cast<Index>(std::max<std::size_t>(size(), 1)); }

    /// Samples at `indices` as a [B x C x H x W] tensor in the requested precision.
    template <typename Scalar>
    Tensor<Scalar> batch(std::span<const std::size_t> indices) const {
        const Index d = sample_size();
        Vector<Scalar> out(static_cast<Index>(indices.size()) * d);
        const auto src = images.values();
        for (std::size_t k = 0; k < indices.size(); ++k) {
            out.segment(static_cast<Index>(k) * d, d) =
                src.segment(static_cast<Index>(indices[k]) * d, d).template cast<Scalar>();
        }
        Shape shape{static_cast<Index>(indices.size())};
        const Shape s = sample_shape();
        shape.insert(shape.end(), s.begin(), s.end());
        return Tensor<Scalar>(std::move(shape), std::move(out));
    }

    template <typename Scalar>
    Tensor<Scalar> sample(std::size_t i) const {
        return batch<Scalar>(std::span<const std::size_t>(&i, 1));
    }

    /// Labels at `indices`, same order.
    std::vector<int> labels_at(std::span<const std::size_t> indices) const;

    /// Count of samples per class.
    std::vector<std::size_t> histogram() const;

    /// Checks |images| == |labels| and label range; throws FormatError.
    void validate() const;
};

/// Copy of the samples at `indices`; origin is composed with the parent's.
LabeledDataset subset(const LabeledDataset& data, std::span<const std::size_t> indices);

/// Concatenation (a's samples, then b's).
LabeledDataset concat(const LabeledDataset& a, const LabeledDataset& b);

/// Deterministic desk-scale cap: the first `k` samples of every class, in
/// file order. k == 0 keeps everything.
LabeledDataset cap_per_class(const LabeledDataset& data, std::size_t k);

/// Reads an IDX image/label file pair (optionally gzip-compressed).
LabeledDataset load_mnist(const std::filesystem::path& images, const std::filesystem::path& labels);

/// Reads CIFAR-10 binary batches (1 label byte + 3072 pixel bytes per record).
LabeledDataset load_cifar10(const std::vector<std::filesystem::path>& batches);

/// Whole file, transparently gunzipped when it starts with the gzip magic.
std::vector<std::uint8_t> read_maybe_gzip(const std::filesystem::path& path);

/// Optional CIFAR training augmentation: horizontal flip (p = 0.5) and a
/// random shift of up to `max_shift` pixels with zero fill.
LabeledDataset augment_flip_shift(const LabeledDataset& data, int max_shift, Rng& rng);

enum class Scenario { kRandom, kClass };

std::string to_string(Scenario s);
Scenario parse_scenario(const std::string& tag);

/// Retain / forget / test partition for one unlearning scenario.
struct DataSplit {
    LabeledDataset retain;  // D_r
    LabeledDataset forget;  // D_f
    LabeledDataset test;    // D_test
    Scenario scenario = Scenario::kRandom;
    std::uint64_t seed = 0;
    int target_class = -1;
    double fraction = 0.0;

    /// D_r followed by D_f (the pretraining set, reordered).
    LabeledDataset full_train() const { return concat(retain, forget); }
};

/// Uniform sample of round(fraction * N) indices into D_f, without replacement.
DataSplit split_random(const LabeledDataset& train, const LabeledDataset& test, double fraction,
                       std::uint64_t seed);

/// D_f = every sample of `target_class`.
DataSplit split_class(const LabeledDataset& train, const LabeledDataset& test, int target_class);

}  // namespace deepclean

#endif  // DEEPCLEAN_DATASET_HPP
