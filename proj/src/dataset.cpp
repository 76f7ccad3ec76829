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
#include "deepclean/dataset.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace deepclean {

namespace {

constexpr std::uint32_t kIdxImageMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelMagic = 0x00000801;
constexpr std::size_t kCifarRecord = 1 + 3 * 32 * 32;
constexpr int kMnistClasses = 10;
constexpr int kCifarClasses = 10;

class ByteReader {
  public:
    ByteReader(const std::vector<std::uint8_t>& bytes, std::string what) : bytes_(bytes), what_(std::move(what)) {}

    std::uint32_t be32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = (v << 8) | bytes_[pos_++];
        return v;
    }

    const std::uint8_t* take(std::size_t n) {
        need(n);
        const std::uint8_t* p = bytes_.data() + pos_;
        pos_ += n;
        return p;
    }

    std::size_t offset() const { return pos_; }

  private:
    void need(std::size_t n) const {
        if (pos_ + n > bytes_.size()) {
            throw FormatError(what_ + ": truncated at byte offset " + std::to_string(bytes_.size()) + " (needed " +
                              std::to_string(pos_ + n) + " bytes)");
        }
    }

    const std::vector<std::uint8_t>& bytes_;
    std::string what_;
    std::size_t pos_ = 0;
};

std::vector<std::size_t> iota(std::size_t n) {
    std::vector<std::size_t> v(n);
    std::iota(v.begin(), v.end(), std::size_t{0});
    return v;
}

}  // namespace

std::vector<int> LabeledDataset::labels_at(std::span<const std::size_t> indices) const {
    std::vector<int> out;
    out.reserve(indices.size());
    for (auto i : indices) out.push_back(labels.at(i));
    return out;
}

std::vector<std::size_t> LabeledDataset::histogram() const {
    std::vector<std::size_t> h(static_cast<std::size_t>(class_count), 0);
    for (int y : labels) ++h.at(static_cast<std::size_t>(y));
    return h;
}

void LabeledDataset::validate() const {
    if (!labels.empty() && images.dim(0) != static_cast<Index>(labels.size())) {
        throw FormatError("dataset: " + std::to_string(images.dim(0)) + " images but " +
                          std::to_string(labels.size()) + " labels");
    }
    for (int y : labels) {
        if (y < 0 || y >= class_count) {
            throw FormatError("dataset: label " + std::to_string(y) + " outside [0, " + std::to_string(class_count) + ")");
        }
    }
    if (origin.size() != labels.size()) throw FormatError("dataset: origin index size mismatch");
}

LabeledDataset subset(const LabeledDataset& data, std::span<const std::size_t> indices) {
    LabeledDataset out;
    out.class_count = data.class_count;
    if (indices.empty()) return out;
    out.images = data.batch<float>(indices);
    out.labels = data.labels_at(indices);
    out.origin.reserve(indices.size());
    for (auto i : indices) out.origin.push_back(data.origin.at(i));
    return out;
}

LabeledDataset concat(const LabeledDataset& a, const LabeledDataset& b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    if (a.sample_shape() != b.sample_shape() || a.class_count != b.class_count) {
        throw DimensionError("concat: incompatible datasets");
    }
    Vector<float> values(a.images.size() + b.images.size());
    values << a.images.values(), b.images.values();
    Shape shape = a.images.shape();
    shape[0] = static_cast<Index>(a.size() + b.size());
    LabeledDataset out;
    out.images = Tensor<float>(std::move(shape), std::move(values));
    out.labels = a.labels;
    out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
    out.origin = a.origin;
    out.origin.insert(out.origin.end(), b.origin.begin(), b.origin.end());
    out.class_count = a.class_count;
    return out;
}

LabeledDataset cap_per_class(const LabeledDataset& data, std::size_t k) {
    if (k == 0) return data;
    std::vector<std::size_t> taken(static_cast<std::size_t>(data.class_count), 0);
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < data.size(); ++i) {
        auto& t = taken[static_cast<std::size_t>(data.labels[i])];
        if (t < k) {
            ++t;
            keep.push_back(i);
        }
    }
    return subset(data, keep);
}

std::vector<std::uint8_t> read_maybe_gzip(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw FormatError("cannot open '" + path.string() + "': no such file");
    gzFile f = gzopen(path.string().c_str(), "rb");
    if (!f) throw FormatError("cannot open '" + path.string() + "'");
    std::vector<std::uint8_t> out;
    std::vector<std::uint8_t> buf(1 << 16);
    for (;;) {
        const int n = gzread(f, buf.data(), static_cast<unsigned>(buf.size()));
        if (n < 0) {
            int code = 0;
            const std::string msg = gzerror(f, &code);
            gzclose(f);
            throw FormatError("'" + path.string() + "': decompression failed after " + std::to_string(out.size()) +
                              " bytes: " + msg);
        }
        if (n == 0) break;
        out.insert(out.end(), buf.begin(), buf.begin() + n);
    }
    gzclose(f);
    return out;
}

LabeledDataset load_mnist(const std::filesystem::path& images, const std::filesystem::path& labels) {
    const auto img_bytes = read_maybe_gzip(images);
    const auto lbl_bytes = read_maybe_gzip(labels);

    ByteReader img(img_bytes, images.string());
    const std::uint32_t img_magic = img.be32();
    if (img_magic != kIdxImageMagic) {
        throw FormatError(images.string() + ": bad IDX image magic 0x" + [&] {
            char buf[16];
            std::snprintf(buf, sizeof buf, "%08x", img_magic);
            return std::string(buf);
        }());
    }
    const std::size_t n = img.be32();
    const std::size_t rows = img.be32();
    const std::size_t cols = img.be32();
    if (n == 0 || rows == 0 || cols == 0) throw FormatError(images.string() + ": empty IDX image file");
    const std::uint8_t* pixels = img.take(n * rows * cols);

    ByteReader lbl(lbl_bytes, labels.string());
    if (lbl.be32() != kIdxLabelMagic) throw FormatError(labels.string() + ": bad IDX label magic");
    const std::size_t n_labels = lbl.be32();
    if (n_labels != n) {
        throw FormatError("IDX count mismatch: " + std::to_string(n) + " images vs " + std::to_string(n_labels) +
                          " labels");
    }
    const std::uint8_t* raw_labels = lbl.take(n);

    Vector<float> values(static_cast<Index>(n * rows * cols));
    for (Index i = 0; i < values.size(); ++i) values[i] = static_cast<float>(pixels[i]) / 255.0f;
    LabeledDataset out;
    out.images = Tensor<float>({static_cast<Index>(n), 1, static_cast<Index>(rows), static_cast<Index>(cols)},
                               std::move(values));
    out.labels.assign(raw_labels, raw_labels + n);
    out.class_count = kMnistClasses;
    out.origin = iota(n);
    out.validate();
    return out;
}

LabeledDataset load_cifar10(const std::vector<std::filesystem::path>& batches) {
    if (batches.empty()) throw FormatError("cifar10: no batch files given");
    std::vector<std::vector<std::uint8_t>> contents;
    std::size_t total = 0;
    for (const auto& p : batches) {
        auto bytes = read_maybe_gzip(p);
        if (bytes.empty() || bytes.size() % kCifarRecord != 0) {
            throw FormatError(p.string() + ": length " + std::to_string(bytes.size()) +
                              " is not a positive multiple of " + std::to_string(kCifarRecord));
        }
        total += bytes.size() / kCifarRecord;
        contents.push_back(std::move(bytes));
    }
    Vector<float> values(static_cast<Index>(total * (kCifarRecord - 1)));
    LabeledDataset out;
    out.labels.reserve(total);
    Index v = 0;
    for (const auto& bytes : contents) {
        for (std::size_t r = 0; r < bytes.size() / kCifarRecord; ++r) {
            const std::uint8_t* rec = bytes.data() + r * kCifarRecord;
            out.labels.push_back(rec[0]);
            for (std::size_t k = 1; k < kCifarRecord; ++k) values[v++] = static_cast<float>(rec[k]) / 255.0f;
        }
    }
    out.images = Tensor<float>({static_cast<Index>(total), 3, 32, 32}, std::move(values));
    out.class_count = kCifarClasses;
    out.origin = iota(total);
    out.validate();
    return out;
}

LabeledDataset augment_flip_shift(const LabeledDataset& data, int max_shift, Rng& rng) {
    if (data.empty()) return data;
    const Shape s = data.sample_shape();
    const Index c = s[0], h = s[1], w = s[2];
    const auto src = data.images.values();
    Vector<float> out = Vector<float>::Zero(src.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const bool flip = rng.uniform_index(2) == 1;
        const int span = 2 * max_shift + 1;
        const Index dy = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(span))) - max_shift;
        const Index dx = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(span))) - max_shift;
        const Index base = static_cast<Index>(i) * c * h * w;
        for (Index ch = 0; ch < c; ++ch)
            for (Index y = 0; y < h; ++y)
                for (Index x = 0; x < w; ++x) {
                    const Index sy = y - dy;
                    Index sx = x - dx;
                    if (sy < 0 || sy >= h || sx < 0 || sx >= w) continue;
                    if (flip) sx = w - 1 - sx;
                    out[base + (ch * h + y) * w + x] = src[base + (ch * h + sy) * w + sx];
                }
    }
    LabeledDataset aug = data;
    aug.images = Tensor<float>(data.images.shape(), std::move(out));
    return aug;
}

std::string to_string(Scenario s) { return s == Scenario::kRandom ? "random" : "class"; }

Scenario parse_scenario(const std::string& tag) {
    if (tag == "random") return Scenario::kRandom;
    if (tag == "class") return Scenario::kClass;
    throw ContractError("unknown scenario '" + tag + "' (expected random or class)");
}

DataSplit split_random(const LabeledDataset& train, const LabeledDataset& test, double fraction,
                       std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw ContractError("split_random: fraction must lie in (0, 1), got " + std::to_string(fraction));
    }
    const std::size_t n = train.size();
    const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    if (k == 0 || k == n) {
        throw ContractError("split_random: fraction " + std::to_string(fraction) + " of " + std::to_string(n) +
                            " samples leaves an empty side");
    }
    Rng rng = Rng(seed).fork(streams::kSplit);
    const auto forget_idx = rng.sample_without_replacement(n, k);
    std::vector<std::size_t> retain_idx;
    retain_idx.reserve(n - k);
    std::size_t j = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (j < forget_idx.size() && forget_idx[j] == i) {
            ++j;
        } else {
            retain_idx.push_back(i);
        }
    }
    DataSplit split;
    split.retain = subset(train, retain_idx);
    split.forget = subset(train, forget_idx);
    split.test = test;
    split.scenario = Scenario::kRandom;
    split.seed = seed;
    split.fraction = fraction;
    return split;
}

DataSplit split_class(const LabeledDataset& train, const LabeledDataset& test, int target_class) {
    if (target_class < 0 || target_class >= train.class_count) {
        throw IndexError("split_class: class " + std::to_string(target_class) + " outside [0, " +
                         std::to_string(train.class_count) + ")");
    }
    std::vector<std::size_t> retain_idx, forget_idx;
    for (std::size_t i = 0; i < train.size(); ++i) {
        (train.labels[i] == target_class ? forget_idx : retain_idx).push_back(i);
    }
    if (forget_idx.empty()) {
        throw ContractError("split_class: class " + std::to_string(target_class) + " has no samples (empty forget set)");
    }
    DataSplit split;
    split.retain = subset(train, retain_idx);
    split.forget = subset(train, forget_idx);
    split.test = test;
    split.scenario = Scenario::kClass;
    split.target_class = target_class;
    return split;
}

}  // namespace deepclean
