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
#ifndef DEEPCLEAN_MODEL_HPP
#define DEEPCLEAN_MODEL_HPP

#include "deepclean/common.hpp"
#include "deepclean/random.hpp"
#include "deepclean/tape.hpp"
#include "deepclean/tensor.hpp"
#include "deepclean/weight_mask.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace deepclean {

enum class Architecture { kMlp, kSmallCnn };

std::string to_string(Architecture arch);
Architecture parse_architecture(const std::string& tag);

/// Architecture description; enough to rebuild the parameter layout.
///
/// For kMlp, `hidden` lists hidden-layer widths. For kSmallCnn it lists the
/// channel counts of the 3x3 conv blocks (each conv, relu, 2x2 max-pool),
/// followed by one dense head.
struct ModelSpec {
    Architecture arch = Architecture::kMlp;
    Shape input_shape{1, 28, 28};
    std::vector<Index> hidden{128};
    Index class_count = 10;
    std::uint64_t seed = 0;

    /// Throws ContractError on nonsensical geometry.
    void validate() const;

    Index input_size() const { return shape_size(input_shape); }

    /// Compact JSON used in checkpoints and manifests.
    std::string descriptor() const;
    static ModelSpec from_descriptor(const std::string& json);

    /// MLP with layer widths [input, hidden..., classes].
    static ModelSpec mlp(const std::vector<Index>& widths, std::uint64_t seed = 0);
    static ModelSpec small_cnn(Shape input_shape, std::vector<Index> channels, Index classes,
                               std::uint64_t seed = 0);

    bool operator==(const ModelSpec&) const = default;
};

struct ParameterInfo {
    std::string name;
    Shape shape;
    Index offset = 0;
    Index fan_in = 1;

    Index size() const { return shape_size(shape); }
    bool operator==(const ParameterInfo&) const = default;
};

/// Position of one scalar weight inside a named parameter.
struct FlatLocation {
    std::string name;
    Index offset = 0;
};

/// All trainable weights of a model in one flat buffer.
///
/// Parameters are laid out in declaration order (layer by layer, weight before
/// bias), which defines the flat index [0, n). The buffer is shared
/// copy-on-write so tensors handed to a tape stay immutable while the store is
/// updated afterwards.
template <typename Scalar>
class ParameterStore {
  public:
    using VectorType = Vector<Scalar>;

    ParameterStore() : values_(std::make_shared<VectorType>()) {}

    Index add(std::string name, Shape shape, Index fan_in) {
        ParameterInfo info{std::move(name), std::move(shape), size(), fan_in};
        const Index new_size = size() + info.size();
        VectorType grown = VectorType::Zero(new_size);
        grown.head(size()) = *values_;
        values_ = std::make_shared<VectorType>(std::move(grown));
        entries_.push_back(std::move(info));
        return static_cast<Index>(entries_.size() - 1);
    }

    Index size() const { return values_->size(); }
    const std::vector<ParameterInfo>& entries() const { return entries_; }

    const ParameterInfo& entry(const std::string& name) const {
        for (const auto& e : entries_)
            if (e.name == name) return e;
        throw IndexError("unknown parameter '" + name + "'");
    }

    FlatLocation locate(Index flat) const {
        check_index(flat);
        auto it = std::upper_bound(entries_.begin(), entries_.end(), flat,
                                   [](Index v, const ParameterInfo& e) { return v < e.offset; });
        --it;
        return FlatLocation{it->name, flat - it->offset};
    }

    Index flat_index(const std::string& name, Index offset) const {
        const auto& e = entry(name);
        if (offset < 0 || offset >= e.size()) {
            throw IndexError("offset " + std::to_string(offset) + " outside parameter '" + name + "'");
        }
        return e.offset + offset;
    }

    Scalar get(Index flat) const {
        check_index(flat);
        return (*values_)[flat];
    }

    void set(Index flat, Scalar v) {
        check_index(flat);
        mutable_values()[flat] = v;
    }

    const VectorType& values() const { return *values_; }

    /// Writable buffer; detaches from tensors still viewing the old one.
    VectorType& mutable_values() {
        if (values_.use_count() > 1) values_ = std::make_shared<VectorType>(*values_);
        return *values_;
    }

    void assign(const VectorType& v) {
        if (v.size() != size()) {
            throw DimensionError("assign: expected " + std::to_string(size()) + " values, got " +
                                 std::to_string(v.size()));
        }
        mutable_values() = v;
    }

    /// Read-only tensor over one parameter's slice.
    Tensor<Scalar> tensor(std::size_t entry_index) const {
        const auto& e = entries_.at(entry_index);
        return Tensor<Scalar>::view(e.shape, std::shared_ptr<const VectorType>(values_), e.offset);
    }

    /// Leaf on `tape` for parameter `entry_index`.
    Var bind(Tape<Scalar>& tape, std::size_t entry_index) const {
        return tape.parameter(tensor(entry_index), entries_.at(entry_index).offset);
    }

  private:
    void check_index(Index flat) const {
        if (flat < 0 || flat >= size()) {
            throw IndexError("flat index " + std::to_string(flat) + " outside [0, " + std::to_string(size()) + ")");
        }
    }

    std::vector<ParameterInfo> entries_;
    std::shared_ptr<VectorType> values_;
};

/// Parameter layout implied by a spec, without values.
std::vector<ParameterInfo> parameter_layout(const ModelSpec& spec);

template <typename Scalar>
class Model {
  public:
    using TensorType = Tensor<Scalar>;

    explicit Model(ModelSpec spec) : spec_(std::move(spec)) {
        spec_.validate();
        for (auto& info : parameter_layout(spec_)) params_.add(info.name, info.shape, info.fan_in);
    }

    const ModelSpec& spec() const { return spec_; }
    Index parameter_count() const { return params_.size(); }
    Index class_count() const { return spec_.class_count; }

    ParameterStore<Scalar>& parameters() { return params_; }
    const ParameterStore<Scalar>& parameters() const { return params_; }

    /// Records the network on `tape`. `input` is [B x ...] with per-sample size
    /// equal to the spec's input size; the result is [B x classes].
    Var forward(Tape<Scalar>& tape, Var input) const {
        const auto& in = tape.value(input);
        const Index per_sample = spec_.input_size();
        if (in.rank() < 2 || in.size() != in.dim(0) * per_sample) {
            throw DimensionError("forward: batch " + shape_string(in.shape()) + " does not match input " +
                                 shape_string(spec_.input_shape));
        }
        const Index batch = in.dim(0);
        std::size_t p = 0;
        if (spec_.arch == Architecture::kMlp) {
            Var h = tape.reshape(input, {batch, per_sample});
            const std::size_t layers = spec_.hidden.size() + 1;
            for (std::size_t l = 0; l < layers; ++l) {
                Var w = params_.bind(tape, p++);
                Var b = params_.bind(tape, p++);
                h = tape.add_bias(tape.matmul(h, w), b);
                if (l + 1 < layers) h = tape.relu(h);
            }
            return h;
        }
        Shape shape{batch};
        shape.insert(shape.end(), spec_.input_shape.begin(), spec_.input_shape.end());
        Var h = tape.reshape(input, std::move(shape));
        for (std::size_t l = 0; l < spec_.hidden.size(); ++l) {
            Var k = params_.bind(tape, p++);
            Var b = params_.bind(tape, p++);
            h = tape.maxpool2d(tape.relu(tape.add_channel_bias(tape.conv2d(h, k, 1, 1), b)), 2, 2);
        }
        h = tape.flatten(h, 1);
        Var w = params_.bind(tape, p++);
        Var b = params_.bind(tape, p++);
        return tape.add_bias(tape.matmul(h, w), b);
    }

  private:
    ModelSpec spec_;
    ParameterStore<Scalar> params_;
};

/// Fan-in-scaled uniform initialization U(-1/sqrt(fan_in), 1/sqrt(fan_in)),
/// drawn in flat-index order from the spec's seed.
template <typename Scalar>
Model<Scalar> build_model(const ModelSpec& spec) {
    Model<Scalar> model(spec);
    Rng rng = Rng(spec.seed).fork(streams::kInit);
    auto& values = model.parameters().mutable_values();
    for (const auto& e : model.parameters().entries()) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(e.fan_in));
        for (Index i = 0; i < e.size(); ++i) values[e.offset + i] = static_cast<Scalar>(rng.uniform(-bound, bound));
    }
    return model;
}

/// Logits [B x classes] for a batch [B x ...].
template <typename Scalar>
Tensor<Scalar> forward(const Model<Scalar>& model, const Tensor<Scalar>& batch) {
    Tape<Scalar> tape(model.parameter_count());
    Var out = model.forward(tape, tape.constant(batch));
    return tape.value(out);
}

/// log p(y | x, w) for one sample `x` (shape [1 x ...]) recorded on `tape`.
template <typename Scalar>
Var log_likelihood(Tape<Scalar>& tape, const Model<Scalar>& model, const Tensor<Scalar>& x, int label) {
    if (label < 0 || label >= model.class_count()) {
        throw IndexError("label " + std::to_string(label) + " outside [0, " + std::to_string(model.class_count()) + ")");
    }
    Var logp = tape.log_softmax(model.forward(tape, tape.constant(x)));
    return tape.scale(tape.nll_loss(logp, label), Scalar(-1));
}

template <typename Scalar>
Scalar log_likelihood(const Model<Scalar>& model, const Tensor<Scalar>& x, int label) {
    Tape<Scalar> tape(model.parameter_count());
    return tape.value(log_likelihood(tape, model, x, label)).item();
}

/// Sets every masked weight to exactly 0; all other weights are untouched.
template <typename Scalar>
void apply_mask_zero(Model<Scalar>& model, const WeightMask& mask) {
    if (mask.size() != model.parameter_count()) {
        throw DimensionError("apply_mask_zero: mask has " + std::to_string(mask.size()) + " bits, model has " +
                             std::to_string(model.parameter_count()) + " parameters");
    }
    auto& values = model.parameters().mutable_values();
    for (Index i = 0; i < mask.size(); ++i)
        if (mask.test(i)) values[i] = Scalar(0);
}

template <typename To, typename From>
Model<To> cast_model(const Model<From>& model) {
    Model<To> out(model.spec());
    out.parameters().assign(model.parameters().values().template cast<To>());
    return out;
}

}  // namespace deepclean

#endif  // DEEPCLEAN_MODEL_HPP
