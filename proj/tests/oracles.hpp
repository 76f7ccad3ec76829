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
//
// Reference oracles shared by the unit and acceptance tests. Nothing here
// calls the code path it checks: gradients come from central differences of
// the forward value, FIM entries from an explicit per-sample loop.
#ifndef DEEPCLEAN_TESTS_ORACLES_HPP
#define DEEPCLEAN_TESTS_ORACLES_HPP

#include "deepclean/dataset.hpp"
#include "deepclean/fim.hpp"
#include "deepclean/model.hpp"
#include "deepclean/random.hpp"
#include "deepclean/tape.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <vector>

namespace oracle {

using deepclean::Index;
using deepclean::Shape;
using deepclean::Tape;
using deepclean::Tensor;
using deepclean::Var;

inline constexpr double kStep = 1e-5;
inline constexpr double kFloor = 1e-8;

/// |a - b| / max(|a|, |b|, floor)
inline double rel_error(double a, double b, double floor = kFloor) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

template <typename S>
Tensor<S> random_tensor(deepclean::Rng& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
    const Index n = deepclean::shape_size(shape);
    deepclean::Vector<S> v(n);
    for (Index i = 0; i < n; ++i) v[i] = static_cast<S>(rng.uniform(lo, hi));
    return Tensor<S>(std::move(shape), std::move(v));
}

/// Builds a scalar root from inputs bound as parameter leaves.
template <typename S>
using Builder = std::function<Var(Tape<S>&, const std::vector<Var>&)>;

template <typename S>
struct GradCheck {
    deepclean::Vector<S> analytic;
    deepclean::Vector<S> numeric;
    double max_rel = 0.0;
};

template <typename S>
S evaluate(const std::vector<Tensor<S>>& inputs, const Builder<S>& build, Index total) {
    Tape<S> tape(total);
    std::vector<Var> vars;
    Index off = 0;
    for (const auto& t : inputs) {
        vars.push_back(tape.parameter(t, off));
        off += t.size();
    }
    return tape.value(build(tape, vars)).item();
}

/// Analytic gradient from the tape against central differences of the
/// forward value, entry by entry.
template <typename S>
GradCheck<S> check_gradient(const std::vector<Tensor<S>>& inputs, const Builder<S>& build, double h = kStep,
                            double floor = kFloor) {
    Index total = 0;
    for (const auto& t : inputs) total += t.size();
    GradCheck<S> out;
    {
        Tape<S> tape(total);
        std::vector<Var> vars;
        Index off = 0;
        for (const auto& t : inputs) {
            vars.push_back(tape.parameter(t, off));
            off += t.size();
        }
        out.analytic = tape.backward(build(tape, vars));
    }
    out.numeric.resize(total);
    Index flat = 0;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        for (Index i = 0; i < inputs[k].size(); ++i, ++flat) {
            auto shifted = inputs;
            deepclean::Vector<S> plus = inputs[k].values(), minus = inputs[k].values();
            plus[i] += static_cast<S>(h);
            minus[i] -= static_cast<S>(h);
            shifted[k] = Tensor<S>(inputs[k].shape(), plus);
            const double fp = static_cast<double>(evaluate(shifted, build, total));
            shifted[k] = Tensor<S>(inputs[k].shape(), minus);
            const double fm = static_cast<double>(evaluate(shifted, build, total));
            out.numeric[flat] = static_cast<S>((fp - fm) / (2.0 * h));
            out.max_rel = std::max(out.max_rel, rel_error(static_cast<double>(out.analytic[flat]),
                                                          static_cast<double>(out.numeric[flat]), floor));
        }
    }
    return out;
}

/// Scalar root <R, x> for any tensor node x, with R a fixed random weighting,
/// so every output entry contributes a distinct sensitivity.
template <typename S>
Var weighted_sum(Tape<S>& t, Var x, deepclean::Rng& rng) {
    const Index m = t.value(x).size();
    Var row = t.reshape(x, {1, m});
    return t.sum(t.matmul(row, t.constant(random_tensor<S>(rng, {m, 1}))));
}

/// One differentiable op under test: random inputs and a scalar root.
struct OpCase {
    const char* name;
    std::function<std::vector<Tensor<double>>(deepclean::Rng&)> inputs;
    std::function<Var(Tape<double>&, const std::vector<Var>&, deepclean::Rng&)> build;
};

inline std::vector<OpCase> op_cases() {
    using R = deepclean::Rng;
    using T = Tape<double>;
    using V = const std::vector<Var>&;
    return {
        {"matmul", [](R& r) { return std::vector{random_tensor<double>(r, {3, 4}), random_tensor<double>(r, {4, 2})}; },
         [](T& t, V v, R& r) { return weighted_sum(t, t.matmul(v[0], v[1]), r); }},
        {"add_bias", [](R& r) { return std::vector{random_tensor<double>(r, {3, 4}), random_tensor<double>(r, {4})}; },
         [](T& t, V v, R& r) { return weighted_sum(t, t.add_bias(v[0], v[1]), r); }},
        {"conv2d", [](R& r) { return std::vector{random_tensor<double>(r, {2, 4, 4}), random_tensor<double>(r, {3, 2, 3, 3})}; },
         [](T& t, V v, R& r) { return weighted_sum(t, t.conv2d(v[0], v[1], 1, 0), r); }},
        {"conv2d strided padded batch",
         [](R& r) { return std::vector{random_tensor<double>(r, {2, 2, 5, 5}), random_tensor<double>(r, {2, 2, 3, 3})}; },
         [](T& t, V v, R& r) { return weighted_sum(t, t.conv2d(v[0], v[1], 2, 1), r); }},
        {"add_channel_bias",
         [](R& r) { return std::vector{random_tensor<double>(r, {2, 3, 2, 2}), random_tensor<double>(r, {3})}; },
         [](T& t, V v, R& r) { return weighted_sum(t, t.add_channel_bias(v[0], v[1]), r); }},
        {"relu", [](R& r) { return std::vector{random_tensor<double>(r, {12})}; },
         [](T& t, V v, R& r) { return weighted_sum(t, t.relu(v[0]), r); }},
        {"maxpool2d", [](R& r) { return std::vector{random_tensor<double>(r, {2, 4, 4})}; },
         [](T& t, V v, R& r) { return weighted_sum(t, t.maxpool2d(v[0], 2, 2), r); }},
        {"flatten+reshape", [](R& r) { return std::vector{random_tensor<double>(r, {2, 3, 2})}; },
         [](T& t, V v, R& r) { return weighted_sum(t, t.reshape(t.flatten(v[0], 1), {3, 4}), r); }},
        {"log_softmax", [](R& r) { return std::vector{random_tensor<double>(r, {3, 5}, -3, 3)}; },
         [](T& t, V v, R& r) { return weighted_sum(t, t.log_softmax(v[0]), r); }},
        {"nll_loss", [](R& r) { return std::vector{random_tensor<double>(r, {4, 3})}; },
         [](T& t, V v, R&) { return t.nll_loss(t.log_softmax(v[0]), std::vector<int>{2, 0, 1, 2}); }},
        {"square+scale+add+sum",
         [](R& r) { return std::vector{random_tensor<double>(r, {6}), random_tensor<double>(r, {6})}; },
         [](T& t, V v, R&) { return t.sum(t.scale(t.add(t.square(v[0]), v[1]), 0.7)); }},
    };
}

/// Worst relative error of one op over `seeds` random draws.
inline double op_gradient_error(const OpCase& c, std::uint64_t seeds) {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < seeds; ++seed) {
        deepclean::Rng rng(1000 + seed);
        const auto in = c.inputs(rng);
        const std::uint64_t wseed = rng.uniform_index(1u << 30);
        Builder<double> b = [&](Tape<double>& t, const std::vector<Var>& v) {
            deepclean::Rng wr(wseed);
            return c.build(t, v, wr);
        };
        worst = std::max(worst, check_gradient<double>(in, b).max_rel);
    }
    return worst;
}

/// Mean cross-entropy of a model on a batch, gradient by the tape and by
/// central differences over the flat parameter vector.
inline double model_gradient_error(const deepclean::Model<double>& model, const Tensor<double>& x,
                                   const std::vector<int>& y, double h = kStep) {
    auto loss_of = [&](const deepclean::Model<double>& m) {
        Tape<double> t(m.parameter_count());
        return t.value(t.nll_loss(t.log_softmax(m.forward(t, t.constant(x))), y)).item();
    };
    Tape<double> t(model.parameter_count());
    const auto g = t.backward(t.nll_loss(t.log_softmax(model.forward(t, t.constant(x))), y));
    double worst = 0.0;
    auto probe = model;
    for (Index i = 0; i < model.parameter_count(); ++i) {
        const double w = model.parameters().get(i);
        probe.parameters().set(i, w + h);
        const double fp = loss_of(probe);
        probe.parameters().set(i, w - h);
        const double fm = loss_of(probe);
        probe.parameters().set(i, w);
        worst = std::max(worst, rel_error(g[i], (fp - fm) / (2.0 * h)));
    }
    return worst;
}

/// Small labeled dataset with uniform pixel values and labels.
inline deepclean::LabeledDataset synthetic_dataset(std::size_t n, int classes, Shape sample_shape,
                                                   std::uint64_t seed) {
    deepclean::Rng rng(seed);
    Shape shape{static_cast<Index>(n)};
    shape.insert(shape.end(), sample_shape.begin(), sample_shape.end());
    deepclean::LabeledDataset d;
    d.images = random_tensor<float>(rng, shape, 0.0, 1.0);
    d.class_count = classes;
    for (std::size_t i = 0; i < n; ++i) {
        d.labels.push_back(static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(classes))));
        d.origin.push_back(i);
    }
    return d;
}

/// Per-sample loop: one tape per sample, backward of log p(y|x,w), square,
/// arithmetic mean. Independent of chunking, batching and threads.
template <typename S>
deepclean::Vector<double> fim_loop(const deepclean::Model<S>& model, const deepclean::LabeledDataset& data) {
    const Index n = model.parameter_count();
    deepclean::Vector<double> acc = deepclean::Vector<double>::Zero(n);
    for (std::size_t i = 0; i < data.size(); ++i) {
        Tape<S> tape(n);
        const auto g = tape.backward(deepclean::log_likelihood(tape, model, data.sample<S>(i), data.labels[i]));
        for (Index k = 0; k < n; ++k) acc[k] += static_cast<double>(g[k]) * static_cast<double>(g[k]);
    }
    return acc / static_cast<double>(data.size());
}

inline std::filesystem::path source_dir() { return DEEPCLEAN_SOURCE_DIR; }
inline std::filesystem::path desk_mnist_dir() { return source_dir() / "data" / "mnist-desk"; }

}  // namespace oracle

#endif  // DEEPCLEAN_TESTS_ORACLES_HPP
