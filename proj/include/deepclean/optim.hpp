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
#ifndef DEEPCLEAN_OPTIM_HPP
#define DEEPCLEAN_OPTIM_HPP

#include "deepclean/common.hpp"
#include "deepclean/model.hpp"
#include "deepclean/tape.hpp"
#include "deepclean/weight_mask.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

namespace deepclean {

enum class OptimizerKind { kSgdMomentum, kAdam };
enum class LrSchedule { kConstant, kMultiStep, kCosine };

std::string to_string(OptimizerKind k);
OptimizerKind parse_optimizer(const std::string& tag);
std::string to_string(LrSchedule s);
LrSchedule parse_schedule(const std::string& tag);

/// Optimizer hyperparameters.
struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::kSgdMomentum;
    double momentum = 0.9;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
};

/// Moment buffers aligned with the flat parameter index. `first` is the SGD
/// momentum buffer or Adam's m; `second` is Adam's v (unused for SGD).
template <typename Scalar>
struct OptimizerState {
    OptimizerConfig config;
    Vector<Scalar> first;
    Vector<Scalar> second;
    std::int64_t step = 0;

    static OptimizerState create(const OptimizerConfig& cfg, Index n) {
        return OptimizerState{cfg, Vector<Scalar>::Zero(n), Vector<Scalar>::Zero(n), 0};
    }
};

/// lr0 * (1 + cos(pi * step / total)) / 2
inline double cosine_anneal_lr(std::int64_t step, std::int64_t total_steps, double lr0) {
    if (total_steps <= 0) return lr0;
    return lr0 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(step) / static_cast<double>(total_steps))) /
           2.0;
}

/// lr0 * factor^(number of milestones <= epoch); epochs count from 0.
inline double multistep_lr(int epoch, double lr0, const std::vector<int>& milestones, double factor) {
    double lr = lr0;
    for (int m : milestones)
        if (epoch >= m) lr *= factor;
    return lr;
}

/// One optimizer update restricted to masked indices (all indices when
/// `mask` is null). Unmasked weights and their moments are not touched.
/// SGD: buf = mu * buf + g; w -= lr * buf.
/// Adam: bias-corrected m/v with the step counter advanced once per call.
/// Weight decay is added to the gradient (L2) before either rule.
template <typename Scalar>
void masked_step(Model<Scalar>& model, const GradientVector<Scalar>& grads, const WeightMask* mask,
                 OptimizerState<Scalar>& opt, double lr) {
    const Index n = model.parameter_count();
    if (grads.size() != n || opt.first.size() != n || opt.second.size() != n) {
        throw DimensionError("masked_step: gradient/state length does not match " + std::to_string(n) + " parameters");
    }
    if (mask && mask->size() != n) throw DimensionError("masked_step: mask length mismatch");
    auto& w = model.parameters().mutable_values();
    const auto& c = opt.config;
    ++opt.step;
    if (c.kind == OptimizerKind::kSgdMomentum) {
        const auto mu = static_cast<Scalar>(c.momentum);
        for (Index i = 0; i < n; ++i) {
            if (mask && !mask->test(i)) continue;
            const Scalar g = grads[i] + static_cast<Scalar>(c.weight_decay) * w[i];
            opt.first[i] = mu * opt.first[i] + g;
            w[i] -= static_cast<Scalar>(lr) * opt.first[i];
        }
        return;
    }
    const auto b1 = static_cast<Scalar>(c.beta1);
    const auto b2 = static_cast<Scalar>(c.beta2);
    const double t = static_cast<double>(opt.step);
    const auto bc1 = static_cast<Scalar>(1.0 - std::pow(c.beta1, t));
    const auto bc2 = static_cast<Scalar>(1.0 - std::pow(c.beta2, t));
    const auto eps = static_cast<Scalar>(c.eps);
    for (Index i = 0; i < n; ++i) {
        if (mask && !mask->test(i)) continue;
        const Scalar g = grads[i] + static_cast<Scalar>(c.weight_decay) * w[i];
        opt.first[i] = b1 * opt.first[i] + (Scalar(1) - b1) * g;
        opt.second[i] = b2 * opt.second[i] + (Scalar(1) - b2) * g * g;
        const Scalar m_hat = opt.first[i] / bc1;
        const Scalar v_hat = opt.second[i] / bc2;
        w[i] -= static_cast<Scalar>(lr) * m_hat / (std::sqrt(v_hat) + eps);
    }
}

}  // namespace deepclean

#endif  // DEEPCLEAN_OPTIM_HPP
