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
#ifndef DEEPCLEAN_UNLEARN_HPP
#define DEEPCLEAN_UNLEARN_HPP

#include "deepclean/dataset.hpp"
#include "deepclean/fim.hpp"
#include "deepclean/model.hpp"
#include "deepclean/optim.hpp"
#include "deepclean/train.hpp"
#include "deepclean/weight_mask.hpp"

#include <chrono>
#include <cstring>
#include <iostream>
#include <string>

namespace deepclean {

struct UnlearnConfig {
    double gamma = 2.0;
    int epochs = 1;
    double lr = 1e-3;
    OptimizerKind optimizer = OptimizerKind::kAdam;
    double weight_decay = 0.0;
    std::size_t batch_size = 64;
    std::size_t fim_cap_forget = 0;  // 0 = whole D_f
    std::size_t fim_cap_retain = 0;  // 0 = whole D_r
    std::size_t chunk_size = 32;
    int workers = 1;
    double epsilon = kDefaultRatioEpsilon;
    std::uint64_t seed = 0;

    void validate() const;

    /// Cosine-annealed fine-tuning recipe, no augmentation.
    TrainConfig finetune_config() const;
};

template <typename Scalar>
struct UnlearnResult {
    Model<Scalar> model;
    WeightMask mask;
    std::string algorithm;
    double seconds = 0.0;      // everything after the pretrained model is available
    double fim_seconds = 0.0;  // FIM + ratio + mask share of `seconds`
    UnlearnConfig config;
    TrainLog log;
    OptimizerState<Scalar> optimizer;
};

/// Forget-informed weights of `model`: both FIM passes, the ratio and the mask.
struct WeightSelection {
    FimDiagonal fim_forget;
    FimDiagonal fim_retain;
    RatioVector ratio;
    WeightMask mask;
    double seconds = 0.0;
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <typename Scalar>
bool same_bits(Scalar a, Scalar b) {
    return std::memcmp(&a, &b, sizeof(Scalar)) == 0;
}

}  // namespace detail

template <typename Scalar>
WeightSelection select_weights(const Model<Scalar>& model, const DataSplit& split, const UnlearnConfig& cfg) {
    cfg.validate();
    if (split.forget.empty()) throw ContractError("unlearn: empty forget set");
    const auto t0 = detail::Clock::now();
    WeightSelection sel;
    FimOptions opt;
    opt.chunk_size = cfg.chunk_size;
    opt.workers = cfg.workers;
    opt.cap_seed = cfg.seed;
    opt.sample_cap = cfg.fim_cap_forget;
    opt.dataset_id = "forget";
    sel.fim_forget = fim_diagonal(model, split.forget, opt);
    opt.sample_cap = cfg.fim_cap_retain;
    opt.dataset_id = "retain";
    sel.fim_retain = fim_diagonal(model, split.retain, opt);
    sel.ratio = ratio(sel.fim_forget, sel.fim_retain, cfg.epsilon);
    sel.mask = mask_from_threshold(sel.ratio, cfg.gamma);
    sel.seconds = detail::seconds_since(t0);
    return sel;
}

/// Fine-tunes only the masked weights on `data`, then checks that every
/// unmasked weight kept its exact bit pattern and every unmasked moment is 0.
template <typename Scalar>
UnlearnResult<Scalar> masked_finetune(Model<Scalar> model, const LabeledDataset& data, const WeightMask& mask,
                                      const UnlearnConfig& cfg) {
    UnlearnResult<Scalar> res{std::move(model), mask, "", 0.0, 0.0, cfg, {}, {}};
    const TrainConfig tc = cfg.finetune_config();
    res.optimizer = OptimizerState<Scalar>::create(tc.optimizer, res.model.parameter_count());
    if (mask.forget_count == 0) {
        std::cerr << "warning: empty weight mask (gamma " << mask.gamma << "); fine-tuning skipped\n";
        return res;
    }
    const Vector<Scalar> before = res.model.parameters().values();
    res.log = fit(res.model, data, tc, &mask, res.optimizer);
    const auto& after = res.model.parameters().values();
    for (Index i = 0; i < mask.size(); ++i) {
        if (mask.test(i)) continue;
        if (!detail::same_bits(before[i], after[i]) || res.optimizer.first[i] != Scalar(0) ||
            res.optimizer.second[i] != Scalar(0)) {
            throw ContractError("freeze contract violated at flat index " + std::to_string(i));
        }
    }
    return res;
}

/// Zero the forget-informed weights W_f, then fine-tune only W_f on D_r.
template <typename Scalar>
UnlearnResult<Scalar> deepclean_from_selection(const Model<Scalar>& model, const DataSplit& split,
                                               const WeightSelection& sel, const UnlearnConfig& cfg) {
    const auto t0 = detail::Clock::now();
    Model<Scalar> work = model;
    apply_mask_zero(work, sel.mask);
    auto res = masked_finetune(std::move(work), split.retain, sel.mask, cfg);
    res.algorithm = "deepclean";
    res.fim_seconds = sel.seconds;
    res.seconds = sel.seconds + detail::seconds_since(t0);
    return res;
}

template <typename Scalar>
UnlearnResult<Scalar> deepclean(const Model<Scalar>& model, const DataSplit& split, const UnlearnConfig& cfg) {
    const WeightSelection sel = select_weights(model, split, cfg);
    return deepclean_from_selection(model, split, sel, cfg);
}

/// W_f zeroed, no fine-tuning.
template <typename Scalar>
UnlearnResult<Scalar> zero_weights_ablation(const Model<Scalar>& model, const DataSplit& split,
                                            const UnlearnConfig& cfg) {
    const WeightSelection sel = select_weights(model, split, cfg);
    const auto t0 = detail::Clock::now();
    UnlearnResult<Scalar> res{model, sel.mask, "zero", 0.0, sel.seconds, cfg, {}, {}};
    apply_mask_zero(res.model, sel.mask);
    res.optimizer = OptimizerState<Scalar>::create(cfg.finetune_config().optimizer, model.parameter_count());
    res.seconds = sel.seconds + detail::seconds_since(t0);
    return res;
}

/// Whole-model fine-tuning on D_r with the same recipe as deepclean.
template <typename Scalar>
UnlearnResult<Scalar> finetune_baseline(const Model<Scalar>& model, const LabeledDataset& retain,
                                        const UnlearnConfig& cfg) {
    cfg.validate();
    const auto t0 = detail::Clock::now();
    auto res = masked_finetune(model, retain, WeightMask::all(model.parameter_count()), cfg);
    res.algorithm = "finetune";
    res.seconds = detail::seconds_since(t0);
    return res;
}

/// Each D_f label replaced by a uniformly drawn different class (seeded
/// rejection sampling).
LabeledDataset relabel_forget(const LabeledDataset& forget, std::uint64_t seed);

/// Whole-model fine-tuning on D_r plus relabeled D_f.
template <typename Scalar>
UnlearnResult<Scalar> random_label_baseline(const Model<Scalar>& model, const DataSplit& split,
                                            const UnlearnConfig& cfg) {
    cfg.validate();
    const auto t0 = detail::Clock::now();
    const LabeledDataset mixed = concat(split.retain, relabel_forget(split.forget, cfg.seed));
    auto res = masked_finetune(model, mixed, WeightMask::all(model.parameter_count()), cfg);
    res.algorithm = "rl";
    res.seconds = detail::seconds_since(t0);
    return res;
}

/// Retrain from scratch on D_r only.
template <typename Scalar>
UnlearnResult<Scalar> gold_retrain(const ModelSpec& spec, const DataSplit& split, const TrainConfig& cfg) {
    const auto t0 = detail::Clock::now();
    TrainLog log;
    Model<Scalar> model = train<Scalar>(spec, split.retain, cfg, &log);
    UnlearnResult<Scalar> res{std::move(model), WeightMask{}, "gold", 0.0, 0.0, {}, std::move(log), {}};
    res.seconds = detail::seconds_since(t0);
    return res;
}

}  // namespace deepclean

#endif  // DEEPCLEAN_UNLEARN_HPP
