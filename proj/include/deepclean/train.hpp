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
#ifndef DEEPCLEAN_TRAIN_HPP
#define DEEPCLEAN_TRAIN_HPP

#include "deepclean/dataset.hpp"
#include "deepclean/model.hpp"
#include "deepclean/optim.hpp"
#include "deepclean/random.hpp"
#include "deepclean/tape.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace deepclean {

/// Pretraining / fine-tuning recipe.
struct TrainConfig {
    OptimizerConfig optimizer{OptimizerKind::kSgdMomentum, 0.9, 0.9, 0.999, 1e-8, 5e-4};
    double lr = 0.1;
    int epochs = 10;
    std::size_t batch_size = 128;
    LrSchedule schedule = LrSchedule::kMultiStep;
    std::vector<int> milestones{4, 8};
    double factor = 0.2;
    std::uint64_t seed = 0;
    /// Horizontal flip + shift each epoch (CIFAR only; never during unlearning).
    bool augment = false;
    int augment_shift = 4;

    /// lr >= 0 (0 freezes the run), epochs >= 0, batch size >= 1.
    void validate() const;
};

/// Per-epoch mean training loss.
struct TrainLog {
    std::vector<double> epoch_loss;
};

/// Learning rate for global step `step` (0-based) of epoch `epoch`.
double scheduled_lr(const TrainConfig& cfg, int epoch, std::int64_t step, std::int64_t total_steps);

/// Mini-batch training of `model` on `data`, updating only masked indices
/// when `mask` is given. Shuffling is reseeded per epoch from cfg.seed.
/// Throws NumericError when the loss stops being finite.
template <typename Scalar>
TrainLog fit(Model<Scalar>& model, const LabeledDataset& data, const TrainConfig& cfg, const WeightMask* mask,
             OptimizerState<Scalar>& opt) {
    cfg.validate();
    TrainLog log;
    if (cfg.epochs == 0 || data.empty()) return log;
    if (data.class_count != model.class_count()) throw DimensionError("fit: class count mismatch");
    const std::size_t n = data.size();
    const std::size_t bs = std::min(cfg.batch_size, n);
    const auto steps_per_epoch = static_cast<std::int64_t>((n + bs - 1) / bs);
    const std::int64_t total = steps_per_epoch * cfg.epochs;
    const Rng base = Rng(cfg.seed).fork(streams::kShuffle);
    std::int64_t step = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng rng = base.fork(static_cast<std::uint64_t>(epoch));
        const auto order = rng.permutation(n);
        LabeledDataset augmented;
        const LabeledDataset* source = &data;
        if (cfg.augment) {
            Rng aug = Rng(cfg.seed).fork(streams::kAugment).fork(static_cast<std::uint64_t>(epoch));
            augmented = augment_flip_shift(data, cfg.augment_shift, aug);
            source = &augmented;
        }
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < n; start += bs, ++step) {
            const std::size_t end = std::min(n, start + bs);
            std::span<const std::size_t> idx(order.data() + start, end - start);
            const auto labels = source->labels_at(idx);
            GradientVector<Scalar> grads;
            double loss = 0.0;
            {
                Tape<Scalar> tape(model.parameter_count());
                Var logits = model.forward(tape, tape.constant(source->batch<Scalar>(idx)));
                Var l = tape.nll_loss(tape.log_softmax(logits), labels);
                loss = static_cast<double>(tape.value(l).item());
                if (!std::isfinite(loss)) {
                    throw NumericError("training diverged: loss " + std::to_string(loss) + " at epoch " +
                                       std::to_string(epoch) + ", step " + std::to_string(step));
                }
                grads = tape.backward(l);
            }
            loss_sum += loss * static_cast<double>(end - start);
            masked_step(model, grads, mask, opt, scheduled_lr(cfg, epoch, step, total));
        }
        log.epoch_loss.push_back(loss_sum / static_cast<double>(n));
    }
    return log;
}

/// Fresh model from `spec`, trained on `data` with `cfg`.
template <typename Scalar>
Model<Scalar> train(const ModelSpec& spec, const LabeledDataset& data, const TrainConfig& cfg, TrainLog* log = nullptr) {
    Model<Scalar> model = build_model<Scalar>(spec);
    auto opt = OptimizerState<Scalar>::create(cfg.optimizer, model.parameter_count());
    TrainLog l = fit(model, data, cfg, nullptr, opt);
    if (log) *log = std::move(l);
    return model;
}

}  // namespace deepclean

#endif  // DEEPCLEAN_TRAIN_HPP
