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
#include "deepclean/train.hpp"
#include "deepclean/unlearn.hpp"

namespace deepclean {

std::string to_string(OptimizerKind k) { return k == OptimizerKind::kAdam ? "adam" : "sgd-momentum"; }

OptimizerKind parse_optimizer(const std::string& tag) {
    if (tag == "adam") return OptimizerKind::kAdam;
    if (tag == "sgd-momentum" || tag == "sgd") return OptimizerKind::kSgdMomentum;
    throw ContractError("unknown optimizer '" + tag + "' (expected sgd-momentum or adam)");
}

std::string to_string(LrSchedule s) {
    switch (s) {
        case LrSchedule::kConstant: return "constant";
        case LrSchedule::kMultiStep: return "multistep";
        case LrSchedule::kCosine: return "cosine";
    }
    return "constant";
}

LrSchedule parse_schedule(const std::string& tag) {
    if (tag == "constant") return LrSchedule::kConstant;
    if (tag == "multistep") return LrSchedule::kMultiStep;
    if (tag == "cosine") return LrSchedule::kCosine;
    throw ContractError("unknown lr schedule '" + tag + "' (expected constant, multistep or cosine)");
}

void TrainConfig::validate() const {
    if (!(lr >= 0.0) || !std::isfinite(lr)) throw ContractError("train config: learning rate must be >= 0");
    if (epochs < 0) throw ContractError("train config: epochs must be >= 0");
    if (batch_size < 1) throw ContractError("train config: batch size must be >= 1");
}

double scheduled_lr(const TrainConfig& cfg, int epoch, std::int64_t step, std::int64_t total_steps) {
    switch (cfg.schedule) {
        case LrSchedule::kConstant: return cfg.lr;
        case LrSchedule::kMultiStep: return multistep_lr(epoch, cfg.lr, cfg.milestones, cfg.factor);
        case LrSchedule::kCosine: return cosine_anneal_lr(step, total_steps, cfg.lr);
    }
    return cfg.lr;
}

void UnlearnConfig::validate() const {
    if (!(gamma > 0.0)) throw ContractError("unlearn config: gamma must be positive");
    if (epochs < 0) throw ContractError("unlearn config: epochs must be >= 0");
    if (!(lr >= 0.0)) throw ContractError("unlearn config: learning rate must be >= 0");
    if (batch_size < 1) throw ContractError("unlearn config: batch size must be >= 1");
    if (!(epsilon > 0.0)) throw ContractError("unlearn config: epsilon must be positive");
}

TrainConfig UnlearnConfig::finetune_config() const {
    TrainConfig cfg;
    cfg.optimizer = OptimizerConfig{optimizer, 0.9, 0.9, 0.999, 1e-8, weight_decay};
    cfg.lr = lr;
    cfg.epochs = epochs;
    cfg.batch_size = batch_size;
    cfg.schedule = LrSchedule::kCosine;
    cfg.milestones.clear();
    cfg.seed = seed;
    cfg.augment = false;
    return cfg;
}

LabeledDataset relabel_forget(const LabeledDataset& forget, std::uint64_t seed) {
    if (forget.class_count < 2) throw ContractError("random labels need at least 2 classes");
    LabeledDataset out = forget;
    Rng rng = Rng(seed).fork(streams::kRelabel);
    for (auto& y : out.labels) {
        int pick = y;
        while (pick == y) pick = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(forget.class_count)));
        y = pick;
    }
    return out;
}

}  // namespace deepclean
