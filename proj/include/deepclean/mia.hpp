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
#ifndef DEEPCLEAN_MIA_HPP
#define DEEPCLEAN_MIA_HPP

#include "deepclean/dataset.hpp"
#include "deepclean/metrics.hpp"
#include "deepclean/model.hpp"

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace deepclean {

/// Per-sample attack inputs derived from the target model's output.
struct AttackFeatures {
    double loss = 0.0;
    double max_prob = 0.0;
    double entropy = 0.0;
};

inline constexpr Index kAttackFeatureCount = 3;

/// Features of one row of logits against its label; computed in double.
template <typename Derived>
AttackFeatures features_from_logits(const Eigen::MatrixBase<Derived>& logits, int label) {
    const Eigen::VectorXd z = logits.template cast<double>().transpose();
    const double m = z.maxCoeff();
    const double lse = m + std::log((z.array() - m).exp().sum());
    const Eigen::ArrayXd logp = z.array() - lse;
    const Eigen::ArrayXd p = logp.exp();
    AttackFeatures f;
    f.loss = std::max(0.0, -logp(label));
    f.max_prob = std::min(1.0, p.maxCoeff());
    double h = 0.0;
    for (Index c = 0; c < p.size(); ++c)
        if (p(c) > 0.0) h -= p(c) * logp(c);
    f.entropy = std::clamp(h, 0.0, std::log(static_cast<double>(p.size())));
    return f;
}

template <typename Scalar>
std::vector<AttackFeatures> extract_features(const Model<Scalar>& model, const LabeledDataset& data) {
    if (data.class_count != model.class_count()) throw DimensionError("extract_features: class count mismatch");
    std::vector<AttackFeatures> out;
    if (data.empty()) return out;
    const auto logits = dataset_logits(model, data);
    out.reserve(data.size());
    for (Index i = 0; i < logits.rows(); ++i) out.push_back(features_from_logits(logits.row(i), data.labels[static_cast<std::size_t>(i)]));
    return out;
}

/// Rows of (loss, max_prob, entropy).
Eigen::MatrixXd feature_matrix(const std::vector<AttackFeatures>& feats);

struct AttackConfig {
    double lr = 0.5;
    int epochs = 500;
    double l2 = 1e-4;
    double holdout = 0.2;  // per-class share kept out for validation
    std::uint64_t seed = 0;
};

struct LogisticModel {
    Eigen::VectorXd weights;
    double bias = 0.0;
    Eigen::VectorXd mean;   // standardization fitted on training rows
    Eigen::VectorXd scale;
    AttackConfig config;
    double validation_accuracy = 0.0;  // percent

    /// Membership probability of raw (unstandardized) feature rows.
    Eigen::VectorXd probability(const Eigen::MatrixXd& x) const;
};

/// Mean log-loss plus l2/2 * |w|^2 and its gradient [dw; db] on already
/// standardized rows `x` with 0/1 targets `y`.
std::pair<double, Eigen::VectorXd> logistic_objective(const Eigen::VectorXd& w, double b, const Eigen::MatrixXd& x,
                                                      const Eigen::VectorXd& y, double l2);

/// Balances the classes by seeded subsampling to the smaller size, holds out
/// a share of each for validation and fits by full-batch gradient descent.
/// Throws ContractError when either class is empty.
LogisticModel train_logistic(const Eigen::MatrixXd& members, const Eigen::MatrixXd& nonmembers, const AttackConfig& cfg);

inline LogisticModel train_attack(const std::vector<AttackFeatures>& members,
                                  const std::vector<AttackFeatures>& nonmembers, const AttackConfig& cfg) {
    return train_logistic(feature_matrix(members), feature_matrix(nonmembers), cfg);
}

struct MiaResult {
    double mia_percent = 0.0;
    double attack_accuracy = 0.0;
};

/// Percent of rows whose membership probability exceeds 0.5.
double mia_score(const LogisticModel& attack, const std::vector<AttackFeatures>& forget);

/// Attack fitted on D_r members against D_test nonmembers, applied to D_f.
template <typename Scalar>
MiaResult evaluate_mia(const Model<Scalar>& model, const LabeledDataset& retain, const LabeledDataset& test,
                       const LabeledDataset& forget, const AttackConfig& cfg) {
    const auto attack = train_attack(extract_features(model, retain), extract_features(model, test), cfg);
    return MiaResult{mia_score(attack, extract_features(model, forget)), attack.validation_accuracy};
}

}  // namespace deepclean

#endif  // DEEPCLEAN_MIA_HPP
