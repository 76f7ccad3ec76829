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
#include "deepclean/mia.hpp"

#include "deepclean/random.hpp"

namespace deepclean {

namespace {

Eigen::VectorXd sigmoid(const Eigen::VectorXd& z) {
    Eigen::VectorXd out(z.size());
    for (Index i = 0; i < z.size(); ++i) {
        out(i) = z(i) >= 0.0 ? 1.0 / (1.0 + std::exp(-z(i))) : std::exp(z(i)) / (1.0 + std::exp(z(i)));
    }
    return out;
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& m, const std::vector<std::size_t>& idx) {
    Eigen::MatrixXd out(static_cast<Index>(idx.size()), m.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Index>(i)) = m.row(static_cast<Index>(idx[i]));
    return out;
}

}  // namespace

Eigen::MatrixXd feature_matrix(const std::vector<AttackFeatures>& feats) {
    Eigen::MatrixXd out(static_cast<Index>(feats.size()), kAttackFeatureCount);
    for (std::size_t i = 0; i < feats.size(); ++i) {
        out.row(static_cast<Index>(i)) << feats[i].loss, feats[i].max_prob, feats[i].entropy;
    }
    return out;
}

Eigen::VectorXd LogisticModel::probability(const Eigen::MatrixXd& x) const {
    if (x.cols() != weights.size()) throw DimensionError("logistic model: feature width mismatch");
    const Eigen::MatrixXd z = (x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
    return sigmoid((z * weights).array() + bias);
}

std::pair<double, Eigen::VectorXd> logistic_objective(const Eigen::VectorXd& w, double b, const Eigen::MatrixXd& x,
                                                      const Eigen::VectorXd& y, double l2) {
    const double n = static_cast<double>(x.rows());
    const Eigen::VectorXd z = (x * w).array() + b;
    double loss = 0.0;
    for (Index i = 0; i < z.size(); ++i) loss += softplus(z(i)) - y(i) * z(i);
    loss = loss / n + 0.5 * l2 * w.squaredNorm();
    const Eigen::VectorXd err = sigmoid(z) - y;
    Eigen::VectorXd grad(w.size() + 1);
    grad.head(w.size()) = x.transpose() * err / n + l2 * w;
    grad(w.size()) = err.sum() / n;
    return {loss, grad};
}

LogisticModel train_logistic(const Eigen::MatrixXd& members, const Eigen::MatrixXd& nonmembers, const AttackConfig& cfg) {
    if (members.rows() == 0 || nonmembers.rows() == 0) {
        throw ContractError("attack training needs both member and nonmember samples");
    }
    if (members.cols() != nonmembers.cols()) throw DimensionError("attack training: feature width mismatch");
    if (!(cfg.holdout >= 0.0 && cfg.holdout < 1.0)) throw ContractError("attack training: holdout must be in [0, 1)");
    const auto m = static_cast<std::size_t>(std::min(members.rows(), nonmembers.rows()));
    const Index d = members.cols();

    Rng rng = Rng(cfg.seed).fork(streams::kAttack);
    auto pick = [&](const Eigen::MatrixXd& src) {
        auto idx = rng.sample_without_replacement(static_cast<std::size_t>(src.rows()), m);
        rng.shuffle(idx);
        return rows_of(src, idx);
    };
    const Eigen::MatrixXd pos = pick(members);
    const Eigen::MatrixXd neg = pick(nonmembers);
    std::size_t held = static_cast<std::size_t>(std::floor(cfg.holdout * static_cast<double>(m)));
    if (held >= m) held = 0;
    const auto fit_n = static_cast<Index>(m - held);
    const auto val_n = static_cast<Index>(held);

    Eigen::MatrixXd x(2 * fit_n, d);
    x << pos.topRows(fit_n), neg.topRows(fit_n);
    Eigen::VectorXd y(2 * fit_n);
    y << Eigen::VectorXd::Ones(fit_n), Eigen::VectorXd::Zero(fit_n);

    LogisticModel lm;
    lm.config = cfg;
    lm.mean = x.colwise().mean().transpose();
    lm.scale = ((x.rowwise() - lm.mean.transpose()).array().square().colwise().mean()).sqrt().transpose();
    for (Index j = 0; j < d; ++j)
        if (!(lm.scale(j) > 1e-12)) lm.scale(j) = 1.0;
    const Eigen::MatrixXd xs = (x.rowwise() - lm.mean.transpose()).array().rowwise() / lm.scale.transpose().array();

    lm.weights = Eigen::VectorXd::Zero(d);
    for (int e = 0; e < cfg.epochs; ++e) {
        const auto [loss, g] = logistic_objective(lm.weights, lm.bias, xs, y, cfg.l2);
        lm.weights -= cfg.lr * g.head(d);
        lm.bias -= cfg.lr * g(d);
    }
    if (!lm.weights.allFinite() || !std::isfinite(lm.bias)) throw NumericError("attack training diverged");

    // Validation on held-out rows, or on the fitted rows when nothing is held out.
    const Eigen::MatrixXd vp = val_n > 0 ? Eigen::MatrixXd(pos.bottomRows(val_n)) : Eigen::MatrixXd(pos.topRows(fit_n));
    const Eigen::MatrixXd vn = val_n > 0 ? Eigen::MatrixXd(neg.bottomRows(val_n)) : Eigen::MatrixXd(neg.topRows(fit_n));
    const auto pp = lm.probability(vp), pn = lm.probability(vn);
    const double correct = static_cast<double>((pp.array() > 0.5).count() + (pn.array() <= 0.5).count());
    lm.validation_accuracy = 100.0 * correct / static_cast<double>(vp.rows() + vn.rows());
    return lm;
}

double mia_score(const LogisticModel& attack, const std::vector<AttackFeatures>& forget) {
    if (forget.empty()) return 0.0;
    const auto p = attack.probability(feature_matrix(forget));
    return 100.0 * static_cast<double>((p.array() > 0.5).count()) / static_cast<double>(p.size());
}

}  // namespace deepclean
