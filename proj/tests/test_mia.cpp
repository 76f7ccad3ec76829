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
#include "oracles.hpp"

#include "deepclean/mia.hpp"

#include <doctest.h>

#include <cmath>

using namespace deepclean;

namespace {

std::vector<AttackFeatures> draw(Rng& rng, std::size_t n, double loss_mu, double prob_mu, double spread) {
    std::vector<AttackFeatures> out(n);
    for (auto& f : out) {
        f.loss = std::max(0.0, loss_mu + spread * rng.normal());
        f.max_prob = std::clamp(prob_mu + 0.1 * spread * rng.normal(), 0.0, 1.0);
        f.entropy = std::max(0.0, 0.5 * f.loss + 0.05 * rng.normal());
    }
    return out;
}

}  // namespace

TEST_CASE("separable members and nonmembers are told apart") {
    Rng rng(1);
    const auto members = draw(rng, 400, 0.02, 0.99, 0.01);
    const auto nonmembers = draw(rng, 400, 2.0, 0.4, 0.3);
    const auto attack = train_attack(members, nonmembers, AttackConfig{});
    CHECK(attack.validation_accuracy >= 99.0);
    CHECK(mia_score(attack, draw(rng, 100, 0.02, 0.99, 0.01)) >= 99.0);
    CHECK(mia_score(attack, draw(rng, 100, 2.0, 0.4, 0.3)) <= 1.0);
}

TEST_CASE("identically distributed classes stay near chance") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        Rng rng(seed);
        const auto a = draw(rng, 500, 1.0, 0.6, 0.5);
        const auto b = draw(rng, 500, 1.0, 0.6, 0.5);
        AttackConfig cfg;
        cfg.seed = seed;
        const auto attack = train_attack(a, b, cfg);
        INFO("validation accuracy " << attack.validation_accuracy);
        CHECK(attack.validation_accuracy >= 40.0);
        CHECK(attack.validation_accuracy <= 60.0);
    }
}

TEST_CASE("logistic objective gradient matches central differences") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed);
        const Eigen::MatrixXd x = oracle::random_tensor<double>(rng, {12, 3}).matrix().reshaped(12, 3);
        Eigen::VectorXd y(12);
        for (Index i = 0; i < 12; ++i) y[i] = static_cast<double>(rng.uniform_index(2));
        Eigen::VectorXd w = oracle::random_tensor<double>(rng, {3}).values();
        const double b = rng.uniform(-1.0, 1.0);
        const double l2 = 0.3;
        const auto [f, g] = logistic_objective(w, b, x, y, l2);
        REQUIRE(g.size() == 4);
        for (Index k = 0; k < 4; ++k) {
            Eigen::VectorXd wp = w, wm = w;
            double bp = b, bm = b;
            if (k < 3) {
                wp[k] += oracle::kStep;
                wm[k] -= oracle::kStep;
            } else {
                bp += oracle::kStep;
                bm -= oracle::kStep;
            }
            const double num =
                (logistic_objective(wp, bp, x, y, l2).first - logistic_objective(wm, bm, x, y, l2).first) /
                (2.0 * oracle::kStep);
            CHECK(oracle::rel_error(g[k], num) < 1e-6);
        }
        // Loop oracle for the value.
        double want = 0.0;
        for (Index i = 0; i < 12; ++i) {
            const double z = x.row(i).dot(w) + b;
            want += std::log1p(std::exp(z)) - y[i] * z;
        }
        want = want / 12.0 + 0.5 * l2 * w.squaredNorm();
        CHECK(f == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("mia score is the share of forget samples predicted as members") {
    Rng rng(4);
    const auto members = draw(rng, 300, 0.05, 0.95, 0.05);
    const auto nonmembers = draw(rng, 300, 1.5, 0.5, 0.4);
    const auto attack = train_attack(members, nonmembers, AttackConfig{});
    auto forget = draw(rng, 60, 0.05, 0.95, 0.05);
    const auto more = draw(rng, 40, 1.5, 0.5, 0.4);
    forget.insert(forget.end(), more.begin(), more.end());

    const auto p = attack.probability(feature_matrix(forget));
    double hits = 0.0;
    for (Index i = 0; i < p.size(); ++i) hits += p[i] > 0.5 ? 1.0 : 0.0;
    const double score = mia_score(attack, forget);
    CHECK(score == doctest::Approx(100.0 * hits / 100.0));
    CHECK(score > 50.0);
    CHECK(score < 70.0);

    auto shuffled = forget;
    std::reverse(shuffled.begin(), shuffled.end());
    CHECK(mia_score(attack, shuffled) == score);
    CHECK(mia_score(attack, {}) == 0.0);
    for (Index i = 0; i < p.size(); ++i) {
        CHECK(p[i] >= 0.0);
        CHECK(p[i] <= 1.0);
    }
}

TEST_CASE("attack training is seeded and rejects empty classes") {
    Rng rng(6);
    const auto a = draw(rng, 100, 0.2, 0.9, 0.2);
    const auto b = draw(rng, 150, 1.0, 0.6, 0.5);
    AttackConfig cfg;
    cfg.seed = 3;
    const auto m1 = train_attack(a, b, cfg);
    const auto m2 = train_attack(a, b, cfg);
    CHECK(m1.weights == m2.weights);
    CHECK(m1.bias == m2.bias);
    CHECK_THROWS_AS(train_attack({}, b, cfg), ContractError);
    cfg.holdout = 1.0;
    CHECK_THROWS_AS(train_attack(a, b, cfg), ContractError);
}

TEST_CASE("feature extraction at the extremes") {
    Eigen::RowVectorXd sharp(3);
    sharp << 50.0, 0.0, 0.0;
    const auto s = features_from_logits(sharp, 0);
    CHECK(s.loss < 1e-20);
    CHECK(s.max_prob == doctest::Approx(1.0));
    CHECK(s.entropy < 1e-18);
    CHECK(features_from_logits(sharp, 1).loss == doctest::Approx(50.0));

    const Eigen::RowVectorXd flat = Eigen::RowVectorXd::Constant(4, 0.7);
    const auto u = features_from_logits(flat, 2);
    CHECK(u.loss == doctest::Approx(std::log(4.0)));
    CHECK(u.entropy == doctest::Approx(std::log(4.0)));
    CHECK(u.max_prob == doctest::Approx(0.25));

    const auto model = build_model<float>(ModelSpec::mlp({4, 3, 3}, 1));
    const auto data = oracle::synthetic_dataset(7, 3, {4}, 2);
    const auto feats = extract_features(model, data);
    CHECK(feats.size() == 7);
    const auto fm = feature_matrix(feats);
    CHECK(fm.rows() == 7);
    CHECK(fm.cols() == kAttackFeatureCount);
    auto wrong = data;
    wrong.class_count = 4;
    CHECK_THROWS_AS(extract_features(model, wrong), DimensionError);
}
