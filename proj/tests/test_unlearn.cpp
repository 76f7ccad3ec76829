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

#include "deepclean/metrics.hpp"
#include "deepclean/unlearn.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>

using namespace deepclean;

namespace {

bool bitwise_equal(const Vector<float>& a, const Vector<float>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), sizeof(float) * static_cast<std::size_t>(a.size())) == 0;
}

// Toy class-scenario split: 4 classes of 3x3 inputs, class 1 forgotten.
DataSplit toy_split(std::uint64_t seed) {
    const auto train = oracle::synthetic_dataset(120, 4, {9}, seed);
    const auto test = oracle::synthetic_dataset(40, 4, {9}, seed + 100);
    return split_class(train, test, 1);
}

Model<float> toy_model() {
    auto model = build_model<float>(ModelSpec::mlp({9, 6, 4}, 2));
    TrainConfig tc;
    tc.epochs = 2;
    tc.batch_size = 16;
    auto opt = OptimizerState<float>::create(tc.optimizer, model.parameter_count());
    fit(model, toy_split(1).full_train(), tc, nullptr, opt);
    return model;
}

}  // namespace

TEST_CASE("Adam step matches a hand computation") {
    auto model = build_model<double>(ModelSpec::mlp({1, 1, 2}, 0));
    const Index n = model.parameter_count();
    auto& w = model.parameters().mutable_values();
    w.setOnes();
    auto opt = OptimizerState<double>::create(OptimizerConfig{OptimizerKind::kAdam}, n);
    GradientVector<double> g = GradientVector<double>::Constant(n, 0.5);

    masked_step(model, g, nullptr, opt, 0.1);
    // m = 0.05, v = 0.00025, m_hat = 0.5, v_hat = 0.25.
    const double first = 1.0 - 0.1 * 0.5 / (0.5 + 1e-8);
    CHECK(std::abs(w[0] - first) < 1e-15);

    g.setConstant(-0.2);
    masked_step(model, g, nullptr, opt, 0.1);
    const double m = 0.9 * 0.05 + 0.1 * -0.2;
    const double v = 0.999 * 0.00025 + 0.001 * 0.04;
    const double step = 0.1 * (m / (1 - 0.81)) / (std::sqrt(v / (1 - 0.999 * 0.999)) + 1e-8);
    CHECK(std::abs(w[0] - (first - step)) < 1e-14);
    CHECK(opt.step == 2);
}

TEST_CASE("SGD momentum with weight decay matches a hand computation") {
    auto model = build_model<double>(ModelSpec::mlp({1, 1, 2}, 0));
    const Index n = model.parameter_count();
    auto& w = model.parameters().mutable_values();
    w.setConstant(2.0);
    auto opt = OptimizerState<double>::create(OptimizerConfig{OptimizerKind::kSgdMomentum, 0.9, 0.9, 0.999, 1e-8, 0.1}, n);
    const GradientVector<double> g = GradientVector<double>::Constant(n, 1.0);
    masked_step(model, g, nullptr, opt, 0.5);
    CHECK(w[0] == doctest::Approx(2.0 - 0.5 * 1.2).epsilon(1e-15));  // buf = 1 + 0.1 * 2
    masked_step(model, g, nullptr, opt, 0.5);
    CHECK(w[0] == doctest::Approx(1.4 - 0.5 * (0.9 * 1.2 + 1.14)).epsilon(1e-15));
}

TEST_CASE("masked_step leaves unmasked entries and their moments untouched") {
    auto model = build_model<float>(ModelSpec::mlp({4, 3, 2}, 5));
    const Index n = model.parameter_count();
    const Vector<float> before = model.parameters().values();
    const auto mask = WeightMask::from_indices(n, {0, 5, n - 1});
    auto opt = OptimizerState<float>::create(OptimizerConfig{OptimizerKind::kAdam}, n);
    Rng rng(3);
    for (int s = 0; s < 4; ++s) masked_step(model, GradientVector<float>(oracle::random_tensor<float>(rng, {n}).values()), &mask, opt, 1e-2);
    const auto& after = model.parameters().values();
    for (Index i = 0; i < n; ++i) {
        if (mask.test(i)) {
            CHECK(after[i] != before[i]);
        } else {
            CHECK(std::memcmp(&after[i], &before[i], sizeof(float)) == 0);
            CHECK(opt.first[i] == 0.0f);
            CHECK(opt.second[i] == 0.0f);
        }
    }
    CHECK_THROWS_AS(masked_step(model, GradientVector<float>(n + 1), &mask, opt, 1e-2), DimensionError);
}

TEST_CASE("learning rate schedules") {
    CHECK(cosine_anneal_lr(0, 100, 1e-3) == 1e-3);
    CHECK(cosine_anneal_lr(50, 100, 1e-3) == doctest::Approx(5e-4).epsilon(1e-14));
    CHECK(std::abs(cosine_anneal_lr(100, 100, 1e-3)) < 1e-18);
    for (int s = 1; s <= 100; ++s) CHECK(cosine_anneal_lr(s, 100, 1.0) <= cosine_anneal_lr(s - 1, 100, 1.0));
    TrainConfig tc;
    CHECK(scheduled_lr(tc, 3, 0, 1) == 0.1);
    CHECK(scheduled_lr(tc, 4, 0, 1) == doctest::Approx(0.02));
    CHECK(scheduled_lr(tc, 9, 0, 1) == doctest::Approx(0.004));
    CHECK(UnlearnConfig{}.finetune_config().schedule == LrSchedule::kCosine);
    CHECK_FALSE(UnlearnConfig{}.finetune_config().augment);
}

TEST_CASE("deepclean zeroes W_f and freezes W_r across three epochs") {
    const auto model = toy_model();
    const auto split = toy_split(1);
    UnlearnConfig cfg;
    cfg.gamma = 1.1;
    cfg.epochs = 3;
    cfg.batch_size = 16;
    const auto res = deepclean::deepclean(model, split, cfg);
    REQUIRE(res.mask.forget_count > 0);
    REQUIRE(res.mask.retain_count > 0);
    const auto& before = model.parameters().values();
    const auto& after = res.model.parameters().values();
    Index moved = 0;
    for (Index i = 0; i < before.size(); ++i) {
        if (res.mask.test(i)) {
            moved += after[i] != 0.0f ? 1 : 0;
        } else {
            CHECK(std::memcmp(&before[i], &after[i], sizeof(float)) == 0);
        }
    }
    CHECK(moved > 0);
    CHECK(res.log.epoch_loss.size() == 3);
    CHECK(res.algorithm == "deepclean");
    CHECK(res.seconds >= res.fim_seconds);
}

TEST_CASE("degenerate configurations reduce to simpler algorithms") {
    const auto model = toy_model();
    const auto split = toy_split(1);
    UnlearnConfig cfg;
    cfg.gamma = 1.1;
    cfg.batch_size = 16;

    SUBCASE("zero epochs equals the zero-weights ablation") {
        cfg.epochs = 0;
        CHECK(bitwise_equal(deepclean::deepclean(model, split, cfg).model.parameters().values(),
                            zero_weights_ablation(model, split, cfg).model.parameters().values()));
    }
    SUBCASE("learning rate zero equals the zero-weights ablation") {
        cfg.lr = 0.0;
        cfg.epochs = 2;
        CHECK(bitwise_equal(deepclean::deepclean(model, split, cfg).model.parameters().values(),
                            zero_weights_ablation(model, split, cfg).model.parameters().values()));
    }
    SUBCASE("unreachable gamma selects nothing and returns the input") {
        cfg.gamma = std::numeric_limits<double>::max();
        const auto res = deepclean::deepclean(model, split, cfg);
        CHECK(res.mask.forget_count == 0);
        CHECK(bitwise_equal(res.model.parameters().values(), model.parameters().values()));
    }
    SUBCASE("finetune equals unmasked fit with the unlearning recipe") {
        cfg.epochs = 2;
        const auto res = finetune_baseline(model, split.retain, cfg);
        auto manual = model;
        const auto tc = cfg.finetune_config();
        auto opt = OptimizerState<float>::create(tc.optimizer, manual.parameter_count());
        fit(manual, split.retain, tc, nullptr, opt);
        CHECK(bitwise_equal(res.model.parameters().values(), manual.parameters().values()));
    }
    SUBCASE("same seed, same result") {
        cfg.epochs = 1;
        CHECK(bitwise_equal(deepclean::deepclean(model, split, cfg).model.parameters().values(),
                            deepclean::deepclean(model, split, cfg).model.parameters().values()));
    }
    SUBCASE("invalid configs") {
        cfg.gamma = 0.0;
        CHECK_THROWS_AS(deepclean::deepclean(model, split, cfg), ContractError);
        cfg.gamma = 2.0;
        cfg.lr = -1.0;
        CHECK_THROWS_AS(deepclean::deepclean(model, split, cfg), ContractError);
    }
}

TEST_CASE("random relabeling always changes the label") {
    const auto forget = oracle::synthetic_dataset(200, 5, {2}, 8);
    const auto a = relabel_forget(forget, 3);
    const auto b = relabel_forget(forget, 3);
    CHECK(a.labels == b.labels);
    for (std::size_t i = 0; i < forget.size(); ++i) {
        CHECK(a.labels[i] != forget.labels[i]);
        CHECK(a.labels[i] >= 0);
        CHECK(a.labels[i] < 5);
    }
    auto single = forget;
    single.class_count = 1;
    CHECK_THROWS_AS(relabel_forget(single, 3), ContractError);
}

TEST_CASE("one epoch on 1k MNIST samples clears 80% train accuracy") {
    const auto dir = oracle::desk_mnist_dir();
    const auto train = cap_per_class(load_mnist(dir / "train-images-idx3-ubyte.gz", dir / "train-labels-idx1-ubyte.gz"), 100);
    REQUIRE(train.size() == 1000);
    // Small batches: at batch 128 one epoch is only 8 steps.
    TrainConfig tc;
    tc.epochs = 1;
    tc.batch_size = 16;
    tc.lr = 0.05;
    TrainLog log;
    const auto model = deepclean::train<float>(ModelSpec::mlp({784, 128, 10}, 0), train, tc, &log);
    const double acc = accuracy(model, train);
    INFO("train accuracy " << acc);
    CHECK(acc > 80.0);
    CHECK(std::isfinite(log.epoch_loss.at(0)));
}

TEST_CASE("training lowers the epoch loss and lr 0 changes nothing") {
    const auto dir = oracle::desk_mnist_dir();
    const auto train = cap_per_class(load_mnist(dir / "train-images-idx3-ubyte.gz", dir / "train-labels-idx1-ubyte.gz"), 30);
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        TrainConfig tc;
        tc.epochs = 3;
        tc.batch_size = 32;
        tc.seed = seed;
        TrainLog log;
        const auto a = deepclean::train<float>(ModelSpec::mlp({784, 32, 10}, seed), train, tc, &log);
        CHECK(log.epoch_loss.back() < log.epoch_loss.front());
        const auto b = deepclean::train<float>(ModelSpec::mlp({784, 32, 10}, seed), train, tc);
        CHECK(bitwise_equal(a.parameters().values(), b.parameters().values()));
    }
    TrainConfig frozen;
    frozen.epochs = 1;
    frozen.lr = 0.0;
    frozen.optimizer.weight_decay = 0.0;
    const auto init = build_model<float>(ModelSpec::mlp({784, 32, 10}, 4));
    const auto same = deepclean::train<float>(ModelSpec::mlp({784, 32, 10}, 4), train, frozen);
    CHECK(bitwise_equal(init.parameters().values(), same.parameters().values()));
}
