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
#ifndef DEEPCLEAN_EXPERIMENT_HPP
#define DEEPCLEAN_EXPERIMENT_HPP

#include "deepclean/dataset.hpp"
#include "deepclean/mia.hpp"
#include "deepclean/model.hpp"
#include "deepclean/train.hpp"
#include "deepclean/unlearn.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace deepclean {

/// Invalid or incomplete experiment configuration (CLI exit code 1).
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline const std::vector<double>& default_gamma_grid() {
    static const std::vector<double> grid{1.0, 1.2, 1.5, 1.7, 2.0, 2.2, 2.5, 2.7, 3.0};
    return grid;
}

/// Default threshold per scenario: 1.1 for random samples, 2 for a class.
inline double default_gamma(Scenario s) { return s == Scenario::kClass ? 2.0 : 1.1; }

inline const std::vector<std::string>& algorithm_names() {
    static const std::vector<std::string> names{"deepclean", "finetune", "rl", "zero", "gold"};
    return names;
}

struct DataPaths {
    std::string format = "mnist";  // mnist | cifar10
    std::string train_images;
    std::string train_labels;
    std::string test_images;
    std::string test_labels;
    std::vector<std::string> cifar_train;
    std::vector<std::string> cifar_test;
};

/// One experiment, as read from JSON. Unset fields keep desk-scale defaults.
struct ExperimentConfig {
    std::string dataset_name = "mnist";
    DataPaths data;
    std::size_t cap_per_class = 1000;  // 0 = no cap
    ModelSpec model = ModelSpec::mlp({784, 128, 10});
    Scenario scenario = Scenario::kClass;
    int target_class = 0;
    double fraction = 0.1;
    TrainConfig train;
    UnlearnConfig unlearn;
    std::optional<double> gamma;  // falls back to default_gamma(scenario)
    double rl_lr = 1e-4;
    int rl_epochs = 3;
    AttackConfig attack;
    std::vector<std::string> baselines{"deepclean", "finetune", "rl", "zero"};
    std::string output_dir = "runs";
    std::uint64_t seed = 0;
    int workers = 1;

    double resolved_gamma() const { return gamma ? *gamma : default_gamma(scenario); }

    /// Copies the global seed and worker count into every section.
    void propagate();

    /// Fills empty data paths from $DEEPCLEAN_DATA_DIR, then checks that
    /// every referenced file exists. Throws ConfigError naming the key.
    void resolve_paths();

    void validate() const;

    /// Unlearning recipe with the resolved gamma; the RL baseline swaps in
    /// its own learning rate and epoch count.
    UnlearnConfig unlearn_config(const std::string& algorithm) const;
};

nlohmann::ordered_json to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_from_json(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Loads train/test data (capped per class) and builds the scenario split.
DataSplit load_split(const ExperimentConfig& cfg);

/// Accuracies and MIA of one model under the split.
template <typename Scalar>
MetricsReport evaluate_model(const Model<Scalar>& model, const DataSplit& split, const AttackConfig& attack,
                             const std::string& dataset, const std::string& algorithm) {
    MetricsReport r;
    r.dataset = dataset;
    r.model = to_string(model.spec().arch);
    r.algorithm = algorithm;
    r.scenario = to_string(split.scenario);
    r.acc_dr = accuracy(model, split.retain);
    r.acc_df = accuracy(model, split.forget);
    r.acc_test = accuracy(model, split.test);
    r.mia_percent = evaluate_mia(model, split.retain, split.test, split.forget, attack).mia_percent;
    r.seed = split.seed;
    return r;
}

/// Entry point of the command-line tool. Returns the process exit code:
/// 0 success, 1 usage or configuration error, 2 runtime failure. `args`
/// excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace deepclean

#endif  // DEEPCLEAN_EXPERIMENT_HPP
