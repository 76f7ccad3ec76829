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
#include "deepclean/model.hpp"

#include <json.hpp>

namespace deepclean {

std::string to_string(Architecture arch) {
    return arch == Architecture::kMlp ? "mlp" : "small-cnn";
}

Architecture parse_architecture(const std::string& tag) {
    if (tag == "mlp") return Architecture::kMlp;
    if (tag == "small-cnn") return Architecture::kSmallCnn;
    throw ContractError("unknown architecture '" + tag + "' (expected mlp or small-cnn)");
}

void ModelSpec::validate() const {
    if (class_count < 2) throw ContractError("model spec: class count must be >= 2");
    if (input_shape.empty()) throw ContractError("model spec: empty input shape");
    for (Index d : input_shape)
        if (d <= 0) throw ContractError("model spec: non-positive input extent");
    for (Index w : hidden)
        if (w <= 0) throw ContractError("model spec: widths must be positive");
    if (arch == Architecture::kSmallCnn) {
        if (input_shape.size() != 3) throw ContractError("small-cnn: input shape must be C x H x W");
        if (hidden.empty()) throw ContractError("small-cnn: needs at least one conv block");
        Index h = input_shape[1], w = input_shape[2];
        for (std::size_t i = 0; i < hidden.size(); ++i) {
            h /= 2;
            w /= 2;
        }
        if (h < 1 || w < 1) throw ContractError("small-cnn: too many pooling stages for input size");
    }
}

std::string ModelSpec::descriptor() const {
    nlohmann::ordered_json j;
    j["arch"] = to_string(arch);
    j["input_shape"] = input_shape;
    j["hidden"] = hidden;
    j["class_count"] = class_count;
    j["seed"] = seed;
    return j.dump();
}

ModelSpec ModelSpec::from_descriptor(const std::string& json) {
    const auto j = nlohmann::json::parse(json);
    ModelSpec s;
    s.arch = parse_architecture(j.at("arch").get<std::string>());
    s.input_shape = j.at("input_shape").get<Shape>();
    s.hidden = j.at("hidden").get<std::vector<Index>>();
    s.class_count = j.at("class_count").get<Index>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.validate();
    return s;
}

ModelSpec ModelSpec::mlp(const std::vector<Index>& widths, std::uint64_t seed) {
    if (widths.size() < 2) throw ContractError("mlp: needs at least input and output widths");
    ModelSpec s;
    s.arch = Architecture::kMlp;
    s.input_shape = {widths.front()};
    s.hidden.assign(widths.begin() + 1, widths.end() - 1);
    s.class_count = widths.back();
    s.seed = seed;
    s.validate();
    return s;
}

ModelSpec ModelSpec::small_cnn(Shape input_shape, std::vector<Index> channels, Index classes, std::uint64_t seed) {
    ModelSpec s;
    s.arch = Architecture::kSmallCnn;
    s.input_shape = std::move(input_shape);
    s.hidden = std::move(channels);
    s.class_count = classes;
    s.seed = seed;
    s.validate();
    return s;
}

std::vector<ParameterInfo> parameter_layout(const ModelSpec& spec) {
    spec.validate();
    std::vector<ParameterInfo> out;
    Index offset = 0;
    auto add = [&](std::string name, Shape shape, Index fan_in) {
        ParameterInfo info{std::move(name), std::move(shape), offset, fan_in};
        offset += info.size();
        out.push_back(std::move(info));
    };
    if (spec.arch == Architecture::kMlp) {
        std::vector<Index> widths{spec.input_size()};
        widths.insert(widths.end(), spec.hidden.begin(), spec.hidden.end());
        widths.push_back(spec.class_count);
        for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
            const std::string prefix = "dense" + std::to_string(l + 1);
            add(prefix + ".weight", {widths[l], widths[l + 1]}, widths[l]);
            add(prefix + ".bias", {widths[l + 1]}, widths[l]);
        }
        return out;
    }
    Index channels = spec.input_shape[0];
    Index h = spec.input_shape[1], w = spec.input_shape[2];
    for (std::size_t l = 0; l < spec.hidden.size(); ++l) {
        const std::string prefix = "conv" + std::to_string(l + 1);
        const Index fan_in = channels * 9;
        add(prefix + ".weight", {spec.hidden[l], channels, 3, 3}, fan_in);
        add(prefix + ".bias", {spec.hidden[l]}, fan_in);
        channels = spec.hidden[l];
        h /= 2;
        w /= 2;
    }
    const Index features = channels * h * w;
    add("dense.weight", {features, spec.class_count}, features);
    add("dense.bias", {spec.class_count}, features);
    return out;
}

}  // namespace deepclean
