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
#include "deepclean/checkpoint.hpp"
#include "deepclean/fim.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace deepclean {

RatioVector ratio(const Vector<double>& forget, const Vector<double>& retain, double epsilon) {
    if (forget.size() != retain.size()) {
        throw DimensionError("ratio: forget FIM has " + std::to_string(forget.size()) + " entries, retain FIM " +
                             std::to_string(retain.size()));
    }
    if (!(epsilon > 0.0)) throw ContractError("ratio: epsilon must be positive");
    RatioVector r;
    r.epsilon = epsilon;
    r.values.resize(forget.size());
    for (Index i = 0; i < forget.size(); ++i) {
        const double f = forget[i];
        const double d = retain[i];
        r.values[i] = (f <= epsilon && d <= epsilon) ? 0.0 : f / std::max(d, epsilon);
    }
    return r;
}

RatioVector ratio(const FimDiagonal& forget, const FimDiagonal& retain, double epsilon) {
    return ratio(forget.values, retain.values, epsilon);
}

WeightMask mask_from_threshold(const RatioVector& r, double gamma) {
    if (!(gamma > 0.0)) throw ContractError("mask_from_threshold: gamma must be positive");
    WeightMask m;
    m.gamma = gamma;
    m.bits.resize(static_cast<std::size_t>(r.size()));
    for (Index i = 0; i < r.size(); ++i) m.bits[static_cast<std::size_t>(i)] = r.values[i] > gamma ? 1 : 0;
    m.recount();
    return m;
}

std::vector<CurvePoint> mask_size_curve(const RatioVector& r, std::span<const double> gamma_grid) {
    if (gamma_grid.empty()) throw ContractError("mask_size_curve: empty gamma grid");
    if (!std::is_sorted(gamma_grid.begin(), gamma_grid.end())) {
        throw ContractError("mask_size_curve: gamma grid must be ascending");
    }
    std::vector<double> sorted(r.values.data(), r.values.data() + r.size());
    std::sort(sorted.begin(), sorted.end());
    std::vector<CurvePoint> out;
    out.reserve(gamma_grid.size());
    for (double g : gamma_grid) {
        const auto at_most = std::upper_bound(sorted.begin(), sorted.end(), g) - sorted.begin();
        out.push_back(CurvePoint{g, static_cast<Index>(at_most)});
    }
    return out;
}

void save_fim(const FimDiagonal& fim, const std::filesystem::path& path) {
    nlohmann::ordered_json j;
    j["kind"] = "fim";
    j["dtype"] = "f64";
    j["dataset"] = fim.dataset;
    j["sample_count"] = fim.sample_count;
    write_container(path, j.dump(), fim.values.data(), static_cast<std::uint64_t>(fim.values.size()), sizeof(double));
}

FimDiagonal load_fim(const std::filesystem::path& path) {
    const auto raw = read_container(path);
    const auto j = nlohmann::json::parse(raw.descriptor);
    if (j.value("kind", "") != "fim") throw FormatError(path.string() + ": not a FIM container");
    FimDiagonal fim;
    fim.values = raw.values<double>();
    fim.dataset = j.value("dataset", "");
    fim.sample_count = j.value("sample_count", std::size_t{0});
    return fim;
}

void save_ratio(const RatioVector& r, const std::filesystem::path& path) {
    nlohmann::ordered_json j;
    j["kind"] = "ratio";
    j["dtype"] = "f64";
    j["epsilon"] = r.epsilon;
    write_container(path, j.dump(), r.values.data(), static_cast<std::uint64_t>(r.values.size()), sizeof(double));
}

RatioVector load_ratio(const std::filesystem::path& path) {
    const auto raw = read_container(path);
    const auto j = nlohmann::json::parse(raw.descriptor);
    if (j.value("kind", "") != "ratio") throw FormatError(path.string() + ": not a ratio container");
    RatioVector r;
    r.values = raw.values<double>();
    r.epsilon = j.value("epsilon", 0.0);
    return r;
}

void write_index_csv(const Vector<double>& values, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << "flat_index,value\n";
    char buf[64];
    for (Index i = 0; i < values.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", values[i]);
        out << i << ',' << buf << '\n';
    }
}

Vector<double> read_index_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open '" + path.string() + "'");
    std::string line;
    std::getline(in, line);
    if (line != "flat_index,value") throw FormatError(path.string() + ": unexpected header '" + line + "'");
    std::vector<double> vals;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw FormatError(path.string() + ": malformed row '" + line + "'");
        const auto idx = std::stoll(line.substr(0, comma));
        if (idx != static_cast<long long>(vals.size())) throw FormatError(path.string() + ": rows out of order");
        vals.push_back(std::stod(line.substr(comma + 1)));
    }
    return Eigen::Map<const Vector<double>>(vals.data(), static_cast<Index>(vals.size()));
}

}  // namespace deepclean
