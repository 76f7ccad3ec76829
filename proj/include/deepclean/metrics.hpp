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
#ifndef DEEPCLEAN_METRICS_HPP
#define DEEPCLEAN_METRICS_HPP

#include "deepclean/dataset.hpp"
#include "deepclean/model.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace deepclean {

/// Argmax class per row; ties go to the lowest class index.
template <typename Derived>
int argmax_lowest(const Eigen::DenseBase<Derived>& row) {
    int best = 0;
    for (Index c = 1; c < row.size(); ++c)
        if (row(c) > row(best)) best = static_cast<int>(c);
    return best;
}

/// Row-major logits [N x classes] of the whole dataset, in batches.
template <typename Scalar>
RowMatrix<Scalar> dataset_logits(const Model<Scalar>& model, const LabeledDataset& data, std::size_t batch = 512) {
    RowMatrix<Scalar> out(static_cast<Index>(data.size()), model.class_count());
    std::vector<std::size_t> idx(data.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t start = 0; start < data.size(); start += batch) {
        const std::size_t end = std::min(data.size(), start + batch);
        const auto logits = forward(model, data.batch<Scalar>(std::span<const std::size_t>(idx.data() + start, end - start)));
        out.middleRows(static_cast<Index>(start), static_cast<Index>(end - start)) = logits.matrix();
    }
    return out;
}

template <typename Scalar>
std::vector<int> predict(const Model<Scalar>& model, const LabeledDataset& data) {
    const auto logits = dataset_logits(model, data);
    std::vector<int> out(data.size());
    for (Index i = 0; i < logits.rows(); ++i) out[static_cast<std::size_t>(i)] = argmax_lowest(logits.row(i));
    return out;
}

/// 100 * correct / N.
template <typename Scalar>
double accuracy(const Model<Scalar>& model, const LabeledDataset& data) {
    if (data.empty()) throw ContractError("accuracy: empty dataset");
    const auto pred = predict(model, data);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == data.labels[i] ? 1 : 0;
    return 100.0 * static_cast<double>(correct) / static_cast<double>(data.size());
}

/// Metrics of one model under one scenario.
struct MetricsReport {
    std::string dataset;
    std::string model;
    std::string algorithm;
    std::string scenario;
    double acc_dr = 0.0;
    double acc_df = 0.0;
    double acc_test = 0.0;
    double mia_percent = 0.0;
    double unlearn_time_s = 0.0;
    double gamma = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Unlearned minus gold.
struct ComparisonRow {
    double delta_acc_df = 0.0;
    double delta_mia = 0.0;
};

/// Throws ContractError when dataset or scenario tags differ.
ComparisonRow compare_to_gold(const MetricsReport& run, const MetricsReport& gold);

/// One line of the comparison table.
struct ReportRow {
    std::string dataset;
    std::string model;
    std::string algorithm;
    double acc_dr = 0.0;
    double delta_acc_df = 0.0;
    double delta_mia = 0.0;
    double time_s = 0.0;

    bool operator==(const ReportRow&) const = default;
};

ReportRow make_report_row(const MetricsReport& run, const MetricsReport& gold);

enum class ReportFormat { kCsv, kJson };

/// Header line of the comparison CSV.
inline constexpr const char* kReportColumns = "dataset,model,algorithm,acc_dr,delta_acc_df,delta_mia,time_s";

/// Percents with 2 decimals, seconds as integers.
std::string format_report_csv(const std::vector<ReportRow>& rows);
std::vector<ReportRow> parse_report_csv(const std::string& text);
std::string format_report_json(const std::vector<ReportRow>& rows);
std::vector<ReportRow> parse_report_json(const std::string& text);

void emit_report(const std::vector<ReportRow>& rows, ReportFormat format, const std::filesystem::path& path);

using CurveData = std::vector<std::pair<double, double>>;

/// Standalone SVG 1.1 line chart.
std::string render_svg_plot(const CurveData& curve, const std::string& title, const std::string& x_label,
                            const std::string& y_label);

/// Writes `path` (SVG) and a sibling CSV with the same stem holding the
/// exact plotted points.
void emit_sweep_plot(const CurveData& curve, const std::string& title, const std::filesystem::path& path,
                     const std::string& x_label = "gamma", const std::string& y_label = "value");

CurveData read_curve_csv(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace deepclean

#endif  // DEEPCLEAN_METRICS_HPP
