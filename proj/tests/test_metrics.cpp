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

#include <doctest.h>

#include <regex>

using namespace deepclean;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "deepclean_test_metrics";
    fs::create_directories(dir);
    return dir / name;
}

MetricsReport report(double acc_df, double mia) {
    MetricsReport r;
    r.dataset = "cifar10";
    r.model = "resnet18";
    r.algorithm = "deepclean";
    r.scenario = "random";
    r.acc_dr = 98.74;
    r.acc_df = acc_df;
    r.acc_test = 90.0;
    r.mia_percent = mia;
    r.unlearn_time_s = 71.4;
    return r;
}

// Two-class model whose logits equal the two input features.
Model<double> identity_model() {
    auto m = build_model<double>(ModelSpec::mlp({2, 2, 2}, 0));
    auto& w = m.parameters().mutable_values();
    w.setZero();
    // dense1 = I, bias 0; relu passes non-negative inputs; dense2 = I.
    w[0] = 1.0;
    w[3] = 1.0;
    w[6] = 1.0;
    w[9] = 1.0;
    return m;
}

}  // namespace

TEST_CASE("accuracy counts argmax hits with lowest-index ties") {
    const auto model = identity_model();
    LabeledDataset d;
    d.class_count = 2;
    Vector<float> px(8);
    px << 1, 0,  // predicts 0
        0, 1,    // predicts 1
        2, 0,    // predicts 0
        1, 1;    // tie, predicts 0
    d.images = Tensor<float>({4, 2}, px);
    d.labels = {0, 1, 1, 0};
    d.origin = {0, 1, 2, 3};
    CHECK(predict(model, d) == std::vector<int>{0, 1, 0, 0});
    CHECK(accuracy(model, d) == 75.0);
    CHECK_THROWS_AS(accuracy(model, LabeledDataset{}), ContractError);
}

TEST_CASE("gold deltas reproduce the published differences") {
    const auto gold = report(94.60, 74.71);
    const auto cmp = compare_to_gold(report(90.92, 69.38), gold);
    CHECK(cmp.delta_acc_df == doctest::Approx(-3.68).epsilon(1e-12));
    CHECK(cmp.delta_mia == doctest::Approx(-5.33).epsilon(1e-12));
    const auto row = make_report_row(report(90.92, 69.38), gold);
    const auto csv = format_report_csv({row});
    CHECK(csv.find(",98.74,-3.68,-5.33,71\n") != std::string::npos);

    const auto self = compare_to_gold(gold, gold);
    CHECK(self.delta_acc_df == 0.0);
    CHECK(self.delta_mia == 0.0);

    auto other = gold;
    other.scenario = "class";
    CHECK_THROWS_AS(compare_to_gold(report(90.0, 70.0), other), ContractError);
    auto bad = gold;
    bad.acc_df = 101.0;
    CHECK_THROWS_AS(bad.validate(), ContractError);
}

TEST_CASE("report CSV layout") {
    CHECK(format_report_csv({}) == std::string(kReportColumns) + "\n");
    ReportRow r{"mnist", "mlp", "gold", 98.2249, -0.001, 0.0, 1.5};
    const auto csv = format_report_csv({r});
    CHECK(csv == std::string(kReportColumns) + "\nmnist,mlp,gold,98.22,0.00,0.00,2\n");
    CHECK(format_report_csv({r}) == csv);
    r.algorithm = "a,b";
    CHECK_THROWS(format_report_csv({r}));
    CHECK_THROWS_AS(parse_report_csv("nope\n"), FormatError);
}

TEST_CASE("report CSV and JSON round trips") {
    const std::vector<ReportRow> rows{{"mnist", "mlp", "deepclean", 98.15, 0.0, 1.25, 1.0},
                                      {"mnist", "mlp", "rl", 97.5, -4.0, -2.5, 3.0}};
    CHECK(parse_report_csv(format_report_csv(rows)) == rows);
    CHECK(parse_report_json(format_report_json(rows)) == rows);
    emit_report(rows, ReportFormat::kJson, scratch("r.json"));
    CHECK(parse_report_json(read_text_file(scratch("r.json"))) == rows);
    emit_report(rows, ReportFormat::kCsv, scratch("sub/r.csv"));
    CHECK(read_text_file(scratch("sub/r.csv")) == format_report_csv(rows));
}

TEST_CASE("sweep plot is an SVG polyline with a sibling CSV") {
    const CurveData two{{1.0, 10.0}, {3.0, 4.0}};
    const auto svg = render_svg_plot(two, "retain size", "gamma", "|W_r|");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
    const std::regex poly("<polyline[^>]*points=\"([^\"]*)\"");
    std::smatch m;
    REQUIRE(std::regex_search(svg, m, poly));
    const std::string pts = m[1];
    CHECK(std::count(pts.begin(), pts.end(), ',') == 2);
    CHECK_THROWS_AS(render_svg_plot({{1.0, 1.0}}, "t", "x", "y"), ContractError);

    const CurveData curve{{1.0, 101770.0}, {1.2, 100000.0}, {2.0, 99000.5}};
    emit_sweep_plot(curve, "retain size", scratch("plot/sweep.svg"), "gamma", "retain_count");
    CHECK(fs::exists(scratch("plot/sweep.svg")));
    CHECK(read_text_file(scratch("plot/sweep.csv")).rfind("gamma,retain_count\n", 0) == 0);
    CHECK(read_curve_csv(scratch("plot/sweep.csv")) == curve);
    CHECK_THROWS_AS(read_text_file(scratch("missing.txt")), FormatError);
}
