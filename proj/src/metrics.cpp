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
#include "deepclean/metrics.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace deepclean {

namespace {

bool is_percent(double v) { return v >= 0.0 && v <= 100.0; }

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    std::string s(buf);
    if (s == "-0.00" || s == "-0") s.erase(0, 1);
    return s;
}

std::string exact(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

void check_field(const std::string& s) {
    if (s.find_first_of(",\n\r") != std::string::npos) {
        throw ContractError("report field '" + s + "' contains a CSV separator");
    }
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

void MetricsReport::validate() const {
    if (!is_percent(acc_dr) || !is_percent(acc_df) || !is_percent(acc_test) || !is_percent(mia_percent)) {
        throw ContractError("metrics report: percent outside [0, 100]");
    }
    if (unlearn_time_s < 0.0) throw ContractError("metrics report: negative time");
}

ComparisonRow compare_to_gold(const MetricsReport& run, const MetricsReport& gold) {
    if (run.dataset != gold.dataset || run.scenario != gold.scenario) {
        throw ContractError("compare_to_gold: run (" + run.dataset + "/" + run.scenario + ") and gold (" +
                            gold.dataset + "/" + gold.scenario + ") tags differ");
    }
    return ComparisonRow{run.acc_df - gold.acc_df, run.mia_percent - gold.mia_percent};
}

ReportRow make_report_row(const MetricsReport& run, const MetricsReport& gold) {
    const auto cmp = compare_to_gold(run, gold);
    return ReportRow{run.dataset, run.model, run.algorithm, run.acc_dr, cmp.delta_acc_df, cmp.delta_mia,
                     run.unlearn_time_s};
}

std::string format_report_csv(const std::vector<ReportRow>& rows) {
    std::string out = std::string(kReportColumns) + "\n";
    for (const auto& r : rows) {
        check_field(r.dataset);
        check_field(r.model);
        check_field(r.algorithm);
        out += r.dataset + "," + r.model + "," + r.algorithm + "," + fixed(r.acc_dr, 2) + "," +
               fixed(r.delta_acc_df, 2) + "," + fixed(r.delta_mia, 2) + "," + fixed(std::round(r.time_s), 0) + "\n";
    }
    return out;
}

std::vector<ReportRow> parse_report_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kReportColumns) {
        throw FormatError("report CSV: unexpected header '" + line + "'");
    }
    std::vector<ReportRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 7) throw FormatError("report CSV: expected 7 fields in '" + line + "'");
        rows.push_back(ReportRow{f[0], f[1], f[2], std::stod(f[3]), std::stod(f[4]), std::stod(f[5]), std::stod(f[6])});
    }
    return rows;
}

std::string format_report_json(const std::vector<ReportRow>& rows) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json j;
        j["dataset"] = r.dataset;
        j["model"] = r.model;
        j["algorithm"] = r.algorithm;
        j["acc_dr"] = r.acc_dr;
        j["delta_acc_df"] = r.delta_acc_df;
        j["delta_mia"] = r.delta_mia;
        j["time_s"] = r.time_s;
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

std::vector<ReportRow> parse_report_json(const std::string& text) {
    std::vector<ReportRow> rows;
    for (const auto& j : nlohmann::json::parse(text)) {
        rows.push_back(ReportRow{j.at("dataset").get<std::string>(), j.at("model").get<std::string>(),
                                 j.at("algorithm").get<std::string>(), j.at("acc_dr").get<double>(),
                                 j.at("delta_acc_df").get<double>(), j.at("delta_mia").get<double>(),
                                 j.at("time_s").get<double>()});
    }
    return rows;
}

void emit_report(const std::vector<ReportRow>& rows, ReportFormat format, const std::filesystem::path& path) {
    write_text_file(path, format == ReportFormat::kCsv ? format_report_csv(rows) : format_report_json(rows));
}

std::string render_svg_plot(const CurveData& curve, const std::string& title, const std::string& x_label,
                            const std::string& y_label) {
    if (curve.size() < 2) throw ContractError("sweep plot needs at least 2 points");
    constexpr double kWidth = 640, kHeight = 400, kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;
    double x0 = curve.front().first, x1 = x0, y0 = curve.front().second, y1 = y0;
    for (const auto& [x, y] : curve) {
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
    }
    if (x1 == x0) x1 = x0 + 1.0;
    if (y1 == y0) {
        y0 -= 1.0;
        y1 += 1.0;
    }
    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return kTop + (1.0 - (y - y0) / (y1 - y0)) * ph; };
    auto num = [](double v) { return fixed(v, 3); };

    std::ostringstream s;
    s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
      << xml_escape(title) << "</text>\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + ph << "\" x2=\"" << kLeft + pw << "\" y2=\"" << kTop + ph
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + ph
      << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double xv = x0 + (x1 - x0) * t / 4.0, yv = y0 + (y1 - y0) * t / 4.0;
        s << "<text x=\"" << num(px(xv)) << "\" y=\"" << kTop + ph + 18
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << fixed(xv, 2) << "</text>\n"
          << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(py(yv) + 4)
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fixed(yv, 2) << "</text>\n";
    }
    s << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 10
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << xml_escape(x_label) << "</text>\n"
      << "<text x=\"16\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"13\" transform=\"rotate(-90 16 " << kTop + ph / 2 << ")\">" << xml_escape(y_label) << "</text>\n"
      << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < curve.size(); ++i) {
        if (i) s << ' ';
        s << num(px(curve[i].first)) << ',' << num(py(curve[i].second));
    }
    s << "\"/>\n</svg>\n";
    return s.str();
}

void emit_sweep_plot(const CurveData& curve, const std::string& title, const std::filesystem::path& path,
                     const std::string& x_label, const std::string& y_label) {
    write_text_file(path, render_svg_plot(curve, title, x_label, y_label));
    std::string csv = x_label + "," + y_label + "\n";
    for (const auto& [x, y] : curve) csv += exact(x) + "," + exact(y) + "\n";
    auto sibling = path;
    sibling.replace_extension(".csv");
    write_text_file(sibling, csv);
}

CurveData read_curve_csv(const std::filesystem::path& path) {
    std::istringstream in(read_text_file(path));
    std::string line;
    std::getline(in, line);
    CurveData out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 2) throw FormatError(path.string() + ": malformed curve row '" + line + "'");
        out.emplace_back(std::stod(f[0]), std::stod(f[1]));
    }
    return out;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path.string() + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace deepclean
