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
#include "deepclean/experiment.hpp"

#include "deepclean/checkpoint.hpp"
#include "deepclean/fim.hpp"
#include "deepclean/metrics.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <iostream>

namespace deepclean {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Config <-> JSON

namespace {

ojson train_json(const TrainConfig& c) {
    ojson j;
    j["optimizer"] = to_string(c.optimizer.kind);
    j["momentum"] = c.optimizer.momentum;
    j["weight_decay"] = c.optimizer.weight_decay;
    j["lr"] = c.lr;
    j["epochs"] = c.epochs;
    j["batch_size"] = c.batch_size;
    j["schedule"] = to_string(c.schedule);
    j["milestones"] = c.milestones;
    j["factor"] = c.factor;
    j["augment"] = c.augment;
    j["seed"] = c.seed;
    return j;
}

TrainConfig train_from(const nlohmann::json& j, TrainConfig c) {
    if (j.contains("optimizer")) c.optimizer.kind = parse_optimizer(j["optimizer"].get<std::string>());
    c.optimizer.momentum = j.value("momentum", c.optimizer.momentum);
    c.optimizer.weight_decay = j.value("weight_decay", c.optimizer.weight_decay);
    c.lr = j.value("lr", c.lr);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    if (j.contains("schedule")) c.schedule = parse_schedule(j["schedule"].get<std::string>());
    c.milestones = j.value("milestones", c.milestones);
    c.factor = j.value("factor", c.factor);
    c.augment = j.value("augment", c.augment);
    return c;
}

ojson unlearn_json(const UnlearnConfig& c) {
    ojson j;
    j["gamma"] = c.gamma;
    j["epochs"] = c.epochs;
    j["lr"] = c.lr;
    j["optimizer"] = to_string(c.optimizer);
    j["weight_decay"] = c.weight_decay;
    j["batch_size"] = c.batch_size;
    j["fim_cap_forget"] = c.fim_cap_forget;
    j["fim_cap_retain"] = c.fim_cap_retain;
    j["chunk_size"] = c.chunk_size;
    j["workers"] = c.workers;
    j["epsilon"] = c.epsilon;
    j["seed"] = c.seed;
    return j;
}

UnlearnConfig unlearn_from(const nlohmann::json& j, UnlearnConfig c) {
    c.epochs = j.value("epochs", c.epochs);
    c.lr = j.value("lr", c.lr);
    if (j.contains("optimizer")) c.optimizer = parse_optimizer(j["optimizer"].get<std::string>());
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.fim_cap_forget = j.value("fim_cap_forget", c.fim_cap_forget);
    c.fim_cap_retain = j.value("fim_cap_retain", c.fim_cap_retain);
    c.chunk_size = j.value("chunk_size", c.chunk_size);
    c.epsilon = j.value("epsilon", c.epsilon);
    return c;
}

ojson attack_json(const AttackConfig& c) {
    ojson j;
    j["lr"] = c.lr;
    j["epochs"] = c.epochs;
    j["l2"] = c.l2;
    j["holdout"] = c.holdout;
    j["seed"] = c.seed;
    return j;
}

AttackConfig attack_from(const nlohmann::json& j, AttackConfig c) {
    c.lr = j.value("lr", c.lr);
    c.epochs = j.value("epochs", c.epochs);
    c.l2 = j.value("l2", c.l2);
    c.holdout = j.value("holdout", c.holdout);
    return c;
}

std::string env_data_dir() {
    const char* v = std::getenv("DEEPCLEAN_DATA_DIR");
    return v ? std::string(v) : std::string();
}

void require_file(const std::string& key, const std::string& path) {
    if (path.empty()) throw ConfigError("config key '" + key + "' is not set and DEEPCLEAN_DATA_DIR gives no fallback");
    if (!fs::is_regular_file(path)) throw ConfigError("config key '" + key + "': file not found: " + path);
}

}  // namespace

void ExperimentConfig::propagate() {
    model.seed = seed;
    train.seed = seed;
    unlearn.seed = seed;
    unlearn.workers = workers;
    attack.seed = seed;
    unlearn.gamma = resolved_gamma();
}

void ExperimentConfig::resolve_paths() {
    const std::string dir = env_data_dir();
    auto fill = [&](std::string& p, const char* file) {
        if (p.empty() && !dir.empty()) {
            const fs::path base(dir);
            const fs::path gz = base / (std::string(file) + ".gz");
            p = fs::exists(gz) ? gz.string() : (base / file).string();
        }
    };
    if (data.format == "mnist") {
        fill(data.train_images, "train-images-idx3-ubyte");
        fill(data.train_labels, "train-labels-idx1-ubyte");
        fill(data.test_images, "t10k-images-idx3-ubyte");
        fill(data.test_labels, "t10k-labels-idx1-ubyte");
        require_file("data.train_images", data.train_images);
        require_file("data.train_labels", data.train_labels);
        require_file("data.test_images", data.test_images);
        require_file("data.test_labels", data.test_labels);
    } else {
        if (data.cifar_train.empty() && !dir.empty()) {
            for (int b = 1; b <= 5; ++b)
                data.cifar_train.push_back((fs::path(dir) / ("data_batch_" + std::to_string(b) + ".bin")).string());
        }
        if (data.cifar_test.empty() && !dir.empty()) data.cifar_test.push_back((fs::path(dir) / "test_batch.bin").string());
        if (data.cifar_train.empty()) require_file("data.cifar_train", "");
        if (data.cifar_test.empty()) require_file("data.cifar_test", "");
        for (const auto& p : data.cifar_train) require_file("data.cifar_train", p);
        for (const auto& p : data.cifar_test) require_file("data.cifar_test", p);
    }
}

void ExperimentConfig::validate() const {
    if (data.format != "mnist" && data.format != "cifar10") {
        throw ConfigError("config key 'data.format': expected mnist or cifar10, got '" + data.format + "'");
    }
    if (scenario == Scenario::kRandom && !(fraction > 0.0 && fraction < 1.0)) {
        throw ConfigError("config key 'scenario.fraction' must lie in (0, 1)");
    }
    if (scenario == Scenario::kClass && (target_class < 0 || target_class >= model.class_count)) {
        throw ConfigError("config key 'scenario.target_class' out of range");
    }
    if (!(resolved_gamma() > 0.0)) throw ConfigError("config key 'unlearn.gamma' must be positive");
    if (workers < 1) throw ConfigError("config key 'workers' must be >= 1");
    for (const auto& b : baselines) {
        if (std::find(algorithm_names().begin(), algorithm_names().end(), b) == algorithm_names().end()) {
            throw ConfigError("config key 'baselines': unknown algorithm '" + b + "'");
        }
    }
    try {
        model.validate();
        train.validate();
        unlearn.validate();
    } catch (const ContractError& e) {
        throw ConfigError(e.what());
    }
}

UnlearnConfig ExperimentConfig::unlearn_config(const std::string& algorithm) const {
    UnlearnConfig c = unlearn;
    c.gamma = resolved_gamma();
    c.seed = seed;
    c.workers = workers;
    if (algorithm == "rl") {
        c.lr = rl_lr;
        c.epochs = rl_epochs;
    }
    return c;
}

ojson to_json(const ExperimentConfig& cfg) {
    ojson j;
    j["dataset"] = cfg.dataset_name;
    ojson d;
    d["format"] = cfg.data.format;
    if (cfg.data.format == "mnist") {
        d["train_images"] = cfg.data.train_images;
        d["train_labels"] = cfg.data.train_labels;
        d["test_images"] = cfg.data.test_images;
        d["test_labels"] = cfg.data.test_labels;
    } else {
        d["cifar_train"] = cfg.data.cifar_train;
        d["cifar_test"] = cfg.data.cifar_test;
    }
    j["data"] = d;
    j["cap_per_class"] = cfg.cap_per_class;
    j["model"] = ojson::parse(cfg.model.descriptor());
    ojson s;
    s["kind"] = to_string(cfg.scenario);
    s["target_class"] = cfg.target_class;
    s["fraction"] = cfg.fraction;
    j["scenario"] = s;
    j["train"] = train_json(cfg.train);
    auto u = unlearn_json(cfg.unlearn);
    u["gamma"] = cfg.resolved_gamma();
    j["unlearn"] = u;
    j["rl"] = ojson{{"lr", cfg.rl_lr}, {"epochs", cfg.rl_epochs}};
    j["attack"] = attack_json(cfg.attack);
    j["baselines"] = cfg.baselines;
    j["output_dir"] = cfg.output_dir;
    j["seed"] = cfg.seed;
    j["workers"] = cfg.workers;
    return j;
}

ExperimentConfig experiment_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    try {
        c.dataset_name = j.value("dataset", c.dataset_name);
        if (j.contains("data")) {
            const auto& d = j["data"];
            c.data.format = d.value("format", c.data.format);
            c.data.train_images = d.value("train_images", c.data.train_images);
            c.data.train_labels = d.value("train_labels", c.data.train_labels);
            c.data.test_images = d.value("test_images", c.data.test_images);
            c.data.test_labels = d.value("test_labels", c.data.test_labels);
            c.data.cifar_train = d.value("cifar_train", c.data.cifar_train);
            c.data.cifar_test = d.value("cifar_test", c.data.cifar_test);
        }
        c.cap_per_class = j.value("cap_per_class", c.cap_per_class);
        if (j.contains("model")) {
            const auto& m = j["model"];
            c.model.arch = parse_architecture(m.value("arch", to_string(c.model.arch)));
            c.model.input_shape = m.value("input_shape", c.model.input_shape);
            c.model.hidden = m.value("hidden", c.model.hidden);
            c.model.class_count = m.value("class_count", c.model.class_count);
        }
        if (j.contains("scenario")) {
            const auto& s = j["scenario"];
            if (s.contains("kind")) c.scenario = parse_scenario(s["kind"].get<std::string>());
            c.target_class = s.value("target_class", c.target_class);
            c.fraction = s.value("fraction", c.fraction);
        }
        if (j.contains("train")) c.train = train_from(j["train"], c.train);
        if (j.contains("unlearn")) {
            c.unlearn = unlearn_from(j["unlearn"], c.unlearn);
            if (j["unlearn"].contains("gamma")) c.gamma = j["unlearn"]["gamma"].get<double>();
        }
        if (j.contains("rl")) {
            c.rl_lr = j["rl"].value("lr", c.rl_lr);
            c.rl_epochs = j["rl"].value("epochs", c.rl_epochs);
        }
        if (j.contains("attack")) c.attack = attack_from(j["attack"], c.attack);
        c.baselines = j.value("baselines", c.baselines);
        c.output_dir = j.value("output_dir", c.output_dir);
        c.seed = j.value("seed", c.seed);
        c.workers = j.value("workers", c.workers);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    } catch (const ContractError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const FormatError&) {
        throw ConfigError("config file not found: " + path.string());
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return experiment_from_json(j);
}

DataSplit load_split(const ExperimentConfig& cfg) {
    LabeledDataset train, test;
    if (cfg.data.format == "mnist") {
        train = load_mnist(cfg.data.train_images, cfg.data.train_labels);
        test = load_mnist(cfg.data.test_images, cfg.data.test_labels);
    } else {
        std::vector<fs::path> tr(cfg.data.cifar_train.begin(), cfg.data.cifar_train.end());
        std::vector<fs::path> te(cfg.data.cifar_test.begin(), cfg.data.cifar_test.end());
        train = load_cifar10(tr);
        test = load_cifar10(te);
    }
    if (cfg.cap_per_class > 0) train = cap_per_class(train, cfg.cap_per_class);
    if (train.sample_shape() != cfg.model.input_shape && shape_size(train.sample_shape()) != cfg.model.input_size()) {
        throw ConfigError("model input " + shape_string(cfg.model.input_shape) + " does not match data " +
                          shape_string(train.sample_shape()));
    }
    return cfg.scenario == Scenario::kClass ? split_class(train, test, cfg.target_class)
                                            : split_random(train, test, cfg.fraction, cfg.seed);
}

// ---------------------------------------------------------------------------
// Commands

namespace {

struct Flags {
    std::string config;
    std::string algo;
    std::optional<double> gamma;
    std::string scenario;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::string out;
    bool no_timing = false;
    std::string checkpoint;
    std::string gold;
    std::vector<std::string> checkpoints;
    std::vector<double> grid;
};

ExperimentConfig resolve_config(const Flags& f) {
    ExperimentConfig cfg = f.config.empty() ? ExperimentConfig{} : load_experiment_config(f.config);
    if (!f.scenario.empty()) {
        try {
            cfg.scenario = parse_scenario(f.scenario);
        } catch (const ContractError& e) {
            throw ConfigError(e.what());
        }
    }
    if (f.gamma) cfg.gamma = *f.gamma;
    if (f.seed) cfg.seed = *f.seed;
    if (f.workers) cfg.workers = *f.workers;
    if (!f.out.empty()) cfg.output_dir = f.out;
    cfg.resolve_paths();
    cfg.validate();
    cfg.propagate();
    return cfg;
}

fs::path manifest_path(const fs::path& ckpt) {
    fs::path p = ckpt;
    p.replace_extension(".manifest.json");
    return p;
}

ojson base_manifest(const ExperimentConfig& cfg, const std::string& command) {
    ojson m;
    m["command"] = command;
    m["seed"] = cfg.seed;
    m["config"] = to_json(cfg);
    return m;
}

void write_manifest(const fs::path& path, const ojson& m) { write_text_file(path, m.dump(2) + "\n"); }

fs::path require_checkpoint(const std::string& given, const fs::path& fallback, const char* what) {
    const fs::path p = given.empty() ? fallback : fs::path(given);
    if (!fs::is_regular_file(p)) throw ConfigError(std::string(what) + " checkpoint not found: " + p.string());
    return p;
}

void report_time(const Flags& f, ojson& m, double seconds) { m["unlearn_time_s"] = f.no_timing ? 0.0 : seconds; }

int cmd_train(const Flags& f, std::ostream& out) {
    const auto cfg = resolve_config(f);
    const auto split = load_split(cfg);
    const auto t0 = detail::Clock::now();
    TrainLog log;
    const auto model = train<float>(cfg.model, split.full_train(), cfg.train, &log);
    const double secs = detail::seconds_since(t0);
    const fs::path ckpt = fs::path(cfg.output_dir) / "pretrained.ckpt";
    save_checkpoint(model, ckpt);
    auto m = base_manifest(cfg, "train");
    m["algorithm"] = "pretrained";
    m["checkpoint"] = ckpt.filename().string();
    m["parameter_count"] = model.parameter_count();
    m["train_samples"] = split.retain.size() + split.forget.size();
    m["epoch_loss"] = log.epoch_loss;
    m["train_time_s"] = f.no_timing ? 0.0 : secs;
    write_manifest(manifest_path(ckpt), m);
    out << "wrote " << ckpt.string() << "\n";
    return 0;
}

int cmd_unlearn(const Flags& f, std::ostream& out, std::ostream& err) {
    const auto& names = algorithm_names();
    if (std::find(names.begin(), names.end(), f.algo) == names.end()) {
        std::string list;
        for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
        throw ConfigError("unknown algorithm '" + f.algo + "' (valid: " + list + ")");
    }
    const auto cfg = resolve_config(f);
    const fs::path dir(cfg.output_dir);
    const fs::path ckpt = dir / (f.algo + ".ckpt");
    auto m = base_manifest(cfg, "unlearn");
    m["algorithm"] = f.algo;
    m["checkpoint"] = ckpt.filename().string();

    if (f.algo == "gold") {
        const auto split = load_split(cfg);
        const auto res = gold_retrain<float>(cfg.model, split, cfg.train);
        save_checkpoint(res.model, ckpt);
        m["parameter_count"] = res.model.parameter_count();
        m["train_samples"] = split.retain.size();
        m["epoch_loss"] = res.log.epoch_loss;
        report_time(f, m, res.seconds);
        write_manifest(manifest_path(ckpt), m);
        out << "wrote " << ckpt.string() << "\n";
        return 0;
    }

    const fs::path pre = require_checkpoint(f.checkpoint, dir / "pretrained.ckpt", "pretrained");
    const auto model = load_checkpoint<float>(pre);
    const auto split = load_split(cfg);
    const UnlearnConfig ucfg = cfg.unlearn_config(f.algo);
    UnlearnResult<float> res = [&] {
        if (f.algo == "deepclean") return deepclean(model, split, ucfg);
        if (f.algo == "zero") return zero_weights_ablation(model, split, ucfg);
        if (f.algo == "finetune") return finetune_baseline(model, split.retain, ucfg);
        return random_label_baseline(model, split, ucfg);
    }();
    save_checkpoint(res.model, ckpt);
    m["source_checkpoint"] = pre.filename().string();
    m["unlearn"] = unlearn_json(ucfg);
    m["gamma"] = ucfg.gamma;
    m["parameter_count"] = res.model.parameter_count();
    if (f.algo == "deepclean" || f.algo == "zero") {
        m["forget_weight_count"] = res.mask.forget_count;
        m["retain_weight_count"] = res.mask.retain_count;
        m["fim_time_s"] = f.no_timing ? 0.0 : res.fim_seconds;
        err << "|W_f| = " << res.mask.forget_count << " of " << res.model.parameter_count() << " (gamma "
            << ucfg.gamma << ")\n";
    }
    m["epoch_loss"] = res.log.epoch_loss;
    report_time(f, m, res.seconds);
    write_manifest(manifest_path(ckpt), m);
    out << "wrote " << ckpt.string() << "\n";
    return 0;
}

struct LoadedRun {
    Model<float> model;
    std::string algorithm;
    double time_s = 0.0;
};

LoadedRun load_run(const fs::path& ckpt, const Flags& f) {
    if (!fs::is_regular_file(ckpt)) throw ConfigError("checkpoint not found: " + ckpt.string());
    LoadedRun run{load_checkpoint<float>(ckpt), ckpt.stem().string(), 0.0};
    const fs::path mp = manifest_path(ckpt);
    if (fs::is_regular_file(mp)) {
        const auto m = nlohmann::json::parse(read_text_file(mp));
        run.algorithm = m.value("algorithm", run.algorithm);
        run.time_s = m.value("unlearn_time_s", 0.0);
    }
    if (f.no_timing) run.time_s = 0.0;
    return run;
}

int cmd_evaluate(const Flags& f, std::ostream& out) {
    const auto cfg = resolve_config(f);
    const fs::path dir(cfg.output_dir);
    const fs::path gold_path = require_checkpoint(f.gold, dir / "gold.ckpt", "gold");
    std::vector<fs::path> runs;
    if (f.checkpoints.empty()) {
        runs.push_back(gold_path);
        for (const auto& b : cfg.baselines)
            if (fs::is_regular_file(dir / (b + ".ckpt"))) runs.push_back(dir / (b + ".ckpt"));
    } else {
        runs.assign(f.checkpoints.begin(), f.checkpoints.end());
    }
    const auto split = load_split(cfg);
    const auto gold = load_run(gold_path, f);
    MetricsReport gold_report = evaluate_model(gold.model, split, cfg.attack, cfg.dataset_name, gold.algorithm);
    gold_report.unlearn_time_s = gold.time_s;

    std::vector<ReportRow> rows;
    auto details = ojson::array();
    for (const auto& path : runs) {
        const auto run = load_run(path, f);
        MetricsReport rep = evaluate_model(run.model, split, cfg.attack, cfg.dataset_name, run.algorithm);
        rep.unlearn_time_s = run.time_s;
        rep.gamma = cfg.resolved_gamma();
        rep.validate();
        rows.push_back(make_report_row(rep, gold_report));
        ojson d;
        d["checkpoint"] = path.filename().string();
        d["algorithm"] = rep.algorithm;
        d["acc_dr"] = rep.acc_dr;
        d["acc_df"] = rep.acc_df;
        d["acc_test"] = rep.acc_test;
        d["mia_percent"] = rep.mia_percent;
        d["unlearn_time_s"] = rep.unlearn_time_s;
        details.push_back(d);
    }
    emit_report(rows, ReportFormat::kCsv, dir / "report.csv");
    emit_report(rows, ReportFormat::kJson, dir / "report.json");
    auto m = base_manifest(cfg, "evaluate");
    m["gold_checkpoint"] = gold_path.filename().string();
    m["runs"] = details;
    write_manifest(dir / "evaluate.manifest.json", m);
    out << format_report_csv(rows);
    return 0;
}

std::string pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

int cmd_sweep(const Flags& f, std::ostream& out, std::ostream& err) {
    const auto cfg = resolve_config(f);
    std::vector<double> grid = f.grid.empty() ? default_gamma_grid() : f.grid;
    if (!std::is_sorted(grid.begin(), grid.end())) throw ConfigError("--grid must be ascending");
    const fs::path dir(cfg.output_dir);
    const fs::path pre = require_checkpoint(f.checkpoint, dir / "pretrained.ckpt", "pretrained");
    const fs::path gold_path = require_checkpoint(f.gold, dir / "gold.ckpt", "gold");
    const auto model = load_checkpoint<float>(pre);
    const auto gold = load_run(gold_path, f);
    const auto split = load_split(cfg);
    const auto gold_report = evaluate_model(gold.model, split, cfg.attack, cfg.dataset_name, "gold");

    const UnlearnConfig base = cfg.unlearn_config("deepclean");
    WeightSelection sel = select_weights(model, split, base);
    const double n = static_cast<double>(model.parameter_count());
    const WeightMask at_one = mask_from_threshold(sel.ratio, 1.0);
    const double retain_share = static_cast<double>(at_one.retain_count) / n;
    err << "|W_r|/n at gamma=1: " << retain_share << "\n";

    std::string csv = "gamma,retain_count,forget_count,acc_dr,acc_df,acc_test,mia_percent,delta_acc_df,delta_mia\n";
    CurveData c_wr, c_dr, c_df, c_mia;
    auto points = ojson::array();
    for (double g : grid) {
        UnlearnConfig ucfg = base;
        ucfg.gamma = g;
        sel.mask = mask_from_threshold(sel.ratio, g);
        const auto res = deepclean_from_selection(model, split, sel, ucfg);
        const auto rep = evaluate_model(res.model, split, cfg.attack, cfg.dataset_name, "deepclean");
        const auto cmp = compare_to_gold(rep, gold_report);
        char gb[32];
        std::snprintf(gb, sizeof gb, "%g", g);
        csv += std::string(gb) + "," + std::to_string(res.mask.retain_count) + "," +
               std::to_string(res.mask.forget_count) + "," + pct(rep.acc_dr) + "," + pct(rep.acc_df) + "," +
               pct(rep.acc_test) + "," + pct(rep.mia_percent) + "," + pct(cmp.delta_acc_df) + "," +
               pct(cmp.delta_mia) + "\n";
        c_wr.emplace_back(g, static_cast<double>(res.mask.retain_count));
        c_dr.emplace_back(g, rep.acc_dr);
        c_df.emplace_back(g, rep.acc_df);
        c_mia.emplace_back(g, cmp.delta_mia);
        ojson p;
        p["gamma"] = g;
        p["retain_count"] = res.mask.retain_count;
        p["unlearn_time_s"] = f.no_timing ? 0.0 : res.seconds;
        points.push_back(p);
        err << "gamma " << gb << ": |W_r| " << res.mask.retain_count << ", Acc_Dr " << pct(rep.acc_dr)
            << ", Acc_Df " << pct(rep.acc_df) << "\n";
    }
    write_text_file(dir / "sweep.csv", csv);
    if (grid.size() >= 2) {
        emit_sweep_plot(c_wr, "Retained weights |W_r| vs gamma", dir / "sweep_retain_count.svg", "gamma", "retain_count");
        emit_sweep_plot(c_dr, "Acc_Dr vs gamma", dir / "sweep_acc_dr.svg", "gamma", "acc_dr");
        emit_sweep_plot(c_df, "Acc_Df vs gamma", dir / "sweep_acc_df.svg", "gamma", "acc_df");
        emit_sweep_plot(c_mia, "Delta MIA vs gamma", dir / "sweep_delta_mia.svg", "gamma", "delta_mia");
    } else {
        err << "warning: a single-point grid produces no plots\n";
    }
    auto m = base_manifest(cfg, "sweep");
    m["grid"] = grid;
    m["parameter_count"] = model.parameter_count();
    m["retain_fraction_at_gamma_1"] = retain_share;
    m["fim_time_s"] = f.no_timing ? 0.0 : sel.seconds;
    m["points"] = points;
    write_manifest(dir / "sweep.manifest.json", m);
    out << csv;
    return 0;
}

int cmd_mia(const Flags& f, std::ostream& out) {
    const auto cfg = resolve_config(f);
    const fs::path dir(cfg.output_dir);
    const fs::path ckpt = require_checkpoint(f.checkpoint, dir / "pretrained.ckpt", "target");
    const auto model = load_checkpoint<float>(ckpt);
    const auto split = load_split(cfg);
    const auto res = evaluate_mia(model, split.retain, split.test, split.forget, cfg.attack);
    auto m = base_manifest(cfg, "mia");
    m["checkpoint"] = ckpt.filename().string();
    m["mia_percent"] = res.mia_percent;
    m["attack_accuracy"] = res.attack_accuracy;
    write_manifest(dir / (ckpt.stem().string() + ".mia.json"), m);
    out << "mia_percent " << pct(res.mia_percent) << "\nattack_accuracy " << pct(res.attack_accuracy) << "\n";
    return 0;
}

void add_common(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config, "Experiment JSON");
    sub->add_option("--gamma", f.gamma, "Ratio threshold");
    sub->add_option("--scenario", f.scenario, "random | class");
    sub->add_option("--seed", f.seed, "Global seed");
    sub->add_option("--workers", f.workers, "FIM worker threads");
    sub->add_option("--out", f.out, "Output directory");
    sub->add_flag("--no-timing", f.no_timing, "Write 0 for wall-clock times (byte-stable outputs)");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"DeepClean machine-unlearning toolkit"};
    app.require_subcommand(1);
    Flags f;
    auto* train_cmd = app.add_subcommand("train", "Pretrain on D_r and D_f");
    add_common(train_cmd, f);
    auto* unlearn_cmd = app.add_subcommand("unlearn", "Run one unlearning algorithm or the gold retrain");
    add_common(unlearn_cmd, f);
    unlearn_cmd->add_option("--algo", f.algo, "deepclean | finetune | rl | zero | gold")->required();
    unlearn_cmd->add_option("--checkpoint", f.checkpoint, "Pretrained checkpoint");
    auto* eval_cmd = app.add_subcommand("evaluate", "Compare checkpoints against the gold model");
    add_common(eval_cmd, f);
    eval_cmd->add_option("--gold", f.gold, "Gold checkpoint");
    eval_cmd->add_option("checkpoints", f.checkpoints, "Checkpoints to evaluate");
    auto* sweep_cmd = app.add_subcommand("sweep", "DeepClean over a gamma grid");
    add_common(sweep_cmd, f);
    sweep_cmd->add_option("--grid", f.grid, "Gamma values")->delimiter(',');
    sweep_cmd->add_option("--checkpoint", f.checkpoint, "Pretrained checkpoint");
    sweep_cmd->add_option("--gold", f.gold, "Gold checkpoint");
    auto* mia_cmd = app.add_subcommand("mia", "Membership inference against one checkpoint");
    add_common(mia_cmd, f);
    mia_cmd->add_option("--checkpoint", f.checkpoint, "Target checkpoint");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }
    try {
        if (*train_cmd) return cmd_train(f, out);
        if (*unlearn_cmd) return cmd_unlearn(f, out, err);
        if (*eval_cmd) return cmd_evaluate(f, out);
        if (*sweep_cmd) return cmd_sweep(f, out, err);
        return cmd_mia(f, out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "runtime error: " << e.what() << "\n";
        return 2;
    }
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace deepclean
