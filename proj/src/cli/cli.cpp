// Copyright 2026 The codol Authors
// SPDX-License-Identifier: Apache-2.0

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>

#include <fmt/format.h>

#include "codol/cli.hpp"
#include "codol/errors.hpp"
#include "codol/plot.hpp"
#include "codol/report.hpp"

namespace codol::cli {

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw Error("cannot write '" + path.string() + "'");
    }
    file << content;
}

std::string read_file(const fs::path& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) {
        throw Error("cannot read '" + path.string() + "'");
    }
    return {std::istreambuf_iterator<char>(file), std::istreambuf_iterator<char>()};
}

// Timestamps live only here so every other artifact is reproducible.
class RunLog {
public:
    RunLog(const fs::path& out, const std::string& command) : path_(out / "run.log"), command_(command) {}

    void line(const std::string& message) const {
        fs::create_directories(path_.parent_path());
        std::ofstream file(path_, std::ios::app);
        const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        char stamp[32];
        std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        file << stamp << ' ' << command_ << ": " << message << '\n';
    }

private:
    fs::path path_;
    std::string command_;
};

fs::path image_base(const RunConfig& cfg, const DatasetManifest& manifest) {
    if (cfg.scan_root) return *cfg.scan_root;
    if (manifest.meta.contains("root") && manifest.meta["root"].is_string()) {
        return manifest.meta["root"].get<std::string>();
    }
    if (cfg.manifest) return cfg.manifest->parent_path();
    return fs::current_path();
}

ImageSource image_source(const RunConfig& cfg, const DatasetManifest& manifest) {
    return file_image_source(make_backend(cfg.train)->descriptor(), image_base(cfg, manifest));
}

ProtocolOptions protocol_options(const RunConfig& cfg, const DatasetManifest& manifest) {
    ProtocolOptions options;
    options.seeds = cfg.seeds;
    options.workers = cfg.workers;
    options.image_source = image_source(cfg, manifest);
    if (cfg.label_ratio) {
        const double ratio = *cfg.label_ratio;
        options.prepare = [ratio](const DatasetManifest& m, std::uint64_t seed) {
            return mask_domain_labels(m, ratio, seed);
        };
    }
    return options;
}

std::string file_token(std::string text) {
    for (char& c : text) {
        if (c == '/' || c == '\\' || c == ' ' || c == ':') c = '_';
    }
    return text;
}

void write_reports(const fs::path& out, const std::string& stem, const std::vector<EvalReport>& reports,
                   bool markdown) {
    std::vector<MetricRow> rows;
    nlohmann::json json = nlohmann::json::array();
    for (const auto& report : reports) {
        const auto r = metric_rows(report);
        rows.insert(rows.end(), r.begin(), r.end());
        json.push_back(report_to_json(report));
    }
    write_file(out / (stem + ".csv"), metrics_csv(rows));
    write_file(out / (stem + ".json"), json.dump(2) + "\n");
    if (markdown) {
        write_file(out / (stem + ".md"), markdown_table(reports));
    }
}

int cmd_train(const RunConfig& cfg, std::ostream& out) {
    const RunLog log(cfg.out, "train");
    log.line("start");
    const DatasetManifest manifest = load_dataset(cfg);
    ProtocolOptions options = protocol_options(cfg, manifest);
    const auto splits = make_splits(manifest, cfg.protocol);
    std::map<std::string, fs::path> written;
    options.on_checkpoint = [&](std::size_t split_index, std::uint64_t seed, const Checkpoint& ckpt) {
        const ProtocolSplit& split = splits[split_index];
        const std::string name = fmt::format("{}__{}__{}__seed{}.ckpt", to_string(cfg.train.variant),
                                             file_token(describe_domains(manifest, split.train_domains)),
                                             file_token(describe_domains(manifest, split.test_domains)), seed);
        const fs::path path = cfg.out / "checkpoints" / name;
        fs::create_directories(path.parent_path());
        save_checkpoint(ckpt, path);
        written[name] = path;
    };
    EvalReport report = run_protocol(manifest, cfg.protocol, cfg.train, options);
    report.ratio = cfg.label_ratio;
    write_reports(cfg.out, "metrics", {report}, cfg.markdown);
    for (const auto& [name, path] : written) {
        out << path.string() << '\n';
    }
    out << fmt::format("average accuracy: {}\n", format_accuracy(report.average));
    log.line(fmt::format("done, {} checkpoints", written.size()));
    return kExitOk;
}

int cmd_eval(const RunConfig& cfg, std::ostream& out) {
    const RunLog log(cfg.out, "eval");
    log.line("start");
    std::vector<MetricRow> rows;
    if (!cfg.checkpoints.empty()) {
        const DatasetManifest manifest = load_dataset(cfg);
        const ImageSource source = image_source(cfg, manifest);
        for (const auto& path : cfg.checkpoints) {
            const Checkpoint ckpt = load_checkpoint(path);
            const EvalCell cell = evaluate(ckpt, manifest, ckpt.split, source);
            MetricRow row;
            row.variant = to_string(ckpt.config.variant);
            row.dataset = ckpt.dataset;
            row.train_domains = cell.train_domains;
            row.test_domain = cell.test_domain;
            row.seed = ckpt.config.seed;
            row.class_length = ckpt.config.class_length;
            row.domain_length = uses_domains(ckpt.config.variant) ? ckpt.config.domain_length : 0;
            row.accuracy = cell.accuracy;
            rows.push_back(row);
        }
    }
    if (cfg.cells) {
        const auto cells = parse_metrics_csv(read_file(*cfg.cells));
        rows.insert(rows.end(), cells.begin(), cells.end());
    }
    const auto reports = reports_from_rows(rows);
    write_reports(cfg.out, "report", reports, cfg.markdown);
    for (const auto& report : reports) {
        out << fmt::format("{} {}: average {}\n", report.variant, report.dataset, format_accuracy(report.average));
    }
    log.line(fmt::format("done, {} rows", rows.size()));
    return kExitOk;
}

int cmd_zeroshot(const RunConfig& cfg, std::ostream& out) {
    const RunLog log(cfg.out, "zeroshot");
    const DatasetManifest manifest = load_dataset(cfg);
    const BackendPtr backend = make_backend(cfg.train);
    const double tau = cfg.train.resolved_tau();
    const ZeroShotResult result = evaluate_zeroshot(manifest, backend, cfg.with_domain, tau,
                                                    cfg.train.posterior_mode, image_source(cfg, manifest));
    const std::string variant = to_string(cfg.with_domain ? Variant::ZeroShotDomain : Variant::ZeroShot);
    const std::string dataset = manifest.meta.value("name", manifest.meta.value("source", std::string("dataset")));
    std::vector<MetricRow> rows;
    for (std::size_t k = 0; k < result.domains.size(); ++k) {
        MetricRow row;
        row.variant = variant;
        row.dataset = dataset;
        row.test_domain = result.domains[k];
        row.accuracy = result.per_domain[k];
        rows.push_back(row);
    }
    nlohmann::json json = {{"variant", variant},       {"dataset", dataset},
                           {"with_domain", cfg.with_domain}, {"tau", tau},
                           {"domains", result.domains}, {"per_domain", result.per_domain},
                           {"accuracy", result.overall}};
    const std::string stem = cfg.with_domain ? "zeroshot_domain" : "zeroshot";
    write_file(cfg.out / (stem + ".csv"), metrics_csv(rows));
    write_file(cfg.out / (stem + ".json"), json.dump(2) + "\n");
    out << fmt::format("accuracy: {}\n", format_accuracy(result.overall));
    log.line("done");
    return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out) {
    const RunLog log(cfg.out, "sweep");
    log.line("start");
    const DatasetManifest manifest = load_dataset(cfg);
    const auto cells = sweep_context_lengths(manifest, cfg.protocol, square_grid(cfg.grid), cfg.train,
                                             protocol_options(cfg, manifest));
    std::vector<EvalReport> reports;
    for (const auto& c : cells) reports.push_back(c.report);
    write_reports(cfg.out, "sweep_metrics", reports, cfg.markdown);
    write_file(cfg.out / "sweep.json", sweep_to_json(cells).dump(2) + "\n");

    const auto n = static_cast<Index>(cfg.grid.size());
    Mat grid = Mat::Zero(n, n);
    std::vector<std::string> labels;
    for (Index i = 0; i < n; ++i) labels.push_back(std::to_string(cfg.grid[static_cast<std::size_t>(i)]));
    for (std::size_t i = 0; i < cells.size(); ++i) {
        grid(static_cast<Index>(i) / n, static_cast<Index>(i) % n) = cells[i].report.average;
    }
    write_file(cfg.out / "sweep.svg", svg_heatmap(grid, labels, labels, "accuracy by M_c (rows) and M_k (columns)"));
    out << fmt::format("{} cells\n", cells.size());
    log.line(fmt::format("done, {} cells", cells.size()));
    return kExitOk;
}

int cmd_ratio(const RunConfig& cfg, std::ostream& out) {
    const RunLog log(cfg.out, "ratio");
    log.line("start");
    const DatasetManifest manifest = load_dataset(cfg);
    const auto rows = domain_ratio_experiment(manifest, cfg.protocol, cfg.ratios, cfg.train,
                                              protocol_options(cfg, manifest));
    std::vector<EvalReport> reports;
    LineSeries series{to_string(cfg.train.variant), {}, {}};
    for (const auto& r : rows) {
        reports.push_back(r.report);
        series.y.push_back(r.mean);
        series.error.push_back(r.spread / 2.0);
        out << fmt::format("ratio {}: {} (spread {})\n", r.ratio, format_accuracy(r.mean), format_accuracy(r.spread));
    }
    write_reports(cfg.out, "ratio_metrics", reports, cfg.markdown);
    write_file(cfg.out / "ratio.json", ratio_rows_to_json(rows).dump(2) + "\n");
    write_file(cfg.out / "ratio.svg", svg_line_plot(cfg.ratios, {series}, "accuracy by domain-label ratio",
                                                    "ratio of labeled domains", "accuracy (%)"));
    log.line(fmt::format("done, {} ratios", rows.size()));
    return kExitOk;
}

int cmd_align(const RunConfig& cfg, std::ostream& out) {
    const RunLog log(cfg.out, "align");
    const DatasetManifest manifest = load_dataset(cfg);
    const Checkpoint ckpt = load_checkpoint(cfg.checkpoints.front());
    const AlignmentReport report = alignment_analysis(ckpt, manifest, ckpt.split, image_source(cfg, manifest));
    write_file(cfg.out / "alignment.json", alignment_to_json(report).dump(2) + "\n");
    write_file(cfg.out / "alignment.svg",
               svg_heatmap(report.class_similarity, report.classes, report.classes, "image class vs prompt class"));
    write_file(cfg.out / "alignment_ablated.svg",
               svg_heatmap(report.ablated_class_similarity, report.classes, report.classes,
                           "image class vs prompt class, domain segments removed"));
    write_file(cfg.out / "alignment_domains.svg",
               svg_heatmap(report.domain_similarity, report.classes, report.domains, "image class vs prompt domain"));
    out << fmt::format("matched similarity: {:.4f} (ablated {:.4f})\n", report.matched_mean,
                       report.ablated_matched_mean);
    log.line("done");
    return kExitOk;
}

int cmd_synth(const RunConfig& cfg, std::ostream& out) {
    const RunLog log(cfg.out, "synth");
    RunConfig synth = cfg;
    synth.manifest.reset();
    synth.scan_root.reset();
    synth.synth = true;
    const DatasetManifest manifest = load_dataset(synth);
    const fs::path path = cfg.out / "manifest.json";
    fs::create_directories(cfg.out);
    save_manifest(manifest, path);
    out << path.string() << '\n';
    log.line(fmt::format("wrote {} samples", manifest.samples.size()));
    return kExitOk;
}

}  // namespace

int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        if (cfg.command == "train") return cmd_train(cfg, out);
        if (cfg.command == "eval") return cmd_eval(cfg, out);
        if (cfg.command == "zeroshot") return cmd_zeroshot(cfg, out);
        if (cfg.command == "sweep") return cmd_sweep(cfg, out);
        if (cfg.command == "ratio") return cmd_ratio(cfg, out);
        if (cfg.command == "align") return cmd_align(cfg, out);
        if (cfg.command == "synth") return cmd_synth(cfg, out);
        err << "config error: unknown command '" << cfg.command << "'\n";
        return kExitConfig;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = parse_args(args);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const Error& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    if (!cfg.help.empty()) {
        out << cfg.help;
        return kExitOk;
    }
    return execute(cfg, out, err);
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace codol::cli
