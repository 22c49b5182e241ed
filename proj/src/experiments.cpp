// Copyright 2026 The codol Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <mutex>

#include "codol/errors.hpp"
#include "codol/pipeline.hpp"

namespace codol {

void EvalReport::finalize() {
    double total = 0.0;
    for (auto& cell : cells) {
        double sum = 0.0;
        for (double a : cell.accuracies) sum += a;
        cell.mean = cell.accuracies.empty() ? 0.0 : sum / static_cast<double>(cell.accuracies.size());
        total += cell.mean;
    }
    average = cells.empty() ? 0.0 : total / static_cast<double>(cells.size());
}

EvalReport run_protocol(const DatasetManifest& manifest, Protocol protocol, const TrainConfig& config,
                        const ProtocolOptions& options) {
    config.validate();
    if (options.seeds.empty()) {
        throw ArgumentError("run_protocol needs at least one seed");
    }
    const auto splits = make_splits(manifest, protocol);
    const BackendPtr backend = make_backend(config);
    const std::size_t n_seeds = options.seeds.size();
    std::vector<EvalCell> results(splits.size() * n_seeds);
    std::mutex callback_mutex;

    parallel_for(results.size(), options.workers, [&](std::size_t job) {
        const std::size_t split_index = job / n_seeds;
        const std::uint64_t seed = options.seeds[job % n_seeds];
        const ProtocolSplit& split = splits[split_index];
        TrainConfig cfg = config;
        cfg.seed = seed;
        DatasetManifest data = restrict_to_split(manifest, split);
        if (options.prepare) {
            data = options.prepare(data, seed);
        }
        TrainHooks hooks;
        hooks.backend = backend;
        hooks.image_source = options.image_source;
        const Checkpoint ckpt = is_trainable(cfg.variant) ? train(data, split, cfg, hooks)
                                                          : untrained_checkpoint(data, split, cfg, backend);
        results[job] = evaluate(ckpt, data, split, options.image_source);
        if (options.on_checkpoint) {
            std::lock_guard lock(callback_mutex);
            options.on_checkpoint(split_index, seed, ckpt);
        }
    });

    EvalReport report;
    report.variant = to_string(config.variant);
    report.dataset = manifest.meta.value("name", manifest.meta.value("source", std::string("dataset")));
    report.protocol = to_string(protocol);
    report.class_length = config.class_length;
    report.domain_length = uses_domains(config.variant) ? config.domain_length : 0;
    report.seeds = options.seeds;
    for (std::size_t s = 0; s < splits.size(); ++s) {
        ReportCell cell;
        cell.train_domains = describe_domains(manifest, splits[s].train_domains);
        cell.test_domain = describe_domains(manifest, splits[s].test_domains);
        cell.seeds = options.seeds;
        for (std::size_t k = 0; k < n_seeds; ++k) {
            cell.accuracies.push_back(results[s * n_seeds + k].accuracy);
        }
        report.cells.push_back(std::move(cell));
    }
    report.finalize();
    return report;
}

std::vector<std::pair<Index, Index>> square_grid(const std::vector<Index>& lengths) {
    std::vector<std::pair<Index, Index>> grid;
    for (Index c : lengths) {
        for (Index k : lengths) {
            grid.emplace_back(c, k);
        }
    }
    return grid;
}

std::vector<SweepCell> sweep_context_lengths(const DatasetManifest& manifest, Protocol protocol,
                                             const std::vector<std::pair<Index, Index>>& grid,
                                             const TrainConfig& config, const ProtocolOptions& options) {
    if (grid.empty()) {
        throw ArgumentError("context-length grid is empty");
    }
    std::vector<SweepCell> out;
    for (const auto& [class_length, domain_length] : grid) {
        TrainConfig cfg = config;
        cfg.class_length = class_length;
        cfg.domain_length = domain_length;
        out.push_back({class_length, domain_length, run_protocol(manifest, protocol, cfg, options)});
    }
    return out;
}

std::vector<RatioRow> domain_ratio_experiment(const DatasetManifest& manifest, Protocol protocol,
                                              const std::vector<double>& ratios, const TrainConfig& config,
                                              const ProtocolOptions& options) {
    std::vector<RatioRow> rows;
    for (double ratio : ratios) {
        if (!(ratio >= 0.0 && ratio <= 1.0)) {
            throw ArgumentError("domain-label ratios must lie in [0, 1]");
        }
        ProtocolOptions opts = options;
        opts.prepare = [ratio](const DatasetManifest& data, std::uint64_t seed) {
            return mask_domain_labels(data, ratio, seed);
        };
        RatioRow row;
        row.ratio = ratio;
        row.report = run_protocol(manifest, protocol, config, opts);
        row.report.ratio = ratio;
        const std::size_t n_seeds = row.report.seeds.size();
        for (std::size_t k = 0; k < n_seeds; ++k) {
            double sum = 0.0;
            for (const auto& cell : row.report.cells) sum += cell.accuracies[k];
            row.seed_averages.push_back(sum / static_cast<double>(row.report.cells.size()));
        }
        double sum = 0.0;
        for (double a : row.seed_averages) sum += a;
        row.mean = sum / static_cast<double>(n_seeds);
        const auto [lo, hi] = std::minmax_element(row.seed_averages.begin(), row.seed_averages.end());
        row.spread = *hi - *lo;
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace codol
