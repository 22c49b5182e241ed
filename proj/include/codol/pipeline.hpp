// Copyright 2026 The codol Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "codol/data.hpp"
#include "codol/head.hpp"
#include "codol/model.hpp"
#include "codol/registry.hpp"

namespace codol {

enum class LrSchedule { Cosine, Constant };

LrSchedule parse_lr_schedule(std::string_view text);
const char* to_string(LrSchedule schedule);

struct TrainConfig {
    Variant variant = Variant::CoDoL;
    Index class_length = 16;   // M_c
    Index domain_length = 16;  // M_k
    ContextMode context_mode = ContextMode::Unified;
    Index epochs = 10;
    Index batch_size = 1;
    // Batches accumulated per optimizer step.
    Index grad_accumulation = 1;
    double lr = 0.002;
    LrSchedule lr_schedule = LrSchedule::Cosine;
    double momentum = 0.9;
    std::uint64_t seed = 0;
    // <= 0 selects the backend default: 1.0 for "toy", 0.01 otherwise.
    double tau = 0.0;
    PosteriorMode posterior_mode = PosteriorMode::Joint;
    bool supervise_domain = false;
    bool zero_meta_nets = false;
    // Keep meta-net parameters fixed at their initial values.
    bool freeze_meta_nets = false;
    BackendSpec backend;

    double resolved_tau() const;
    // Throws ConfigError on invalid field values.
    void validate() const;
};

nlohmann::json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j);

inline constexpr int kCheckpointFormatVersion = 1;

struct Checkpoint {
    int format_version = kCheckpointFormatVersion;
    TrainConfig config;
    std::string dataset;
    std::vector<std::string> classes;
    // Domain vocabulary of the prompts (the split's training domains).
    std::vector<std::string> domains;
    ProtocolSplit split;
    PromptModel model;
    BackendPtr backend;
    std::string backend_hash;
    std::vector<double> epoch_loss;
};

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);
std::string checkpoint_bytes(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_bytes(const std::string& bytes);

// Resolves a sample to backend input; the default handles inline features.
using ImageSource = std::function<ImageInput(const Sample&)>;
ImageInput inline_feature_source(const Sample& sample);

BackendPtr make_backend(const TrainConfig& config);

// Prompt vocabulary for a split: all classes, training-domain names.
NameVocabulary split_vocabulary(const DualEncoder& backend, const DatasetManifest& manifest,
                                const ProtocolSplit& split);

struct TrainHooks {
    BackendPtr backend;  // built from config.backend when null
    ImageSource image_source = inline_feature_source;
    // Called after every optimizer step with (epoch, step, loss of the step).
    std::function<void(Index, Index, double)> on_step;
};

Checkpoint train(const DatasetManifest& manifest, const ProtocolSplit& split, const TrainConfig& config,
                 const TrainHooks& hooks = {});

// Checkpoint for the zero-shot variants (nothing to train).
Checkpoint untrained_checkpoint(const DatasetManifest& manifest, const ProtocolSplit& split,
                                const TrainConfig& config, BackendPtr backend = nullptr);

struct EvalCell {
    std::string train_domains;
    std::string test_domain;
    std::uint64_t seed = 0;
    Index correct = 0;
    Index total = 0;
    double accuracy = 0.0;  // percent
};

// 100 * (# predict == label) / (# samples).
double accuracy_percent(const std::vector<Index>& predictions, const std::vector<Index>& labels);

EvalCell evaluate(const Checkpoint& checkpoint, const DatasetManifest& manifest, const ProtocolSplit& split,
                  const ImageSource& image_source = inline_feature_source);

struct ReportCell {
    std::string train_domains;
    std::string test_domain;
    std::vector<std::uint64_t> seeds;
    std::vector<double> accuracies;  // one per seed
    double mean = 0.0;
};

struct EvalReport {
    std::string variant;
    std::string dataset;
    std::string protocol;
    Index class_length = 0;
    Index domain_length = 0;
    std::optional<double> ratio;
    std::vector<std::uint64_t> seeds;
    std::vector<ReportCell> cells;
    double average = 0.0;

    // Recomputes cell means and the average from the per-seed accuracies.
    void finalize();
};

struct ProtocolOptions {
    std::vector<std::uint64_t> seeds = {0, 1, 2};
    int workers = 1;
    ImageSource image_source = inline_feature_source;
    // When set, every trained checkpoint is handed over (split index, seed).
    std::function<void(std::size_t, std::uint64_t, const Checkpoint&)> on_checkpoint;
    // Applied to each split's restricted manifest before training.
    std::function<DatasetManifest(const DatasetManifest&, std::uint64_t seed)> prepare;
};

EvalReport run_protocol(const DatasetManifest& manifest, Protocol protocol, const TrainConfig& config,
                        const ProtocolOptions& options = {});

struct SweepCell {
    Index class_length = 0;
    Index domain_length = 0;
    EvalReport report;
};

std::vector<SweepCell> sweep_context_lengths(const DatasetManifest& manifest, Protocol protocol,
                                             const std::vector<std::pair<Index, Index>>& grid,
                                             const TrainConfig& config, const ProtocolOptions& options = {});

// Cartesian product of `lengths` with itself.
std::vector<std::pair<Index, Index>> square_grid(const std::vector<Index>& lengths);

struct RatioRow {
    double ratio = 0.0;
    EvalReport report;
    std::vector<double> seed_averages;
    double mean = 0.0;
    double spread = 0.0;  // max - min over seeds
};

std::vector<RatioRow> domain_ratio_experiment(const DatasetManifest& manifest, Protocol protocol,
                                              const std::vector<double>& ratios, const TrainConfig& config,
                                              const ProtocolOptions& options = {});

struct AlignmentReport {
    std::vector<std::string> classes;
    std::vector<std::string> domains;  // prompt domains
    // Mean cosine between images of class r and the prompts of class c,
    // averaged over domain prompts.
    Mat class_similarity;
    // Same with the domain segments (context and name) removed from prompts.
    Mat ablated_class_similarity;
    // Mean cosine between images of class r and prompt (r, j).
    Mat domain_similarity;
    double matched_mean = 0.0;
    double ablated_matched_mean = 0.0;
    Index samples = 0;
};

AlignmentReport alignment_analysis(const Checkpoint& checkpoint, const DatasetManifest& manifest,
                                   const ProtocolSplit& split,
                                   const ImageSource& image_source = inline_feature_source);

struct ZeroShotResult {
    std::vector<std::string> domains;
    std::vector<double> per_domain;  // percent
    double overall = 0.0;
};

// Zero-shot accuracy over every labeled sample. With domains, the prompt
// vocabulary holds every manifest domain name, including the sample's own.
ZeroShotResult evaluate_zeroshot(const DatasetManifest& manifest, const BackendPtr& backend, bool with_domain,
                                 double tau, PosteriorMode mode = PosteriorMode::Joint,
                                 const ImageSource& image_source = inline_feature_source);

// Runs fn(i) for i in [0, count) on up to `workers` threads.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace codol
