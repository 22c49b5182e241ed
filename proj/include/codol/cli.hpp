// Copyright 2026 The codol Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "codol/data.hpp"
#include "codol/pipeline.hpp"

namespace codol::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;

// Everything a command needs, after flags, config file, environment
// (CODOL_*) and defaults have been merged.
struct RunConfig {
    std::string command;
    std::string help;  // non-empty when --help was requested

    TrainConfig train;
    std::vector<std::uint64_t> seeds = {0, 1, 2};
    Protocol protocol = Protocol::MultiSource;
    std::optional<double> label_ratio;

    // Dataset source; exactly one is required by the dataset-backed commands.
    std::optional<std::filesystem::path> manifest;
    std::optional<std::filesystem::path> scan_root;
    bool synth = false;
    SynthOptions synth_options;
    bool synth_aligned = false;
    std::string dataset_name;

    std::filesystem::path out = "codol-out";
    bool markdown = false;
    int workers = 1;

    // eval / align
    std::vector<std::filesystem::path> checkpoints;
    std::optional<std::filesystem::path> cells;
    // sweep
    std::vector<Index> grid = {4, 8, 12, 16, 20};
    // ratio
    std::vector<double> ratios = {0.2, 0.4, 0.6, 0.8, 1.0};
    // zeroshot
    bool with_domain = false;
};

// Throws ConfigError on invalid input.
RunConfig parse_args(const std::vector<std::string>& args);

// Builds the dataset named by the config's single source.
DatasetManifest load_dataset(const RunConfig& config);

// Decodes image files to the backend's raw input size; inline features pass
// through unchanged.
ImageSource file_image_source(const BackendDescriptor& descriptor, std::filesystem::path base);

int execute(const RunConfig& config, std::ostream& out, std::ostream& err);

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace codol::cli
