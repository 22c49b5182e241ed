// Copyright 2026 The codol Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "codol/backend.hpp"
#include "codol/types.hpp"

namespace codol {

enum class Split { Train, Test };

const char* to_string(Split split);

struct Sample {
    std::string ref;
    Index class_id = 0;
    std::optional<Index> domain_id;
    Split split = Split::Train;
    std::optional<std::vector<double>> feature;

    bool operator==(const Sample&) const = default;
};

struct DatasetManifest {
    std::vector<std::string> classes;
    std::vector<std::string> domains;
    std::vector<Sample> samples;
    nlohmann::json meta = nlohmann::json::object();

    Index num_classes() const { return static_cast<Index>(classes.size()); }
    Index num_domains() const { return static_cast<Index>(domains.size()); }
    Index count(Split split) const;

    // Throws ParseError when a label is out of bounds or a vocabulary is empty.
    void validate() const;

    bool operator==(const DatasetManifest&) const = default;
};

// root/<domain>/<class>/<image files>. Domains and classes are sorted; the
// class vocabulary is the union over domains.
DatasetManifest scan_layout(const std::filesystem::path& root);

nlohmann::json manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(const nlohmann::json& j);
DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

struct SynthOptions {
    std::uint64_t seed = 0;
    Index domains = 3;
    Index classes = 4;
    Index per_cell = 10;
    Index dim = 8;
    // Radius of the sphere the class centroids are drawn on.
    double class_sep = 1.0;
    // Scales both the per-domain rotation and the per-domain offset.
    double domain_shift = 0.3;
    double noise = 0.1;
};

// Inline-feature dataset: class centroids on a sphere of radius class_sep,
// a fixed rotation (Cayley transform of a random skew matrix scaled by
// domain_shift) and an offset of norm domain_shift per domain, plus isotropic
// Gaussian noise.
DatasetManifest synth_dataset(const SynthOptions& options);

// Same shifts and noise, but the cell centroids are class_sep times the
// backend's text feature of the zero-shot prompt for (class, domain). Mimics a
// pretrained encoder whose image and text spaces agree. dim is taken from the
// backend.
DatasetManifest synth_aligned_dataset(const SynthOptions& options, const DualEncoder& backend);

enum class Protocol { MultiSource, SingleSource };

Protocol parse_protocol(std::string_view text);
const char* to_string(Protocol protocol);

struct ProtocolSplit {
    Protocol protocol = Protocol::MultiSource;
    std::vector<Index> train_domains;
    std::vector<Index> test_domains;

    bool operator==(const ProtocolSplit&) const = default;
};

// Multi-source: leave-one-domain-out, K splits. Single-source: every ordered
// (train, test) pair, K(K-1) splits.
std::vector<ProtocolSplit> make_splits(const DatasetManifest& manifest, Protocol protocol);

// Keeps the domain label on exactly round(ratio * n_train) training samples,
// chosen uniformly without replacement; test samples are untouched.
DatasetManifest mask_domain_labels(const DatasetManifest& manifest, double ratio, std::uint64_t seed);

// Retags a manifest for one split: samples of training domains tagged train
// stay train, samples of test domains become test, everything else is dropped.
DatasetManifest restrict_to_split(const DatasetManifest& manifest, const ProtocolSplit& split);

// Train-tagged samples whose domain is a training domain or unknown.
std::vector<const Sample*> training_samples(const DatasetManifest& manifest, const ProtocolSplit& split);
// All samples of the test domains.
std::vector<const Sample*> test_samples(const DatasetManifest& manifest, const ProtocolSplit& split);

std::string describe_domains(const DatasetManifest& manifest, const std::vector<Index>& ids);

}  // namespace codol
