// Copyright 2026 The codol Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "codol/backend.hpp"
#include "codol/head.hpp"
#include "codol/meta_net.hpp"
#include "codol/prompt.hpp"

namespace codol {

enum class Variant {
    CoDoL,           // class + domain context, domain meta-net
    CoDoLNoDmn,      // class + domain context
    CoDoLCmn,        // class + domain context, domain and class meta-nets
    CoOp,            // class context only
    CoCoOp,          // class context with class meta-net
    ZeroShot,        // "a photo of a [CLASS]"
    ZeroShotDomain,  // "a photo of a [CLASS] [DOMAIN]"
};

Variant parse_variant(std::string_view text);
const char* to_string(Variant variant);
bool is_trainable(Variant variant);
// Whether prompts carry a domain segment (the grid has one column per domain).
bool uses_domains(Variant variant);

// Trainable prompt state for one variant.
struct PromptModel {
    Variant variant = Variant::CoDoL;
    ClassContext class_ctx;
    DomainContext domain_ctx;
    std::optional<MetaNet> dmn;
    std::optional<MetaNet> cmn;

    bool input_dependent() const { return dmn.has_value() || cmn.has_value(); }

    // Visits every trainable tensor under a stable name ("class_ctx.0", "dmn.w1", ...).
    void for_each_tensor(const std::function<void(const std::string&, TensorView)>& fn);
    PromptModel zeros_like() const;
    Index parameter_count() const;
};

struct ModelInit {
    Variant variant = Variant::CoDoL;
    Index class_length = 16;
    Index domain_length = 16;
    ContextMode mode = ContextMode::Unified;
    std::uint64_t seed = 0;
    // Start meta-nets at exactly zero instead of the small random init.
    bool zero_meta_nets = false;
};

PromptModel init_model(const ModelInit& init, const BackendDescriptor& backend, Index num_classes);

// Forward state for one image, kept for the backward pass.
struct GridForward {
    JointScores scores;
    Vec image_feature;
    std::vector<PromptAssembly> prompts;  // row-major over (y, j)
    std::vector<Vec> text_features;       // un-normalized encoder outputs
};

double cosine(const Vec& a, const Vec& b);

GridForward forward_grid(const DualEncoder& backend, const PromptModel& model, const NameVocabulary& vocab,
                         const Vec& image_feature, double tau, PosteriorMode mode);

JointScores score_grid(const DualEncoder& backend, const PromptModel& model, const NameVocabulary& vocab,
                       const Vec& image_feature, double tau, PosteriorMode mode);

// Accumulates dL/d(params) into `grad` (shaped like `model`) given dL/d(scores).
void backward_grid(const DualEncoder& backend, const PromptModel& model, const GridForward& fwd,
                   const Mat& grad_scores, PromptModel& grad);

// Prompts for every grid cell; exposed for alignment analysis.
std::vector<PromptAssembly> build_prompts(const DualEncoder& backend, const PromptModel& model,
                                          const NameVocabulary& vocab, const Vec& image_feature);

Posterior zero_shot_posterior(const DualEncoder& backend, const NameVocabulary& vocab, const Vec& image_feature,
                              bool with_domain, double tau, PosteriorMode mode = PosteriorMode::Joint);

// Scores images against a fixed model; caches text features when they do not
// depend on the input. Not thread-safe; use one per worker.
class GridScorer {
public:
    GridScorer(const DualEncoder& backend, const PromptModel& model, const NameVocabulary& vocab, double tau,
               PosteriorMode mode);

    JointScores operator()(const Vec& image_feature);
    const std::vector<Vec>& text_features(const Vec& image_feature);

private:
    const DualEncoder& backend_;
    const PromptModel& model_;
    const NameVocabulary& vocab_;
    double tau_;
    PosteriorMode mode_;
    std::optional<std::vector<Vec>> cache_;
    std::vector<Vec> scratch_;
};

}  // namespace codol
