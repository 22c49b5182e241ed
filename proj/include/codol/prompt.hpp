// Copyright 2026 The codol Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "codol/backend.hpp"
#include "codol/types.hpp"

namespace codol {

enum class ContextMode { Unified, ClassSpecific };

// "unified" | "class-specific"; throws ConfigError otherwise.
ContextMode parse_context_mode(std::string_view text);
const char* to_string(ContextMode mode);

inline constexpr double kContextInitStd = 0.02;
inline constexpr const char* kZeroShotTemplate = "a photo of a";

// Learnable class context: one M_c x B matrix shared by every class, or one
// per class in class-specific mode.
struct ClassContext {
    ContextMode mode = ContextMode::Unified;
    std::vector<Mat> vectors;

    Index length() const { return vectors.empty() ? 0 : vectors.front().rows(); }
    const Mat& for_class(Index y) const;
};

// Learnable domain context; a single M_k x B matrix shared by every domain.
struct DomainContext {
    Mat vectors;

    Index length() const { return vectors.rows(); }
};

// Class and domain names with their frozen embeddings for one backend.
class NameVocabulary {
public:
    NameVocabulary(const DualEncoder& backend, std::vector<std::string> classes, std::vector<std::string> domains);

    const std::vector<std::string>& classes() const { return classes_; }
    const std::vector<std::string>& domains() const { return domains_; }
    Index num_classes() const { return static_cast<Index>(classes_.size()); }
    Index num_domains() const { return static_cast<Index>(domains_.size()); }

    const Mat& class_embedding(Index y) const;
    const Mat& domain_embedding(Index j) const;

private:
    std::vector<std::string> classes_;
    std::vector<std::string> domains_;
    std::vector<Mat> class_embeddings_;
    std::vector<Mat> domain_embeddings_;
};

enum class Segment : std::uint8_t { Template, ClassContext, DomainContext, ClassName, DomainName };

const char* to_string(Segment segment);

struct PromptAssembly {
    TokenSequence sequence;
    std::vector<Segment> tags;  // one per token

    // Half-open row range [first, second) covered by a segment; empty when absent.
    std::pair<Index, Index> segment(Segment which) const;
};

std::pair<ClassContext, DomainContext> init_contexts(Index class_length, Index domain_length, Index embed_dim,
                                                     std::uint64_t seed, ContextMode mode = ContextMode::Unified,
                                                     Index num_classes = 1);

// class tokens | domain tokens | class name | domain name (each segment optional).
PromptAssembly assemble_tokens(const Mat& class_tokens, const Mat& domain_tokens, const NameVocabulary& vocab,
                               Index y, std::optional<Index> j, Index max_length);

PromptAssembly assemble_codol(const ClassContext& class_ctx, const Mat& conditioned_domain_tokens,
                              const NameVocabulary& vocab, Index y, Index j, Index max_length);

PromptAssembly assemble_coop(const ClassContext& class_ctx, const NameVocabulary& vocab, Index y, Index max_length);

// "a photo of a [CLASS]" or "a photo of a [CLASS] [DOMAIN]".
PromptAssembly assemble_zeroshot(const NameVocabulary& vocab, Index y, std::optional<Index> j,
                                 const DualEncoder& backend);

}  // namespace codol
