// Copyright 2026 The codol Authors
// SPDX-License-Identifier: Apache-2.0

#include "codol/prompt.hpp"

#include <set>
#include <string>

#include "codol/errors.hpp"
#include "codol/rng.hpp"

namespace codol {

ContextMode parse_context_mode(std::string_view text) {
    if (text == "unified") return ContextMode::Unified;
    if (text == "class-specific") return ContextMode::ClassSpecific;
    throw ConfigError("unknown context mode '" + std::string(text) + "'");
}

const char* to_string(ContextMode mode) {
    return mode == ContextMode::Unified ? "unified" : "class-specific";
}

namespace {

void check_unique(const std::vector<std::string>& names, const char* what) {
    if (names.empty()) {
        throw ArgumentError(std::string("vocabulary needs at least one ") + what + " name");
    }
    std::set<std::string> seen;
    for (const auto& n : names) {
        if (!seen.insert(n).second) {
            throw ArgumentError(std::string("duplicate ") + what + " name '" + n + "'");
        }
    }
}

void check_index(Index value, Index bound, const char* what) {
    if (value < 0 || value >= bound) {
        throw IndexError(std::string(what) + " id " + std::to_string(value) + " out of range [0, " +
                         std::to_string(bound) + ")");
    }
}

}  // namespace

const Mat& ClassContext::for_class(Index y) const {
    if (vectors.empty()) {
        throw ArgumentError("class context is uninitialized");
    }
    if (mode == ContextMode::Unified) {
        return vectors.front();
    }
    check_index(y, static_cast<Index>(vectors.size()), "class");
    return vectors[static_cast<std::size_t>(y)];
}

NameVocabulary::NameVocabulary(const DualEncoder& backend, std::vector<std::string> classes,
                               std::vector<std::string> domains)
    : classes_(std::move(classes)), domains_(std::move(domains)) {
    check_unique(classes_, "class");
    check_unique(domains_, "domain");
    for (const auto& c : classes_) {
        class_embeddings_.push_back(backend.embed_name(c));
    }
    for (const auto& d : domains_) {
        domain_embeddings_.push_back(backend.embed_name(d));
    }
}

const Mat& NameVocabulary::class_embedding(Index y) const {
    check_index(y, num_classes(), "class");
    return class_embeddings_[static_cast<std::size_t>(y)];
}

const Mat& NameVocabulary::domain_embedding(Index j) const {
    check_index(j, num_domains(), "domain");
    return domain_embeddings_[static_cast<std::size_t>(j)];
}

const char* to_string(Segment segment) {
    switch (segment) {
        case Segment::Template: return "template";
        case Segment::ClassContext: return "class_context";
        case Segment::DomainContext: return "domain_context";
        case Segment::ClassName: return "class_name";
        case Segment::DomainName: return "domain_name";
    }
    return "unknown";
}

std::pair<Index, Index> PromptAssembly::segment(Segment which) const {
    Index first = -1;
    Index last = -1;
    for (std::size_t i = 0; i < tags.size(); ++i) {
        if (tags[i] == which) {
            if (first < 0) {
                first = static_cast<Index>(i);
            }
            last = static_cast<Index>(i) + 1;
        }
    }
    return first < 0 ? std::pair<Index, Index>{0, 0} : std::pair<Index, Index>{first, last};
}

std::pair<ClassContext, DomainContext> init_contexts(Index class_length, Index domain_length, Index embed_dim,
                                                     std::uint64_t seed, ContextMode mode, Index num_classes) {
    if (class_length < 0 || domain_length < 0) {
        throw ArgumentError("context lengths must be non-negative");
    }
    if (embed_dim < 1) {
        throw ArgumentError("embedding dimension must be positive");
    }
    if (mode == ContextMode::ClassSpecific && num_classes < 1) {
        throw ArgumentError("class-specific context needs at least one class");
    }
    Engine class_rng(derive_seed(seed, "context.class"));
    Engine domain_rng(derive_seed(seed, "context.domain"));
    ClassContext cls;
    cls.mode = mode;
    const Index copies = mode == ContextMode::Unified ? 1 : num_classes;
    for (Index i = 0; i < copies; ++i) {
        cls.vectors.push_back(gaussian_matrix(class_rng, class_length, embed_dim, kContextInitStd));
    }
    DomainContext dom{gaussian_matrix(domain_rng, domain_length, embed_dim, kContextInitStd)};
    return {std::move(cls), std::move(dom)};
}

namespace {

class Builder {
public:
    explicit Builder(Index width) : width_(width) {}

    void append(const Mat& rows, Segment tag) {
        if (rows.rows() == 0) {
            return;
        }
        if (rows.cols() != width_) {
            throw ShapeError(std::string(to_string(tag)) + " tokens have width " + std::to_string(rows.cols()) +
                             ", expected " + std::to_string(width_));
        }
        parts_.push_back(&rows);
        for (Index i = 0; i < rows.rows(); ++i) {
            tags_.push_back(tag);
        }
    }

    PromptAssembly finish(Index max_length) && {
        const auto length = static_cast<Index>(tags_.size());
        if (length > max_length) {
            throw LengthError("prompt length " + std::to_string(length) + " exceeds backend maximum " +
                              std::to_string(max_length));
        }
        PromptAssembly out;
        out.sequence.embeddings.resize(length, width_);
        Index row = 0;
        for (const Mat* part : parts_) {
            out.sequence.embeddings.middleRows(row, part->rows()) = *part;
            row += part->rows();
        }
        out.tags = std::move(tags_);
        return out;
    }

private:
    Index width_;
    std::vector<const Mat*> parts_;
    std::vector<Segment> tags_;
};

}  // namespace

PromptAssembly assemble_tokens(const Mat& class_tokens, const Mat& domain_tokens, const NameVocabulary& vocab,
                               Index y, std::optional<Index> j, Index max_length) {
    const Mat& class_name = vocab.class_embedding(y);
    Builder builder(class_name.cols());
    builder.append(class_tokens, Segment::ClassContext);
    builder.append(domain_tokens, Segment::DomainContext);
    builder.append(class_name, Segment::ClassName);
    if (j) {
        builder.append(vocab.domain_embedding(*j), Segment::DomainName);
    }
    return std::move(builder).finish(max_length);
}

PromptAssembly assemble_codol(const ClassContext& class_ctx, const Mat& conditioned_domain_tokens,
                              const NameVocabulary& vocab, Index y, Index j, Index max_length) {
    check_index(y, vocab.num_classes(), "class");
    check_index(j, vocab.num_domains(), "domain");
    return assemble_tokens(class_ctx.for_class(y), conditioned_domain_tokens, vocab, y, j, max_length);
}

PromptAssembly assemble_coop(const ClassContext& class_ctx, const NameVocabulary& vocab, Index y,
                             Index max_length) {
    check_index(y, vocab.num_classes(), "class");
    return assemble_tokens(class_ctx.for_class(y), Mat(0, 0), vocab, y, std::nullopt, max_length);
}

PromptAssembly assemble_zeroshot(const NameVocabulary& vocab, Index y, std::optional<Index> j,
                                 const DualEncoder& backend) {
    check_index(y, vocab.num_classes(), "class");
    if (j) {
        check_index(*j, vocab.num_domains(), "domain");
    }
    const Mat template_tokens = backend.embed_name(kZeroShotTemplate);
    Builder builder(template_tokens.cols());
    builder.append(template_tokens, Segment::Template);
    builder.append(vocab.class_embedding(y), Segment::ClassName);
    if (j) {
        builder.append(vocab.domain_embedding(*j), Segment::DomainName);
    }
    return std::move(builder).finish(backend.descriptor().max_length);
}

}  // namespace codol
