// Copyright 2026 The codol Authors
// SPDX-License-Identifier: Apache-2.0

#include "codol/model.hpp"

#include <string>

#include "codol/errors.hpp"
#include "codol/rng.hpp"

namespace codol {

Variant parse_variant(std::string_view text) {
    if (text == "codol") return Variant::CoDoL;
    if (text == "codol-no-dmn") return Variant::CoDoLNoDmn;
    if (text == "codol-cmn") return Variant::CoDoLCmn;
    if (text == "coop") return Variant::CoOp;
    if (text == "cocoop") return Variant::CoCoOp;
    if (text == "zeroshot") return Variant::ZeroShot;
    if (text == "zeroshot-domain") return Variant::ZeroShotDomain;
    throw ConfigError("unknown variant '" + std::string(text) + "'");
}

const char* to_string(Variant variant) {
    switch (variant) {
        case Variant::CoDoL: return "codol";
        case Variant::CoDoLNoDmn: return "codol-no-dmn";
        case Variant::CoDoLCmn: return "codol-cmn";
        case Variant::CoOp: return "coop";
        case Variant::CoCoOp: return "cocoop";
        case Variant::ZeroShot: return "zeroshot";
        case Variant::ZeroShotDomain: return "zeroshot-domain";
    }
    return "unknown";
}

bool is_trainable(Variant variant) {
    return variant != Variant::ZeroShot && variant != Variant::ZeroShotDomain;
}

bool uses_domains(Variant variant) {
    switch (variant) {
        case Variant::CoDoL:
        case Variant::CoDoLNoDmn:
        case Variant::CoDoLCmn:
        case Variant::ZeroShotDomain:
            return true;
        default:
            return false;
    }
}

void PromptModel::for_each_tensor(const std::function<void(const std::string&, TensorView)>& fn) {
    for (std::size_t i = 0; i < class_ctx.vectors.size(); ++i) {
        Mat& m = class_ctx.vectors[i];
        fn("class_ctx." + std::to_string(i), {m.data(), m.rows(), m.cols()});
    }
    if (domain_ctx.vectors.size() > 0) {
        Mat& m = domain_ctx.vectors;
        fn("domain_ctx", {m.data(), m.rows(), m.cols()});
    }
    if (dmn) {
        dmn->for_each_tensor([&](const std::string& name, TensorView view) { fn("dmn." + name, view); });
    }
    if (cmn) {
        cmn->for_each_tensor([&](const std::string& name, TensorView view) { fn("cmn." + name, view); });
    }
}

PromptModel PromptModel::zeros_like() const {
    PromptModel out = *this;
    out.for_each_tensor([](const std::string&, TensorView v) { std::fill(v.data, v.data + v.size(), 0.0); });
    return out;
}

Index PromptModel::parameter_count() const {
    Index total = 0;
    const_cast<PromptModel*>(this)->for_each_tensor([&](const std::string&, TensorView v) { total += v.size(); });
    return total;
}

PromptModel init_model(const ModelInit& init, const BackendDescriptor& backend, Index num_classes) {
    PromptModel model;
    model.variant = init.variant;
    if (!is_trainable(init.variant)) {
        return model;
    }
    const Index domain_length = uses_domains(init.variant) ? init.domain_length : 0;
    auto [cls, dom] = init_contexts(init.class_length, domain_length, backend.embed_dim, init.seed, init.mode,
                                    num_classes);
    model.class_ctx = std::move(cls);
    model.domain_ctx = std::move(dom);
    auto make_net = [&](const char* label) {
        return init.zero_meta_nets ? MetaNet::zeros(backend.feature_dim, backend.embed_dim)
                                   : MetaNet::random(backend.feature_dim, backend.embed_dim,
                                                     derive_seed(init.seed, label));
    };
    if (init.variant == Variant::CoDoL || init.variant == Variant::CoDoLCmn) {
        model.dmn = make_net("meta.domain");
    }
    if (init.variant == Variant::CoDoLCmn || init.variant == Variant::CoCoOp) {
        model.cmn = make_net("meta.class");
    }
    return model;
}

double cosine(const Vec& a, const Vec& b) {
    const double denom = a.norm() * b.norm();
    return denom == 0.0 ? 0.0 : a.dot(b) / denom;
}

namespace {

Index grid_columns(const PromptModel& model, const NameVocabulary& vocab) {
    return uses_domains(model.variant) ? vocab.num_domains() : 1;
}

}  // namespace

std::vector<PromptAssembly> build_prompts(const DualEncoder& backend, const PromptModel& model,
                                          const NameVocabulary& vocab, const Vec& image_feature) {
    const Index classes = vocab.num_classes();
    const Index columns = grid_columns(model, vocab);
    const Index max_length = backend.descriptor().max_length;
    std::vector<PromptAssembly> prompts;
    prompts.reserve(static_cast<std::size_t>(classes * columns));

    if (!is_trainable(model.variant)) {
        const bool with_domain = model.variant == Variant::ZeroShotDomain;
        for (Index y = 0; y < classes; ++y) {
            for (Index j = 0; j < columns; ++j) {
                prompts.push_back(assemble_zeroshot(vocab, y, with_domain ? std::optional<Index>(j) : std::nullopt,
                                                    backend));
            }
        }
        return prompts;
    }

    const Mat domain_tokens = model.dmn ? condition_domain_tokens(model.domain_ctx.vectors,
                                                                  model.dmn->forward(image_feature))
                                        : model.domain_ctx.vectors;
    std::optional<Vec> class_bias;
    if (model.cmn) {
        class_bias = model.cmn->forward(image_feature);
    }
    for (Index y = 0; y < classes; ++y) {
        const Mat& base = model.class_ctx.for_class(y);
        const Mat class_tokens = class_bias ? condition_class_tokens(base, *class_bias) : base;
        for (Index j = 0; j < columns; ++j) {
            if (uses_domains(model.variant)) {
                prompts.push_back(assemble_tokens(class_tokens, domain_tokens, vocab, y, j, max_length));
            } else {
                prompts.push_back(assemble_tokens(class_tokens, Mat(0, 0), vocab, y, std::nullopt, max_length));
            }
        }
    }
    return prompts;
}

GridForward forward_grid(const DualEncoder& backend, const PromptModel& model, const NameVocabulary& vocab,
                         const Vec& image_feature, double tau, PosteriorMode mode) {
    GridForward fwd;
    fwd.image_feature = image_feature;
    fwd.prompts = build_prompts(backend, model, vocab, image_feature);
    const Index classes = vocab.num_classes();
    const Index columns = grid_columns(model, vocab);
    fwd.scores.s.resize(classes, columns);
    fwd.scores.tau = tau;
    fwd.scores.mode = mode;
    fwd.text_features.reserve(fwd.prompts.size());
    for (Index y = 0; y < classes; ++y) {
        for (Index j = 0; j < columns; ++j) {
            const auto& prompt = fwd.prompts[static_cast<std::size_t>(y * columns + j)];
            fwd.text_features.push_back(backend.encode_text(prompt.sequence));
            fwd.scores.s(y, j) = cosine(fwd.text_features.back(), image_feature);
        }
    }
    return fwd;
}

JointScores score_grid(const DualEncoder& backend, const PromptModel& model, const NameVocabulary& vocab,
                       const Vec& image_feature, double tau, PosteriorMode mode) {
    return forward_grid(backend, model, vocab, image_feature, tau, mode).scores;
}

void backward_grid(const DualEncoder& backend, const PromptModel& model, const GridForward& fwd,
                   const Mat& grad_scores, PromptModel& grad) {
    if (!is_trainable(model.variant)) {
        return;
    }
    const Index classes = fwd.scores.s.rows();
    const Index columns = fwd.scores.s.cols();
    const Vec& z = fwd.image_feature;
    const double z_norm = z.norm();
    const Index embed_dim = backend.descriptor().embed_dim;
    Vec domain_bias_grad = Vec::Zero(embed_dim);
    Vec class_bias_grad = Vec::Zero(embed_dim);

    for (Index y = 0; y < classes; ++y) {
        Mat& class_slot = grad.class_ctx.vectors[model.class_ctx.mode == ContextMode::Unified
                                                     ? 0
                                                     : static_cast<std::size_t>(y)];
        for (Index j = 0; j < columns; ++j) {
            const double g = grad_scores(y, j);
            if (g == 0.0) {
                continue;
            }
            const auto cell = static_cast<std::size_t>(y * columns + j);
            const Vec& t = fwd.text_features[cell];
            const double t_norm = t.norm();
            if (t_norm == 0.0 || z_norm == 0.0) {
                continue;
            }
            // d cos(t, z) / dt = z / (|t||z|) - cos * t / |t|^2
            const Vec grad_t = g * (z / (t_norm * z_norm) - fwd.scores.s(y, j) * t / (t_norm * t_norm));
            const PromptAssembly& prompt = fwd.prompts[cell];
            const Mat grad_tokens = backend.encode_text_backward(prompt.sequence, grad_t);

            const auto [c0, c1] = prompt.segment(Segment::ClassContext);
            if (c1 > c0) {
                const auto rows = grad_tokens.middleRows(c0, c1 - c0);
                class_slot += rows;
                if (model.cmn) {
                    class_bias_grad += rows.colwise().sum().transpose();
                }
            }
            const auto [d0, d1] = prompt.segment(Segment::DomainContext);
            if (d1 > d0) {
                const auto rows = grad_tokens.middleRows(d0, d1 - d0);
                grad.domain_ctx.vectors += rows;
                if (model.dmn) {
                    domain_bias_grad += rows.colwise().sum().transpose();
                }
            }
        }
    }
    if (model.dmn) {
        model.dmn->backward(z, domain_bias_grad, *grad.dmn);
    }
    if (model.cmn) {
        model.cmn->backward(z, class_bias_grad, *grad.cmn);
    }
}

Posterior zero_shot_posterior(const DualEncoder& backend, const NameVocabulary& vocab, const Vec& image_feature,
                              bool with_domain, double tau, PosteriorMode mode) {
    PromptModel model;
    model.variant = with_domain ? Variant::ZeroShotDomain : Variant::ZeroShot;
    return posterior(score_grid(backend, model, vocab, image_feature, tau, mode));
}

GridScorer::GridScorer(const DualEncoder& backend, const PromptModel& model, const NameVocabulary& vocab,
                       double tau, PosteriorMode mode)
    : backend_(backend), model_(model), vocab_(vocab), tau_(tau), mode_(mode) {}

const std::vector<Vec>& GridScorer::text_features(const Vec& image_feature) {
    if (cache_) {
        return *cache_;
    }
    scratch_.clear();
    for (const auto& prompt : build_prompts(backend_, model_, vocab_, image_feature)) {
        scratch_.push_back(backend_.encode_text(prompt.sequence));
    }
    if (!model_.input_dependent()) {
        cache_ = std::move(scratch_);
        scratch_.clear();
        return *cache_;
    }
    return scratch_;
}

JointScores GridScorer::operator()(const Vec& image_feature) {
    const auto& features = text_features(image_feature);
    const Index classes = vocab_.num_classes();
    const Index columns = static_cast<Index>(features.size()) / classes;
    JointScores scores;
    scores.s.resize(classes, columns);
    scores.tau = tau_;
    scores.mode = mode_;
    for (Index y = 0; y < classes; ++y) {
        for (Index j = 0; j < columns; ++j) {
            scores.s(y, j) = cosine(features[static_cast<std::size_t>(y * columns + j)], image_feature);
        }
    }
    return scores;
}

}  // namespace codol
