// Copyright 2026 The codol Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "codol/types.hpp"

namespace codol {

enum class PosteriorMode {
    // Softmax over the whole |Y| x K grid.
    Joint,
    // Softmax over classes within each domain column, averaged over columns.
    PerDomain,
};

PosteriorMode parse_posterior_mode(std::string_view text);
const char* to_string(PosteriorMode mode);

// Cosine similarities between one image and every (class, domain) prompt.
struct JointScores {
    Mat s;  // |Y| x K
    double tau = 1.0;
    PosteriorMode mode = PosteriorMode::Joint;
};

struct Posterior {
    Mat log_joint;     // |Y| x K
    Vec log_marginal;  // |Y|

    Mat joint() const { return log_joint.array().exp().matrix(); }
    Vec marginal() const { return log_marginal.array().exp().matrix(); }
};

struct Target {
    Index label = 0;
    // Index into the posterior's domain columns, when known.
    std::optional<Index> domain;
};

double log_sum_exp(const Eigen::Ref<const Mat>& values);

Posterior posterior(const JointScores& scores);

// Negative log-likelihood of one sample. Uses -log joint[y][k] when
// supervise_domain is set and the target carries a domain, otherwise
// -log marginal[y].
double sample_nll(const Posterior& post, const Target& target, bool supervise_domain);

// d(sample_nll)/d(scores.s), same shape as scores.s.
Mat sample_nll_grad(const JointScores& scores, const Posterior& post, const Target& target, bool supervise_domain);

// Mean NLL over a batch.
double loss(std::span<const Posterior> batch, std::span<const Target> targets, bool supervise_domain);

// argmax of the marginal; ties go to the lowest class id.
Index predict(const Posterior& post);

}  // namespace codol
