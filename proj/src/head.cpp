// Copyright 2026 The codol Authors
// SPDX-License-Identifier: Apache-2.0

#include "codol/head.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "codol/errors.hpp"

namespace codol {

PosteriorMode parse_posterior_mode(std::string_view text) {
    if (text == "joint" || text == "joint-softmax") {
        return PosteriorMode::Joint;
    }
    if (text == "per-domain" || text == "per-domain-softmax") {
        return PosteriorMode::PerDomain;
    }
    throw ConfigError("unknown posterior mode '" + std::string(text) + "'");
}

const char* to_string(PosteriorMode mode) {
    return mode == PosteriorMode::Joint ? "joint" : "per-domain";
}

double log_sum_exp(const Eigen::Ref<const Mat>& values) {
    if (values.size() == 0) {
        return -std::numeric_limits<double>::infinity();
    }
    const double top = values.maxCoeff();
    if (!std::isfinite(top)) {
        return top;
    }
    return top + std::log((values.array() - top).exp().sum());
}

Posterior posterior(const JointScores& scores) {
    if (!(scores.tau > 0.0)) {
        throw ArgumentError("temperature must be positive");
    }
    const Index classes = scores.s.rows();
    const Index domains = scores.s.cols();
    if (classes < 1 || domains < 1) {
        throw ShapeError("score grid must be non-empty");
    }
    const Mat logits = scores.s / scores.tau;
    Posterior out;
    if (scores.mode == PosteriorMode::Joint) {
        out.log_joint = logits.array() - log_sum_exp(logits);
    } else {
        out.log_joint.resize(classes, domains);
        const double log_k = std::log(static_cast<double>(domains));
        for (Index j = 0; j < domains; ++j) {
            out.log_joint.col(j) = logits.col(j).array() - log_sum_exp(logits.col(j)) - log_k;
        }
    }
    out.log_marginal.resize(classes);
    for (Index y = 0; y < classes; ++y) {
        out.log_marginal(y) = log_sum_exp(out.log_joint.row(y));
    }
    return out;
}

namespace {

void check_target(const Posterior& post, const Target& target) {
    if (target.label < 0 || target.label >= post.log_marginal.size()) {
        throw IndexError("target class " + std::to_string(target.label) + " out of range");
    }
    if (target.domain && (*target.domain < 0 || *target.domain >= post.log_joint.cols())) {
        throw IndexError("target domain " + std::to_string(*target.domain) + " out of range");
    }
}

}  // namespace

double sample_nll(const Posterior& post, const Target& target, bool supervise_domain) {
    check_target(post, target);
    if (supervise_domain && target.domain) {
        return -post.log_joint(target.label, *target.domain);
    }
    return -post.log_marginal(target.label);
}

Mat sample_nll_grad(const JointScores& scores, const Posterior& post, const Target& target,
                    bool supervise_domain) {
    check_target(post, target);
    const Index classes = scores.s.rows();
    const Index domains = scores.s.cols();
    const Index y = target.label;
    const bool supervised = supervise_domain && target.domain.has_value();
    const Mat joint = post.joint();
    Mat grad = Mat::Zero(classes, domains);

    if (scores.mode == PosteriorMode::Joint) {
        // -log p(y,k) or -log sum_j p(y,j); both are lse(all) minus a partial lse.
        grad = joint;
        if (supervised) {
            grad(y, *target.domain) -= 1.0;
        } else {
            for (Index j = 0; j < domains; ++j) {
                grad(y, j) -= std::exp(post.log_joint(y, j) - post.log_marginal(y));
            }
        }
    } else {
        // Column-wise softmax q_j; joint = q_j / K.
        const double k = static_cast<double>(domains);
        for (Index j = 0; j < domains; ++j) {
            if (supervised && j != *target.domain) {
                continue;
            }
            const double weight = supervised ? 1.0 : std::exp(post.log_joint(y, j) - post.log_marginal(y));
            for (Index a = 0; a < classes; ++a) {
                const double q = joint(a, j) * k;
                grad(a, j) = -weight * ((a == y ? 1.0 : 0.0) - q);
            }
        }
    }
    return grad / scores.tau;
}

double loss(std::span<const Posterior> batch, std::span<const Target> targets, bool supervise_domain) {
    if (batch.empty()) {
        throw ArgumentError("loss of an empty batch is undefined");
    }
    if (batch.size() != targets.size()) {
        throw ArgumentError("batch and target counts differ");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        total += sample_nll(batch[i], targets[i], supervise_domain);
    }
    return total / static_cast<double>(batch.size());
}

Index predict(const Posterior& post) {
    Index best = 0;
    for (Index y = 1; y < post.log_marginal.size(); ++y) {
        if (post.log_marginal(y) > post.log_marginal(best)) {
            best = y;
        }
    }
    return best;
}

}  // namespace codol
