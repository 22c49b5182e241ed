// Copyright 2026 The codol Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "codol/types.hpp"

namespace codol {

inline constexpr Index kBottleneckRatio = 16;
inline constexpr double kMetaNetInitStd = 0.02;

// Hidden width of the bottleneck: floor(D / 16), at least 1.
Index bottleneck_width(Index feature_dim);

// Linear-ReLU-Linear bottleneck mapping an image feature (D) to one token
// bias (B). Weights are stored out x in.
struct MetaNet {
    Mat w1;  // H x D
    Vec b1;  // H
    Mat w2;  // B x H
    Vec b2;  // B

    static MetaNet random(Index feature_dim, Index embed_dim, std::uint64_t seed);
    static MetaNet zeros(Index feature_dim, Index embed_dim);

    Index feature_dim() const { return w1.cols(); }
    Index hidden_dim() const { return w1.rows(); }
    Index embed_dim() const { return w2.rows(); }
    Index parameter_count() const { return w1.size() + b1.size() + w2.size() + b2.size(); }

    Vec forward(const Vec& feature) const;
    // Accumulates dL/dparams into `grad` given dL/d(output).
    void backward(const Vec& feature, const Vec& grad_output, MetaNet& grad) const;

    void for_each_tensor(const std::function<void(const std::string&, TensorView)>& fn);
};

using DomainMetaNet = MetaNet;
using ClassMetaNet = MetaNet;

// Adds the same bias row to every context token.
Mat condition_tokens(const Mat& context, const Vec& bias);

inline Mat condition_domain_tokens(const Mat& domain_context, const Vec& bias) {
    return condition_tokens(domain_context, bias);
}
inline Mat condition_class_tokens(const Mat& class_context, const Vec& bias) {
    return condition_tokens(class_context, bias);
}

}  // namespace codol
