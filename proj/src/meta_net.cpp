// Copyright 2026 The codol Authors
// SPDX-License-Identifier: Apache-2.0

#include "codol/meta_net.hpp"

#include <algorithm>

#include "codol/errors.hpp"
#include "codol/rng.hpp"

namespace codol {

Index bottleneck_width(Index feature_dim) {
    return std::max<Index>(1, feature_dim / kBottleneckRatio);
}

MetaNet MetaNet::random(Index feature_dim, Index embed_dim, std::uint64_t seed) {
    if (feature_dim < 1 || embed_dim < 1) {
        throw ArgumentError("meta-net dimensions must be positive");
    }
    Engine rng(seed);
    const Index hidden = bottleneck_width(feature_dim);
    MetaNet net;
    net.w1 = gaussian_matrix(rng, hidden, feature_dim, kMetaNetInitStd);
    net.b1 = Vec::Zero(hidden);
    net.w2 = gaussian_matrix(rng, embed_dim, hidden, kMetaNetInitStd);
    net.b2 = Vec::Zero(embed_dim);
    return net;
}

MetaNet MetaNet::zeros(Index feature_dim, Index embed_dim) {
    if (feature_dim < 1 || embed_dim < 1) {
        throw ArgumentError("meta-net dimensions must be positive");
    }
    const Index hidden = bottleneck_width(feature_dim);
    return MetaNet{Mat::Zero(hidden, feature_dim), Vec::Zero(hidden), Mat::Zero(embed_dim, hidden),
                   Vec::Zero(embed_dim)};
}

Vec MetaNet::forward(const Vec& feature) const {
    if (feature.size() != feature_dim()) {
        throw ShapeError("meta-net expects a feature of length " + std::to_string(feature_dim()) + ", got " +
                         std::to_string(feature.size()));
    }
    const Vec hidden = (w1 * feature + b1).cwiseMax(0.0);
    return w2 * hidden + b2;
}

void MetaNet::backward(const Vec& feature, const Vec& grad_output, MetaNet& grad) const {
    if (feature.size() != feature_dim() || grad_output.size() != embed_dim()) {
        throw ShapeError("meta-net backward shape mismatch");
    }
    const Vec pre = w1 * feature + b1;
    const Vec hidden = pre.cwiseMax(0.0);
    grad.w2.noalias() += grad_output * hidden.transpose();
    grad.b2 += grad_output;
    Vec grad_hidden = w2.transpose() * grad_output;
    for (Index i = 0; i < grad_hidden.size(); ++i) {
        if (pre(i) <= 0.0) {
            grad_hidden(i) = 0.0;
        }
    }
    grad.w1.noalias() += grad_hidden * feature.transpose();
    grad.b1 += grad_hidden;
}

void MetaNet::for_each_tensor(const std::function<void(const std::string&, TensorView)>& fn) {
    fn("w1", {w1.data(), w1.rows(), w1.cols()});
    fn("b1", {b1.data(), b1.rows(), 1});
    fn("w2", {w2.data(), w2.rows(), w2.cols()});
    fn("b2", {b2.data(), b2.rows(), 1});
}

Mat condition_tokens(const Mat& context, const Vec& bias) {
    if (context.rows() == 0) {
        return context;
    }
    if (context.cols() != bias.size()) {
        throw ShapeError("bias length " + std::to_string(bias.size()) + " does not match token width " +
                         std::to_string(context.cols()));
    }
    Mat out = context;
    out.rowwise() += bias.transpose();
    return out;
}

}  // namespace codol
