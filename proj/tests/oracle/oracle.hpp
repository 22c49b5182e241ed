// Copyright 2026 The codol Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Scalar re-implementation of the forward math, written with plain loops and
// no shared code paths. Only parameter values are read from the library.

#include <optional>
#include <vector>

#include "codol/meta_net.hpp"
#include "codol/toy_backend.hpp"

namespace oracle {

using Vector = std::vector<double>;
using Matrix = std::vector<Vector>;  // list of rows

struct Affine {
    Matrix w;  // out x in
    Vector b;
};

struct Toy {
    std::vector<Affine> image;
    std::vector<Affine> text;
    bool normalize = true;
};

struct Mlp {
    Matrix w1;
    Vector b1;
    Matrix w2;
    Vector b2;
};

Matrix to_rows(const codol::Mat& m);
Vector to_vector(const codol::Vec& v);
Toy copy_toy(const codol::ToyBackend& backend);
Mlp copy_mlp(const codol::MetaNet& net);

double pool_weight(int position, int channel, int dim);

Vector image_forward(const Toy& toy, const Vector& input);
Vector text_forward(const Toy& toy, const Matrix& tokens);
Vector mlp_forward(const Mlp& net, const Vector& x);
double cosine(const Vector& a, const Vector& b);
Vector unit(const Vector& v);

// Prompt rows for (class y, domain j) of a CoDoL-family model: class
// context, domain context plus bias, class name, domain name.
Matrix codol_prompt(const Matrix& class_ctx, const Matrix& domain_ctx, const Vector& domain_bias,
                    const Matrix& class_name, const Matrix& domain_name);

// s[y][j] for CoDoL with an optional DMN; `image` is the normalized feature.
Matrix codol_scores(const Toy& toy, const Matrix& class_ctx, const Matrix& domain_ctx,
                    const std::optional<Mlp>& dmn, const std::vector<Matrix>& class_names,
                    const std::vector<Matrix>& domain_names, const Vector& image);

struct Posterior {
    Matrix joint;
    Vector marginal;
};

Posterior posterior(const Matrix& s, double tau, bool per_domain);
// domain < 0 means unlabeled.
double nll(const Matrix& s, double tau, bool per_domain, int label, int domain, bool supervise);
int predict(const Matrix& s, double tau, bool per_domain);

}  // namespace oracle
