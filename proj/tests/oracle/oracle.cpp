// Copyright 2026 The codol Authors
// SPDX-License-Identifier: Apache-2.0

#include "oracle.hpp"

#include <cmath>
#include <string>

namespace oracle {

Matrix to_rows(const codol::Mat& m) {
    Matrix out(static_cast<std::size_t>(m.rows()), Vector(static_cast<std::size_t>(m.cols())));
    for (codol::Index r = 0; r < m.rows(); ++r) {
        for (codol::Index c = 0; c < m.cols(); ++c) {
            out[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = m(r, c);
        }
    }
    return out;
}

Vector to_vector(const codol::Vec& v) {
    return Vector(v.data(), v.data() + v.size());
}

Toy copy_toy(const codol::ToyBackend& backend) {
    Toy toy;
    for (const auto& layer : backend.image_layers()) toy.image.push_back({to_rows(layer.weight), to_vector(layer.bias)});
    for (const auto& layer : backend.text_layers()) toy.text.push_back({to_rows(layer.weight), to_vector(layer.bias)});
    toy.normalize = backend.options().normalize;
    return toy;
}

Mlp copy_mlp(const codol::MetaNet& net) {
    return {to_rows(net.w1), to_vector(net.b1), to_rows(net.w2), to_vector(net.b2)};
}

double pool_weight(int position, int channel, int dim) {
    return 1.0 + 0.5 * std::sin((position + 1.0) * std::pow(10000.0, -double(channel) / double(dim)));
}

namespace {

Vector affine(const Affine& layer, const Vector& x) {
    Vector y(layer.b);
    for (std::size_t r = 0; r < layer.w.size(); ++r) {
        for (std::size_t c = 0; c < x.size(); ++c) {
            y[r] += layer.w[r][c] * x[c];
        }
    }
    return y;
}

Vector tanh_all(Vector v) {
    for (double& e : v) e = std::tanh(e);
    return v;
}

}  // namespace

Vector unit(const Vector& v) {
    double sq = 0.0;
    for (double e : v) sq += e * e;
    Vector out(v);
    if (sq > 0.0) {
        for (double& e : out) e /= std::sqrt(sq);
    }
    return out;
}

Vector image_forward(const Toy& toy, const Vector& input) {
    Vector h = input;
    for (const auto& layer : toy.image) h = tanh_all(affine(layer, h));
    return toy.normalize ? unit(h) : h;
}

Vector text_forward(const Toy& toy, const Matrix& tokens) {
    const int length = static_cast<int>(tokens.size());
    const int dim = static_cast<int>(tokens.front().size());
    Vector pooled(static_cast<std::size_t>(dim), 0.0);
    for (int b = 0; b < dim; ++b) {
        double sum = 0.0;
        for (int l = 0; l < length; ++l) sum += pool_weight(l, b, dim) * tokens[l][b];
        pooled[b] = sum / length;
    }
    Vector h = pooled;
    for (std::size_t i = 0; i < toy.text.size(); ++i) {
        h = affine(toy.text[i], h);
        if (i + 1 < toy.text.size()) h = tanh_all(h);
    }
    return toy.normalize ? unit(h) : h;
}

Vector mlp_forward(const Mlp& net, const Vector& x) {
    Vector hidden = affine({net.w1, net.b1}, x);
    for (double& e : hidden) e = e > 0.0 ? e : 0.0;
    return affine({net.w2, net.b2}, hidden);
}

double cosine(const Vector& a, const Vector& b) {
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    return ab / std::sqrt(aa * bb);
}

Matrix codol_prompt(const Matrix& class_ctx, const Matrix& domain_ctx, const Vector& domain_bias,
                    const Matrix& class_name, const Matrix& domain_name) {
    Matrix rows;
    for (const auto& r : class_ctx) rows.push_back(r);
    for (const auto& r : domain_ctx) {
        Vector biased(r);
        for (std::size_t b = 0; b < biased.size(); ++b) biased[b] += domain_bias.empty() ? 0.0 : domain_bias[b];
        rows.push_back(biased);
    }
    for (const auto& r : class_name) rows.push_back(r);
    for (const auto& r : domain_name) rows.push_back(r);
    return rows;
}

Matrix codol_scores(const Toy& toy, const Matrix& class_ctx, const Matrix& domain_ctx, const std::optional<Mlp>& dmn,
                    const std::vector<Matrix>& class_names, const std::vector<Matrix>& domain_names,
                    const Vector& image) {
    const Vector bias = dmn ? mlp_forward(*dmn, image) : Vector{};
    Matrix s(class_names.size(), Vector(domain_names.size()));
    for (std::size_t y = 0; y < class_names.size(); ++y) {
        for (std::size_t j = 0; j < domain_names.size(); ++j) {
            const Matrix prompt = codol_prompt(class_ctx, domain_ctx, bias, class_names[y], domain_names[j]);
            s[y][j] = cosine(image, text_forward(toy, prompt));
        }
    }
    return s;
}

Posterior posterior(const Matrix& s, double tau, bool per_domain) {
    const std::size_t classes = s.size();
    const std::size_t domains = s.front().size();
    Posterior p;
    p.joint.assign(classes, Vector(domains, 0.0));
    if (!per_domain) {
        double z = 0.0;
        for (std::size_t y = 0; y < classes; ++y)
            for (std::size_t j = 0; j < domains; ++j) z += std::exp(s[y][j] / tau);
        for (std::size_t y = 0; y < classes; ++y)
            for (std::size_t j = 0; j < domains; ++j) p.joint[y][j] = std::exp(s[y][j] / tau) / z;
    } else {
        for (std::size_t j = 0; j < domains; ++j) {
            double z = 0.0;
            for (std::size_t y = 0; y < classes; ++y) z += std::exp(s[y][j] / tau);
            for (std::size_t y = 0; y < classes; ++y) p.joint[y][j] = std::exp(s[y][j] / tau) / z / double(domains);
        }
    }
    p.marginal.assign(classes, 0.0);
    for (std::size_t y = 0; y < classes; ++y)
        for (std::size_t j = 0; j < domains; ++j) p.marginal[y] += p.joint[y][j];
    return p;
}

double nll(const Matrix& s, double tau, bool per_domain, int label, int domain, bool supervise) {
    const Posterior p = posterior(s, tau, per_domain);
    if (supervise && domain >= 0) return -std::log(p.joint[label][domain]);
    return -std::log(p.marginal[label]);
}

int predict(const Matrix& s, double tau, bool per_domain) {
    const Posterior p = posterior(s, tau, per_domain);
    int best = 0;
    for (std::size_t y = 1; y < p.marginal.size(); ++y) {
        if (p.marginal[y] > p.marginal[best]) best = static_cast<int>(y);
    }
    return best;
}

}  // namespace oracle
