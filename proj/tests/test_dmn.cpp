// Copyright 2026 The codol Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "codol/errors.hpp"
#include "codol/meta_net.hpp"
#include "codol/model.hpp"
#include "codol/rng.hpp"
#include "codol/toy_backend.hpp"
#include "oracle.hpp"

using namespace codol;

TEST_CASE("bottleneck width is D/16 floored at one") {
    CHECK(bottleneck_width(4) == 1);
    CHECK(bottleneck_width(16) == 1);
    CHECK(bottleneck_width(33) == 2);
    CHECK(bottleneck_width(512) == 32);
}

TEST_CASE("zero network yields a zero bias") {
    const MetaNet net = MetaNet::zeros(8, 6);
    CHECK(net.forward(Vec::LinSpaced(8, -1.0, 1.0)).isZero(0.0));
}

TEST_CASE("dead ReLU passes the second-layer bias through") {
    MetaNet net = MetaNet::random(32, 4, 1);
    net.b1.setConstant(-100.0);
    net.b2 << 0.3, -0.2, 0.1, 0.7;
    CHECK(net.forward(Vec::Constant(32, 0.1)) == net.b2);
}

TEST_CASE("hand-set four-dimensional network") {
    MetaNet net = MetaNet::zeros(4, 2);
    REQUIRE(net.hidden_dim() == 1);
    net.w1 << 0.5, -1.0, 0.25, 1.0;
    net.b1 << 0.1;
    net.w2 << 2.0, -0.5;
    net.b2 << 0.1, 0.2;
    Vec z(4);
    z << 1.0, 0.0, -1.0, 2.0;
    // hidden = 0.5 - 0.25 + 2 + 0.1 = 2.35; out = (2 * 2.35 + 0.1, -0.5 * 2.35 + 0.2)
    const Vec out = net.forward(z);
    CHECK(out(0) == doctest::Approx(4.8).epsilon(1e-15));
    CHECK(out(1) == doctest::Approx(-0.975).epsilon(1e-15));
    const auto ref = oracle::mlp_forward(oracle::copy_mlp(net), oracle::to_vector(z));
    CHECK(out(0) == doctest::Approx(ref[0]));
    CHECK(out(1) == doctest::Approx(ref[1]));
}

TEST_CASE("meta-net input length is checked") {
    const MetaNet net = MetaNet::random(8, 8, 0);
    CHECK_THROWS_AS(net.forward(Vec::Zero(7)), ShapeError);
}

TEST_CASE("initialization uses small weights and zero biases") {
    const MetaNet net = MetaNet::random(512, 512, 3);
    CHECK(net.b1.isZero(0.0));
    CHECK(net.b2.isZero(0.0));
    const double std1 = std::sqrt(net.w1.array().square().mean());
    CHECK(std1 == doctest::Approx(kMetaNetInitStd).epsilon(0.05));
    CHECK(net.parameter_count() == 512 * 32 + 32 + 32 * 512 + 512);
}

TEST_CASE("conditioning adds the same bias to every token") {
    Mat ctx(2, 2);
    ctx << 1, 1, 2, 2;
    Vec bias(2);
    bias << 0.5, -0.5;
    Mat expected(2, 2);
    expected << 1.5, 0.5, 2.5, 1.5;
    CHECK(condition_domain_tokens(ctx, bias) == expected);
    CHECK(condition_class_tokens(ctx, Vec::Zero(2)) == ctx);
    CHECK_THROWS_AS(condition_tokens(ctx, Vec::Zero(3)), ShapeError);
}

TEST_CASE("bias gradient equals the sum of conditioned-row gradients") {
    const auto backend = make_toy_backend(1, 8, 8, 2);
    Engine rng(4);
    const Mat ctx = gaussian_matrix(rng, 3, 8, 0.5);
    const Mat name = backend->embed_name("photo");
    const Vec probe = gaussian_vector(rng, 8, 1.0);
    Vec bias = gaussian_vector(rng, 8, 0.1);
    auto tokens = [&](const Vec& b) {
        Mat seq(4, 8);
        seq.topRows(3) = condition_tokens(ctx, b);
        seq.row(3) = name.row(0);
        return TokenSequence{seq};
    };
    const Mat row_grad = backend->encode_text_backward(tokens(bias), probe);
    const Vec analytic = row_grad.topRows(3).colwise().sum().transpose();
    Vec numeric(8);
    for (Index b = 0; b < 8; ++b) {
        Vec plus = bias, minus = bias;
        plus(b) += 1e-5;
        minus(b) -= 1e-5;
        numeric(b) = (probe.dot(backend->encode_text(tokens(plus))) - probe.dot(backend->encode_text(tokens(minus)))) /
                     2e-5;
    }
    CHECK((analytic - numeric).norm() / numeric.norm() <= 1e-3);
}

TEST_CASE("meta-net backward matches central differences on all blocks") {
    MetaNet net = MetaNet::random(32, 6, 9);
    net.b1.setConstant(0.05);
    Engine rng(2);
    const Vec z = gaussian_vector(rng, 32, 1.0).cwiseAbs();
    const Vec probe = gaussian_vector(rng, 6, 1.0);
    MetaNet grad = MetaNet::zeros(32, 6);
    net.backward(z, probe, grad);
    std::vector<TensorView> analytic;
    grad.for_each_tensor([&](const std::string&, TensorView t) { analytic.push_back(t); });
    std::size_t block = 0;
    net.for_each_tensor([&](const std::string& name, TensorView t) {
        const TensorView a = analytic[block++];
        double diff = 0.0, scale = 0.0;
        for (Index i = 0; i < t.size(); ++i) {
            const double keep = t.data[i];
            t.data[i] = keep + 1e-5;
            const double up = probe.dot(net.forward(z));
            t.data[i] = keep - 1e-5;
            const double down = probe.dot(net.forward(z));
            t.data[i] = keep;
            const double n = (up - down) / 2e-5;
            diff += (n - a.data[i]) * (n - a.data[i]);
            scale = std::max(scale, std::max(n * n, a.data[i] * a.data[i]));
        }
        INFO(name);
        CHECK(std::sqrt(diff) <= 1e-3 * std::max(std::sqrt(scale), 1e-12));
    });
}

TEST_CASE("zero meta-net makes CoDoL identical to CoDoL without DMN") {
    const auto backend = make_toy_backend(2, 8, 8, 2);
    const NameVocabulary vocab(*backend, {"dog", "horse", "house"}, {"cartoon", "photo"});
    ModelInit init;
    init.class_length = 4;
    init.domain_length = 4;
    init.zero_meta_nets = true;
    const PromptModel with_dmn = init_model(init, backend->descriptor(), 3);
    init.variant = Variant::CoDoLNoDmn;
    const PromptModel without = init_model(init, backend->descriptor(), 3);
    REQUIRE(with_dmn.dmn);
    CHECK(with_dmn.class_ctx.vectors == without.class_ctx.vectors);
    Engine rng(8);
    for (int i = 0; i < 10; ++i) {
        const Vec z = gaussian_vector(rng, 8, 1.0).normalized();
        const Mat a = score_grid(*backend, with_dmn, vocab, z, 1.0, PosteriorMode::Joint).s;
        const Mat b = score_grid(*backend, without, vocab, z, 1.0, PosteriorMode::Joint).s;
        CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-7);
    }
}

TEST_CASE("class meta-net broadcasts one bias to every class in unified mode") {
    const auto backend = make_toy_backend(0, 8, 8, 2);
    const NameVocabulary vocab(*backend, {"dog", "horse"}, {"photo"});
    ModelInit init;
    init.variant = Variant::CoCoOp;
    init.class_length = 3;
    PromptModel model = init_model(init, backend->descriptor(), 2);
    REQUIRE(model.cmn);
    model.cmn->b2.setConstant(0.25);
    const Vec z = Vec::Ones(8).normalized();
    const auto prompts = build_prompts(*backend, model, vocab, z);
    REQUIRE(prompts.size() == 2);
    const Vec bias = model.cmn->forward(z);
    for (const auto& p : prompts) {
        const Mat expected = condition_class_tokens(model.class_ctx.vectors[0], bias);
        CHECK(p.sequence.embeddings.topRows(3) == expected);
    }
}
