// Copyright 2026 The codol Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "codol/errors.hpp"
#include "codol/prompt.hpp"
#include "codol/toy_backend.hpp"
#include "oracle.hpp"

using namespace codol;

namespace {

const std::vector<std::string> kClasses = {"dog", "elephant", "giraffe"};
const std::vector<std::string> kDomains = {"art_painting", "cartoon", "photo"};

}  // namespace

TEST_CASE("contexts are initialized with the documented spread") {
    auto [cls, dom] = init_contexts(64, 64, 32, 3);
    CHECK(cls.mode == ContextMode::Unified);
    REQUIRE(cls.vectors.size() == 1);
    CHECK(cls.vectors[0].rows() == 64);
    CHECK(cls.vectors[0].cols() == 32);
    CHECK(dom.vectors.rows() == 64);
    const double mean = cls.vectors[0].mean();
    const double var = (cls.vectors[0].array() - mean).square().mean();
    CHECK(std::abs(mean) < 0.003);
    CHECK(std::sqrt(var) == doctest::Approx(kContextInitStd).epsilon(0.05));

    auto [again, dom_again] = init_contexts(64, 64, 32, 3);
    CHECK(again.vectors[0] == cls.vectors[0]);
    CHECK(dom_again.vectors == dom.vectors);
    auto [other, other_dom] = init_contexts(64, 64, 32, 4);
    CHECK(other.vectors[0] != cls.vectors[0]);
}

TEST_CASE("class-specific contexts hold one matrix per class") {
    auto [cls, dom] = init_contexts(4, 2, 8, 0, ContextMode::ClassSpecific, 3);
    REQUIRE(cls.vectors.size() == 3);
    CHECK(cls.for_class(0) != cls.for_class(1));
    CHECK(dom.length() == 2);
    CHECK_THROWS(init_contexts(-1, 2, 8, 0));
    CHECK(parse_context_mode("class-specific") == ContextMode::ClassSpecific);
    CHECK_THROWS_AS(parse_context_mode("per-class"), ConfigError);
}

TEST_CASE("vocabulary rejects duplicate and empty names") {
    const auto backend = make_toy_backend(0, 8, 8, 2);
    CHECK_THROWS_AS(NameVocabulary(*backend, {"dog", "dog"}, {"photo"}), ArgumentError);
    CHECK_THROWS_AS(NameVocabulary(*backend, {}, {"photo"}), ArgumentError);
    const NameVocabulary vocab(*backend, kClasses, kDomains);
    CHECK(vocab.domain_embedding(0).rows() == 2);
    CHECK_THROWS_AS(vocab.class_embedding(3), IndexError);
}

TEST_CASE("codol prompt segments follow class ctx, domain ctx, class, domain") {
    const auto backend = make_toy_backend(0, 8, 8, 2);
    const NameVocabulary vocab(*backend, kClasses, kDomains);
    auto [cls, dom] = init_contexts(4, 3, 8, 1);
    const PromptAssembly p = assemble_codol(cls, dom.vectors, vocab, 1, 0, 77);
    CHECK(p.sequence.length() == 4 + 3 + 1 + 2);
    CHECK(p.segment(Segment::ClassContext) == std::pair<Index, Index>{0, 4});
    CHECK(p.segment(Segment::DomainContext) == std::pair<Index, Index>{4, 7});
    CHECK(p.segment(Segment::ClassName) == std::pair<Index, Index>{7, 8});
    CHECK(p.segment(Segment::DomainName) == std::pair<Index, Index>{8, 10});
    CHECK(p.segment(Segment::Template).first == p.segment(Segment::Template).second);
    REQUIRE(p.tags.size() == 10);

    const auto expected = oracle::codol_prompt(oracle::to_rows(cls.vectors[0]), oracle::to_rows(dom.vectors), {},
                                               oracle::to_rows(backend->embed_name("elephant")),
                                               oracle::to_rows(backend->embed_name("art_painting")));
    CHECK(oracle::to_rows(p.sequence.embeddings) == expected);
}

TEST_CASE("coop prompt carries no domain segments") {
    const auto backend = make_toy_backend(0, 8, 8, 2);
    const NameVocabulary vocab(*backend, kClasses, kDomains);
    auto [cls, dom] = init_contexts(5, 0, 8, 1);
    const PromptAssembly p = assemble_coop(cls, vocab, 2, 77);
    CHECK(p.sequence.length() == 6);
    CHECK(p.segment(Segment::DomainContext).first == p.segment(Segment::DomainContext).second);
    CHECK(p.segment(Segment::DomainName).first == p.segment(Segment::DomainName).second);
    CHECK(p.sequence.embeddings.row(5) == backend->embed_name("giraffe").row(0));
}

TEST_CASE("zero-shot prompt starts with the template") {
    const auto backend = make_toy_backend(0, 8, 8, 2);
    const NameVocabulary vocab(*backend, kClasses, kDomains);
    const PromptAssembly plain = assemble_zeroshot(vocab, 0, std::nullopt, *backend);
    const PromptAssembly with_domain = assemble_zeroshot(vocab, 0, 2, *backend);
    CHECK(plain.sequence.length() == 5);
    CHECK(with_domain.sequence.length() == 6);
    CHECK(plain.segment(Segment::Template) == std::pair<Index, Index>{0, 4});
    CHECK(with_domain.sequence.embeddings.topRows(5) == plain.sequence.embeddings);
}

TEST_CASE("over-long prompts and width mismatches are rejected") {
    const auto backend = make_toy_backend(0, 8, 8, 2);
    const NameVocabulary vocab(*backend, kClasses, kDomains);
    CHECK_THROWS_AS(assemble_tokens(Mat::Zero(70, 8), Mat::Zero(6, 8), vocab, 0, 0, 77), LengthError);
    CHECK_NOTHROW(assemble_tokens(Mat::Zero(70, 8), Mat::Zero(4, 8), vocab, 0, 0, 77));
    CHECK_THROWS_AS(assemble_tokens(Mat::Zero(4, 7), Mat::Zero(4, 8), vocab, 0, 0, 77), ShapeError);
    CHECK_THROWS_AS(assemble_tokens(Mat::Zero(4, 8), Mat::Zero(4, 8), vocab, 0, 5, 77), IndexError);
}
