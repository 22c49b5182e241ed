// Copyright 2026 The codol Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>

#include "codol/errors.hpp"
#include "codol/pipeline.hpp"
#include "codol/rng.hpp"
#include "codol/toy_backend.hpp"
#include "oracle.hpp"

using namespace codol;
namespace fs = std::filesystem;

namespace {

DatasetManifest small_dataset(Index per_cell = 4) {
    SynthOptions o;
    o.per_cell = per_cell;
    return synth_dataset(o);
}

TrainConfig small_config() {
    TrainConfig c;
    c.context_mode = ContextMode::ClassSpecific;
    c.class_length = 4;
    c.domain_length = 4;
    c.lr = 1.0;
    c.epochs = 3;
    return c;
}

const ProtocolSplit kSplit{Protocol::MultiSource, {0, 1}, {2}};

std::vector<std::vector<double>> tensors(PromptModel& model) {
    std::vector<std::vector<double>> out;
    model.for_each_tensor([&](const std::string&, TensorView t) { out.emplace_back(t.data, t.data + t.size()); });
    return out;
}

}  // namespace

TEST_CASE("training lowers the epoch loss") {
    const DatasetManifest m = restrict_to_split(small_dataset(10), kSplit);
    TrainConfig c = small_config();
    c.epochs = 10;
    const Checkpoint ckpt = train(m, kSplit, c);
    REQUIRE(ckpt.epoch_loss.size() == 10);
    CHECK(ckpt.epoch_loss.back() < ckpt.epoch_loss.front());
}

TEST_CASE("zero learning rate leaves parameters untouched") {
    const DatasetManifest m = restrict_to_split(small_dataset(), kSplit);
    TrainConfig c = small_config();
    c.lr = 0.0;
    Checkpoint trained = train(m, kSplit, c);
    Checkpoint fresh = untrained_checkpoint(m, kSplit, c);
    CHECK(tensors(trained.model) == tensors(fresh.model));
}

TEST_CASE("training is deterministic and keeps the encoder frozen") {
    const DatasetManifest m = restrict_to_split(small_dataset(), kSplit);
    const TrainConfig c = small_config();
    TrainHooks hooks;
    hooks.backend = make_backend(c);
    const std::string before = parameter_hash(*hooks.backend);
    const Checkpoint a = train(m, kSplit, c, hooks);
    CHECK(parameter_hash(*hooks.backend) == before);
    CHECK(a.backend_hash == before);
    const Checkpoint b = train(m, kSplit, c);
    CHECK(checkpoint_bytes(a) == checkpoint_bytes(b));
    TrainConfig other = c;
    other.seed = 1;
    CHECK(checkpoint_bytes(train(m, kSplit, other)) != checkpoint_bytes(a));
}

TEST_CASE("checkpoint round-trip preserves evaluation bit-exactly") {
    const DatasetManifest m = restrict_to_split(small_dataset(), kSplit);
    TrainConfig c = small_config();
    c.variant = Variant::CoDoLCmn;
    const Checkpoint ckpt = train(m, kSplit, c);
    const fs::path path = fs::temp_directory_path() / "codol_rt.ckpt";
    save_checkpoint(ckpt, path);
    Checkpoint loaded = load_checkpoint(path);
    fs::remove(path);
    CHECK(checkpoint_bytes(loaded) == checkpoint_bytes(ckpt));
    CHECK(loaded.epoch_loss == ckpt.epoch_loss);
    const EvalCell a = evaluate(ckpt, m, kSplit);
    const EvalCell b = evaluate(loaded, m, kSplit);
    CHECK(a.correct == b.correct);
    CHECK(a.accuracy == b.accuracy);

    Checkpoint copy = ckpt;
    const Vec z = Vec::Ones(8).normalized();
    const NameVocabulary vocab = split_vocabulary(*ckpt.backend, m, kSplit);
    const Mat s1 = score_grid(*ckpt.backend, ckpt.model, vocab, z, 1.0, PosteriorMode::Joint).s;
    const Mat s2 = score_grid(*loaded.backend, loaded.model, vocab, z, 1.0, PosteriorMode::Joint).s;
    CHECK(s1 == s2);
}

TEST_CASE("corrupt checkpoints are rejected") {
    const DatasetManifest m = restrict_to_split(small_dataset(), kSplit);
    std::string bytes = checkpoint_bytes(untrained_checkpoint(m, kSplit, small_config()));
    CHECK_THROWS(checkpoint_from_bytes(bytes.substr(0, bytes.size() / 2)));
    CHECK_THROWS(checkpoint_from_bytes("not a checkpoint"));
}

TEST_CASE("non-finite loss aborts with the step") {
    DatasetManifest m = restrict_to_split(small_dataset(), kSplit);
    for (auto& s : m.samples) {
        if (s.split == Split::Train) (*s.feature)[0] = std::numeric_limits<double>::quiet_NaN();
    }
    CHECK_THROWS_WITH_AS(train(m, kSplit, small_config()), doctest::Contains("step 1"), TrainingError);
}

TEST_CASE("invalid configurations are rejected") {
    const DatasetManifest m = restrict_to_split(small_dataset(), kSplit);
    TrainConfig c = small_config();
    c.epochs = 0;
    CHECK_THROWS_AS(train(m, kSplit, c), ConfigError);
    c = small_config();
    c.batch_size = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = small_config();
    c.lr = -1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = small_config();
    c.variant = Variant::ZeroShot;
    CHECK_THROWS_AS(train(m, kSplit, c), ConfigError);
    CHECK(TrainConfig{}.resolved_tau() == 1.0);
}

TEST_CASE("config JSON round-trip") {
    TrainConfig c = small_config();
    c.variant = Variant::CoCoOp;
    c.posterior_mode = PosteriorMode::PerDomain;
    c.supervise_domain = true;
    c.lr_schedule = LrSchedule::Constant;
    c.tau = 0.05;
    const TrainConfig back = train_config_from_json(to_json(c));
    CHECK(to_json(back) == to_json(c));
}

TEST_CASE("accuracy arithmetic") {
    CHECK(accuracy_percent({0, 1, 2, 1}, {0, 1, 2, 1}) == 100.0);
    CHECK(accuracy_percent({0, 1, 2, 1}, {0, 1, 0, 0}) == 50.0);
    CHECK_THROWS_AS(accuracy_percent({}, {}), ArgumentError);

    Engine rng(0);
    boost::random::uniform_int_distribution<Index> coin(0, 1);
    std::vector<Index> preds, labels;
    for (int i = 0; i < 1000; ++i) {
        preds.push_back(coin(rng));
        labels.push_back(i % 2);
    }
    CHECK(std::abs(accuracy_percent(preds, labels) - 50.0) <= 5.0);
}

TEST_CASE("evaluation agrees with brute-force prediction") {
    SynthOptions o;
    o.domains = 2;
    o.classes = 2;
    o.per_cell = 1;
    const DatasetManifest raw = synth_dataset(o);
    const ProtocolSplit split{Protocol::SingleSource, {0}, {1}};
    const DatasetManifest m = restrict_to_split(raw, split);
    const Checkpoint ckpt = untrained_checkpoint(m, split, small_config());
    const auto& toy = dynamic_cast<const ToyBackend&>(*ckpt.backend);

    std::vector<oracle::Matrix> class_names, domain_names;
    for (const auto& c : m.classes) class_names.push_back(oracle::to_rows(toy.embed_name(c)));
    domain_names.push_back(oracle::to_rows(toy.embed_name(m.domains[0])));
    Index correct = 0, total = 0;
    for (const Sample* s : test_samples(m, split)) {
        const auto z = oracle::unit(*s->feature);
        // Class-specific context: score each class with its own context rows.
        oracle::Matrix grid;
        for (Index y = 0; y < 2; ++y) {
            const auto row = oracle::codol_scores(
                oracle::copy_toy(toy), oracle::to_rows(ckpt.model.class_ctx.for_class(y)),
                oracle::to_rows(ckpt.model.domain_ctx.vectors), oracle::copy_mlp(*ckpt.model.dmn),
                {class_names[static_cast<std::size_t>(y)]}, domain_names, z);
            grid.push_back(row[0]);
        }
        correct += oracle::predict(grid, 1.0, false) == s->class_id;
        ++total;
    }
    REQUIRE(total == 2);
    const EvalCell cell = evaluate(ckpt, m, split);
    CHECK(cell.total == 2);
    CHECK(cell.correct == correct);
    CHECK(cell.accuracy == doctest::Approx(100.0 * correct / 2.0));
}

TEST_CASE("protocol report averages are arithmetic means") {
    EvalReport r;
    for (double a : {95.31, 96.08, 99.50, 87.16}) {
        ReportCell cell;
        cell.accuracies = {a};
        r.cells.push_back(cell);
    }
    r.finalize();
    CHECK(std::abs(r.average - 94.5125) <= 1e-9);

    EvalReport one;
    one.cells.push_back(ReportCell{"a", "b", {0}, {70.0}, 0.0});
    one.finalize();
    CHECK(one.cells.size() == 1);
    CHECK(one.average == 70.0);
}

TEST_CASE("run_protocol covers every split and seed") {
    SynthOptions o;
    o.domains = 2;
    o.per_cell = 3;
    const DatasetManifest m = synth_dataset(o);
    TrainConfig c = small_config();
    c.epochs = 1;
    ProtocolOptions opts;
    opts.seeds = {0, 1};
    opts.workers = 2;
    int checkpoints = 0;
    opts.on_checkpoint = [&](std::size_t, std::uint64_t, const Checkpoint&) { ++checkpoints; };
    const EvalReport r = run_protocol(m, Protocol::SingleSource, c, opts);
    CHECK(checkpoints == 4);
    REQUIRE(r.cells.size() == 2);
    double total = 0.0;
    for (const auto& cell : r.cells) {
        CHECK(cell.accuracies.size() == 2);
        CHECK(std::abs(cell.mean - 0.5 * (cell.accuracies[0] + cell.accuracies[1])) <= 1e-9);
        total += cell.mean;
    }
    CHECK(std::abs(r.average - total / 2.0) <= 1e-9);

    opts.workers = 1;
    opts.on_checkpoint = nullptr;
    const EvalReport serial = run_protocol(m, Protocol::SingleSource, c, opts);
    CHECK(serial.average == r.average);

    opts.seeds = {3};
    const EvalReport single = run_protocol(m, Protocol::MultiSource, c, opts);
    for (const auto& cell : single.cells) CHECK(cell.accuracies.size() == 1);
}

TEST_CASE("context-length grids") {
    CHECK(square_grid({4, 8}).size() == 4);
    const auto full = square_grid({4, 8, 12, 16, 20});
    CHECK(full.size() == 25);
    CHECK(std::count(full.begin(), full.end(), std::pair<Index, Index>{16, 16}) == 1);
    CHECK(std::count(full.begin(), full.end(), std::pair<Index, Index>{8, 8}) == 1);

    TrainConfig c = small_config();
    c.epochs = 1;
    ProtocolOptions opts;
    opts.seeds = {0};
    const auto cells = sweep_context_lengths(small_dataset(2), Protocol::MultiSource, square_grid({4, 8}), c, opts);
    REQUIRE(cells.size() == 4);
    CHECK(cells[3].class_length == 8);
    CHECK(cells[3].domain_length == 8);
    CHECK(cells[3].report.class_length == 8);
    CHECK_THROWS_AS(sweep_context_lengths(small_dataset(2), Protocol::MultiSource, {}, c, opts), ArgumentError);
}

TEST_CASE("domain-ratio experiment") {
    TrainConfig c = small_config();
    c.epochs = 1;
    c.supervise_domain = true;
    ProtocolOptions opts;
    opts.seeds = {0, 1};
    const auto rows =
        domain_ratio_experiment(small_dataset(2), Protocol::MultiSource, {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}, c, opts);
    REQUIRE(rows.size() == 6);
    for (const auto& row : rows) {
        REQUIRE(row.seed_averages.size() == 2);
        const auto [lo, hi] = std::minmax(row.seed_averages[0], row.seed_averages[1]);
        CHECK(row.spread == doctest::Approx(hi - lo));
        CHECK(row.report.ratio == row.ratio);
    }
    CHECK_THROWS_AS(domain_ratio_experiment(small_dataset(2), Protocol::MultiSource, {1.2}, c, opts),
                    ArgumentError);
}

TEST_CASE("cosine of identical and orthogonal features") {
    const Vec a = Vec::Unit(8, 0);
    CHECK(cosine(a, a) == doctest::Approx(1.0));
    CHECK(cosine(a, Vec::Unit(8, 3)) == doctest::Approx(0.0));
}

TEST_CASE("alignment report shapes") {
    const DatasetManifest m = restrict_to_split(small_dataset(), kSplit);
    const Checkpoint ckpt = train(m, kSplit, small_config());
    const AlignmentReport r = alignment_analysis(ckpt, m, kSplit);
    CHECK(r.class_similarity.rows() == 4);
    CHECK(r.class_similarity.cols() == 4);
    CHECK(r.domain_similarity.cols() == 2);
    CHECK(r.samples == 16);
    CHECK(r.matched_mean == doctest::Approx(r.class_similarity.diagonal().mean()));
    CHECK(r.class_similarity.cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
}

TEST_CASE("CoDoL matched similarity is at least CoOp's after equal training" * doctest::may_fail()) {
    const DatasetManifest m = restrict_to_split(small_dataset(10), kSplit);
    TrainConfig c = small_config();
    c.epochs = 10;
    c.class_length = 16;
    c.domain_length = 16;
    const AlignmentReport codol = alignment_analysis(train(m, kSplit, c), m, kSplit);
    c.variant = Variant::CoOp;
    const AlignmentReport coop = alignment_analysis(train(m, kSplit, c), m, kSplit);
    MESSAGE("codol " << codol.matched_mean << " coop " << coop.matched_mean);
    CHECK(codol.matched_mean >= coop.matched_mean);
}

TEST_CASE("zeroed, frozen meta-net training equals training without it") {
    const DatasetManifest m = restrict_to_split(small_dataset(), kSplit);
    TrainConfig c = small_config();
    c.zero_meta_nets = true;
    c.freeze_meta_nets = true;
    Checkpoint with_dmn = train(m, kSplit, c);
    c.variant = Variant::CoDoLNoDmn;
    Checkpoint without = train(m, kSplit, c);
    CHECK(with_dmn.model.class_ctx.vectors == without.model.class_ctx.vectors);
    CHECK(with_dmn.model.domain_ctx.vectors == without.model.domain_ctx.vectors);
    CHECK(with_dmn.epoch_loss == without.epoch_loss);
    CHECK(with_dmn.model.dmn->w1.isZero(0.0));
    const EvalCell a = evaluate(with_dmn, m, kSplit);
    const EvalCell b = evaluate(without, m, kSplit);
    CHECK(a.correct == b.correct);
}

TEST_CASE("parallel_for visits every index once") {
    std::vector<int> hits(37, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
}
