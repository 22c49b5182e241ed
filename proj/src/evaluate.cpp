// Copyright 2026 The codol Authors
// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "codol/errors.hpp"
#include "codol/pipeline.hpp"

namespace codol {

double accuracy_percent(const std::vector<Index>& predictions, const std::vector<Index>& labels) {
    if (predictions.size() != labels.size()) {
        throw ArgumentError("prediction and label counts differ");
    }
    if (labels.empty()) {
        throw ArgumentError("accuracy of an empty test set is undefined");
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        correct += predictions[i] == labels[i] ? 1 : 0;
    }
    return 100.0 * static_cast<double>(correct) / static_cast<double>(labels.size());
}

namespace {

void check_classes(const Checkpoint& ckpt, const DatasetManifest& manifest) {
    if (ckpt.classes != manifest.classes) {
        throw ArgumentError("checkpoint classes do not match the dataset's class vocabulary");
    }
}

}  // namespace

EvalCell evaluate(const Checkpoint& ckpt, const DatasetManifest& manifest, const ProtocolSplit& split,
                  const ImageSource& image_source) {
    check_classes(ckpt, manifest);
    const auto samples = test_samples(manifest, split);
    if (samples.empty()) {
        throw ArgumentError("split has no test samples");
    }
    const DualEncoder& backend = *ckpt.backend;
    const NameVocabulary vocab(backend, ckpt.classes, ckpt.domains);
    GridScorer scorer(backend, ckpt.model, vocab, ckpt.config.resolved_tau(), ckpt.config.posterior_mode);

    std::vector<Index> predictions;
    std::vector<Index> labels;
    for (const Sample* s : samples) {
        const Vec z = backend.encode_image(image_source(*s));
        predictions.push_back(predict(posterior(scorer(z))));
        labels.push_back(s->class_id);
    }
    EvalCell cell;
    cell.train_domains = describe_domains(manifest, split.train_domains);
    cell.test_domain = describe_domains(manifest, split.test_domains);
    cell.seed = ckpt.config.seed;
    cell.total = static_cast<Index>(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        cell.correct += predictions[i] == labels[i] ? 1 : 0;
    }
    cell.accuracy = accuracy_percent(predictions, labels);
    return cell;
}

AlignmentReport alignment_analysis(const Checkpoint& ckpt, const DatasetManifest& manifest,
                                   const ProtocolSplit& split, const ImageSource& image_source) {
    check_classes(ckpt, manifest);
    const auto samples = test_samples(manifest, split);
    if (samples.empty()) {
        throw ArgumentError("split has no test samples");
    }
    const DualEncoder& backend = *ckpt.backend;
    const NameVocabulary vocab(backend, ckpt.classes, ckpt.domains);

    // Same prompts with the domain context and domain name removed.
    PromptModel ablated = ckpt.model;
    if (is_trainable(ablated.variant)) {
        ablated.variant = ablated.cmn ? Variant::CoCoOp : Variant::CoOp;
        ablated.dmn.reset();
        ablated.domain_ctx.vectors.resize(0, 0);
    } else {
        ablated.variant = Variant::ZeroShot;
    }

    const Index classes = vocab.num_classes();
    GridScorer full(backend, ckpt.model, vocab, 1.0, PosteriorMode::Joint);
    GridScorer bare(backend, ablated, vocab, 1.0, PosteriorMode::Joint);

    AlignmentReport report;
    report.classes = ckpt.classes;
    report.domains = uses_domains(ckpt.model.variant) ? ckpt.domains : std::vector<std::string>{"(none)"};
    const auto columns = static_cast<Index>(report.domains.size());
    report.class_similarity = Mat::Zero(classes, classes);
    report.ablated_class_similarity = Mat::Zero(classes, classes);
    report.domain_similarity = Mat::Zero(classes, columns);
    Vec counts = Vec::Zero(classes);

    for (const Sample* s : samples) {
        const Vec z = backend.encode_image(image_source(*s));
        const Index y = s->class_id;
        const Mat grid = full(z).s;
        const Mat bare_grid = bare(z).s;
        report.class_similarity.row(y) += grid.rowwise().mean().transpose();
        report.ablated_class_similarity.row(y) += bare_grid.rowwise().mean().transpose();
        report.domain_similarity.row(y) += grid.row(y);
        report.matched_mean += grid.row(y).mean();
        report.ablated_matched_mean += bare_grid.row(y).mean();
        counts(y) += 1.0;
    }
    for (Index y = 0; y < classes; ++y) {
        if (counts(y) > 0.0) {
            report.class_similarity.row(y) /= counts(y);
            report.ablated_class_similarity.row(y) /= counts(y);
            report.domain_similarity.row(y) /= counts(y);
        }
    }
    report.samples = static_cast<Index>(samples.size());
    report.matched_mean /= static_cast<double>(samples.size());
    report.ablated_matched_mean /= static_cast<double>(samples.size());
    return report;
}

ZeroShotResult evaluate_zeroshot(const DatasetManifest& manifest, const BackendPtr& backend, bool with_domain,
                                 double tau, PosteriorMode mode, const ImageSource& image_source) {
    const NameVocabulary vocab(*backend, manifest.classes, manifest.domains);
    PromptModel model;
    model.variant = with_domain ? Variant::ZeroShotDomain : Variant::ZeroShot;
    GridScorer scorer(*backend, model, vocab, tau, mode);

    ZeroShotResult result;
    result.domains = manifest.domains;
    std::vector<Index> correct(manifest.domains.size(), 0);
    std::vector<Index> total(manifest.domains.size(), 0);
    std::vector<Index> predictions;
    std::vector<Index> labels;
    for (const auto& s : manifest.samples) {
        const Vec z = backend->encode_image(image_source(s));
        const Index guess = predict(posterior(scorer(z)));
        predictions.push_back(guess);
        labels.push_back(s.class_id);
        if (s.domain_id) {
            const auto d = static_cast<std::size_t>(*s.domain_id);
            total[d] += 1;
            correct[d] += guess == s.class_id ? 1 : 0;
        }
    }
    for (std::size_t d = 0; d < total.size(); ++d) {
        result.per_domain.push_back(total[d] > 0 ? 100.0 * static_cast<double>(correct[d]) /
                                                       static_cast<double>(total[d])
                                                 : 0.0);
    }
    result.overall = accuracy_percent(predictions, labels);
    return result;
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> threads;
    const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(workers), count);
    for (std::size_t t = 0; t < n_threads; ++t) {
        threads.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : threads) th.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace codol
