// Copyright 2026 The codol Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>
#include <string>

#include "codol/errors.hpp"
#include "codol/pipeline.hpp"
#include "codol/rng.hpp"

namespace codol {

LrSchedule parse_lr_schedule(std::string_view text) {
    if (text == "cosine") return LrSchedule::Cosine;
    if (text == "constant") return LrSchedule::Constant;
    throw ConfigError("unknown lr schedule '" + std::string(text) + "'");
}

const char* to_string(LrSchedule schedule) {
    return schedule == LrSchedule::Cosine ? "cosine" : "constant";
}

double TrainConfig::resolved_tau() const {
    if (tau > 0.0) {
        return tau;
    }
    return backend.name == "toy" ? 1.0 : 0.01;
}

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("epochs: must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size: must be >= 1");
    if (grad_accumulation < 1) throw ConfigError("grad_accumulation: must be >= 1");
    if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("lr: must be a finite non-negative number");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum: must lie in [0, 1)");
    if (class_length < 0) throw ConfigError("class_length: must be >= 0");
    if (domain_length < 0) throw ConfigError("domain_length: must be >= 0");
    if (!std::isfinite(tau)) throw ConfigError("tau: must be finite");
}

nlohmann::json to_json(const TrainConfig& c) {
    return {
        {"variant", to_string(c.variant)},
        {"class_length", c.class_length},
        {"domain_length", c.domain_length},
        {"context_mode", to_string(c.context_mode)},
        {"epochs", c.epochs},
        {"batch_size", c.batch_size},
        {"grad_accumulation", c.grad_accumulation},
        {"lr", c.lr},
        {"lr_schedule", to_string(c.lr_schedule)},
        {"momentum", c.momentum},
        {"seed", c.seed},
        {"tau", c.tau},
        {"posterior_mode", to_string(c.posterior_mode)},
        {"supervise_domain", c.supervise_domain},
        {"zero_meta_nets", c.zero_meta_nets},
        {"freeze_meta_nets", c.freeze_meta_nets},
        {"backend", {{"name", c.backend.name}, {"options", c.backend.options}}},
    };
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
    TrainConfig c;
    c.variant = parse_variant(j.at("variant").get<std::string>());
    c.class_length = j.at("class_length").get<Index>();
    c.domain_length = j.at("domain_length").get<Index>();
    c.context_mode = parse_context_mode(j.at("context_mode").get<std::string>());
    c.epochs = j.at("epochs").get<Index>();
    c.batch_size = j.at("batch_size").get<Index>();
    c.grad_accumulation = j.at("grad_accumulation").get<Index>();
    c.lr = j.at("lr").get<double>();
    c.lr_schedule = parse_lr_schedule(j.at("lr_schedule").get<std::string>());
    c.momentum = j.at("momentum").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.tau = j.at("tau").get<double>();
    c.posterior_mode = parse_posterior_mode(j.at("posterior_mode").get<std::string>());
    c.supervise_domain = j.at("supervise_domain").get<bool>();
    c.zero_meta_nets = j.at("zero_meta_nets").get<bool>();
    c.freeze_meta_nets = j.at("freeze_meta_nets").get<bool>();
    c.backend.name = j.at("backend").at("name").get<std::string>();
    c.backend.options = j.at("backend").at("options");
    return c;
}

ImageInput inline_feature_source(const Sample& sample) {
    if (!sample.feature) {
        throw IngestionError("sample '" + sample.ref +
                             "' has no inline feature; supply an image source for file-backed datasets");
    }
    return ImageInput::from_feature(Eigen::Map<const Vec>(sample.feature->data(),
                                                          static_cast<Index>(sample.feature->size())));
}

BackendPtr make_backend(const TrainConfig& config) {
    return BackendRegistry::global().create(config.backend);
}

NameVocabulary split_vocabulary(const DualEncoder& backend, const DatasetManifest& manifest,
                                const ProtocolSplit& split) {
    std::vector<std::string> domains;
    for (Index id : split.train_domains) {
        domains.push_back(manifest.domains.at(static_cast<std::size_t>(id)));
    }
    return NameVocabulary(backend, manifest.classes, domains);
}

namespace {

Checkpoint checkpoint_shell(const DatasetManifest& manifest, const ProtocolSplit& split, const TrainConfig& config,
                            BackendPtr backend) {
    Checkpoint ckpt;
    ckpt.config = config;
    ckpt.dataset = manifest.meta.value("name", manifest.meta.value("source", std::string("dataset")));
    ckpt.classes = manifest.classes;
    for (Index id : split.train_domains) {
        ckpt.domains.push_back(manifest.domains.at(static_cast<std::size_t>(id)));
    }
    ckpt.split = split;
    ckpt.backend = std::move(backend);
    ckpt.backend_hash = parameter_hash(*ckpt.backend);
    return ckpt;
}

double learning_rate(const TrainConfig& config, Index step, Index total_steps) {
    if (config.lr_schedule == LrSchedule::Constant || total_steps <= 1) {
        return config.lr;
    }
    return 0.5 * config.lr *
           (1.0 + std::cos(std::numbers::pi * static_cast<double>(step) / static_cast<double>(total_steps)));
}

}  // namespace

Checkpoint untrained_checkpoint(const DatasetManifest& manifest, const ProtocolSplit& split,
                                const TrainConfig& config, BackendPtr backend) {
    if (!backend) {
        backend = make_backend(config);
    }
    Checkpoint ckpt = checkpoint_shell(manifest, split, config, std::move(backend));
    ModelInit init{config.variant, config.class_length, config.domain_length, config.context_mode, config.seed,
                   config.zero_meta_nets};
    ckpt.model = init_model(init, ckpt.backend->descriptor(), manifest.num_classes());
    return ckpt;
}

Checkpoint train(const DatasetManifest& manifest, const ProtocolSplit& split, const TrainConfig& config,
                 const TrainHooks& hooks) {
    config.validate();
    if (!is_trainable(config.variant)) {
        throw ConfigError(std::string("variant '") + to_string(config.variant) + "' has nothing to train");
    }
    Checkpoint ckpt = untrained_checkpoint(manifest, split, config, hooks.backend);
    const DualEncoder& backend = *ckpt.backend;
    const NameVocabulary vocab = split_vocabulary(backend, manifest, split);

    const auto samples = training_samples(manifest, split);
    if (samples.empty()) {
        throw ArgumentError("split has no training samples");
    }
    std::vector<Vec> features;
    std::vector<Target> targets;
    for (const Sample* s : samples) {
        features.push_back(backend.encode_image(hooks.image_source(*s)));
        Target t{s->class_id, std::nullopt};
        if (s->domain_id) {
            const auto& train = split.train_domains;
            const auto pos = std::find(train.begin(), train.end(), *s->domain_id);
            if (pos != train.end()) {
                t.domain = static_cast<Index>(pos - train.begin());
            }
        }
        if (!uses_domains(config.variant)) {
            t.domain.reset();
        }
        targets.push_back(t);
    }

    PromptModel& model = ckpt.model;
    PromptModel velocity = model.zeros_like();
    const double tau = config.resolved_tau();
    const auto n = static_cast<Index>(samples.size());
    const Index per_step = config.batch_size * config.grad_accumulation;
    const Index steps_per_epoch = (n + per_step - 1) / per_step;
    const Index total_steps = steps_per_epoch * config.epochs;

    std::vector<std::size_t> order(samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Engine shuffle_rng(derive_seed(config.seed, "train.shuffle"));

    Index step = 0;
    for (Index epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle(order, shuffle_rng);
        double epoch_total = 0.0;
        for (Index begin = 0; begin < n; begin += per_step) {
            const Index end = std::min(n, begin + per_step);
            const double scale = 1.0 / static_cast<double>(end - begin);
            PromptModel grad = model.zeros_like();
            double step_loss = 0.0;
            for (Index i = begin; i < end; ++i) {
                const std::size_t idx = order[static_cast<std::size_t>(i)];
                const GridForward fwd =
                    forward_grid(backend, model, vocab, features[idx], tau, config.posterior_mode);
                const Posterior post = posterior(fwd.scores);
                const double nll = sample_nll(post, targets[idx], config.supervise_domain);
                if (!std::isfinite(nll)) {
                    throw TrainingError("non-finite loss at epoch " + std::to_string(epoch + 1) + ", step " +
                                        std::to_string(step + 1) + " (sample '" + samples[idx]->ref + "')");
                }
                step_loss += nll;
                const Mat g = sample_nll_grad(fwd.scores, post, targets[idx], config.supervise_domain) * scale;
                backward_grid(backend, model, fwd, g, grad);
            }
            epoch_total += step_loss;

            const double lr = learning_rate(config, step, total_steps);
            std::vector<TensorView> grads;
            grad.for_each_tensor([&](const std::string&, TensorView v) { grads.push_back(v); });
            std::vector<TensorView> moms;
            velocity.for_each_tensor([&](const std::string&, TensorView v) { moms.push_back(v); });
            std::size_t k = 0;
            model.for_each_tensor([&](const std::string& name, TensorView p) {
                const TensorView g = grads[k];
                const TensorView v = moms[k];
                ++k;
                if (config.freeze_meta_nets && (name.rfind("dmn.", 0) == 0 || name.rfind("cmn.", 0) == 0)) {
                    return;
                }
                for (Index e = 0; e < p.size(); ++e) {
                    v.data[e] = config.momentum * v.data[e] + g.data[e];
                    p.data[e] -= lr * v.data[e];
                }
            });
            ++step;
            if (hooks.on_step) {
                hooks.on_step(epoch, step, step_loss / static_cast<double>(end - begin));
            }
        }
        ckpt.epoch_loss.push_back(epoch_total / static_cast<double>(n));
    }
    return ckpt;
}

}  // namespace codol
