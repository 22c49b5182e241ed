// Copyright 2026 The codol Authors
// SPDX-License-Identifier: Apache-2.0

#include "codol/registry.hpp"

#include "codol/errors.hpp"

namespace codol {

BackendRegistry::BackendRegistry() {
    factories_.emplace("toy", [](const nlohmann::json& options, const std::vector<NamedTensor>* parameters) {
        const ToyBackendOptions opts = toy_options_from_json(options);
        if (parameters != nullptr) {
            return BackendPtr(std::make_shared<ToyBackend>(opts, *parameters));
        }
        return BackendPtr(std::make_shared<ToyBackend>(opts));
    });
}

BackendRegistry& BackendRegistry::global() {
    static BackendRegistry registry;
    return registry;
}

void BackendRegistry::add(const std::string& name, BackendFactory factory) {
    std::lock_guard lock(mutex_);
    factories_[name] = std::move(factory);
}

bool BackendRegistry::contains(const std::string& name) const {
    std::lock_guard lock(mutex_);
    return factories_.count(name) != 0;
}

BackendPtr BackendRegistry::create(const BackendSpec& spec, const std::vector<NamedTensor>* parameters) const {
    BackendFactory factory;
    {
        std::lock_guard lock(mutex_);
        auto it = factories_.find(spec.name);
        if (it == factories_.end()) {
            throw ConfigError("unknown backend '" + spec.name + "'");
        }
        factory = it->second;
    }
    return factory(spec.options, parameters);
}

nlohmann::json to_json(const ToyBackendOptions& o) {
    return {
        {"seed", o.seed},
        {"feature_dim", o.feature_dim},
        {"embed_dim", o.embed_dim},
        {"depth", o.depth},
        {"hidden_dim", o.hidden_dim},
        {"max_length", o.max_length},
        {"image_width", o.image_width},
        {"image_height", o.image_height},
        {"vocab_rows", o.vocab_rows},
        {"normalize", o.normalize},
    };
}

ToyBackendOptions toy_options_from_json(const nlohmann::json& j) {
    ToyBackendOptions o;
    if (!j.is_object()) {
        return o;
    }
    auto read = [&](const char* key, auto& field) {
        if (j.contains(key)) {
            j.at(key).get_to(field);
        }
    };
    read("seed", o.seed);
    read("feature_dim", o.feature_dim);
    read("embed_dim", o.embed_dim);
    read("depth", o.depth);
    read("hidden_dim", o.hidden_dim);
    read("max_length", o.max_length);
    read("image_width", o.image_width);
    read("image_height", o.image_height);
    read("vocab_rows", o.vocab_rows);
    read("normalize", o.normalize);
    return o;
}

}  // namespace codol
