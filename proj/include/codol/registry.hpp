// Copyright 2026 The codol Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "codol/backend.hpp"
#include "codol/toy_backend.hpp"

namespace codol {

struct BackendSpec {
    std::string name = "toy";
    nlohmann::json options = nlohmann::json::object();
};

// `parameters` is non-null when restoring from a checkpoint.
using BackendFactory =
    std::function<BackendPtr(const nlohmann::json& options, const std::vector<NamedTensor>* parameters)>;

// Adapters keyed by backend name ("toy", "external:<id>", ...). The toy
// backend is always registered.
class BackendRegistry {
public:
    static BackendRegistry& global();

    void add(const std::string& name, BackendFactory factory);
    bool contains(const std::string& name) const;
    BackendPtr create(const BackendSpec& spec, const std::vector<NamedTensor>* parameters = nullptr) const;

private:
    BackendRegistry();

    mutable std::mutex mutex_;
    std::map<std::string, BackendFactory> factories_;
};

nlohmann::json to_json(const ToyBackendOptions& options);
ToyBackendOptions toy_options_from_json(const nlohmann::json& j);

}  // namespace codol
