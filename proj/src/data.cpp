// Copyright 2026 The codol Authors
// SPDX-License-Identifier: Apache-2.0

#include "codol/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "codol/errors.hpp"
#include "codol/rng.hpp"

namespace fs = std::filesystem;

namespace codol {

const char* to_string(Split split) {
    return split == Split::Train ? "train" : "test";
}

Index DatasetManifest::count(Split split) const {
    return static_cast<Index>(
        std::count_if(samples.begin(), samples.end(), [&](const Sample& s) { return s.split == split; }));
}

void DatasetManifest::validate() const {
    if (classes.empty()) {
        throw ParseError("manifest: 'classes' must contain at least one name");
    }
    if (domains.empty()) {
        throw ParseError("manifest: 'domains' must contain at least one name");
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const Sample& s = samples[i];
        if (s.class_id < 0 || s.class_id >= num_classes()) {
            throw ParseError("manifest: samples[" + std::to_string(i) + "].class out of range");
        }
        if (s.domain_id && (*s.domain_id < 0 || *s.domain_id >= num_domains())) {
            throw ParseError("manifest: samples[" + std::to_string(i) + "].domain out of range");
        }
    }
}

namespace {

bool is_image_file(const fs::path& path) {
    static const std::set<std::string> extensions = {".jpg", ".jpeg", ".png", ".bmp", ".gif",
                                                     ".ppm", ".pgm",  ".tif", ".tiff", ".webp"};
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return extensions.count(ext) != 0;
}

std::vector<fs::path> sorted_entries(const fs::path& dir, bool directories) {
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (directories ? entry.is_directory() : entry.is_regular_file()) {
            out.push_back(entry.path());
        }
    }
    std::sort(out.begin(), out.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
    return out;
}

}  // namespace

DatasetManifest scan_layout(const fs::path& root) {
    if (!fs::is_directory(root)) {
        throw IngestionError("dataset root '" + root.string() + "' is not a directory");
    }
    const auto domain_dirs = sorted_entries(root, true);
    std::set<std::string> class_set;
    std::map<std::string, std::vector<fs::path>> classes_by_domain;
    for (const auto& d : domain_dirs) {
        for (const auto& c : sorted_entries(d, true)) {
            class_set.insert(c.filename().string());
            classes_by_domain[d.filename().string()].push_back(c);
        }
    }
    if (domain_dirs.empty() || class_set.empty()) {
        throw IngestionError("dataset root '" + root.string() + "' has no <domain>/<class> directories");
    }

    DatasetManifest manifest;
    manifest.classes.assign(class_set.begin(), class_set.end());
    std::map<std::string, Index> class_index;
    for (std::size_t i = 0; i < manifest.classes.size(); ++i) {
        class_index[manifest.classes[i]] = static_cast<Index>(i);
    }
    nlohmann::json missing = nlohmann::json::object();
    for (const auto& d : domain_dirs) {
        const std::string domain = d.filename().string();
        const auto domain_id = static_cast<Index>(manifest.domains.size());
        manifest.domains.push_back(domain);
        std::set<std::string> present;
        for (const auto& c : classes_by_domain[domain]) {
            const std::string cls = c.filename().string();
            present.insert(cls);
            for (const auto& file : sorted_entries(c, false)) {
                if (!is_image_file(file)) {
                    continue;
                }
                Sample s;
                s.ref = (fs::path(domain) / cls / file.filename()).generic_string();
                s.class_id = class_index.at(cls);
                s.domain_id = domain_id;
                manifest.samples.push_back(std::move(s));
            }
        }
        std::vector<std::string> absent;
        for (const auto& cls : manifest.classes) {
            if (!present.count(cls)) {
                absent.push_back(cls);
            }
        }
        if (!absent.empty()) {
            missing[domain] = absent;
        }
    }
    if (manifest.samples.empty()) {
        throw IngestionError("dataset root '" + root.string() + "' contains no image files");
    }
    manifest.meta = {{"source", "scan"}, {"root", root.generic_string()}};
    if (!missing.empty()) {
        manifest.meta["missing_classes"] = missing;
    }
    return manifest;
}

nlohmann::json manifest_to_json(const DatasetManifest& manifest) {
    nlohmann::json samples = nlohmann::json::array();
    for (const auto& s : manifest.samples) {
        nlohmann::json item = {
            {"ref", s.ref},
            {"class", s.class_id},
            {"domain", s.domain_id ? nlohmann::json(*s.domain_id) : nlohmann::json(nullptr)},
            {"split", to_string(s.split)},
        };
        if (s.feature) {
            item["feature"] = *s.feature;
        }
        samples.push_back(std::move(item));
    }
    return {{"classes", manifest.classes},
            {"domains", manifest.domains},
            {"samples", std::move(samples)},
            {"meta", manifest.meta}};
}

namespace {

const nlohmann::json& require(const nlohmann::json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw ParseError("manifest: missing key '" + std::string(key) + "' in " + where);
    }
    return *it;
}

void reject_unknown(const nlohmann::json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) {
            throw ParseError("manifest: unknown key '" + key + "' in " + where);
        }
    }
}

std::vector<std::string> string_list(const nlohmann::json& value, const char* key) {
    if (!value.is_array()) {
        throw ParseError(std::string("manifest: '") + key + "' must be an array of strings");
    }
    std::vector<std::string> out;
    for (const auto& item : value) {
        if (!item.is_string()) {
            throw ParseError(std::string("manifest: '") + key + "' must be an array of strings");
        }
        out.push_back(item.get<std::string>());
    }
    return out;
}

}  // namespace

DatasetManifest manifest_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw ParseError("manifest: top level must be an object");
    }
    reject_unknown(j, {"classes", "domains", "samples", "meta"}, "top level");
    DatasetManifest manifest;
    manifest.classes = string_list(require(j, "classes", "top level"), "classes");
    manifest.domains = string_list(require(j, "domains", "top level"), "domains");
    const auto& samples = require(j, "samples", "top level");
    if (!samples.is_array()) {
        throw ParseError("manifest: 'samples' must be an array");
    }
    if (j.contains("meta")) {
        if (!j.at("meta").is_object()) {
            throw ParseError("manifest: 'meta' must be an object");
        }
        manifest.meta = j.at("meta");
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& item = samples[i];
        const std::string where = "samples[" + std::to_string(i) + "]";
        if (!item.is_object()) {
            throw ParseError("manifest: " + where + " must be an object");
        }
        reject_unknown(item, {"ref", "class", "domain", "split", "feature"}, where);
        Sample s;
        const auto& ref = require(item, "ref", where);
        if (!ref.is_string()) throw ParseError("manifest: " + where + ".ref must be a string");
        s.ref = ref.get<std::string>();
        const auto& cls = require(item, "class", where);
        if (!cls.is_number_integer()) throw ParseError("manifest: " + where + ".class must be an integer");
        s.class_id = cls.get<Index>();
        const auto& dom = require(item, "domain", where);
        if (dom.is_number_integer()) {
            s.domain_id = dom.get<Index>();
        } else if (!dom.is_null()) {
            throw ParseError("manifest: " + where + ".domain must be an integer or null");
        }
        const auto& split = require(item, "split", where);
        if (split == "train") {
            s.split = Split::Train;
        } else if (split == "test") {
            s.split = Split::Test;
        } else {
            throw ParseError("manifest: " + where + ".split must be \"train\" or \"test\"");
        }
        if (item.contains("feature")) {
            const auto& f = item.at("feature");
            if (!f.is_array() || !std::all_of(f.begin(), f.end(), [](const auto& v) { return v.is_number(); })) {
                throw ParseError("manifest: " + where + ".feature must be an array of numbers");
            }
            s.feature = f.get<std::vector<double>>();
        }
        manifest.samples.push_back(std::move(s));
    }
    manifest.validate();
    return manifest;
}

DatasetManifest load_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open manifest '" + path.string() + "'");
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("manifest '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return manifest_from_json(j);
}

void save_manifest(const DatasetManifest& manifest, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write manifest '" + path.string() + "'");
    }
    out << manifest_to_json(manifest).dump(1) << '\n';
}

Protocol parse_protocol(std::string_view text) {
    if (text == "multi-source" || text == "multi") return Protocol::MultiSource;
    if (text == "single-source" || text == "single") return Protocol::SingleSource;
    throw ConfigError("unknown protocol '" + std::string(text) + "'");
}

const char* to_string(Protocol protocol) {
    return protocol == Protocol::MultiSource ? "multi-source" : "single-source";
}

std::vector<ProtocolSplit> make_splits(const DatasetManifest& manifest, Protocol protocol) {
    const Index k = manifest.num_domains();
    if (k < 2) {
        throw ProtocolError("domain-shift protocols need at least two domains, got " + std::to_string(k));
    }
    std::vector<ProtocolSplit> splits;
    if (protocol == Protocol::MultiSource) {
        for (Index test = 0; test < k; ++test) {
            ProtocolSplit split{protocol, {}, {test}};
            for (Index d = 0; d < k; ++d) {
                if (d != test) split.train_domains.push_back(d);
            }
            splits.push_back(std::move(split));
        }
    } else {
        for (Index train = 0; train < k; ++train) {
            for (Index test = 0; test < k; ++test) {
                if (test != train) splits.push_back({protocol, {train}, {test}});
            }
        }
    }
    return splits;
}

DatasetManifest mask_domain_labels(const DatasetManifest& manifest, double ratio, std::uint64_t seed) {
    if (!(ratio >= 0.0 && ratio <= 1.0)) {
        throw ArgumentError("domain-label ratio must lie in [0, 1]");
    }
    std::vector<std::size_t> train;
    for (std::size_t i = 0; i < manifest.samples.size(); ++i) {
        if (manifest.samples[i].split == Split::Train) {
            train.push_back(i);
        }
    }
    const auto keep = static_cast<std::size_t>(std::lround(ratio * static_cast<double>(train.size())));
    Engine rng(derive_seed(seed, "mask.domains"));
    shuffle(train, rng);
    DatasetManifest out = manifest;
    for (std::size_t n = keep; n < train.size(); ++n) {
        out.samples[train[n]].domain_id.reset();
    }
    out.meta["domain_label_ratio"] = ratio;
    return out;
}

namespace {

bool contains(const std::vector<Index>& ids, std::optional<Index> id) {
    return id && std::find(ids.begin(), ids.end(), *id) != ids.end();
}

}  // namespace

DatasetManifest restrict_to_split(const DatasetManifest& manifest, const ProtocolSplit& split) {
    DatasetManifest out;
    out.classes = manifest.classes;
    out.domains = manifest.domains;
    out.meta = manifest.meta;
    for (const auto& s : manifest.samples) {
        if (contains(split.test_domains, s.domain_id)) {
            Sample copy = s;
            copy.split = Split::Test;
            out.samples.push_back(std::move(copy));
        } else if (s.split == Split::Train && contains(split.train_domains, s.domain_id)) {
            out.samples.push_back(s);
        }
    }
    return out;
}

std::vector<const Sample*> training_samples(const DatasetManifest& manifest, const ProtocolSplit& split) {
    std::vector<const Sample*> out;
    for (const auto& s : manifest.samples) {
        if (s.split == Split::Train && (!s.domain_id || contains(split.train_domains, s.domain_id))) {
            out.push_back(&s);
        }
    }
    return out;
}

std::vector<const Sample*> test_samples(const DatasetManifest& manifest, const ProtocolSplit& split) {
    std::vector<const Sample*> out;
    for (const auto& s : manifest.samples) {
        if (contains(split.test_domains, s.domain_id)) {
            out.push_back(&s);
        }
    }
    return out;
}

std::string describe_domains(const DatasetManifest& manifest, const std::vector<Index>& ids) {
    std::string out;
    for (Index id : ids) {
        if (!out.empty()) out += '+';
        out += manifest.domains.at(static_cast<std::size_t>(id));
    }
    return out;
}

}  // namespace codol
