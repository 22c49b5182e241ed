// Copyright 2026 The codol Authors
// SPDX-License-Identifier: Apache-2.0

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "codol/errors.hpp"
#include "codol/pipeline.hpp"

namespace codol {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'C', 'O', 'D', 'O', 'L', 'C', 'K', 'P'};

nlohmann::json split_to_json(const ProtocolSplit& split) {
    return {{"protocol", to_string(split.protocol)},
            {"train_domains", split.train_domains},
            {"test_domains", split.test_domains}};
}

ProtocolSplit split_from_json(const nlohmann::json& j) {
    ProtocolSplit split;
    split.protocol = parse_protocol(j.at("protocol").get<std::string>());
    split.train_domains = j.at("train_domains").get<std::vector<Index>>();
    split.test_domains = j.at("test_domains").get<std::vector<Index>>();
    return split;
}

struct TensorRecord {
    std::string name;
    Index rows;
    Index cols;
    const double* data;  // column-major source
};

void append_row_major(std::string& out, const TensorRecord& t) {
    for (Index r = 0; r < t.rows; ++r) {
        for (Index c = 0; c < t.cols; ++c) {
            const double v = t.data[c * t.rows + r];
            char bytes[sizeof(double)];
            std::memcpy(bytes, &v, sizeof(double));
            out.append(bytes, sizeof(double));
        }
    }
}

Mat read_row_major(const std::string& blob, std::size_t offset, Index rows, Index cols) {
    const std::size_t bytes = static_cast<std::size_t>(rows * cols) * sizeof(double);
    if (offset + bytes > blob.size()) {
        throw ParseError("checkpoint tensor data truncated");
    }
    Mat m(rows, cols);
    const char* p = blob.data() + offset;
    for (Index r = 0; r < rows; ++r) {
        for (Index c = 0; c < cols; ++c) {
            double v;
            std::memcpy(&v, p, sizeof(double));
            p += sizeof(double);
            m(r, c) = v;
        }
    }
    return m;
}

}  // namespace

std::string checkpoint_bytes(const Checkpoint& ckpt) {
    std::vector<TensorRecord> tensors;
    PromptModel model = ckpt.model;
    model.for_each_tensor([&](const std::string& name, TensorView v) {
        tensors.push_back({"model." + name, v.rows, v.cols, v.data});
    });
    std::vector<NamedTensor> backend_params;
    if (ckpt.backend && ckpt.config.backend.name == "toy") {
        backend_params = ckpt.backend->parameters();
        for (const auto& t : backend_params) {
            tensors.push_back({"backend." + t.name, t.value.rows(), t.value.cols(), t.value.data()});
        }
    }

    nlohmann::json directory = nlohmann::json::array();
    std::string blob;
    for (const auto& t : tensors) {
        directory.push_back({{"name", t.name},
                             {"offset", blob.size()},
                             {"shape", {t.rows, t.cols}},
                             {"dtype", "f64"}});
        append_row_major(blob, t);
    }
    nlohmann::json header = {
        {"format_version", ckpt.format_version},
        {"config", to_json(ckpt.config)},
        {"dataset", ckpt.dataset},
        {"classes", ckpt.classes},
        {"domains", ckpt.domains},
        {"split", split_to_json(ckpt.split)},
        {"meta_nets", {{"dmn", ckpt.model.dmn.has_value()}, {"cmn", ckpt.model.cmn.has_value()}}},
        {"context_mode", to_string(ckpt.model.class_ctx.mode)},
        {"backend_hash", ckpt.backend_hash},
        {"backend_persisted", !backend_params.empty()},
        {"training_log", {{"epoch_loss", ckpt.epoch_loss}}},
        {"tensors", directory},
    };
    const std::string text = header.dump();
    std::string out(kMagic, sizeof(kMagic));
    const std::uint64_t length = text.size();
    char length_bytes[sizeof(length)];
    std::memcpy(length_bytes, &length, sizeof(length));
    out.append(length_bytes, sizeof(length));
    out += text;
    out += blob;
    return out;
}

Checkpoint checkpoint_from_bytes(const std::string& bytes) {
    if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
        throw ParseError("not a checkpoint file");
    }
    std::uint64_t length;
    std::memcpy(&length, bytes.data() + 8, sizeof(length));
    if (16 + length > bytes.size()) {
        throw ParseError("checkpoint header truncated");
    }
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(bytes.substr(16, length));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("checkpoint header is not valid JSON: ") + e.what());
    }
    const std::string blob = bytes.substr(16 + length);

    Checkpoint ckpt;
    try {
        ckpt.format_version = header.at("format_version").get<int>();
        if (ckpt.format_version != kCheckpointFormatVersion) {
            throw ParseError("unsupported checkpoint format version " + std::to_string(ckpt.format_version));
        }
        ckpt.config = train_config_from_json(header.at("config"));
        ckpt.dataset = header.at("dataset").get<std::string>();
        ckpt.classes = header.at("classes").get<std::vector<std::string>>();
        ckpt.domains = header.at("domains").get<std::vector<std::string>>();
        ckpt.split = split_from_json(header.at("split"));
        ckpt.backend_hash = header.at("backend_hash").get<std::string>();
        ckpt.epoch_loss = header.at("training_log").at("epoch_loss").get<std::vector<double>>();

        std::map<std::string, Mat> tensors;
        for (const auto& entry : header.at("tensors")) {
            const auto shape = entry.at("shape").get<std::vector<Index>>();
            if (shape.size() != 2 || entry.at("dtype") != "f64") {
                throw ParseError("checkpoint tensor '" + entry.at("name").get<std::string>() +
                                 "' has an unsupported layout");
            }
            tensors[entry.at("name").get<std::string>()] =
                read_row_major(blob, entry.at("offset").get<std::size_t>(), shape[0], shape[1]);
        }

        std::vector<NamedTensor> backend_params;
        for (const auto& [name, value] : tensors) {
            if (name.rfind("backend.", 0) == 0) {
                backend_params.push_back({name.substr(8), value});
            }
        }
        ckpt.backend = BackendRegistry::global().create(ckpt.config.backend,
                                                         backend_params.empty() ? nullptr : &backend_params);

        ModelInit init;
        init.variant = ckpt.config.variant;
        init.class_length = ckpt.config.class_length;
        init.domain_length = ckpt.config.domain_length;
        init.mode = parse_context_mode(header.at("context_mode").get<std::string>());
        init.zero_meta_nets = true;
        ckpt.model = init_model(init, ckpt.backend->descriptor(), static_cast<Index>(ckpt.classes.size()));
        if (!header.at("meta_nets").at("dmn").get<bool>()) ckpt.model.dmn.reset();
        if (!header.at("meta_nets").at("cmn").get<bool>()) ckpt.model.cmn.reset();
        ckpt.model.for_each_tensor([&](const std::string& name, TensorView view) {
            auto it = tensors.find("model." + name);
            if (it == tensors.end()) {
                throw ParseError("checkpoint is missing tensor 'model." + name + "'");
            }
            if (it->second.rows() != view.rows || it->second.cols() != view.cols) {
                throw ParseError("checkpoint tensor 'model." + name + "' has the wrong shape");
            }
            std::memcpy(view.data, it->second.data(), sizeof(double) * static_cast<std::size_t>(view.size()));
        });
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed checkpoint header: ") + e.what());
    }
    return ckpt;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write checkpoint '" + path.string() + "'");
    }
    const std::string bytes = checkpoint_bytes(checkpoint);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open checkpoint '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return checkpoint_from_bytes(buffer.str());
}

}  // namespace codol
