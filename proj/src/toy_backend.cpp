// Copyright 2026 The codol Authors
// SPDX-License-Identifier: Apache-2.0

#include "codol/toy_backend.hpp"

#include <cmath>
#include <string>

#include "codol/errors.hpp"
#include "codol/rng.hpp"

namespace codol {

namespace {

constexpr double kTokenStd = 1.0;
constexpr double kBiasStd = 0.1;

AffineLayer random_layer(Engine& rng, Index in, Index out) {
    AffineLayer layer;
    layer.weight = gaussian_matrix(rng, out, in, 1.0 / std::sqrt(static_cast<double>(in)));
    layer.bias = gaussian_vector(rng, out, kBiasStd);
    return layer;
}

// Layer widths: in -> hidden x (depth - 1) -> out.
std::vector<AffineLayer> random_stack(Engine& rng, Index in, Index hidden, Index out, Index depth) {
    std::vector<AffineLayer> layers;
    Index width = in;
    for (Index i = 0; i < depth; ++i) {
        const Index next = (i + 1 == depth) ? out : hidden;
        layers.push_back(random_layer(rng, width, next));
        width = next;
    }
    return layers;
}

Vec normalized(const Vec& x) {
    const double norm = x.norm();
    return norm > 0.0 ? Vec(x / norm) : x;
}

const Mat& find_tensor(const std::vector<NamedTensor>& tensors, const std::string& name) {
    for (const auto& t : tensors) {
        if (t.name == name) {
            return t.value;
        }
    }
    throw ParseError("toy backend parameter missing: " + name);
}

}  // namespace

const std::vector<std::string>& ToyBackend::base_vocabulary() {
    static const std::vector<std::string> words = {
        // zero-shot template
        "a", "photo", "of", "the", "drawn", "from", "domain",
        // style / source domains
        "art", "painting", "cartoon", "sketch", "caltech", "labelme", "pascal", "sun",
        "clipart", "product", "real", "world", "mnist", "m", "svhn", "syn",
        // object classes
        "dog", "elephant", "giraffe", "guitar", "horse", "house", "person",
        "bird", "car", "chair",
        "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine",
    };
    return words;
}

ToyBackend::ToyBackend(const ToyBackendOptions& options) : options_(options) {
    validate();
    const Index hidden = options_.hidden_dim > 0 ? options_.hidden_dim : options_.feature_dim;
    Engine token_rng(derive_seed(options_.seed, "toy.tokens"));
    token_table_ = gaussian_matrix(token_rng, options_.vocab_rows, options_.embed_dim, kTokenStd);
    Engine image_rng(derive_seed(options_.seed, "toy.image"));
    image_layers_ = random_stack(image_rng, 3 * options_.image_width * options_.image_height, hidden,
                                 options_.feature_dim, options_.depth);
    Engine text_rng(derive_seed(options_.seed, "toy.text"));
    text_layers_ = random_stack(text_rng, options_.embed_dim, hidden, options_.feature_dim, options_.depth);
    build_descriptor();
}

ToyBackend::ToyBackend(const ToyBackendOptions& options, const std::vector<NamedTensor>& parameters)
    : ToyBackend(options) {
    token_table_ = find_tensor(parameters, "token_table");
    auto restore = [&](std::vector<AffineLayer>& layers, const std::string& prefix) {
        for (std::size_t i = 0; i < layers.size(); ++i) {
            const std::string base = prefix + "." + std::to_string(i);
            const Mat& w = find_tensor(parameters, base + ".weight");
            const Mat& b = find_tensor(parameters, base + ".bias");
            if (w.rows() != layers[i].weight.rows() || w.cols() != layers[i].weight.cols() ||
                b.size() != layers[i].bias.size()) {
                throw ShapeError("toy backend parameter shape mismatch: " + base);
            }
            layers[i].weight = w;
            layers[i].bias = b.reshaped();
        }
    };
    if (token_table_.rows() != options_.vocab_rows || token_table_.cols() != options_.embed_dim) {
        throw ShapeError("toy backend token table shape mismatch");
    }
    restore(image_layers_, "image");
    restore(text_layers_, "text");
}

void ToyBackend::validate() const {
    if (options_.feature_dim < 2 || options_.embed_dim < 2) {
        throw ArgumentError("toy backend needs feature_dim and embed_dim >= 2");
    }
    if (options_.depth < 1) {
        throw ArgumentError("toy backend needs depth >= 1");
    }
    if (options_.max_length < 1 || options_.image_width < 1 || options_.image_height < 1 ||
        options_.hidden_dim < 0) {
        throw ArgumentError("toy backend shape options must be positive");
    }
    if (options_.vocab_rows <= static_cast<Index>(base_vocabulary().size())) {
        throw ArgumentError("toy backend vocab_rows must exceed the base vocabulary size");
    }
}

void ToyBackend::build_descriptor() {
    descriptor_.name = "toy";
    descriptor_.feature_dim = options_.feature_dim;
    descriptor_.embed_dim = options_.embed_dim;
    descriptor_.max_length = options_.max_length;
    descriptor_.image_width = options_.image_width;
    descriptor_.image_height = options_.image_height;
    descriptor_.normalize = options_.normalize;
    const auto& words = base_vocabulary();
    for (std::size_t i = 0; i < words.size(); ++i) {
        descriptor_.vocab.emplace(words[i], static_cast<Index>(i));
    }
}

double ToyBackend::position_weight(Index position, Index channel, Index embed_dim) {
    const double frequency =
        std::pow(10000.0, -static_cast<double>(channel) / static_cast<double>(embed_dim));
    return 1.0 + 0.5 * std::sin(static_cast<double>(position + 1) * frequency);
}

Index ToyBackend::token_row(std::string_view word) const {
    auto it = descriptor_.vocab.find(std::string(word));
    if (it != descriptor_.vocab.end()) {
        return it->second;
    }
    const auto base = static_cast<std::uint64_t>(descriptor_.vocab.size());
    const auto spare = static_cast<std::uint64_t>(options_.vocab_rows) - base;
    return static_cast<Index>(base + fnv1a(word) % spare);
}

Mat ToyBackend::embed_name(std::string_view name) const {
    const auto words = split_words(name);
    if (words.empty()) {
        throw ArgumentError("cannot embed an empty name");
    }
    Mat out(static_cast<Index>(words.size()), options_.embed_dim);
    for (std::size_t i = 0; i < words.size(); ++i) {
        out.row(static_cast<Index>(i)) = token_table_.row(token_row(words[i]));
    }
    return out;
}

Vec ToyBackend::encode_image(const ImageInput& image) const {
    if (image.is_feature()) {
        if (image.feature().size() != options_.feature_dim) {
            throw ShapeError("pre-featurized image has length " + std::to_string(image.feature().size()) +
                             ", backend expects " + std::to_string(options_.feature_dim));
        }
        return options_.normalize ? normalized(image.feature()) : image.feature();
    }
    const RawImage& raw = image.raw();
    if (raw.width != options_.image_width || raw.height != options_.image_height) {
        throw ShapeError("raw image shape does not match backend descriptor");
    }
    Vec h = Eigen::Map<const Vec>(raw.pixels.data(), static_cast<Index>(raw.pixels.size()));
    for (const auto& layer : image_layers_) {
        h = (layer.weight * h + layer.bias).array().tanh().matrix();
    }
    return options_.normalize ? normalized(h) : h;
}

namespace {

// Activations of the text tower, kept for the backward pass.
struct TextTrace {
    std::vector<Vec> inputs;  // input to each layer
    Vec output;               // pre-normalization output
};

Vec pool_tokens(const Mat& tokens) {
    const Index length = tokens.rows();
    const Index dim = tokens.cols();
    Vec pooled = Vec::Zero(dim);
    for (Index l = 0; l < length; ++l) {
        for (Index b = 0; b < dim; ++b) {
            pooled(b) += ToyBackend::position_weight(l, b, dim) * tokens(l, b);
        }
    }
    return pooled / static_cast<double>(length);
}

TextTrace run_text_tower(const std::vector<AffineLayer>& layers, const Vec& pooled) {
    TextTrace trace;
    Vec h = pooled;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        trace.inputs.push_back(h);
        h = layers[i].weight * h + layers[i].bias;
        if (i + 1 < layers.size()) {
            h = h.array().tanh().matrix();
        }
    }
    trace.output = std::move(h);
    return trace;
}

void check_sequence(const TokenSequence& sequence, const ToyBackendOptions& options) {
    if (sequence.length() < 1) {
        throw LengthError("token sequence must contain at least one token");
    }
    if (sequence.length() > options.max_length) {
        throw LengthError("token sequence length " + std::to_string(sequence.length()) + " exceeds maximum " +
                          std::to_string(options.max_length));
    }
    if (sequence.embeddings.cols() != options.embed_dim) {
        throw ShapeError("token embeddings must have width " + std::to_string(options.embed_dim));
    }
}

}  // namespace

Vec ToyBackend::encode_text(const TokenSequence& sequence) const {
    check_sequence(sequence, options_);
    TextTrace trace = run_text_tower(text_layers_, pool_tokens(sequence.embeddings));
    return options_.normalize ? normalized(trace.output) : trace.output;
}

Mat ToyBackend::encode_text_backward(const TokenSequence& sequence, const Vec& grad_feature) const {
    check_sequence(sequence, options_);
    if (grad_feature.size() != options_.feature_dim) {
        throw ShapeError("feature gradient has wrong length");
    }
    const TextTrace trace = run_text_tower(text_layers_, pool_tokens(sequence.embeddings));
    Vec g = grad_feature;
    if (options_.normalize) {
        const double norm = trace.output.norm();
        if (norm > 0.0) {
            const Vec y = trace.output / norm;
            g = (g - y * y.dot(g)) / norm;
        }
    }
    for (std::size_t i = text_layers_.size(); i-- > 0;) {
        if (i + 1 < text_layers_.size()) {
            // trace.inputs[i + 1] is tanh of this layer's pre-activation
            g = (g.array() * (1.0 - trace.inputs[i + 1].array().square())).matrix();
        }
        g = text_layers_[i].weight.transpose() * g;
    }
    const Index length = sequence.length();
    const Index dim = options_.embed_dim;
    Mat grad(length, dim);
    for (Index l = 0; l < length; ++l) {
        for (Index b = 0; b < dim; ++b) {
            grad(l, b) = position_weight(l, b, dim) * g(b) / static_cast<double>(length);
        }
    }
    return grad;
}

std::vector<NamedTensor> ToyBackend::parameters() const {
    std::vector<NamedTensor> out;
    out.push_back({"token_table", token_table_});
    auto append = [&](const std::vector<AffineLayer>& layers, const std::string& prefix) {
        for (std::size_t i = 0; i < layers.size(); ++i) {
            const std::string base = prefix + "." + std::to_string(i);
            out.push_back({base + ".weight", layers[i].weight});
            out.push_back({base + ".bias", layers[i].bias});
        }
    };
    append(image_layers_, "image");
    append(text_layers_, "text");
    return out;
}

BackendPtr make_toy_backend(std::uint64_t seed, Index feature_dim, Index embed_dim, Index depth) {
    ToyBackendOptions options;
    options.seed = seed;
    options.feature_dim = feature_dim;
    options.embed_dim = embed_dim;
    options.depth = depth;
    return std::make_shared<ToyBackend>(options);
}

}  // namespace codol
