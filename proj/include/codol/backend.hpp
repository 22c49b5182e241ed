// Copyright 2026 The codol Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "codol/types.hpp"

namespace codol {

struct BackendDescriptor {
    std::string name;
    Index feature_dim = 0;  // D
    Index embed_dim = 0;    // B
    Index max_length = 0;
    // Raw image shape accepted by encode_image (3 x width x height).
    Index image_width = 0;
    Index image_height = 0;
    bool normalize = true;
    std::map<std::string, Index> vocab;
};

// Channel-major pixel buffer, 3 x width x height.
struct RawImage {
    Index width = 0;
    Index height = 0;
    std::vector<double> pixels;
};

class ImageInput {
public:
    static ImageInput from_pixels(RawImage image);
    // Pre-featurized inputs skip the image tower; only normalization applies.
    static ImageInput from_feature(Vec feature);

    bool is_feature() const { return std::holds_alternative<Vec>(payload_); }
    const RawImage& raw() const { return std::get<RawImage>(payload_); }
    const Vec& feature() const { return std::get<Vec>(payload_); }

private:
    explicit ImageInput(std::variant<RawImage, Vec> payload) : payload_(std::move(payload)) {}
    std::variant<RawImage, Vec> payload_;
};

// One embedded token per row (L x B).
struct TokenSequence {
    Mat embeddings;

    Index length() const { return embeddings.rows(); }
};

struct NamedTensor {
    std::string name;
    Mat value;
};

// Frozen image/text dual encoder. Implementations must be immutable after
// construction; every method is const and safe to call concurrently.
class DualEncoder {
public:
    virtual ~DualEncoder() = default;

    virtual const BackendDescriptor& descriptor() const = 0;

    virtual Vec encode_image(const ImageInput& image) const = 0;
    virtual Vec encode_text(const TokenSequence& sequence) const = 0;

    // Vector-Jacobian product of encode_text: given dL/d(feature), returns
    // dL/d(embeddings) with the same L x B shape as the input.
    virtual Mat encode_text_backward(const TokenSequence& sequence, const Vec& grad_feature) const = 0;

    // Embeds a (possibly multi-word) name; one row per sub-token.
    virtual Mat embed_name(std::string_view name) const = 0;

    // Frozen parameters, in a stable order. Used for hashing and persistence.
    virtual std::vector<NamedTensor> parameters() const = 0;
};

using BackendPtr = std::shared_ptr<const DualEncoder>;

// SHA-256 hex digest over the backend's parameter names, shapes and bytes.
std::string parameter_hash(const DualEncoder& backend);

// Splits a name into whole-word tokens (whitespace and '_' separate words).
std::vector<std::string> split_words(std::string_view name);

}  // namespace codol
