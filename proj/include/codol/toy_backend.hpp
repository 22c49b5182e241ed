// Copyright 2026 The codol Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "codol/backend.hpp"

namespace codol {

struct ToyBackendOptions {
    std::uint64_t seed = 0;
    Index feature_dim = 8;
    Index embed_dim = 8;
    Index depth = 2;
    // Width of the hidden layers in both towers; 0 means feature_dim.
    Index hidden_dim = 0;
    Index max_length = 77;
    Index image_width = 2;
    Index image_height = 2;
    Index vocab_rows = 512;
    bool normalize = true;
};

struct AffineLayer {
    Mat weight;  // out x in
    Vec bias;
};

// Deterministic stand-in for a pretrained dual encoder.
//
// Image tower: flattened pixels -> [affine -> tanh] x depth.
// Text tower: position-weighted mean of token embeddings (fixed sinusoidal
// weights per position and channel) -> [affine -> tanh] x (depth - 1) -> affine.
// Both towers optionally L2-normalize the output.
//
// Words listed in base_vocabulary() occupy the first rows of the token table;
// any other word is hashed into the remaining rows.
class ToyBackend final : public DualEncoder {
public:
    explicit ToyBackend(const ToyBackendOptions& options);
    // Rebuilds a backend from persisted parameters (bit-exact).
    ToyBackend(const ToyBackendOptions& options, const std::vector<NamedTensor>& parameters);

    const BackendDescriptor& descriptor() const override { return descriptor_; }
    const ToyBackendOptions& options() const { return options_; }

    Vec encode_image(const ImageInput& image) const override;
    Vec encode_text(const TokenSequence& sequence) const override;
    Mat encode_text_backward(const TokenSequence& sequence, const Vec& grad_feature) const override;
    Mat embed_name(std::string_view name) const override;
    std::vector<NamedTensor> parameters() const override;

    Index token_row(std::string_view word) const;
    // Pooling weight for channel b at position l; the pooled vector is the
    // weighted mean over positions.
    static double position_weight(Index position, Index channel, Index embed_dim);

    const std::vector<AffineLayer>& image_layers() const { return image_layers_; }
    const std::vector<AffineLayer>& text_layers() const { return text_layers_; }
    const Mat& token_table() const { return token_table_; }

    static const std::vector<std::string>& base_vocabulary();

private:
    void build_descriptor();
    void validate() const;

    ToyBackendOptions options_;
    BackendDescriptor descriptor_;
    Mat token_table_;  // vocab_rows x B
    std::vector<AffineLayer> image_layers_;
    std::vector<AffineLayer> text_layers_;
};

BackendPtr make_toy_backend(std::uint64_t seed, Index feature_dim, Index embed_dim, Index depth);

}  // namespace codol
