// Copyright 2026 The codol Authors
// SPDX-License-Identifier: Apache-2.0

#include "codol/backend.hpp"

#include <cctype>
#include <memory>

#include <openssl/evp.h>

#include "codol/errors.hpp"
#include "codol/rng.hpp"

namespace codol {

ImageInput ImageInput::from_pixels(RawImage image) {
    if (image.width < 1 || image.height < 1) {
        throw ShapeError("raw image needs width and height >= 1");
    }
    if (static_cast<Index>(image.pixels.size()) != 3 * image.width * image.height) {
        throw ShapeError("raw image buffer must hold 3 x width x height values");
    }
    return ImageInput(std::move(image));
}

ImageInput ImageInput::from_feature(Vec feature) {
    if (feature.size() == 0) {
        throw ShapeError("pre-featurized image must be non-empty");
    }
    return ImageInput(std::move(feature));
}

std::vector<std::string> split_words(std::string_view name) {
    std::vector<std::string> words;
    std::string current;
    for (char ch : name) {
        if (std::isspace(static_cast<unsigned char>(ch)) || ch == '_') {
            if (!current.empty()) {
                words.push_back(std::move(current));
                current.clear();
            }
        } else {
            current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        }
    }
    if (!current.empty()) {
        words.push_back(std::move(current));
    }
    return words;
}

std::string parameter_hash(const DualEncoder& backend) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
    for (const auto& tensor : backend.parameters()) {
        EVP_DigestUpdate(ctx.get(), tensor.name.data(), tensor.name.size());
        const std::int64_t shape[2] = {tensor.value.rows(), tensor.value.cols()};
        EVP_DigestUpdate(ctx.get(), shape, sizeof(shape));
        EVP_DigestUpdate(ctx.get(), tensor.value.data(), sizeof(double) * tensor.value.size());
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    EVP_DigestFinal_ex(ctx.get(), digest, &length);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string hex;
    hex.reserve(2 * length);
    for (unsigned int i = 0; i < length; ++i) {
        hex.push_back(kHex[digest[i] >> 4]);
        hex.push_back(kHex[digest[i] & 0xf]);
    }
    return hex;
}

}  // namespace codol
