// Copyright 2026 The codol Authors
// SPDX-License-Identifier: Apache-2.0

#include <string>

#include "codol/data.hpp"
#include "codol/errors.hpp"
#include "codol/prompt.hpp"
#include "codol/rng.hpp"

namespace codol {

namespace {

const std::vector<std::string> kDomainNames = {"art_painting", "cartoon", "photo", "sketch",
                                               "clipart", "product", "real_world", "infograph"};
const std::vector<std::string> kClassNames = {"dog", "elephant", "giraffe", "guitar", "horse",
                                              "house", "person", "bird", "car", "chair"};

std::string pick_name(const std::vector<std::string>& names, Index i, const char* fallback) {
    return i < static_cast<Index>(names.size()) ? names[static_cast<std::size_t>(i)]
                                                : fallback + std::to_string(i);
}

struct DomainShift {
    Mat rotation;
    Vec offset;
};

void check_options(const SynthOptions& o) {
    if (o.domains < 2 || o.classes < 2) {
        throw ArgumentError("synthetic dataset needs at least two domains and two classes");
    }
    if (o.per_cell < 1 || o.dim < 1) {
        throw ArgumentError("synthetic dataset needs per_cell >= 1 and dim >= 1");
    }
}

std::vector<DomainShift> domain_shifts(Engine& rng, const SynthOptions& o) {
    const Index d = o.dim;
    const Mat identity = Mat::Identity(d, d);
    std::vector<DomainShift> shifts;
    for (Index k = 0; k < o.domains; ++k) {
        const Mat g = gaussian_matrix(rng, d, d, 1.0 / std::sqrt(static_cast<double>(d)));
        const Mat skew = o.domain_shift * 0.5 * (g - g.transpose());
        // Cayley transform: orthogonal, identity when the skew part vanishes.
        DomainShift shift;
        shift.rotation = (identity - skew).partialPivLu().solve(identity + skew);
        const Vec u = gaussian_vector(rng, d, 1.0);
        shift.offset = o.domain_shift * u / u.norm();
        shifts.push_back(std::move(shift));
    }
    return shifts;
}

DatasetManifest empty_manifest(const SynthOptions& o) {
    DatasetManifest manifest;
    for (Index k = 0; k < o.domains; ++k) manifest.domains.push_back(pick_name(kDomainNames, k, "domain"));
    for (Index y = 0; y < o.classes; ++y) manifest.classes.push_back(pick_name(kClassNames, y, "class"));
    return manifest;
}

// centroid(y, k) is the cell mean before the domain shift.
template <typename Centroid>
void fill_samples(DatasetManifest& manifest, Engine& rng, const SynthOptions& o,
                  const std::vector<DomainShift>& shifts, Centroid centroid) {
    for (Index k = 0; k < o.domains; ++k) {
        const DomainShift& shift = shifts[static_cast<std::size_t>(k)];
        for (Index y = 0; y < o.classes; ++y) {
            const Vec mean = shift.rotation * centroid(y, k) + shift.offset;
            for (Index i = 0; i < o.per_cell; ++i) {
                const Vec x = mean + gaussian_vector(rng, o.dim, o.noise);
                Sample s;
                s.ref = "synth/" + manifest.domains[static_cast<std::size_t>(k)] + "/" +
                        manifest.classes[static_cast<std::size_t>(y)] + "/" + std::to_string(i);
                s.class_id = y;
                s.domain_id = k;
                s.feature = std::vector<double>(x.data(), x.data() + x.size());
                manifest.samples.push_back(std::move(s));
            }
        }
    }
}

nlohmann::json synth_meta(const SynthOptions& o) {
    return {{"source", "synth"},
            {"seed", o.seed},
            {"dim", o.dim},
            {"per_cell", o.per_cell},
            {"class_sep", o.class_sep},
            {"domain_shift", o.domain_shift},
            {"noise", o.noise}};
}

}  // namespace

DatasetManifest synth_dataset(const SynthOptions& o) {
    check_options(o);
    Engine rng(derive_seed(o.seed, "synth"));
    std::vector<Vec> centroids;
    for (Index y = 0; y < o.classes; ++y) {
        Vec c = gaussian_vector(rng, o.dim, 1.0);
        centroids.push_back(o.class_sep * c / c.norm());
    }
    const auto shifts = domain_shifts(rng, o);
    DatasetManifest manifest = empty_manifest(o);
    fill_samples(manifest, rng, o, shifts, [&](Index y, Index) { return centroids[static_cast<std::size_t>(y)]; });
    manifest.meta = synth_meta(o);
    return manifest;
}

DatasetManifest synth_aligned_dataset(const SynthOptions& options, const DualEncoder& backend) {
    SynthOptions o = options;
    o.dim = backend.descriptor().feature_dim;
    check_options(o);
    Engine rng(derive_seed(o.seed, "synth.aligned"));
    const auto shifts = domain_shifts(rng, o);
    DatasetManifest manifest = empty_manifest(o);
    const NameVocabulary vocab(backend, manifest.classes, manifest.domains);
    fill_samples(manifest, rng, o, shifts, [&](Index y, Index k) {
        const PromptAssembly prompt = assemble_zeroshot(vocab, y, k, backend);
        return Vec(o.class_sep * backend.encode_text(prompt.sequence));
    });
    manifest.meta = synth_meta(o);
    manifest.meta["aligned"] = true;
    return manifest;
}

}  // namespace codol
