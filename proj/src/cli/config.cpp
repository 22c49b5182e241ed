// Copyright 2026 The codol Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cctype>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "codol/cli.hpp"
#include "codol/errors.hpp"

namespace codol::cli {

namespace {

// TOML reader that folds tables ([data], [train], [backend], ...) into
// top-level keys, so `lr = 0.1` under any table sets --lr. A key under a
// subcommand table stays scoped when that subcommand owns the option
// ([sweep] grid = ...). Section markers are dropped so a table never
// activates its subcommand.
class FlatToml : public CLI::ConfigTOML {
public:
    explicit FlatToml(std::map<std::string, std::set<std::string>> local) : local_(std::move(local)) {}

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        std::vector<CLI::ConfigItem> items = CLI::ConfigTOML::from_config(input);
        std::vector<CLI::ConfigItem> out;
        for (auto& item : items) {
            if (item.name == "++" || item.name == "--") {
                continue;
            }
            if (!item.parents.empty()) {
                const auto owner = local_.find(item.parents.front());
                const bool scoped = item.parents.size() == 1 && owner != local_.end() &&
                                    owner->second.count(item.name) != 0;
                if (!scoped) {
                    item.parents.clear();
                }
            }
            out.push_back(std::move(item));
        }
        return out;
    }

private:
    std::map<std::string, std::set<std::string>> local_;
};

std::string env_name(const std::string& option_name) {
    std::string env = "CODOL_";
    for (char c : option_name) {
        env += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    return env;
}

// Raw option values before conversion into RunConfig.
struct Raw {
    std::string variant = "codol";
    std::string context_mode = "unified";
    std::string lr_schedule = "cosine";
    std::string posterior = "joint";
    std::string protocol = "multi-source";
    std::string backend = "toy";
    std::uint64_t backend_seed = 0;
    Index feature_dim = 8;
    Index embed_dim = 8;
    Index depth = 2;
    Index hidden_dim = 0;
    std::string manifest;
    std::string scan_root;
    std::uint64_t synth_seed = 0;
    std::uint64_t synth_command_seed = 0;
    std::string cells;
    double label_ratio = -1.0;
};

void check(bool ok, const std::string& message) {
    if (!ok) {
        throw ConfigError(message);
    }
}

}  // namespace

RunConfig parse_args(const std::vector<std::string>& args) {
    RunConfig cfg;
    Raw raw;
    TrainConfig& t = cfg.train;
    cfg.synth_options.dim = 0;

    CLI::App app{"codol: domain-aware prompt learning over frozen dual encoders", "codol"};
    app.set_config("--config", "", "TOML config file; flags override it");
    app.require_subcommand(1);
    app.fallthrough();

    // model / training
    app.add_option("--variant", raw.variant,
                   "codol|codol-no-dmn|codol-cmn|coop|cocoop|zeroshot|zeroshot-domain");
    app.add_option("--class-length", t.class_length, "number of class context vectors (M_c)");
    app.add_option("--domain-length", t.domain_length, "number of domain context vectors (M_k)");
    app.add_option("--context-mode", raw.context_mode, "unified|class-specific");
    app.add_option("--epochs", t.epochs);
    app.add_option("--batch-size", t.batch_size);
    app.add_option("--grad-accumulation", t.grad_accumulation);
    app.add_option("--lr", t.lr);
    app.add_option("--lr-schedule", raw.lr_schedule, "cosine|constant");
    app.add_option("--momentum", t.momentum);
    app.add_option("--seed,--seeds", cfg.seeds, "training seeds, comma separated")->delimiter(',');
    app.add_option("--tau", t.tau, "temperature; <= 0 picks the backend default");
    app.add_option("--posterior", raw.posterior, "joint|per-domain");
    app.add_flag("--supervise-domain", t.supervise_domain, "use domain labels in the loss");
    app.add_flag("--zero-meta-nets", t.zero_meta_nets);
    app.add_flag("--freeze-meta-nets", t.freeze_meta_nets);
    // backend
    app.add_option("--backend", raw.backend);
    app.add_option("--backend-seed", raw.backend_seed);
    app.add_option("--feature-dim", raw.feature_dim);
    app.add_option("--embed-dim", raw.embed_dim);
    app.add_option("--depth", raw.depth);
    app.add_option("--hidden-dim", raw.hidden_dim, "0 means feature-dim");
    // data
    app.add_option("--manifest", raw.manifest, "dataset manifest (JSON)");
    app.add_option("--scan-root", raw.scan_root, "root/domain/class/image tree");
    app.add_flag("--synth", cfg.synth, "generate a synthetic dataset");
    app.add_option("--synth-seed", raw.synth_seed);
    app.add_option("--domains", cfg.synth_options.domains);
    app.add_option("--classes", cfg.synth_options.classes);
    app.add_option("--per-cell", cfg.synth_options.per_cell);
    app.add_option("--dim", cfg.synth_options.dim, "0 means feature-dim");
    app.add_option("--class-sep", cfg.synth_options.class_sep);
    app.add_option("--domain-shift", cfg.synth_options.domain_shift);
    app.add_option("--noise", cfg.synth_options.noise);
    app.add_flag("--aligned", cfg.synth_aligned, "centroids from the backend's zero-shot text features");
    app.add_option("--dataset-name", cfg.dataset_name);
    app.add_option("--protocol", raw.protocol, "multi-source|single-source");
    app.add_option("--label-ratio", raw.label_ratio, "fraction of training samples keeping domain labels");
    // output
    app.add_option("--out", cfg.out, "output directory");
    app.add_flag("--markdown", cfg.markdown, "also write a markdown table");
    app.add_option("--workers", cfg.workers);

    for (CLI::Option* opt : app.get_options()) {
        const std::string name = opt->get_single_name();
        if (name != "help" && name != "config") {
            opt->envname(env_name(name));
        }
    }

    app.add_subcommand("train", "train every split x seed; writes checkpoints and metrics");
    CLI::App* eval = app.add_subcommand("eval", "evaluate checkpoints and/or precomputed cells");
    eval->add_option("--checkpoint", cfg.checkpoints, "checkpoint file (repeatable)");
    eval->add_option("--cells", raw.cells, "metrics CSV with precomputed cells");
    CLI::App* zeroshot = app.add_subcommand("zeroshot", "hand-written prompt baseline");
    zeroshot->add_flag("--with-domain", cfg.with_domain, "append the domain name to the prompt");
    CLI::App* sweep = app.add_subcommand("sweep", "context-length grid");
    sweep->add_option("--grid", cfg.grid, "lengths; the grid is their square")->delimiter(',');
    CLI::App* ratio = app.add_subcommand("ratio", "domain-label ratio experiment");
    ratio->add_option("--ratios", cfg.ratios)->delimiter(',');
    CLI::App* align = app.add_subcommand("align", "image/text alignment analysis of a checkpoint");
    align->add_option("--checkpoint", cfg.checkpoints, "checkpoint file")->required();
    CLI::App* synth = app.add_subcommand("synth", "write a synthetic dataset manifest");
    synth->add_option("--seed", raw.synth_command_seed, "generator seed");

    std::map<std::string, std::set<std::string>> local;
    for (CLI::App* sub : app.get_subcommands({})) {
        for (const CLI::Option* opt : sub->get_options()) local[sub->get_name()].insert(opt->get_single_name());
    }
    app.config_formatter(std::make_shared<FlatToml>(std::move(local)));
    app.allow_config_extras(CLI::config_extras_mode::error);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        cfg.help = app.help();
        for (CLI::App* sub : app.get_subcommands()) {
            cfg.help = sub->help();
        }
        return cfg;
    } catch (const CLI::ParseError& e) {
        throw ConfigError(e.what());
    }
    cfg.command = app.get_subcommands().front()->get_name();

    t.variant = parse_variant(raw.variant);
    t.context_mode = parse_context_mode(raw.context_mode);
    t.lr_schedule = parse_lr_schedule(raw.lr_schedule);
    t.posterior_mode = parse_posterior_mode(raw.posterior);
    cfg.protocol = parse_protocol(raw.protocol);

    ToyBackendOptions toy;
    toy.seed = raw.backend_seed;
    toy.feature_dim = raw.feature_dim;
    toy.embed_dim = raw.embed_dim;
    toy.depth = raw.depth;
    toy.hidden_dim = raw.hidden_dim;
    t.backend.name = raw.backend;
    t.backend.options = to_json(toy);

    cfg.synth_options.seed = cfg.command == "synth" && synth->count("--seed") > 0 ? raw.synth_command_seed
                                                                                 : raw.synth_seed;
    if (cfg.synth_options.dim <= 0) {
        cfg.synth_options.dim = raw.feature_dim;
    }
    if (!raw.manifest.empty()) cfg.manifest = raw.manifest;
    if (!raw.scan_root.empty()) cfg.scan_root = raw.scan_root;
    if (!raw.cells.empty()) cfg.cells = raw.cells;
    if (raw.label_ratio >= 0.0) cfg.label_ratio = raw.label_ratio;

    check(!cfg.seeds.empty(), "seeds: at least one seed is required");
    check(cfg.workers >= 1, "workers: must be >= 1");
    check(!cfg.label_ratio || *cfg.label_ratio <= 1.0, "label-ratio: must lie in [0, 1]");
    for (double r : cfg.ratios) {
        check(r >= 0.0 && r <= 1.0, "ratios: every ratio must lie in [0, 1]");
    }
    check(!cfg.grid.empty(), "grid: at least one length is required");
    if (cfg.command != "eval" || !cfg.checkpoints.empty()) {
        t.validate();
    }

    const int sources = (cfg.manifest ? 1 : 0) + (cfg.scan_root ? 1 : 0) + (cfg.synth ? 1 : 0);
    const bool needs_dataset = cfg.command == "train" || cfg.command == "zeroshot" || cfg.command == "sweep" ||
                               cfg.command == "ratio" || cfg.command == "align" ||
                               (cfg.command == "eval" && !cfg.checkpoints.empty());
    if (needs_dataset) {
        check(sources == 1, "dataset source: exactly one of --manifest, --scan-root, --synth is required (got " +
                                std::to_string(sources) + ")");
    }
    if (cfg.command == "eval") {
        check(!cfg.checkpoints.empty() || cfg.cells, "eval: at least one --checkpoint or --cells is required");
    }
    if (cfg.command == "train") {
        check(is_trainable(t.variant), "variant: '" + raw.variant + "' has nothing to train; use `zeroshot`");
    }
    return cfg;
}

DatasetManifest load_dataset(const RunConfig& config) {
    DatasetManifest manifest;
    if (config.manifest) {
        manifest = load_manifest(*config.manifest);
    } else if (config.scan_root) {
        manifest = scan_layout(*config.scan_root);
    } else if (config.synth) {
        if (config.synth_aligned) {
            manifest = synth_aligned_dataset(config.synth_options, *make_backend(config.train));
        } else {
            manifest = synth_dataset(config.synth_options);
        }
    } else {
        throw ConfigError("dataset source: exactly one of --manifest, --scan-root, --synth is required");
    }
    if (!config.dataset_name.empty()) {
        manifest.meta["name"] = config.dataset_name;
    }
    return manifest;
}

ImageSource file_image_source(const BackendDescriptor& descriptor, std::filesystem::path base) {
    const Index width = descriptor.image_width;
    const Index height = descriptor.image_height;
    return [width, height, base = std::move(base)](const Sample& sample) {
        if (sample.feature) {
            return inline_feature_source(sample);
        }
        const std::filesystem::path path = base / sample.ref;
        const cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
        if (bgr.empty()) {
            throw IngestionError("cannot decode image '" + path.string() + "'");
        }
        cv::Mat small;
        cv::resize(bgr, small, cv::Size(static_cast<int>(width), static_cast<int>(height)), 0, 0,
                   cv::INTER_AREA);
        RawImage image;
        image.width = width;
        image.height = height;
        image.pixels.resize(static_cast<std::size_t>(3 * width * height));
        for (Index x = 0; x < width; ++x) {
            for (Index y = 0; y < height; ++y) {
                const cv::Vec3b px = small.at<cv::Vec3b>(static_cast<int>(y), static_cast<int>(x));
                for (Index c = 0; c < 3; ++c) {
                    // OpenCV stores BGR; the buffer is RGB, channel-major.
                    image.pixels[static_cast<std::size_t>((c * width + x) * height + y)] = px[2 - c] / 255.0;
                }
            }
        }
        return ImageInput::from_pixels(std::move(image));
    };
}

}  // namespace codol::cli
