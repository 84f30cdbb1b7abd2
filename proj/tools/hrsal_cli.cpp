// Command-line front end: run, eval, sample-patches, metrics.
//
// Settings are layered: built-in defaults, then --config, then flags.
// Exit status is 0 on success, 1 when some images failed, 2 on usage,
// configuration or other hard errors.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "hrsal/config.hpp"
#include "hrsal/dataset.hpp"
#include "hrsal/errors.hpp"
#include "hrsal/image_io.hpp"
#include "hrsal/pipeline.hpp"
#include "hrsal/report.hpp"

namespace {

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::string out;
    std::string coarse;
    std::string refiner;
    std::string fusion;
    std::string consistency;
};

void add_common_flags(CLI::App& cmd, Overrides& o) {
    cmd.add_option("--config", o.config, "Config file (key = value lines)")->check(CLI::ExistingFile);
    cmd.add_option("--seed", o.seed, "Sampler seed");
    cmd.add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
    cmd.add_option("--out", o.out, "Output directory");
    cmd.add_option("--coarse", o.coarse, "baseline | sidecar:CMD | sidecar:HOST:PORT");
    cmd.add_option("--refiner", o.refiner, "identity | local-contrast | sidecar:...");
    cmd.add_option("--fusion", o.fusion, "replace-uncertain | paste-all");
    cmd.add_option("--consistency", o.consistency, "none | edge-aware | sidecar:...");
}

hrsal::RunConfig resolve_config(const Overrides& o) {
    hrsal::RunConfig cfg;
    if (!o.config.empty()) cfg = hrsal::load_config(o.config, cfg);
    if (o.seed) cfg.aps.seed = *o.seed;
    if (o.jobs) cfg.jobs = *o.jobs;
    if (!o.out.empty()) cfg.out_dir = o.out;
    if (!o.coarse.empty()) hrsal::apply_setting(cfg, "predictors.coarse", o.coarse);
    if (!o.refiner.empty()) hrsal::apply_setting(cfg, "predictors.refiner", o.refiner);
    if (!o.fusion.empty()) hrsal::apply_setting(cfg, "fusion.mode", o.fusion);
    if (!o.consistency.empty()) hrsal::apply_setting(cfg, "fusion.consistency", o.consistency);
    cfg.validate();
    return cfg;
}

void print_summary(const hrsal::EvalSummary& s, const std::filesystem::path& out) {
    std::size_t ok = s.rows.size() - s.failed;
    fmt::print("evaluated {} image(s), {} failed, {} skipped\n", ok, s.failed, s.skipped);
    if (ok > 0) {
        fmt::print("mean F-beta {:.4f}  S-measure {:.4f}  MAE {:.4f}  BDE {}\n", s.mean.f_beta, s.mean.s_measure,
                   s.mean.mae, s.mean.bde ? fmt::format("{:.4f}", *s.mean.bde) : std::string("NA"));
    }
    for (const auto& row : s.rows) {
        if (!row.ok) fmt::print(stderr, "failed: {}: {}\n", row.id, row.error);
    }
    fmt::print("reports written to {}\n", out.string());
}

int cmd_run(const Overrides& o, const std::string& image_path) {
    const hrsal::RunConfig cfg = resolve_config(o);
    const hrsal::RasterImage image = hrsal::load_image(image_path);
    const hrsal::PipelineResult result = hrsal::run_pipeline(image, cfg);
    hrsal::write_run_artifacts(cfg.out_dir, result);
    fmt::print("{}x{}: {} patch(es), {:.1f} ms; maps written to {}\n", image.width(), image.height(),
               result.samples.size(), result.timings.total, cfg.out_dir.string());
    return 0;
}

int cmd_eval(const Overrides& o, const std::string& source, const std::string& layout_name) {
    const hrsal::RunConfig cfg = resolve_config(o);
    hrsal::DatasetLayout layout = std::filesystem::is_regular_file(source) ? hrsal::DatasetLayout::ManifestFile
                                                                          : hrsal::DatasetLayout::PairedDirs;
    if (layout_name == "paired-dirs") layout = hrsal::DatasetLayout::PairedDirs;
    if (layout_name == "manifest-file") layout = hrsal::DatasetLayout::ManifestFile;
    const hrsal::DatasetManifest manifest = hrsal::load_dataset(source, layout);
    for (const auto& line : manifest.skipped) fmt::print(stderr, "skipped: {}\n", line);
    const hrsal::EvalSummary summary = hrsal::evaluate_and_report(manifest, cfg);
    print_summary(summary, cfg.out_dir);
    return summary.exit_code();
}

int cmd_sample(const Overrides& o, const std::string& image_path, const std::string& coarse_path) {
    const hrsal::RunConfig cfg = resolve_config(o);
    std::optional<hrsal::SaliencyMap> coarse;
    int width = 0;
    int height = 0;
    if (!coarse_path.empty()) {
        coarse = hrsal::load_map(coarse_path);
        width = coarse->width();
        height = coarse->height();
    }
    if (!image_path.empty()) {
        const hrsal::RasterImage image = hrsal::load_image(image_path);
        if (coarse && (image.width() != width || image.height() != height)) {
            throw std::invalid_argument("coarse map and image differ in size");
        }
        if (!coarse) coarse = hrsal::run_coarse(image, cfg.predictors);
        width = image.width();
        height = image.height();
    }
    if (!coarse) throw std::invalid_argument("sample-patches needs an image or --coarse-map");
    const hrsal::AttentionMap attention = hrsal::build_attention_map(*coarse, cfg.aps);
    const auto samples = hrsal::sample_patches(attention, width, height, cfg.aps);
    if (!o.out.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        hrsal::save_mask(cfg.out_dir / "attention.png", attention);
    }
    std::cout << hrsal::patches_csv(samples);
    return 0;
}

int cmd_metrics(const Overrides& o, const std::string& pred_dir, const std::string& gt_dir) {
    const hrsal::RunConfig cfg = resolve_config(o);
    const auto manifest = hrsal::pair_directories(pred_dir, gt_dir, std::filesystem::path(pred_dir).filename().string());
    for (const auto& line : manifest.skipped) fmt::print(stderr, "skipped: {}\n", line);
    const hrsal::EvalSummary summary = hrsal::evaluate_maps(manifest, cfg.metrics, cfg.out_dir);
    print_summary(summary, cfg.out_dir);
    return summary.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"High-resolution salient object detection toolkit"};
    app.require_subcommand(1);

    Overrides o;
    std::string image_path;
    std::string source;
    std::string layout = "auto";
    std::string coarse_map;
    std::string pred_dir;
    std::string gt_dir;

    auto* run = app.add_subcommand("run", "Run the pipeline on one image and write its maps");
    run->add_option("image", image_path, "Input image")->required()->check(CLI::ExistingFile);
    add_common_flags(*run, o);

    auto* eval = app.add_subcommand("eval", "Evaluate the pipeline on a dataset");
    eval->add_option("dataset", source, "Directory with images/ and gt/, or a CSV manifest")->required();
    eval->add_option("--layout", layout, "auto | paired-dirs | manifest-file")
        ->check(CLI::IsMember({"auto", "paired-dirs", "manifest-file"}));
    add_common_flags(*eval, o);

    auto* sample = app.add_subcommand("sample-patches", "Print attended regions as t,x,y,w,h,origin");
    sample->add_option("image", image_path, "Input image")->check(CLI::ExistingFile);
    sample->add_option("--coarse-map", coarse_map, "Use this coarse map instead of predicting one")
        ->check(CLI::ExistingFile);
    add_common_flags(*sample, o);

    auto* metrics = app.add_subcommand("metrics", "Score prediction maps against ground truth");
    metrics->add_option("pred_dir", pred_dir, "Directory of predicted maps")->required();
    metrics->add_option("gt_dir", gt_dir, "Directory of ground-truth masks")->required();
    add_common_flags(*metrics, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) return cmd_run(o, image_path);
        if (eval->parsed()) return cmd_eval(o, source, layout);
        if (sample->parsed()) return cmd_sample(o, image_path, coarse_map);
        if (metrics->parsed()) return cmd_metrics(o, pred_dir, gt_dir);
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    }
    return 2;
}
