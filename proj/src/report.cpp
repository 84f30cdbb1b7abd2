#include "hrsal/report.hpp"

#include <atomic>
#include <fstream>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "hrsal/errors.hpp"
#include "hrsal/image_io.hpp"

namespace hrsal {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path.string() + ": cannot open for writing");
    out << text;
    out.flush();
    if (!out) throw IoError(path.string() + ": write failed");
}

void ensure_writable(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError(dir.string() + ": cannot create output directory");
    const fs::path probe = dir / ".write-probe";
    {
        std::ofstream out(probe, std::ios::binary | std::ios::trunc);
        if (!out || !(out << 'x') || !out.flush()) {
            throw IoError(dir.string() + ": output directory is not writable");
        }
    }
    fs::remove(probe, ec);
}

void make_subdir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError(dir.string() + ": cannot create directory");
}

std::string optional_number(const std::optional<double>& v) { return v ? format_number(*v) : "NA"; }

std::string pr_tsv(const PRCurve& curve) {
    std::string out = "threshold\tprecision\trecall\n";
    for (const PRPoint& p : curve) {
        out += fmt::format("{}\t{}\t{}\n", p.threshold, format_number(p.precision), format_number(p.recall));
    }
    return out;
}

std::string report_csv(const std::vector<ReportRow>& rows) {
    std::string out = "image,f_beta,s_measure,mae,bde,patch_count,gt_degenerate,status,error\n";
    for (const ReportRow& r : rows) {
        out += csv_field(r.id);
        if (r.ok) {
            out += fmt::format(",{},{},{},{},{},{},ok,", format_number(r.metrics.f_beta),
                               format_number(r.metrics.s_measure), format_number(r.metrics.mae),
                               optional_number(r.metrics.bde),
                               r.patch_count ? std::to_string(*r.patch_count) : std::string("NA"),
                               r.metrics.gt_degenerate ? 1 : 0);
        } else {
            out += ",NA,NA,NA,NA,NA,NA,failed," + csv_field(r.error);
        }
        out += '\n';
    }
    return out;
}

std::string timings_csv(const std::vector<ReportRow>& rows) {
    std::string out = "image,coarse_ms,sampling_ms,refine_ms,fusion_ms,consistency_ms,total_ms\n";
    for (const ReportRow& r : rows) {
        if (!r.timings) continue;
        const StageTimings& t = *r.timings;
        out += fmt::format("{},{:.3f},{:.3f},{:.3f},{:.3f},{:.3f},{:.3f}\n", csv_field(r.id), t.coarse, t.sampling,
                           t.refine, t.fusion, t.consistency, t.total);
    }
    return out;
}

std::string summary_md(const std::string& name, const EvalSummary& s) {
    std::size_t ok = 0;
    std::size_t degenerate = 0;
    std::size_t with_bde = 0;
    for (const ReportRow& r : s.rows) {
        if (!r.ok) continue;
        ++ok;
        if (r.metrics.gt_degenerate) ++degenerate;
        if (r.metrics.bde) ++with_bde;
    }
    auto mean = [&](double v) { return ok > 0 ? format_number(v) : std::string("NA"); };

    std::string out = fmt::format("# Evaluation summary: {}\n\n", name);
    out += "| images | evaluated | failed | skipped |\n|---|---|---|---|\n";
    out += fmt::format("| {} | {} | {} | {} |\n\n", s.rows.size(), ok, s.failed, s.skipped);
    out += "| metric | mean |\n|---|---|\n";
    out += fmt::format("| F-beta (adaptive) | {} |\n", mean(s.mean.f_beta));
    out += fmt::format("| S-measure | {} |\n", mean(s.mean.s_measure));
    out += fmt::format("| MAE | {} |\n", mean(s.mean.mae));
    out += fmt::format("| BDE | {} |\n", optional_number(s.mean.bde));
    out += fmt::format("\nBDE defined on {} of {} evaluated images. Degenerate ground truth: {}.\n", with_bde, ok,
                       degenerate);
    if (s.failed > 0) {
        out += "\n## Failed images\n\n";
        for (const ReportRow& r : s.rows) {
            if (!r.ok) out += fmt::format("- `{}`: {}\n", r.id, r.error);
        }
    }
    return out;
}

void finalize(EvalSummary& summary) {
    std::vector<MetricReport> good;
    for (const ReportRow& r : summary.rows) {
        if (r.ok) {
            good.push_back(r.metrics);
        } else {
            ++summary.failed;
        }
    }
    summary.mean = aggregate(good);
}

void write_reports(const fs::path& out_dir, const DatasetManifest& manifest, const EvalSummary& summary,
                   bool with_timings) {
    make_subdir(out_dir / "pr");
    for (const ReportRow& r : summary.rows) {
        if (r.ok) write_text(out_dir / "pr" / (r.id + ".tsv"), pr_tsv(r.metrics.pr));
    }
    write_text(out_dir / "report.csv", report_csv(summary.rows));
    if (with_timings) write_text(out_dir / "timings.csv", timings_csv(summary.rows));
    write_text(out_dir / "pr_mean.tsv", pr_tsv(summary.mean.pr));
    write_text(out_dir / "summary.md", summary_md(manifest.name, summary));
    std::string skipped;
    for (const std::string& line : manifest.skipped) skipped += line + '\n';
    write_text(out_dir / "skipped.txt", skipped);
}

// Pulls entries from a shared counter across `jobs` threads; each call of
// `work` fills the row at its own index.
template <typename Worker>
void run_pool(std::size_t count, int jobs, Worker make_worker) {
    std::atomic<std::size_t> next{0};
    auto loop = [&] {
        auto work = make_worker();
        for (std::size_t i = next++; i < count; i = next++) work(i);
    };
    const auto threads = static_cast<std::size_t>(std::max(1, jobs));
    if (threads == 1 || count <= 1) {
        loop();
        return;
    }
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < std::min(threads, count); ++t) pool.emplace_back(loop);
}

}  // namespace

std::string csv_field(const std::string& text) {
    if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string format_number(double v) { return fmt::format("{}", v); }

std::string patches_csv(const std::vector<PatchSample>& samples) {
    std::string out = "t,x,y,w,h,origin\n";
    for (const PatchSample& s : samples) {
        out += fmt::format("{},{},{},{},{},{}\n", s.column_index, s.region.x, s.region.y, s.region.w, s.region.h,
                           to_string(s.origin));
    }
    return out;
}

EvalSummary evaluate_and_report(const DatasetManifest& manifest, const RunConfig& cfg, PredictorFactory factory) {
    cfg.validate();
    ensure_writable(cfg.out_dir);
    make_subdir(cfg.out_dir / "maps");
    if (!factory) factory = [binding = cfg.predictors] { return make_predictors(binding); };

    EvalSummary summary;
    summary.skipped = manifest.skipped.size();
    summary.rows.resize(manifest.entries.size());

    run_pool(manifest.entries.size(), cfg.jobs, [&] {
        // Predictors are built lazily and rebuilt after any failure, so a
        // crashed sidecar only costs the image it crashed on.
        return [&, predictors = std::optional<PredictorSet>{},
                consistency = std::unique_ptr<PatchRefiner>{}](std::size_t i) mutable {
            const DatasetEntry& entry = manifest.entries[i];
            ReportRow& row = summary.rows[i];
            row.id = entry.id;
            try {
                if (!predictors) predictors = factory();
                if (cfg.fusion.consistency == ConsistencyMode::Sidecar && !consistency) {
                    consistency =
                        std::make_unique<SidecarRefiner>(*cfg.consistency_endpoint, cfg.predictors.sidecar_timeout);
                }
                const RasterImage image = load_image(entry.image);
                const BinaryMask gt = load_mask(entry.gt);
                if (gt.width() != image.width() || gt.height() != image.height()) {
                    throw std::invalid_argument(fmt::format("ground truth is {}x{} but image is {}x{}", gt.width(),
                                                            gt.height(), image.width(), image.height()));
                }
                PipelineResult result = run_pipeline(image, cfg, *predictors, consistency.get());
                row.metrics = evaluate(result.final_map, gt, cfg.metrics);
                row.patch_count = result.samples.size();
                row.timings = result.timings;
                save_map(cfg.out_dir / "maps" / (entry.id + ".png"), result.final_map);
                row.ok = true;
            } catch (const std::exception& e) {
                row.ok = false;
                row.error = e.what();
                row.patch_count.reset();
                row.timings.reset();
                predictors.reset();
                consistency.reset();
            }
        };
    });

    finalize(summary);
    write_reports(cfg.out_dir, manifest, summary, true);
    return summary;
}

EvalSummary evaluate_maps(const DatasetManifest& manifest, const MetricConfig& metrics, const fs::path& out_dir) {
    metrics.validate();
    ensure_writable(out_dir);
    EvalSummary summary;
    summary.skipped = manifest.skipped.size();
    for (const DatasetEntry& entry : manifest.entries) {
        ReportRow row;
        row.id = entry.id;
        try {
            const SaliencyMap pred = load_map(entry.image);
            const BinaryMask gt = load_mask(entry.gt);
            row.metrics = evaluate(pred, gt, metrics);
            row.ok = true;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        summary.rows.push_back(std::move(row));
    }
    finalize(summary);
    write_reports(out_dir, manifest, summary, false);
    return summary;
}

void write_run_artifacts(const fs::path& out_dir, const PipelineResult& result) {
    ensure_writable(out_dir);
    save_map(out_dir / "final.png", result.final_map);
    save_map(out_dir / "coarse.png", result.coarse);
    save_mask(out_dir / "attention.png", result.attention);
    write_text(out_dir / "patches.csv", patches_csv(result.samples));
}

}  // namespace hrsal
