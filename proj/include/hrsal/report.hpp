/**
 * @file report.hpp
 * @brief Dataset evaluation and the files it leaves behind.
 *
 * An evaluation directory holds:
 *
 *     report.csv     image,f_beta,s_measure,mae,bde,patch_count,gt_degenerate,status,error
 *     timings.csv    image,coarse_ms,sampling_ms,refine_ms,fusion_ms,consistency_ms,total_ms
 *     summary.md     aggregate table over the images that succeeded
 *     pr_mean.tsv    point-wise mean PR curve
 *     pr/NAME.tsv    threshold, precision, recall per image
 *     maps/NAME.png  final saliency map per image
 *     skipped.txt    dataset entries without a counterpart
 *
 * Rows appear in manifest order whatever the worker count. Undefined numbers
 * are written as `NA`. Everything except timings.csv is a pure function of
 * the inputs and the configuration.
 */
#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hrsal/config.hpp"
#include "hrsal/dataset.hpp"
#include "hrsal/metrics.hpp"
#include "hrsal/pipeline.hpp"

namespace hrsal {

struct ReportRow {
    std::string id;
    bool ok = false;
    std::string error;  ///< set when !ok
    MetricReport metrics;
    std::optional<std::size_t> patch_count;  ///< empty for map-only evaluation
    std::optional<StageTimings> timings;
};

struct EvalSummary {
    std::vector<ReportRow> rows;
    MetricReport mean;      ///< over successful rows
    std::size_t failed = 0;
    std::size_t skipped = 0;

    int exit_code() const { return failed == 0 ? 0 : 1; }
};

/// Builds one worker's predictors. The default uses cfg.predictors.
using PredictorFactory = std::function<PredictorSet()>;

/// Runs the pipeline on every manifest entry with cfg.jobs workers and
/// writes the evaluation directory under cfg.out_dir. Throws IoError before
/// any image is processed when cfg.out_dir cannot be written. One image's
/// failure marks its row and never touches the others.
EvalSummary evaluate_and_report(const DatasetManifest& manifest, const RunConfig& cfg,
                                PredictorFactory factory = {});

/// Scores existing maps (entry.image is the prediction) against ground
/// truth and writes the same files minus maps/ and timings.csv.
EvalSummary evaluate_maps(const DatasetManifest& manifest, const MetricConfig& metrics,
                          const std::filesystem::path& out_dir);

/// Writes final.png, coarse.png, attention.png and patches.csv for one run.
void write_run_artifacts(const std::filesystem::path& out_dir, const PipelineResult& result);

/// `t,x,y,w,h,origin` lines with a header.
std::string patches_csv(const std::vector<PatchSample>& samples);

/// RFC-4180 field quoting: quoted only when the field holds `,`, `"`, CR or LF.
std::string csv_field(const std::string& text);

/// Shortest round-trip decimal.
std::string format_number(double v);

}  // namespace hrsal
