/**
 * @file pipeline.hpp
 * @brief One image through coarse prediction, sampling, refinement, fusion
 *        and the consistency pass.
 */
#pragma once

#include <vector>

#include "hrsal/attention_sampler.hpp"
#include "hrsal/config.hpp"
#include "hrsal/image.hpp"
#include "hrsal/predictors.hpp"

namespace hrsal {

/// Wall time per stage in milliseconds. `total` spans all stages.
struct StageTimings {
    double coarse = 0.0;
    double sampling = 0.0;
    double refine = 0.0;
    double fusion = 0.0;
    double consistency = 0.0;
    double total = 0.0;
};

struct PipelineResult {
    SaliencyMap final_map;
    SaliencyMap coarse;
    AttentionMap attention;
    std::vector<PatchSample> samples;
    StageTimings timings;
};

/// `consistency` serves the sidecar consistency pass and may be null for the
/// other modes.
PipelineResult run_pipeline(const RasterImage& image, const RunConfig& cfg, PredictorSet& predictors,
                            PatchRefiner* consistency = nullptr);

/// Builds its own predictors from cfg.predictors (and the consistency
/// endpoint, when one is configured).
PipelineResult run_pipeline(const RasterImage& image, const RunConfig& cfg);

}  // namespace hrsal
