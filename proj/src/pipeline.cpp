#include "hrsal/pipeline.hpp"

#include <chrono>

#include "hrsal/fusion.hpp"

namespace hrsal {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since, Clock::time_point until) {
    return std::chrono::duration<double, std::milli>(until - since).count();
}

}  // namespace

PipelineResult run_pipeline(const RasterImage& image, const RunConfig& cfg, PredictorSet& predictors,
                            PatchRefiner* consistency) {
    const auto t0 = Clock::now();
    SaliencyMap coarse = run_coarse(image, *predictors.coarse, predictors.work_size);
    const auto t1 = Clock::now();

    AttentionMap attention = build_attention_map(coarse, cfg.aps);
    std::vector<PatchSample> samples = sample_patches(attention, image.width(), image.height(), cfg.aps);
    const auto t2 = Clock::now();

    const auto guided = prepare_guided_patches(image, coarse, samples, predictors.work_size);
    const auto refined = run_refine_batch(guided, *predictors.refiner, predictors.work_size);
    const auto t3 = Clock::now();

    SaliencyMap fused = fuse(coarse, attention, refined, cfg.fusion);
    const auto t4 = Clock::now();

    SaliencyMap final_map = apply_consistency(image, fused, cfg.fusion, consistency);
    const auto t5 = Clock::now();

    StageTimings timings;
    timings.coarse = elapsed_ms(t0, t1);
    timings.sampling = elapsed_ms(t1, t2);
    timings.refine = elapsed_ms(t2, t3);
    timings.fusion = elapsed_ms(t3, t4);
    timings.consistency = elapsed_ms(t4, t5);
    timings.total = elapsed_ms(t0, t5);
    return PipelineResult{std::move(final_map), std::move(coarse), std::move(attention), std::move(samples),
                          timings};
}

PipelineResult run_pipeline(const RasterImage& image, const RunConfig& cfg) {
    cfg.validate();
    PredictorSet predictors = make_predictors(cfg.predictors);
    std::unique_ptr<PatchRefiner> consistency;
    if (cfg.consistency_endpoint) {
        consistency = std::make_unique<SidecarRefiner>(*cfg.consistency_endpoint, cfg.predictors.sidecar_timeout);
    }
    return run_pipeline(image, cfg, predictors, consistency.get());
}

}  // namespace hrsal
