/**
 * @file predictors.hpp
 * @brief Coarse-predictor and patch-refiner seats, and the resampling around them.
 *
 * The coarse predictor sees the whole image warped to work_size x work_size
 * and its output is warped back to full resolution. The refiner sees one
 * attended crop warped to work_size x work_size together with the aligned
 * crop of the coarse map (the guidance).
 *
 * Refined maps return to native resolution as a residual: the change the
 * refiner made at work size is upsampled and added to the native-resolution
 * guidance crop. A refiner that returns its guidance therefore reproduces the
 * coarse map exactly, and any other refiner differs from plain upsampling
 * only by the detail the guidance lost in its own downsampling.
 */
#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hrsal/attention_sampler.hpp"
#include "hrsal/image.hpp"
#include "hrsal/sidecar.hpp"

namespace hrsal {

enum class CoarseKind { BaselineContrast, Sidecar };
enum class RefinerKind { Identity, LocalContrast, Sidecar };

struct PredictorBinding {
    CoarseKind coarse = CoarseKind::BaselineContrast;
    std::optional<sidecar::Endpoint> coarse_endpoint;
    RefinerKind refiner = RefinerKind::LocalContrast;
    std::optional<sidecar::Endpoint> refiner_endpoint;
    int work_size = 384;
    std::chrono::milliseconds sidecar_timeout{30000};

    /// Checks work_size >= 16 and that every sidecar seat names an endpoint.
    void validate() const;

    /// "baseline" | "sidecar:ENDPOINT"
    static void parse_coarse(const std::string& text, PredictorBinding& binding);
    /// "identity" | "local-contrast" | "sidecar:ENDPOINT"
    static void parse_refiner(const std::string& text, PredictorBinding& binding);
};

std::string describe_coarse(const PredictorBinding& binding);
std::string describe_refiner(const PredictorBinding& binding);

/// Full-image predictor operating at work size.
class CoarsePredictor {
public:
    virtual ~CoarsePredictor() = default;
    virtual SaliencyMap predict(const RasterImage& image) = 0;
};

/// Crop refiner operating at work size; `guidance` has the image's dimensions.
class PatchRefiner {
public:
    virtual ~PatchRefiner() = default;
    virtual SaliencyMap refine(const RasterImage& patch, const SaliencyMap& guidance) = 0;
};

/// Distance of each pixel's blurred color from the mean image color,
/// min-max normalized. Flat images give an all-zero map.
class BaselineContrastPredictor final : public CoarsePredictor {
public:
    SaliencyMap predict(const RasterImage& image) override;
};

class IdentityRefiner final : public PatchRefiner {
public:
    SaliencyMap refine(const RasterImage& patch, const SaliencyMap& guidance) override;
};

/// Min-max stretches the guidance and blends the stretched value in where
/// the patch has luminance structure:
///
///     g      = guidance
///     s      = (g - min g) / (max g - min g)      (s = g when max g == min g)
///     m      = |grad L| by central differences on luminance L (edge-clamped)
///     e      = box_2(m) / max box_2(m)            (e = 0 when the max is 0)
///     out    = clamp((1 - e) * g + e * s, 0, 1)
///
/// box_2 is a 5x5 box mean over the in-image part of the window.
class LocalContrastRefiner final : public PatchRefiner {
public:
    SaliencyMap refine(const RasterImage& patch, const SaliencyMap& guidance) override;
};

class SidecarCoarsePredictor final : public CoarsePredictor {
public:
    SidecarCoarsePredictor(sidecar::Endpoint endpoint, std::chrono::milliseconds timeout);
    SaliencyMap predict(const RasterImage& image) override { return client_.coarse(image); }

private:
    sidecar::SidecarClient client_;
};

class SidecarRefiner final : public PatchRefiner {
public:
    SidecarRefiner(sidecar::Endpoint endpoint, std::chrono::milliseconds timeout);
    SaliencyMap refine(const RasterImage& patch, const SaliencyMap& guidance) override {
        return client_.refine(patch, guidance);
    }

private:
    sidecar::SidecarClient client_;
};

/// The predictor instances one worker owns (one sidecar connection each).
struct PredictorSet {
    std::unique_ptr<CoarsePredictor> coarse;
    std::unique_ptr<PatchRefiner> refiner;
    int work_size = 384;
};

PredictorSet make_predictors(const PredictorBinding& binding);

struct GuidedPatch {
    RasterImage image_patch;      ///< crop warped to work_size^2
    SaliencyMap guidance;         ///< same crop of the coarse map, warped to work_size^2
    SaliencyMap native_guidance;  ///< same crop at native resolution
    Region region;
};

struct RefinedPatch {
    Region region;
    SaliencyMap map;  ///< region.w x region.h
};

/// Warp to work size, predict, warp back. Output has the input's dimensions.
SaliencyMap run_coarse(const RasterImage& image, CoarsePredictor& predictor, int work_size);
SaliencyMap run_coarse(const RasterImage& image, const PredictorBinding& binding);

std::vector<GuidedPatch> prepare_guided_patches(const RasterImage& image, const SaliencyMap& coarse,
                                                const std::vector<PatchSample>& samples, int work_size);

/// Refines every patch in order; the first failure aborts the whole batch.
std::vector<RefinedPatch> run_refine_batch(const std::vector<GuidedPatch>& patches, PatchRefiner& refiner,
                                           int work_size);

/// Runs `refiner` over the whole image warped to `size` x `size`, with `map`
/// as guidance, and brings the result back with the same residual warp.
SaliencyMap refine_full_image(const RasterImage& image, const SaliencyMap& map, PatchRefiner& refiner, int size);

}  // namespace hrsal
