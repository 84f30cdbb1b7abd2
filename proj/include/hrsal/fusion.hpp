/**
 * @file fusion.hpp
 * @brief Merging refined crops back into the coarse map, plus the
 *        full-resolution consistency pass.
 */
#pragma once

#include <vector>

#include "hrsal/image.hpp"
#include "hrsal/predictors.hpp"

namespace hrsal {

enum class FusionMode {
    ReplaceUncertain,  ///< only attended pixels take the patch average
    PasteAll,          ///< every covered pixel takes the patch average
};

enum class ConsistencyMode {
    None,
    EdgeAwareFilter,
    Sidecar,  ///< full-image refine through an external adapter
};

struct FusionPolicy {
    FusionMode mode = FusionMode::ReplaceUncertain;
    ConsistencyMode consistency = ConsistencyMode::None;
    int filter_radius = 8;
    double filter_edge_scale = 0.1;
    int consistency_size = 1024;  ///< warp size for the sidecar consistency pass

    void validate() const;
};

/// Per-pixel unweighted mean over every refined patch covering the pixel,
/// gated by `policy.mode`. Pixels no patch covers keep their coarse value.
SaliencyMap fuse(const SaliencyMap& coarse, const AttentionMap& attention, const std::vector<RefinedPatch>& refined,
                 const FusionPolicy& policy);

/// Joint bilateral smoothing of `map` over a (2r+1)^2 box window. Range
/// weights are exp(-(dL)^2 / (2 s^2)) on byte luminance differences scaled to
/// [0, 1], with s = edge_scale. Windows are truncated at the image border.
SaliencyMap edge_aware_filter(const RasterImage& image, const SaliencyMap& map, int radius, double edge_scale);

/// None returns `fused` unchanged, EdgeAwareFilter runs edge_aware_filter, and
/// Sidecar needs `refiner` (refine_full_image at consistency_size).
SaliencyMap apply_consistency(const RasterImage& image, const SaliencyMap& fused, const FusionPolicy& policy,
                              PatchRefiner* refiner = nullptr);

}  // namespace hrsal
