/**
 * @file metrics.hpp
 * @brief Saliency evaluation: MAE, adaptive F-beta, PR curves, S-measure, BDE.
 */
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hrsal/image.hpp"

namespace hrsal {

struct MetricConfig {
    double beta_sq = 0.3;
    int pr_levels = 256;            ///< thresholds spread evenly over 0..255
    double s_alpha = 0.5;
    std::uint8_t bde_threshold = 128;  ///< byte value at or above which a soft map is foreground

    void validate() const;
};

struct PRPoint {
    int threshold = 0;
    double precision = 0.0;
    double recall = 0.0;
};

using PRCurve = std::vector<PRPoint>;

struct FBetaResult {
    double f_beta = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double threshold = 0.0;     ///< real-valued cut: positives are pred > threshold
    bool gt_degenerate = false; ///< ground truth has no foreground; f_beta reported as 0
};

double mae(const SaliencyMap& pred, const BinaryMask& gt);

/// Binarizes at min(2 * mean(pred), 1 - 1/510). Precision is 0 when nothing
/// is predicted and F is 0 when its denominator vanishes.
FBetaResult f_beta_adaptive(const SaliencyMap& pred, const BinaryMask& gt, const MetricConfig& cfg = {});

double f_beta_from(double precision, double recall, double beta_sq);

/// Points for thresholds tau_k = round(255 k / (levels - 1)); positives are
/// byte_scale(pred) > tau. Precision is 1 when nothing is predicted; recall
/// is 0 when the ground truth is empty.
PRCurve pr_curve(const SaliencyMap& pred, const BinaryMask& gt, const MetricConfig& cfg = {});

/// Structure measure: alpha * S_object + (1 - alpha) * S_region, with the
/// usual special cases for all-background / all-foreground ground truth.
double s_measure(const SaliencyMap& pred, const BinaryMask& gt, const MetricConfig& cfg = {});

/// Foreground pixels with a background or off-image 4-neighbour.
BinaryMask boundary_of(const BinaryMask& mask);

/// Exact squared Euclidean distance from every pixel to the nearest set
/// pixel of `mask`; +inf everywhere when the mask is empty.
std::vector<double> squared_distance_to(const BinaryMask& mask);

/// Symmetric mean boundary displacement. Throws UndefinedMetric when either
/// mask has no boundary pixel.
double bde(const BinaryMask& pred_mask, const BinaryMask& gt_mask);

/// Foreground = byte_scale(v) >= threshold.
BinaryMask binarize(const SaliencyMap& map, std::uint8_t threshold);

struct MetricReport {
    double f_beta = 0.0;
    double s_measure = 0.0;
    double mae = 0.0;
    std::optional<double> bde;  ///< empty when undefined
    bool gt_degenerate = false;
    PRCurve pr;
};

MetricReport evaluate(const SaliencyMap& pred, const BinaryMask& gt, const MetricConfig& cfg = {});

/// Unweighted mean over images; bde averages only the rows that define it,
/// and the PR curve averages point-wise.
MetricReport aggregate(const std::vector<MetricReport>& rows);

}  // namespace hrsal
