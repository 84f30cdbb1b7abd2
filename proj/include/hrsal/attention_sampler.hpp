/**
 * @file attention_sampler.hpp
 * @brief Uncertainty attention maps and attended patch sampling.
 *
 * A coarse prediction is thresholded on the byte scale into an attention map
 * of uncertain pixels (T1 < byte < T2). The sampler then scans a fixed number
 * of columns across the attended span, drops jittered square crops centered
 * on uncertain pixels of each column, and optionally repairs any uncertain
 * pixel the scan left uncovered.
 *
 * Column-scan steps, given the nonzero column span [X_L, X_R] of width w:
 *
 *     N_x    = ceil(w / D) + n
 *     stride = ceil(w / N_x)
 *     for t = 1 .. N_x + 1:
 *         r   ~ U{-r_range, ..., r_range}     (one draw per t, always)
 *         C   = D + r
 *         X_t = min(X_L + (t - 1) * stride, X_R)   (repeated X_t skipped)
 *         pick centers on column X_t and emit C x C crops
 *
 * The output is a pure function of (attention, image size, config).
 */
#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "hrsal/image.hpp"

namespace hrsal {

struct APSConfig {
    int base_size = 384;           ///< D
    int overlap = 5;               ///< n, extra columns beyond ceil(w / D)
    int t_low = 50;                ///< T1, exclusive, byte scale
    int t_high = 200;              ///< T2, exclusive, byte scale
    std::optional<int> jitter;     ///< r_range; D / 6 when unset
    std::uint64_t seed = 0;
    bool coverage_repair = true;

    int jitter_range() const { return jitter.value_or(base_size / 6); }
    /// Throws std::invalid_argument when a field is out of range.
    void validate() const;
};

enum class PatchOrigin { ColumnScan, CoverageRepair };

const char* to_string(PatchOrigin origin);

struct PatchSample {
    Region region;
    int column_index = 0;   ///< t for column-scan patches, 0 for repair patches
    int center_x = 0;
    int center_y = 0;
    int side = 0;           ///< requested side length C before any border clamping
    PatchOrigin origin = PatchOrigin::ColumnScan;

    bool operator==(const PatchSample&) const = default;
};

/// SplitMix64. The jitter sequence is part of the reproducibility contract,
/// so the generator is fixed rather than taken from <random>.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Integer in [-range, range], computed as next() mod (2 * range + 1) - range.
    int symmetric(int range) {
        const auto span = static_cast<std::uint64_t>(2 * range + 1);
        return static_cast<int>(next() % span) - range;
    }

private:
    std::uint64_t state_;
};

AttentionMap build_attention_map(const SaliencyMap& coarse, const APSConfig& cfg);

/// N_x for an attended span of `span_width` columns.
int column_count(int span_width, const APSConfig& cfg);

/// Column positions X_1 .. X_{N_x+1} (with repeats) for the span [x_left, x_right].
std::vector<int> column_positions(int x_left, int x_right, const APSConfig& cfg);

std::vector<PatchSample> sample_patches(const AttentionMap& attention, int image_w, int image_h,
                                        const APSConfig& cfg);

/// Crops (image, label) pairs at each sample's region, in sample order.
std::vector<std::pair<RasterImage, BinaryMask>> export_training_patches(
    const RasterImage& image, const BinaryMask& label, const std::vector<PatchSample>& samples);

}  // namespace hrsal
