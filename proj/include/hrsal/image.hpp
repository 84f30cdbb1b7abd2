/**
 * @file image.hpp
 * @brief Raster types and the resampling / cropping primitives shared by every stage.
 *
 * All grids are row-major with a top-left origin. Value types are immutable
 * once built, except RasterImage and BinaryMask which expose setters that
 * cannot break their invariants.
 */
#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace hrsal {

/// Axis-aligned window in pixel coordinates; (x, y) is the top-left corner.
struct Region {
    int x = 0;
    int y = 0;
    int w = 1;
    int h = 1;

    int right() const { return x + w; }    ///< one past the last column
    int bottom() const { return y + h; }   ///< one past the last row
    bool contains(int px, int py) const { return px >= x && px < right() && py >= y && py < bottom(); }
    bool inside(int width, int height) const {
        return w >= 1 && h >= 1 && x >= 0 && y >= 0 && right() <= width && bottom() <= height;
    }
    bool operator==(const Region&) const = default;
};

/// Moves a region so that it lies inside a width x height image without
/// changing its size. A dimension larger than the image is clamped to the
/// full extent instead.
Region shift_inside(Region region, int width, int height);

/// 8-bit RGB image, interleaved.
class RasterImage {
public:
    static constexpr int kChannels = 3;

    RasterImage(int width, int height);
    RasterImage(int width, int height, std::vector<std::uint8_t> rgb);

    int width() const { return width_; }
    int height() const { return height_; }
    std::span<const std::uint8_t> data() const { return data_; }
    std::span<std::uint8_t> data() { return data_; }

    const std::uint8_t* pixel(int x, int y) const { return &data_[offset(x, y)]; }
    std::uint8_t* pixel(int x, int y) { return &data_[offset(x, y)]; }

    bool operator==(const RasterImage&) const = default;

private:
    std::size_t offset(int x, int y) const {
        return (static_cast<std::size_t>(y) * width_ + x) * kChannels;
    }

    int width_;
    int height_;
    std::vector<std::uint8_t> data_;
};

/// Real-valued saliency grid with every value in [0, 1].
class SaliencyMap {
public:
    SaliencyMap(int width, int height, double fill = 0.0);
    /// Throws std::invalid_argument if any value is outside [0, 1] or not finite.
    SaliencyMap(int width, int height, std::vector<double> values);

    /// Builds a map, clamping every value into [0, 1] (NaN becomes 0).
    static SaliencyMap clamped(int width, int height, std::vector<double> values);

    int width() const { return width_; }
    int height() const { return height_; }
    double at(int x, int y) const { return values_[static_cast<std::size_t>(y) * width_ + x]; }
    std::span<const double> values() const { return values_; }

    bool operator==(const SaliencyMap&) const = default;

private:
    int width_;
    int height_;
    std::vector<double> values_;
};

/// Grid of {0, 1} values.
class BinaryMask {
public:
    BinaryMask(int width, int height, bool fill = false);
    /// Throws std::invalid_argument if a value is neither 0 nor 1.
    BinaryMask(int width, int height, std::vector<std::uint8_t> values);

    int width() const { return width_; }
    int height() const { return height_; }
    bool at(int x, int y) const { return values_[static_cast<std::size_t>(y) * width_ + x] != 0; }
    void set(int x, int y, bool on) { values_[static_cast<std::size_t>(y) * width_ + x] = on ? 1 : 0; }
    std::span<const std::uint8_t> values() const { return values_; }
    std::size_t count() const;

    bool operator==(const BinaryMask&) const = default;

private:
    int width_;
    int height_;
    std::vector<std::uint8_t> values_;
};

/// Binary map of uncertain pixels in a coarse prediction.
class AttentionMap : public BinaryMask {
public:
    using BinaryMask::BinaryMask;
};

// -----------------------------------------------------------------------------
// Byte scale
// -----------------------------------------------------------------------------

/// round(v * 255) with halves rounded up.
std::uint8_t to_byte(double v);
inline double from_byte(std::uint8_t b) { return b / 255.0; }

std::vector<std::uint8_t> byte_scale(const SaliencyMap& map);
SaliencyMap from_bytes(int width, int height, std::span<const std::uint8_t> bytes);

/// Rec. 601 luma of each pixel, divided by 255.
SaliencyMap luminance(const RasterImage& image);

// -----------------------------------------------------------------------------
// Resampling and windows
// -----------------------------------------------------------------------------

/// Bilinear resampling with pixel-center alignment and edge-clamped taps.
/// Same-size requests return an exact copy.
SaliencyMap resize(const SaliencyMap& map, int target_w, int target_h);
RasterImage resize(const RasterImage& image, int target_w, int target_h);

/// Unclamped bilinear resampling of an arbitrary real grid (used for residuals).
std::vector<double> resize_values(std::span<const double> values, int width, int height,
                                  int target_w, int target_h);

/// Copies the pixels of `region`; the region must lie fully inside the source.
SaliencyMap crop(const SaliencyMap& map, const Region& region);
RasterImage crop(const RasterImage& image, const Region& region);
BinaryMask crop(const BinaryMask& mask, const Region& region);

/// Returns `dst` with `patch` written at `region` (patch dims must equal the region).
SaliencyMap paste(const SaliencyMap& dst, const SaliencyMap& patch, const Region& region);

}  // namespace hrsal
