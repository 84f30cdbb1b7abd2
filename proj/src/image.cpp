#include "hrsal/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hrsal {

namespace {

void require_dims(int width, int height, const char* what) {
    if (width < 1 || height < 1) {
        throw std::invalid_argument(std::string(what) + ": dimensions must be >= 1, got " +
                                    std::to_string(width) + "x" + std::to_string(height));
    }
}

std::size_t area(int width, int height) {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
}

void require_inside(const Region& region, int width, int height) {
    if (!region.inside(width, height)) {
        throw std::invalid_argument("crop: region (" + std::to_string(region.x) + "," +
                                    std::to_string(region.y) + "," + std::to_string(region.w) + "," +
                                    std::to_string(region.h) + ") outside " + std::to_string(width) +
                                    "x" + std::to_string(height));
    }
}

// Per-axis bilinear taps: source index pair and weight of the second tap.
struct Taps {
    std::vector<int> lo;
    std::vector<int> hi;
    std::vector<double> frac;
};

Taps make_taps(int source, int target) {
    Taps taps;
    taps.lo.resize(target);
    taps.hi.resize(target);
    taps.frac.resize(target);
    const double scale = static_cast<double>(source) / target;
    for (int i = 0; i < target; ++i) {
        double s = (i + 0.5) * scale - 0.5;
        s = std::clamp(s, 0.0, static_cast<double>(source - 1));
        const int lo = static_cast<int>(std::floor(s));
        taps.lo[i] = lo;
        taps.hi[i] = std::min(lo + 1, source - 1);
        taps.frac[i] = s - lo;
    }
    return taps;
}

}  // namespace

Region shift_inside(Region region, int width, int height) {
    auto fit = [](int& pos, int& extent, int limit) {
        if (extent >= limit) {
            pos = 0;
            extent = limit;
            return;
        }
        pos = std::clamp(pos, 0, limit - extent);
    };
    fit(region.x, region.w, width);
    fit(region.y, region.h, height);
    return region;
}

// -----------------------------------------------------------------------------
// Types
// -----------------------------------------------------------------------------

RasterImage::RasterImage(int width, int height) : width_(width), height_(height) {
    require_dims(width, height, "RasterImage");
    data_.assign(area(width, height) * kChannels, 0);
}

RasterImage::RasterImage(int width, int height, std::vector<std::uint8_t> rgb)
    : width_(width), height_(height), data_(std::move(rgb)) {
    require_dims(width, height, "RasterImage");
    if (data_.size() != area(width, height) * kChannels) {
        throw std::invalid_argument("RasterImage: data length does not match width*height*3");
    }
}

SaliencyMap::SaliencyMap(int width, int height, double fill) : width_(width), height_(height) {
    require_dims(width, height, "SaliencyMap");
    if (!(fill >= 0.0 && fill <= 1.0)) {
        throw std::invalid_argument("SaliencyMap: fill value outside [0,1]");
    }
    values_.assign(area(width, height), fill);
}

SaliencyMap::SaliencyMap(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
    require_dims(width, height, "SaliencyMap");
    if (values_.size() != area(width, height)) {
        throw std::invalid_argument("SaliencyMap: data length does not match width*height");
    }
    for (double v : values_) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw std::invalid_argument("SaliencyMap: value outside [0,1]");
        }
    }
}

SaliencyMap SaliencyMap::clamped(int width, int height, std::vector<double> values) {
    for (double& v : values) {
        v = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0);
    }
    return SaliencyMap(width, height, std::move(values));
}

BinaryMask::BinaryMask(int width, int height, bool fill) : width_(width), height_(height) {
    require_dims(width, height, "BinaryMask");
    values_.assign(area(width, height), fill ? 1 : 0);
}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> values)
    : width_(width), height_(height), values_(std::move(values)) {
    require_dims(width, height, "BinaryMask");
    if (values_.size() != area(width, height)) {
        throw std::invalid_argument("BinaryMask: data length does not match width*height");
    }
    if (std::any_of(values_.begin(), values_.end(), [](std::uint8_t v) { return v > 1; })) {
        throw std::invalid_argument("BinaryMask: values must be 0 or 1");
    }
}

std::size_t BinaryMask::count() const {
    return static_cast<std::size_t>(std::count(values_.begin(), values_.end(), std::uint8_t{1}));
}

// -----------------------------------------------------------------------------
// Byte scale
// -----------------------------------------------------------------------------

std::uint8_t to_byte(double v) {
    const double scaled = std::floor(std::clamp(v, 0.0, 1.0) * 255.0 + 0.5);
    return static_cast<std::uint8_t>(scaled);
}

std::vector<std::uint8_t> byte_scale(const SaliencyMap& map) {
    std::vector<std::uint8_t> out(map.values().size());
    std::transform(map.values().begin(), map.values().end(), out.begin(), to_byte);
    return out;
}

SaliencyMap from_bytes(int width, int height, std::span<const std::uint8_t> bytes) {
    std::vector<double> values(bytes.size());
    std::transform(bytes.begin(), bytes.end(), values.begin(), from_byte);
    return SaliencyMap(width, height, std::move(values));
}

SaliencyMap luminance(const RasterImage& image) {
    std::vector<double> values(area(image.width(), image.height()));
    const auto rgb = image.data();
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double luma = 0.299 * rgb[3 * i] + 0.587 * rgb[3 * i + 1] + 0.114 * rgb[3 * i + 2];
        values[i] = luma / 255.0;
    }
    return SaliencyMap::clamped(image.width(), image.height(), std::move(values));
}

// -----------------------------------------------------------------------------
// Resampling
// -----------------------------------------------------------------------------

std::vector<double> resize_values(std::span<const double> values, int width, int height,
                                  int target_w, int target_h) {
    require_dims(target_w, target_h, "resize");
    require_dims(width, height, "resize");
    if (width == target_w && height == target_h) {
        return {values.begin(), values.end()};
    }
    const Taps tx = make_taps(width, target_w);
    const Taps ty = make_taps(height, target_h);
    std::vector<double> out(area(target_w, target_h));
    for (int y = 0; y < target_h; ++y) {
        const double* r0 = values.data() + static_cast<std::size_t>(ty.lo[y]) * width;
        const double* r1 = values.data() + static_cast<std::size_t>(ty.hi[y]) * width;
        const double fy = ty.frac[y];
        double* dst = out.data() + static_cast<std::size_t>(y) * target_w;
        for (int x = 0; x < target_w; ++x) {
            const double fx = tx.frac[x];
            const double top = r0[tx.lo[x]] + fx * (r0[tx.hi[x]] - r0[tx.lo[x]]);
            const double bot = r1[tx.lo[x]] + fx * (r1[tx.hi[x]] - r1[tx.lo[x]]);
            dst[x] = top + fy * (bot - top);
        }
    }
    return out;
}

SaliencyMap resize(const SaliencyMap& map, int target_w, int target_h) {
    require_dims(target_w, target_h, "resize");
    if (map.width() == target_w && map.height() == target_h) {
        return map;
    }
    return SaliencyMap::clamped(target_w, target_h,
                                resize_values(map.values(), map.width(), map.height(), target_w, target_h));
}

RasterImage resize(const RasterImage& image, int target_w, int target_h) {
    require_dims(target_w, target_h, "resize");
    if (image.width() == target_w && image.height() == target_h) {
        return image;
    }
    const Taps tx = make_taps(image.width(), target_w);
    const Taps ty = make_taps(image.height(), target_h);
    std::vector<std::uint8_t> out(area(target_w, target_h) * RasterImage::kChannels);
    for (int y = 0; y < target_h; ++y) {
        const double fy = ty.frac[y];
        for (int x = 0; x < target_w; ++x) {
            const double fx = tx.frac[x];
            const std::uint8_t* a = image.pixel(tx.lo[x], ty.lo[y]);
            const std::uint8_t* b = image.pixel(tx.hi[x], ty.lo[y]);
            const std::uint8_t* c = image.pixel(tx.lo[x], ty.hi[y]);
            const std::uint8_t* d = image.pixel(tx.hi[x], ty.hi[y]);
            std::uint8_t* dst = &out[(static_cast<std::size_t>(y) * target_w + x) * 3];
            for (int ch = 0; ch < 3; ++ch) {
                const double top = a[ch] + fx * (b[ch] - a[ch]);
                const double bot = c[ch] + fx * (d[ch] - c[ch]);
                const double v = std::floor(top + fy * (bot - top) + 0.5);
                dst[ch] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
            }
        }
    }
    return RasterImage(target_w, target_h, std::move(out));
}

// -----------------------------------------------------------------------------
// Windows
// -----------------------------------------------------------------------------

SaliencyMap crop(const SaliencyMap& map, const Region& region) {
    require_inside(region, map.width(), map.height());
    std::vector<double> out;
    out.reserve(area(region.w, region.h));
    for (int y = region.y; y < region.bottom(); ++y) {
        const auto row = map.values().subspan(static_cast<std::size_t>(y) * map.width() + region.x, region.w);
        out.insert(out.end(), row.begin(), row.end());
    }
    return SaliencyMap(region.w, region.h, std::move(out));
}

RasterImage crop(const RasterImage& image, const Region& region) {
    require_inside(region, image.width(), image.height());
    std::vector<std::uint8_t> out;
    out.reserve(area(region.w, region.h) * 3);
    for (int y = region.y; y < region.bottom(); ++y) {
        const std::uint8_t* row = image.pixel(region.x, y);
        out.insert(out.end(), row, row + static_cast<std::size_t>(region.w) * 3);
    }
    return RasterImage(region.w, region.h, std::move(out));
}

BinaryMask crop(const BinaryMask& mask, const Region& region) {
    require_inside(region, mask.width(), mask.height());
    std::vector<std::uint8_t> out;
    out.reserve(area(region.w, region.h));
    for (int y = region.y; y < region.bottom(); ++y) {
        const auto row = mask.values().subspan(static_cast<std::size_t>(y) * mask.width() + region.x, region.w);
        out.insert(out.end(), row.begin(), row.end());
    }
    return BinaryMask(region.w, region.h, std::move(out));
}

SaliencyMap paste(const SaliencyMap& dst, const SaliencyMap& patch, const Region& region) {
    require_inside(region, dst.width(), dst.height());
    if (patch.width() != region.w || patch.height() != region.h) {
        throw std::invalid_argument("paste: patch dimensions differ from region");
    }
    std::vector<double> values(dst.values().begin(), dst.values().end());
    for (int v = 0; v < region.h; ++v) {
        for (int u = 0; u < region.w; ++u) {
            values[static_cast<std::size_t>(region.y + v) * dst.width() + region.x + u] = patch.at(u, v);
        }
    }
    return SaliencyMap(dst.width(), dst.height(), std::move(values));
}

}  // namespace hrsal
