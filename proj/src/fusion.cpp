#include "hrsal/fusion.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace hrsal {

void FusionPolicy::validate() const {
    if (filter_radius < 1) throw std::invalid_argument("fusion filter radius must be >= 1");
    if (!(filter_edge_scale > 0.0)) throw std::invalid_argument("fusion edge scale must be > 0");
    if (consistency_size < 16) throw std::invalid_argument("consistency warp size must be >= 16");
}

SaliencyMap fuse(const SaliencyMap& coarse, const AttentionMap& attention, const std::vector<RefinedPatch>& refined,
                 const FusionPolicy& policy) {
    const int w = coarse.width();
    const int h = coarse.height();
    if (attention.width() != w || attention.height() != h) {
        throw std::invalid_argument("fuse: attention map dimensions differ from the coarse map");
    }
    for (const RefinedPatch& p : refined) {
        if (!p.region.inside(w, h)) throw std::invalid_argument("fuse: refined region outside the map");
        if (p.map.width() != p.region.w || p.map.height() != p.region.h) {
            throw std::invalid_argument("fuse: refined map dimensions differ from its region");
        }
    }
    if (refined.empty()) return coarse;

    const std::size_t n = static_cast<std::size_t>(w) * h;
    std::vector<double> sum(n, 0.0);
    std::vector<int> count(n, 0);
    for (const RefinedPatch& p : refined) {
        for (int v = 0; v < p.region.h; ++v) {
            const std::size_t row = static_cast<std::size_t>(p.region.y + v) * w + p.region.x;
            for (int u = 0; u < p.region.w; ++u) {
                sum[row + u] += p.map.at(u, v);
                ++count[row + u];
            }
        }
    }
    std::vector<double> out(coarse.values().begin(), coarse.values().end());
    const auto gate = attention.values();
    for (std::size_t i = 0; i < n; ++i) {
        if (count[i] == 0) continue;
        if (policy.mode == FusionMode::ReplaceUncertain && gate[i] == 0) continue;
        out[i] = sum[i] / count[i];
    }
    return SaliencyMap::clamped(w, h, std::move(out));
}

SaliencyMap edge_aware_filter(const RasterImage& image, const SaliencyMap& map, int radius, double edge_scale) {
    const int w = image.width();
    const int h = image.height();
    if (map.width() != w || map.height() != h) {
        throw std::invalid_argument("edge_aware_filter: map dimensions differ from the image");
    }
    if (radius < 1 || !(edge_scale > 0.0)) throw std::invalid_argument("edge_aware_filter: bad parameters");

    std::vector<std::uint8_t> luma(static_cast<std::size_t>(w) * h);
    for (std::size_t i = 0; i < luma.size(); ++i) {
        const auto* px = &image.data()[3 * i];
        luma[i] = static_cast<std::uint8_t>(std::floor(0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2] + 0.5));
    }
    std::array<double, 256> range_weight{};
    for (int d = 0; d < 256; ++d) {
        const double dl = d / 255.0;
        range_weight[d] = std::exp(-(dl * dl) / (2.0 * edge_scale * edge_scale));
    }

    std::vector<double> out(luma.size());
    const auto values = map.values();
    for (int y = 0; y < h; ++y) {
        const int y0 = std::max(y - radius, 0);
        const int y1 = std::min(y + radius, h - 1);
        for (int x = 0; x < w; ++x) {
            const int x0 = std::max(x - radius, 0);
            const int x1 = std::min(x + radius, w - 1);
            const int center = luma[static_cast<std::size_t>(y) * w + x];
            double acc = 0.0;
            double norm = 0.0;
            for (int yy = y0; yy <= y1; ++yy) {
                const std::size_t row = static_cast<std::size_t>(yy) * w;
                for (int xx = x0; xx <= x1; ++xx) {
                    const double wgt = range_weight[std::abs(luma[row + xx] - center)];
                    acc += wgt * values[row + xx];
                    norm += wgt;
                }
            }
            out[static_cast<std::size_t>(y) * w + x] = acc / norm;
        }
    }
    return SaliencyMap::clamped(w, h, std::move(out));
}

SaliencyMap apply_consistency(const RasterImage& image, const SaliencyMap& fused, const FusionPolicy& policy,
                              PatchRefiner* refiner) {
    policy.validate();
    if (image.width() != fused.width() || image.height() != fused.height()) {
        throw std::invalid_argument("apply_consistency: map dimensions differ from the image");
    }
    switch (policy.consistency) {
        case ConsistencyMode::None: return fused;
        case ConsistencyMode::EdgeAwareFilter:
            return edge_aware_filter(image, fused, policy.filter_radius, policy.filter_edge_scale);
        case ConsistencyMode::Sidecar:
            if (refiner == nullptr) throw std::invalid_argument("sidecar consistency pass needs a refiner");
            return refine_full_image(image, fused, *refiner, policy.consistency_size);
    }
    return fused;
}

}  // namespace hrsal
