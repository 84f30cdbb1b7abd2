#include "hrsal/attention_sampler.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>
#include <string>

namespace hrsal {

namespace {

int ceil_div(int a, int b) { return (a + b - 1) / b; }

Region centered_square(int cx, int cy, int side, int width, int height) {
    return shift_inside(Region{cx - side / 2, cy - side / 2, side, side}, width, height);
}

class CoverageGrid {
public:
    CoverageGrid(int width, int height) : width_(width), cells_(static_cast<std::size_t>(width) * height, 0) {}

    void mark(const Region& r) {
        for (int y = r.y; y < r.bottom(); ++y) {
            std::memset(&cells_[static_cast<std::size_t>(y) * width_ + r.x], 1, static_cast<std::size_t>(r.w));
        }
    }
    bool covered(int x, int y) const { return cells_[static_cast<std::size_t>(y) * width_ + x] != 0; }

private:
    int width_;
    std::vector<std::uint8_t> cells_;
};

// Greedy vertical cover of the uncertain rows `ys` (sorted) on one column.
// Each center is the lowest uncertain row that still lets its crop reach the
// topmost uncovered row, and at most D/2 below that row; everything the
// placed crop spans is then treated as covered.
void cover_column(const std::vector<int>& ys, int column, int t, int side, const APSConfig& cfg, int width,
                  int height, std::vector<PatchSample>& out) {
    const int reach = std::min(side / 2, cfg.base_size / 2);
    std::size_t i = 0;
    while (i < ys.size()) {
        const int first = ys[i];
        std::size_t pick = i;
        while (pick + 1 < ys.size() && ys[pick + 1] - first <= reach) ++pick;
        const int cy = ys[pick];
        const Region region = centered_square(column, cy, side, width, height);
        out.push_back(PatchSample{region, t, column, cy, side, PatchOrigin::ColumnScan});
        while (i < ys.size() && ys[i] < region.bottom()) ++i;
    }
}

}  // namespace

void APSConfig::validate() const {
    auto bad = [](const std::string& what) { throw std::invalid_argument("APSConfig: " + what); };
    if (base_size < 6) bad("D must be >= 6");
    if (overlap < 0) bad("n must be >= 0");
    if (t_low < 0 || t_high > 255 || t_low >= t_high) bad("thresholds need 0 <= T1 < T2 <= 255");
    const int r = jitter_range();
    if (r < 0 || 2 * r >= base_size) bad("r_range must satisfy 0 <= r_range < D/2");
}

const char* to_string(PatchOrigin origin) {
    return origin == PatchOrigin::ColumnScan ? "column-scan" : "coverage-repair";
}

AttentionMap build_attention_map(const SaliencyMap& coarse, const APSConfig& cfg) {
    cfg.validate();
    std::vector<std::uint8_t> flags(coarse.values().size());
    std::transform(coarse.values().begin(), coarse.values().end(), flags.begin(), [&](double v) {
        const int b = to_byte(v);
        return static_cast<std::uint8_t>(b > cfg.t_low && b < cfg.t_high);
    });
    return AttentionMap(coarse.width(), coarse.height(), std::move(flags));
}

int column_count(int span_width, const APSConfig& cfg) {
    return ceil_div(span_width, cfg.base_size) + cfg.overlap;
}

std::vector<int> column_positions(int x_left, int x_right, const APSConfig& cfg) {
    const int span = x_right - x_left + 1;
    const int columns = column_count(span, cfg);
    const int stride = ceil_div(span, columns);
    std::vector<int> xs;
    xs.reserve(static_cast<std::size_t>(columns) + 1);
    for (int t = 1; t <= columns + 1; ++t) {
        xs.push_back(std::min(x_left + (t - 1) * stride, x_right));
    }
    return xs;
}

std::vector<PatchSample> sample_patches(const AttentionMap& attention, int image_w, int image_h,
                                        const APSConfig& cfg) {
    cfg.validate();
    if (attention.width() != image_w || attention.height() != image_h) {
        throw std::invalid_argument("sample_patches: attention map dimensions differ from the image");
    }

    // attended column span
    int x_left = image_w;
    int x_right = -1;
    for (int y = 0; y < image_h; ++y) {
        for (int x = 0; x < image_w; ++x) {
            if (attention.at(x, y)) {
                x_left = std::min(x_left, x);
                x_right = std::max(x_right, x);
            }
        }
    }
    std::vector<PatchSample> samples;
    if (x_right < 0) return samples;

    SplitMix64 rng(cfg.seed);
    const int jitter = cfg.jitter_range();
    const std::vector<int> xs = column_positions(x_left, x_right, cfg);
    int previous = -1;
    std::vector<int> ys;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const int side = cfg.base_size + rng.symmetric(jitter);
        const int column = xs[k];
        if (column == previous) continue;
        previous = column;
        ys.clear();
        for (int y = 0; y < image_h; ++y) {
            if (attention.at(column, y)) ys.push_back(y);
        }
        cover_column(ys, column, static_cast<int>(k) + 1, side, cfg, image_w, image_h, samples);
    }

    if (cfg.coverage_repair) {
        CoverageGrid grid(image_w, image_h);
        for (const PatchSample& s : samples) grid.mark(s.region);
        for (int y = 0; y < image_h; ++y) {
            for (int x = 0; x < image_w; ++x) {
                if (!attention.at(x, y) || grid.covered(x, y)) continue;
                const Region region = centered_square(x, y, cfg.base_size, image_w, image_h);
                samples.push_back(PatchSample{region, 0, x, y, cfg.base_size, PatchOrigin::CoverageRepair});
                grid.mark(region);
            }
        }
    }
    return samples;
}

std::vector<std::pair<RasterImage, BinaryMask>> export_training_patches(
    const RasterImage& image, const BinaryMask& label, const std::vector<PatchSample>& samples) {
    if (image.width() != label.width() || image.height() != label.height()) {
        throw std::invalid_argument("export_training_patches: label dimensions differ from the image");
    }
    std::vector<std::pair<RasterImage, BinaryMask>> pairs;
    pairs.reserve(samples.size());
    for (const PatchSample& s : samples) {
        pairs.emplace_back(crop(image, s.region), crop(label, s.region));
    }
    return pairs;
}

}  // namespace hrsal
