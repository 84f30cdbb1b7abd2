#include "hrsal/metrics.hpp"

#include <algorithm>
#include <array>
#include <cfloat>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "hrsal/errors.hpp"

namespace hrsal {

namespace {

constexpr double kEps = DBL_EPSILON;  // MATLAB eps, as in the reference S-measure code

void require_same_dims(const SaliencyMap& pred, const BinaryMask& gt, const char* what) {
    if (pred.width() != gt.width() || pred.height() != gt.height()) {
        throw std::invalid_argument(std::string(what) + ": prediction " + std::to_string(pred.width()) + "x" +
                                    std::to_string(pred.height()) + " vs ground truth " +
                                    std::to_string(gt.width()) + "x" + std::to_string(gt.height()));
    }
}

double mean_of(std::span<const double> values) {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

// 2m / (m^2 + 1 + sigma) over pixels where gt == want, with m the mean and
// sigma the sample standard deviation; `invert` maps v to 1 - v first.
double object_score(const SaliencyMap& pred, const BinaryMask& gt, bool want, bool invert) {
    const auto p = pred.values();
    const auto g = gt.values();
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if ((g[i] != 0) != want) continue;
        sum += invert ? 1.0 - p[i] : p[i];
        ++n;
    }
    if (n == 0) return 0.0;
    const double mean = sum / static_cast<double>(n);
    double sq = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if ((g[i] != 0) != want) continue;
        const double d = (invert ? 1.0 - p[i] : p[i]) - mean;
        sq += d * d;
    }
    const double sigma = n > 1 ? std::sqrt(sq / static_cast<double>(n - 1)) : 0.0;
    return 2.0 * mean / (mean * mean + 1.0 + sigma + kEps);
}

double s_object(const SaliencyMap& pred, const BinaryMask& gt) {
    const double fg = object_score(pred, gt, true, false);
    const double bg = object_score(pred, gt, false, true);
    const double u = static_cast<double>(gt.count()) / static_cast<double>(gt.values().size());
    return u * fg + (1.0 - u) * bg;
}

// SSIM-style structural score of one quadrant [x0, x1) x [y0, y1).
double quadrant_ssim(const SaliencyMap& pred, const BinaryMask& gt, int x0, int x1, int y0, int y1) {
    const double n = static_cast<double>(x1 - x0) * (y1 - y0);
    if (n == 0) return 0.0;
    double sx = 0.0;
    double sy = 0.0;
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
            sx += pred.at(x, y);
            sy += gt.at(x, y) ? 1.0 : 0.0;
        }
    }
    const double mx = sx / n;
    const double my = sy / n;
    double vx = 0.0;
    double vy = 0.0;
    double cxy = 0.0;
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
            const double dx = pred.at(x, y) - mx;
            const double dy = (gt.at(x, y) ? 1.0 : 0.0) - my;
            vx += dx * dx;
            vy += dy * dy;
            cxy += dx * dy;
        }
    }
    vx /= n - 1 + kEps;
    vy /= n - 1 + kEps;
    cxy /= n - 1 + kEps;
    const double alpha = 4.0 * mx * my * cxy;
    const double beta = (mx * mx + my * my) * (vx + vy);
    if (alpha != 0.0) return alpha / (beta + kEps);
    if (beta == 0.0) return 1.0;
    return 0.0;
}

double s_region(const SaliencyMap& pred, const BinaryMask& gt) {
    const int w = gt.width();
    const int h = gt.height();
    // 1-based centroid, rounded half away from zero
    double total = 0.0;
    double sum_x = 0.0;
    double sum_y = 0.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!gt.at(x, y)) continue;
            total += 1.0;
            sum_x += x + 1;
            sum_y += y + 1;
        }
    }
    int cx = 0;
    int cy = 0;
    if (total == 0.0) {
        cx = static_cast<int>(std::round(w / 2.0));
        cy = static_cast<int>(std::round(h / 2.0));
    } else {
        cx = static_cast<int>(std::round(sum_x / total));
        cy = static_cast<int>(std::round(sum_y / total));
    }
    const double area = static_cast<double>(w) * h;
    const double w1 = static_cast<double>(cx) * cy / area;
    const double w2 = static_cast<double>(w - cx) * cy / area;
    const double w3 = static_cast<double>(cx) * (h - cy) / area;
    const double w4 = 1.0 - w1 - w2 - w3;
    return w1 * quadrant_ssim(pred, gt, 0, cx, 0, cy) + w2 * quadrant_ssim(pred, gt, cx, w, 0, cy) +
           w3 * quadrant_ssim(pred, gt, 0, cx, cy, h) + w4 * quadrant_ssim(pred, gt, cx, w, cy, h);
}

// Felzenszwalb-Huttenlocher lower envelope pass over one line, in place.
void distance_1d(std::vector<double>& f, std::vector<double>& d, std::vector<int>& v, std::vector<double>& z, int n) {
    int k = 0;
    v[0] = 0;
    z[0] = -std::numeric_limits<double>::infinity();
    z[1] = std::numeric_limits<double>::infinity();
    for (int q = 1; q < n; ++q) {
        double s = ((f[q] + static_cast<double>(q) * q) - (f[v[k]] + static_cast<double>(v[k]) * v[k])) /
                   (2.0 * q - 2.0 * v[k]);
        while (s <= z[k]) {
            --k;
            s = ((f[q] + static_cast<double>(q) * q) - (f[v[k]] + static_cast<double>(v[k]) * v[k])) /
                (2.0 * q - 2.0 * v[k]);
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = std::numeric_limits<double>::infinity();
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        const double dq = q - v[k];
        d[q] = dq * dq + f[v[k]];
    }
}

}  // namespace

void MetricConfig::validate() const {
    if (!(beta_sq > 0.0)) throw std::invalid_argument("beta_sq must be > 0");
    if (pr_levels < 2 || pr_levels > 256) throw std::invalid_argument("pr_levels must be in [2, 256]");
    if (!(s_alpha >= 0.0 && s_alpha <= 1.0)) throw std::invalid_argument("s_alpha must be in [0, 1]");
}

double mae(const SaliencyMap& pred, const BinaryMask& gt) {
    require_same_dims(pred, gt, "mae");
    const auto p = pred.values();
    const auto g = gt.values();
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - g[i]);
    return sum / static_cast<double>(p.size());
}

double f_beta_from(double precision, double recall, double beta_sq) {
    const double denom = beta_sq * precision + recall;
    if (denom <= 0.0) return 0.0;
    return (1.0 + beta_sq) * precision * recall / denom;
}

FBetaResult f_beta_adaptive(const SaliencyMap& pred, const BinaryMask& gt, const MetricConfig& cfg) {
    require_same_dims(pred, gt, "f_beta_adaptive");
    cfg.validate();
    FBetaResult result;
    result.threshold = std::min(2.0 * mean_of(pred.values()), 1.0 - 1.0 / 510.0);
    const auto p = pred.values();
    const auto g = gt.values();
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t positives = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const bool predicted = p[i] > result.threshold;
        if (g[i]) ++positives;
        if (predicted && g[i]) ++tp;
        if (predicted && !g[i]) ++fp;
    }
    if (positives == 0) {
        result.gt_degenerate = true;
        return result;
    }
    result.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    result.recall = static_cast<double>(tp) / static_cast<double>(positives);
    result.f_beta = f_beta_from(result.precision, result.recall, cfg.beta_sq);
    return result;
}

PRCurve pr_curve(const SaliencyMap& pred, const BinaryMask& gt, const MetricConfig& cfg) {
    require_same_dims(pred, gt, "pr_curve");
    cfg.validate();
    std::array<std::size_t, 256> fg{};
    std::array<std::size_t, 256> bg{};
    const auto p = pred.values();
    const auto g = gt.values();
    for (std::size_t i = 0; i < p.size(); ++i) {
        (g[i] ? fg : bg)[to_byte(p[i])] += 1;
    }
    // greater[b] = number of pixels whose byte value exceeds b
    std::array<std::size_t, 256> fg_greater{};
    std::array<std::size_t, 256> bg_greater{};
    for (int b = 254; b >= 0; --b) {
        fg_greater[b] = fg_greater[b + 1] + fg[b + 1];
        bg_greater[b] = bg_greater[b + 1] + bg[b + 1];
    }
    const std::size_t positives = gt.count();
    PRCurve curve;
    curve.reserve(cfg.pr_levels);
    for (int k = 0; k < cfg.pr_levels; ++k) {
        const int tau = static_cast<int>(std::lround(255.0 * k / (cfg.pr_levels - 1)));
        const std::size_t tp = fg_greater[tau];
        const std::size_t fp = bg_greater[tau];
        PRPoint point;
        point.threshold = tau;
        point.precision = tp + fp == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
        point.recall = positives == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(positives);
        curve.push_back(point);
    }
    return curve;
}

double s_measure(const SaliencyMap& pred, const BinaryMask& gt, const MetricConfig& cfg) {
    require_same_dims(pred, gt, "s_measure");
    cfg.validate();
    const double y = static_cast<double>(gt.count()) / static_cast<double>(gt.values().size());
    if (y == 0.0) return 1.0 - mean_of(pred.values());
    if (y == 1.0) return mean_of(pred.values());
    const double q = cfg.s_alpha * s_object(pred, gt) + (1.0 - cfg.s_alpha) * s_region(pred, gt);
    return std::max(q, 0.0);
}

BinaryMask boundary_of(const BinaryMask& mask) {
    const int w = mask.width();
    const int h = mask.height();
    BinaryMask edge(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!mask.at(x, y)) continue;
            const bool interior = x > 0 && x < w - 1 && y > 0 && y < h - 1 && mask.at(x - 1, y) &&
                                  mask.at(x + 1, y) && mask.at(x, y - 1) && mask.at(x, y + 1);
            if (!interior) edge.set(x, y, true);
        }
    }
    return edge;
}

std::vector<double> squared_distance_to(const BinaryMask& mask) {
    const int w = mask.width();
    const int h = mask.height();
    const std::size_t n = static_cast<std::size_t>(w) * h;
    if (mask.count() == 0) return std::vector<double>(n, std::numeric_limits<double>::infinity());

    // finite stand-in for infinity keeps the envelope arithmetic NaN-free
    constexpr double kFar = 1e20;
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i) grid[i] = mask.values()[i] ? 0.0 : kFar;

    const int longest = std::max(w, h);
    std::vector<double> f(longest);
    std::vector<double> d(longest);
    std::vector<int> v(longest);
    std::vector<double> z(longest + 1);
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) f[y] = grid[static_cast<std::size_t>(y) * w + x];
        distance_1d(f, d, v, z, h);
        for (int y = 0; y < h; ++y) grid[static_cast<std::size_t>(y) * w + x] = d[y];
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) f[x] = grid[static_cast<std::size_t>(y) * w + x];
        distance_1d(f, d, v, z, w);
        for (int x = 0; x < w; ++x) grid[static_cast<std::size_t>(y) * w + x] = d[x];
    }
    return grid;
}

double bde(const BinaryMask& pred_mask, const BinaryMask& gt_mask) {
    if (pred_mask.width() != gt_mask.width() || pred_mask.height() != gt_mask.height()) {
        throw std::invalid_argument("bde: mask dimensions differ");
    }
    const BinaryMask x_set = boundary_of(pred_mask);
    const BinaryMask y_set = boundary_of(gt_mask);
    const std::size_t nx = x_set.count();
    const std::size_t ny = y_set.count();
    if (nx == 0) throw UndefinedMetric("bde: prediction has no boundary pixels");
    if (ny == 0) throw UndefinedMetric("bde: ground truth has no boundary pixels");

    auto mean_displacement = [](const BinaryMask& from, const std::vector<double>& to_sq, std::size_t count) {
        double sum = 0.0;
        for (std::size_t i = 0; i < to_sq.size(); ++i) {
            if (from.values()[i]) sum += std::sqrt(to_sq[i]);
        }
        return sum / static_cast<double>(count);
    };
    const double forward = mean_displacement(x_set, squared_distance_to(y_set), nx);
    const double backward = mean_displacement(y_set, squared_distance_to(x_set), ny);
    return 0.5 * (forward + backward);
}

BinaryMask binarize(const SaliencyMap& map, std::uint8_t threshold) {
    std::vector<std::uint8_t> values(map.values().size());
    std::transform(map.values().begin(), map.values().end(), values.begin(),
                   [&](double v) { return static_cast<std::uint8_t>(to_byte(v) >= threshold); });
    return BinaryMask(map.width(), map.height(), std::move(values));
}

MetricReport evaluate(const SaliencyMap& pred, const BinaryMask& gt, const MetricConfig& cfg) {
    MetricReport report;
    const FBetaResult f = f_beta_adaptive(pred, gt, cfg);
    report.f_beta = f.f_beta;
    report.gt_degenerate = f.gt_degenerate;
    report.mae = mae(pred, gt);
    report.s_measure = s_measure(pred, gt, cfg);
    report.pr = pr_curve(pred, gt, cfg);
    try {
        report.bde = bde(binarize(pred, cfg.bde_threshold), gt);
    } catch (const UndefinedMetric&) {
        report.bde.reset();
    }
    return report;
}

MetricReport aggregate(const std::vector<MetricReport>& rows) {
    MetricReport out;
    if (rows.empty()) return out;
    double bde_sum = 0.0;
    std::size_t bde_rows = 0;
    for (const MetricReport& r : rows) {
        out.f_beta += r.f_beta;
        out.s_measure += r.s_measure;
        out.mae += r.mae;
        if (r.bde) {
            bde_sum += *r.bde;
            ++bde_rows;
        }
        out.gt_degenerate = out.gt_degenerate || r.gt_degenerate;
    }
    const auto n = static_cast<double>(rows.size());
    out.f_beta /= n;
    out.s_measure /= n;
    out.mae /= n;
    if (bde_rows > 0) out.bde = bde_sum / static_cast<double>(bde_rows);

    out.pr = rows.front().pr;
    for (PRPoint& p : out.pr) p.precision = p.recall = 0.0;
    for (const MetricReport& r : rows) {
        if (r.pr.size() != out.pr.size()) throw std::invalid_argument("aggregate: PR curves differ in length");
        for (std::size_t k = 0; k < out.pr.size(); ++k) {
            out.pr[k].precision += r.pr[k].precision / n;
            out.pr[k].recall += r.pr[k].recall / n;
        }
    }
    return out;
}

}  // namespace hrsal
