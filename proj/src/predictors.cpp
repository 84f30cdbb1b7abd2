#include "hrsal/predictors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "hrsal/errors.hpp"

namespace hrsal {

namespace {

constexpr std::string_view kSidecarPrefix = "sidecar:";

// Separable [1 4 6 4 1] / 16 blur of one plane, edge-clamped.
std::vector<double> binomial_blur(const std::vector<double>& plane, int width, int height) {
    static constexpr std::array<double, 5> kernel = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
    std::vector<double> tmp(plane.size());
    std::vector<double> out(plane.size());
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double acc = 0.0;
            for (int k = -2; k <= 2; ++k) {
                acc += kernel[k + 2] * plane[static_cast<std::size_t>(y) * width + std::clamp(x + k, 0, width - 1)];
            }
            tmp[static_cast<std::size_t>(y) * width + x] = acc;
        }
    }
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double acc = 0.0;
            for (int k = -2; k <= 2; ++k) {
                acc += kernel[k + 2] * tmp[static_cast<std::size_t>(std::clamp(y + k, 0, height - 1)) * width + x];
            }
            out[static_cast<std::size_t>(y) * width + x] = acc;
        }
    }
    return out;
}

std::vector<double> min_max_normalize(std::vector<double> values) {
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double min = *lo;
    const double range = *hi - min;
    if (range <= 1e-12) {
        std::fill(values.begin(), values.end(), 0.0);
        return values;
    }
    for (double& v : values) v = (v - min) / range;
    return values;
}

// Warp a native-resolution crop result back from work size as a residual.
SaliencyMap residual_warp(const SaliencyMap& refined, const SaliencyMap& guidance, const SaliencyMap& native_guidance) {
    const int w = native_guidance.width();
    const int h = native_guidance.height();
    if (refined.width() == w && refined.height() == h) return refined;
    std::vector<double> delta(refined.values().size());
    for (std::size_t i = 0; i < delta.size(); ++i) delta[i] = refined.values()[i] - guidance.values()[i];
    std::vector<double> up = resize_values(delta, refined.width(), refined.height(), w, h);
    for (std::size_t i = 0; i < up.size(); ++i) up[i] += native_guidance.values()[i];
    return SaliencyMap::clamped(w, h, std::move(up));
}

void check_work_output(const SaliencyMap& map, int width, int height, const char* who) {
    if (map.width() != width || map.height() != height) {
        throw PredictorError(who, "returned " + std::to_string(map.width()) + "x" + std::to_string(map.height()) +
                                      ", expected " + std::to_string(width) + "x" + std::to_string(height));
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Binding
// ---------------------------------------------------------------------------

void PredictorBinding::validate() const {
    if (work_size < 16) throw std::invalid_argument("work_size must be >= 16");
    if (coarse == CoarseKind::Sidecar && !coarse_endpoint) {
        throw std::invalid_argument("sidecar coarse predictor needs an endpoint");
    }
    if (refiner == RefinerKind::Sidecar && !refiner_endpoint) {
        throw std::invalid_argument("sidecar refiner needs an endpoint");
    }
    if (sidecar_timeout.count() <= 0) throw std::invalid_argument("sidecar timeout must be positive");
}

void PredictorBinding::parse_coarse(const std::string& text, PredictorBinding& binding) {
    if (text == "baseline" || text == "baseline-contrast") {
        binding.coarse = CoarseKind::BaselineContrast;
        binding.coarse_endpoint.reset();
    } else if (text.starts_with(kSidecarPrefix)) {
        binding.coarse = CoarseKind::Sidecar;
        binding.coarse_endpoint = sidecar::Endpoint::parse(text.substr(kSidecarPrefix.size()));
    } else {
        throw std::invalid_argument("unknown coarse predictor: " + text);
    }
}

void PredictorBinding::parse_refiner(const std::string& text, PredictorBinding& binding) {
    if (text == "identity") {
        binding.refiner = RefinerKind::Identity;
        binding.refiner_endpoint.reset();
    } else if (text == "local-contrast") {
        binding.refiner = RefinerKind::LocalContrast;
        binding.refiner_endpoint.reset();
    } else if (text.starts_with(kSidecarPrefix)) {
        binding.refiner = RefinerKind::Sidecar;
        binding.refiner_endpoint = sidecar::Endpoint::parse(text.substr(kSidecarPrefix.size()));
    } else {
        throw std::invalid_argument("unknown refiner: " + text);
    }
}

std::string describe_coarse(const PredictorBinding& binding) {
    if (binding.coarse == CoarseKind::Sidecar) return binding.coarse_endpoint->describe();
    return "baseline";
}

std::string describe_refiner(const PredictorBinding& binding) {
    switch (binding.refiner) {
        case RefinerKind::Identity: return "identity";
        case RefinerKind::LocalContrast: return "local-contrast";
        case RefinerKind::Sidecar: return binding.refiner_endpoint->describe();
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Built-in predictors
// ---------------------------------------------------------------------------

SaliencyMap BaselineContrastPredictor::predict(const RasterImage& image) {
    const int w = image.width();
    const int h = image.height();
    const std::size_t n = static_cast<std::size_t>(w) * h;
    std::array<std::vector<double>, 3> planes;
    std::array<double, 3> mean{};
    for (int c = 0; c < 3; ++c) {
        planes[c].resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            planes[c][i] = image.data()[3 * i + c];
            mean[c] += planes[c][i];
        }
        mean[c] /= static_cast<double>(n);
        planes[c] = binomial_blur(planes[c], w, h);
    }
    std::vector<double> distance(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double dr = planes[0][i] - mean[0];
        const double dg = planes[1][i] - mean[1];
        const double db = planes[2][i] - mean[2];
        distance[i] = std::sqrt(dr * dr + dg * dg + db * db);
    }
    return SaliencyMap::clamped(w, h, min_max_normalize(std::move(distance)));
}

SaliencyMap IdentityRefiner::refine(const RasterImage&, const SaliencyMap& guidance) { return guidance; }

SaliencyMap LocalContrastRefiner::refine(const RasterImage& patch, const SaliencyMap& guidance) {
    const int w = patch.width();
    const int h = patch.height();
    if (guidance.width() != w || guidance.height() != h) {
        throw std::invalid_argument("local-contrast refiner: guidance dimensions differ from the patch");
    }
    const SaliencyMap luma = luminance(patch);
    std::vector<double> gradient(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double dx = (luma.at(std::min(x + 1, w - 1), y) - luma.at(std::max(x - 1, 0), y)) / 2.0;
            const double dy = (luma.at(x, std::min(y + 1, h - 1)) - luma.at(x, std::max(y - 1, 0))) / 2.0;
            gradient[static_cast<std::size_t>(y) * w + x] = std::sqrt(dx * dx + dy * dy);
        }
    }
    // 5x5 box mean via a summed-area table
    std::vector<double> sat(static_cast<std::size_t>(w + 1) * (h + 1), 0.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            sat[static_cast<std::size_t>(y + 1) * (w + 1) + x + 1] =
                gradient[static_cast<std::size_t>(y) * w + x] + sat[static_cast<std::size_t>(y) * (w + 1) + x + 1] +
                sat[static_cast<std::size_t>(y + 1) * (w + 1) + x] - sat[static_cast<std::size_t>(y) * (w + 1) + x];
        }
    }
    std::vector<double> gate(gradient.size());
    for (int y = 0; y < h; ++y) {
        const int y0 = std::max(y - 2, 0);
        const int y1 = std::min(y + 2, h - 1) + 1;
        for (int x = 0; x < w; ++x) {
            const int x0 = std::max(x - 2, 0);
            const int x1 = std::min(x + 2, w - 1) + 1;
            const double sum = sat[static_cast<std::size_t>(y1) * (w + 1) + x1] -
                               sat[static_cast<std::size_t>(y0) * (w + 1) + x1] -
                               sat[static_cast<std::size_t>(y1) * (w + 1) + x0] +
                               sat[static_cast<std::size_t>(y0) * (w + 1) + x0];
            gate[static_cast<std::size_t>(y) * w + x] = sum / ((y1 - y0) * (x1 - x0));
        }
    }
    const double gate_max = *std::max_element(gate.begin(), gate.end());

    const auto g = guidance.values();
    const auto [lo, hi] = std::minmax_element(g.begin(), g.end());
    const double range = *hi - *lo;
    std::vector<double> out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double stretched = range > 0.0 ? (g[i] - *lo) / range : g[i];
        const double e = gate_max > 0.0 ? gate[i] / gate_max : 0.0;
        out[i] = (1.0 - e) * g[i] + e * stretched;
    }
    return SaliencyMap::clamped(w, h, std::move(out));
}

SidecarCoarsePredictor::SidecarCoarsePredictor(sidecar::Endpoint endpoint, std::chrono::milliseconds timeout)
    : client_(std::move(endpoint), timeout) {}

SidecarRefiner::SidecarRefiner(sidecar::Endpoint endpoint, std::chrono::milliseconds timeout)
    : client_(std::move(endpoint), timeout) {}

PredictorSet make_predictors(const PredictorBinding& binding) {
    binding.validate();
    PredictorSet set;
    set.work_size = binding.work_size;
    if (binding.coarse == CoarseKind::Sidecar) {
        set.coarse = std::make_unique<SidecarCoarsePredictor>(*binding.coarse_endpoint, binding.sidecar_timeout);
    } else {
        set.coarse = std::make_unique<BaselineContrastPredictor>();
    }
    switch (binding.refiner) {
        case RefinerKind::Identity: set.refiner = std::make_unique<IdentityRefiner>(); break;
        case RefinerKind::LocalContrast: set.refiner = std::make_unique<LocalContrastRefiner>(); break;
        case RefinerKind::Sidecar:
            set.refiner = std::make_unique<SidecarRefiner>(*binding.refiner_endpoint, binding.sidecar_timeout);
            break;
    }
    return set;
}

// ---------------------------------------------------------------------------
// Pipeline stages
// ---------------------------------------------------------------------------

SaliencyMap run_coarse(const RasterImage& image, CoarsePredictor& predictor, int work_size) {
    if (work_size < 16) throw std::invalid_argument("work_size must be >= 16");
    const RasterImage work = resize(image, work_size, work_size);
    const SaliencyMap prediction = predictor.predict(work);
    check_work_output(prediction, work_size, work_size, "coarse predictor");
    return resize(prediction, image.width(), image.height());
}

SaliencyMap run_coarse(const RasterImage& image, const PredictorBinding& binding) {
    PredictorSet set = make_predictors(binding);
    return run_coarse(image, *set.coarse, binding.work_size);
}

std::vector<GuidedPatch> prepare_guided_patches(const RasterImage& image, const SaliencyMap& coarse,
                                                const std::vector<PatchSample>& samples, int work_size) {
    if (image.width() != coarse.width() || image.height() != coarse.height()) {
        throw std::invalid_argument("prepare_guided_patches: coarse map dimensions differ from the image");
    }
    std::vector<GuidedPatch> patches;
    patches.reserve(samples.size());
    for (const PatchSample& s : samples) {
        SaliencyMap native = crop(coarse, s.region);
        SaliencyMap guidance = resize(native, work_size, work_size);
        patches.push_back(GuidedPatch{resize(crop(image, s.region), work_size, work_size), std::move(guidance),
                                      std::move(native), s.region});
    }
    return patches;
}

std::vector<RefinedPatch> run_refine_batch(const std::vector<GuidedPatch>& patches, PatchRefiner& refiner,
                                           int work_size) {
    std::vector<RefinedPatch> refined;
    refined.reserve(patches.size());
    for (const GuidedPatch& patch : patches) {
        const SaliencyMap out = refiner.refine(patch.image_patch, patch.guidance);
        check_work_output(out, work_size, work_size, "refiner");
        refined.push_back(RefinedPatch{patch.region, residual_warp(out, patch.guidance, patch.native_guidance)});
    }
    return refined;
}

SaliencyMap refine_full_image(const RasterImage& image, const SaliencyMap& map, PatchRefiner& refiner, int size) {
    if (image.width() != map.width() || image.height() != map.height()) {
        throw std::invalid_argument("refine_full_image: map dimensions differ from the image");
    }
    const SaliencyMap guidance = resize(map, size, size);
    const SaliencyMap out = refiner.refine(resize(image, size, size), guidance);
    check_work_output(out, size, size, "consistency refiner");
    return residual_warp(out, guidance, map);
}

}  // namespace hrsal
