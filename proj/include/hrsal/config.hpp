/**
 * @file config.hpp
 * @brief Run configuration and its flat `section.key = value` file format.
 *
 * Recognised keys (defaults in parentheses):
 *
 *     aps.D (384)  aps.n (5)  aps.T1 (50)  aps.T2 (200)  aps.r_range (D/6)
 *     aps.seed (0)  aps.coverage_repair (true)
 *     predictors.coarse (baseline)  predictors.refiner (local-contrast)
 *     predictors.work_size (384)  predictors.timeout_ms (30000)
 *     fusion.mode (replace-uncertain)  fusion.consistency (none)
 *     fusion.filter_radius (8)  fusion.filter_edge_scale (0.1)
 *     fusion.consistency_size (1024)
 *     metrics.beta_sq (0.3)  metrics.pr_levels (256)  metrics.s_alpha (0.5)
 *     metrics.bde_threshold (128)
 *     run.jobs (1)  run.out (out)
 *
 * `#` starts a comment; blank lines are ignored; unknown keys are errors.
 */
#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "hrsal/attention_sampler.hpp"
#include "hrsal/fusion.hpp"
#include "hrsal/metrics.hpp"
#include "hrsal/predictors.hpp"
#include "hrsal/sidecar.hpp"

namespace hrsal {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    APSConfig aps;
    PredictorBinding predictors;
    FusionPolicy fusion;
    std::optional<sidecar::Endpoint> consistency_endpoint;  ///< set with fusion.consistency = sidecar:ENDPOINT
    MetricConfig metrics;
    std::filesystem::path out_dir = "out";
    int jobs = 1;

    /// Throws ConfigError naming the first invalid field.
    void validate() const;
};

/// Applies one `key = value` setting. Throws ConfigError.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

void parse_fusion_mode(const std::string& text, RunConfig& cfg);
void parse_consistency(const std::string& text, RunConfig& cfg);

/// Parses config text on top of `base`. `origin` labels error messages.
RunConfig parse_config(const std::string& text, RunConfig base = {}, const std::string& origin = "config");
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

/// Effective configuration in the same file format, every key present.
std::string to_config_text(const RunConfig& cfg);

}  // namespace hrsal
