#include "hrsal/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace hrsal {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const char* begin = value.data();
    const char* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc() || ptr != end) {
        throw ConfigError(fmt::format("{}: '{}' is not a valid number", key, value));
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    throw ConfigError(fmt::format("{}: '{}' is not a boolean", key, value));
}

const char* fusion_mode_name(FusionMode mode) {
    return mode == FusionMode::ReplaceUncertain ? "replace-uncertain" : "paste-all";
}

std::string endpoint_spec(const sidecar::Endpoint& e) {
    return e.kind == sidecar::Endpoint::Kind::Socket ? e.host + ":" + std::to_string(e.port) : e.command;
}

std::string consistency_name(const RunConfig& cfg) {
    switch (cfg.fusion.consistency) {
        case ConsistencyMode::None: return "none";
        case ConsistencyMode::EdgeAwareFilter: return "edge-aware";
        case ConsistencyMode::Sidecar: return "sidecar:" + endpoint_spec(*cfg.consistency_endpoint);
    }
    return "none";
}

}  // namespace

void parse_fusion_mode(const std::string& text, RunConfig& cfg) {
    if (text == "replace-uncertain") {
        cfg.fusion.mode = FusionMode::ReplaceUncertain;
    } else if (text == "paste-all") {
        cfg.fusion.mode = FusionMode::PasteAll;
    } else {
        throw ConfigError("unknown fusion mode: " + text);
    }
}

void parse_consistency(const std::string& text, RunConfig& cfg) {
    if (text == "none") {
        cfg.fusion.consistency = ConsistencyMode::None;
        cfg.consistency_endpoint.reset();
    } else if (text == "edge-aware" || text == "edge-aware-filter") {
        cfg.fusion.consistency = ConsistencyMode::EdgeAwareFilter;
        cfg.consistency_endpoint.reset();
    } else if (text.starts_with("sidecar:")) {
        cfg.fusion.consistency = ConsistencyMode::Sidecar;
        try {
            cfg.consistency_endpoint = sidecar::Endpoint::parse(text.substr(8));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    } else {
        throw ConfigError("unknown consistency mode: " + text);
    }
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
    try {
        if (key == "aps.D") cfg.aps.base_size = parse_number<int>(key, value);
        else if (key == "aps.n") cfg.aps.overlap = parse_number<int>(key, value);
        else if (key == "aps.T1") cfg.aps.t_low = parse_number<int>(key, value);
        else if (key == "aps.T2") cfg.aps.t_high = parse_number<int>(key, value);
        else if (key == "aps.r_range") cfg.aps.jitter = parse_number<int>(key, value);
        else if (key == "aps.seed") cfg.aps.seed = parse_number<std::uint64_t>(key, value);
        else if (key == "aps.coverage_repair") cfg.aps.coverage_repair = parse_bool(key, value);
        else if (key == "predictors.coarse") PredictorBinding::parse_coarse(value, cfg.predictors);
        else if (key == "predictors.refiner") PredictorBinding::parse_refiner(value, cfg.predictors);
        else if (key == "predictors.work_size") cfg.predictors.work_size = parse_number<int>(key, value);
        else if (key == "predictors.timeout_ms")
            cfg.predictors.sidecar_timeout = std::chrono::milliseconds(parse_number<long long>(key, value));
        else if (key == "fusion.mode") parse_fusion_mode(value, cfg);
        else if (key == "fusion.consistency") parse_consistency(value, cfg);
        else if (key == "fusion.filter_radius") cfg.fusion.filter_radius = parse_number<int>(key, value);
        else if (key == "fusion.filter_edge_scale") cfg.fusion.filter_edge_scale = parse_number<double>(key, value);
        else if (key == "fusion.consistency_size") cfg.fusion.consistency_size = parse_number<int>(key, value);
        else if (key == "metrics.beta_sq") cfg.metrics.beta_sq = parse_number<double>(key, value);
        else if (key == "metrics.pr_levels") cfg.metrics.pr_levels = parse_number<int>(key, value);
        else if (key == "metrics.s_alpha") cfg.metrics.s_alpha = parse_number<double>(key, value);
        else if (key == "metrics.bde_threshold") {
            const int t = parse_number<int>(key, value);
            if (t < 0 || t > 255) throw ConfigError(key + ": must be a byte value");
            cfg.metrics.bde_threshold = static_cast<std::uint8_t>(t);
        } else if (key == "run.jobs") cfg.jobs = parse_number<int>(key, value);
        else if (key == "run.out") cfg.out_dir = value;
        else throw ConfigError("unknown key: " + key);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

void RunConfig::validate() const {
    try {
        aps.validate();
        predictors.validate();
        fusion.validate();
        metrics.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (fusion.consistency == ConsistencyMode::Sidecar && !consistency_endpoint) {
        throw ConfigError("sidecar consistency pass needs an endpoint");
    }
    if (jobs < 1) throw ConfigError("run.jobs must be >= 1");
}

RunConfig parse_config(const std::string& text, RunConfig base, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(fmt::format("{}:{}: expected 'key = value'", origin, number));
        }
        try {
            apply_setting(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(fmt::format("{}:{}: {}", origin, number, e.what()));
        }
    }
    return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string() + ": cannot open config file");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), std::move(base), path.string());
}

std::string to_config_text(const RunConfig& cfg) {
    std::string out;
    auto line = [&](std::string_view key, const auto& value) { out += fmt::format("{} = {}\n", key, value); };
    line("aps.D", cfg.aps.base_size);
    line("aps.n", cfg.aps.overlap);
    line("aps.T1", cfg.aps.t_low);
    line("aps.T2", cfg.aps.t_high);
    line("aps.r_range", cfg.aps.jitter_range());
    line("aps.seed", cfg.aps.seed);
    line("aps.coverage_repair", cfg.aps.coverage_repair ? "true" : "false");
    line("predictors.coarse", cfg.predictors.coarse == CoarseKind::Sidecar
                                  ? "sidecar:" + endpoint_spec(*cfg.predictors.coarse_endpoint)
                                  : std::string("baseline"));
    std::string refiner = describe_refiner(cfg.predictors);
    if (cfg.predictors.refiner == RefinerKind::Sidecar) refiner = "sidecar:" + endpoint_spec(*cfg.predictors.refiner_endpoint);
    line("predictors.refiner", refiner);
    line("predictors.work_size", cfg.predictors.work_size);
    line("predictors.timeout_ms", cfg.predictors.sidecar_timeout.count());
    line("fusion.mode", fusion_mode_name(cfg.fusion.mode));
    line("fusion.consistency", consistency_name(cfg));
    line("fusion.filter_radius", cfg.fusion.filter_radius);
    line("fusion.filter_edge_scale", cfg.fusion.filter_edge_scale);
    line("fusion.consistency_size", cfg.fusion.consistency_size);
    line("metrics.beta_sq", cfg.metrics.beta_sq);
    line("metrics.pr_levels", cfg.metrics.pr_levels);
    line("metrics.s_alpha", cfg.metrics.s_alpha);
    line("metrics.bde_threshold", static_cast<int>(cfg.metrics.bde_threshold));
    line("run.jobs", cfg.jobs);
    line("run.out", cfg.out_dir.string());
    return out;
}

}  // namespace hrsal
