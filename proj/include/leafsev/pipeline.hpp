#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "leafsev/background.hpp"
#include "leafsev/enhance.hpp"
#include "leafsev/segment.hpp"

namespace leafsev {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& why) : std::runtime_error(why) {}
};

struct RunConfig {
    std::vector<std::string> inputs;
    std::filesystem::path out_dir = ".";
    std::optional<double> gamma_override;
    GammaLimits gamma_limits;
    FcmParams fcm;
    DamageClusterRule damage_cluster = DamageClusterRule::kHigherV;
    BackgroundParams background;
    double overlay_opacity = 0.5;
    std::filesystem::path debug_dir;  // empty: no per-stage dumps
    int parallelism = 0;              // 0: hardware concurrency
    bool include_timings = true;
};

// Flat `key = value` config text; '#' starts a comment. Unknown keys and
// malformed values raise ConfigError.
void apply_config_entry(RunConfig& config, const std::string& key,
                        const std::string& value);
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

struct ImageOutcome {
    std::string status;  // ok | no_foreground | degenerate_channel | io_error
    std::optional<double> severity_percent;
    nlohmann::json report;
};

// Full per-image pipeline: decode, enhance, extract leaf, FCM on the
// V channel, severity. Writes <stem>.report.json plus overlay/mask
// artifacts into config.out_dir; failures land in the report status.
ImageOutcome run_pipeline(const std::filesystem::path& input, const RunConfig& config);
ImageOutcome run_pipeline(const std::filesystem::path& input, const RunConfig& config,
                          const std::string& stem);

struct BatchSummary {
    int images = 0;
    int ok = 0;
    int failed = 0;
    int exit_code = 0;
    nlohmann::json summary;
};

// Expand files, directories, and shell-style patterns into a sorted list.
std::vector<std::filesystem::path> resolve_inputs(const std::vector<std::string>& specs);

// Process every resolved input (parallel across images) and write
// summary.json. Exit code 0 when at least one image succeeded, 2 when all
// failed; configuration problems throw ConfigError (exit 1 in the CLI).
BatchSummary run_batch(const RunConfig& config);

std::string json_to_text(const nlohmann::json& j);

}  // namespace leafsev
