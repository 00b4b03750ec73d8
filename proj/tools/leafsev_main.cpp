#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "leafsev/image_io.hpp"
#include "leafsev/pipeline.hpp"
#include "leafsev/synth.hpp"

namespace {

int run_analyze(leafsev::RunConfig config, const std::optional<std::string>& config_file,
                const std::vector<std::pair<std::string, std::string>>& overrides) {
    // defaults < config file < command-line flags
    if (config_file) {
        leafsev::apply_config_file(config, *config_file);
    } else if (const char* env = std::getenv("LEAFSEV_CONFIG")) {
        if (*env) leafsev::apply_config_file(config, env);
    }
    for (const auto& [key, value] : overrides)
        leafsev::apply_config_entry(config, key, value);

    const leafsev::BatchSummary batch = leafsev::run_batch(config);
    for (const auto& entry : batch.summary["reports"]) {
        std::cout << entry["input_path"].get<std::string>() << ": "
                  << entry["status"].get<std::string>();
        if (entry.contains("severity_percent"))
            std::cout << " severity " << entry["severity_percent"].get<double>() << "%";
        std::cout << "\n";
    }
    std::cout << "processed " << batch.images << " image(s), " << batch.ok << " ok, "
              << batch.failed << " failed\n";
    return batch.exit_code;
}

int run_synth(const leafsev::SynthSpec& spec, const std::string& out_dir) {
    const leafsev::SynthResult result = leafsev::generate(spec);
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    const int pct = static_cast<int>(std::lround(spec.damage_fraction * 100.0));
    const std::string stem = "leaf_p" + std::to_string(pct) + "_s" +
                             std::to_string(spec.seed);
    const fs::path base = fs::path(out_dir) / stem;

    leafsev::save_png(base.string() + ".png", result.image);
    leafsev::save_png(base.string() + ".leaf.png",
                      leafsev::mask_to_image(result.leaf_truth.mask));
    leafsev::save_png(base.string() + ".damage.png",
                      leafsev::mask_to_image(result.damage_truth.mask));

    nlohmann::json truth;
    truth["width"] = spec.width;
    truth["height"] = spec.height;
    truth["seed"] = spec.seed;
    truth["background"] = leafsev::background_kind_name(spec.background);
    truth["brightness"] = spec.brightness;
    truth["requested_fraction"] = spec.damage_fraction;
    truth["leaf_pixels"] = result.leaf_truth.pixels;
    truth["damage_pixels"] = result.damage_truth.pixels;
    truth["damage_fraction"] = static_cast<double>(result.damage_truth.pixels) /
                               static_cast<double>(result.leaf_truth.pixels);
    std::ofstream out(base.string() + ".truth.json", std::ios::binary);
    out << leafsev::json_to_text(truth);

    std::cout << "wrote " << base.string() << ".png (leaf " << result.leaf_truth.pixels
              << " px, damage " << result.damage_truth.pixels << " px)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coffee leaf infection severity estimation"};
    app.require_subcommand(1);

    // analyze
    auto* analyze = app.add_subcommand("analyze", "Run the severity pipeline");
    leafsev::RunConfig config;
    std::vector<std::string> inputs;
    std::optional<std::string> config_file;
    std::string out_dir = ".";
    std::string debug_dir;
    std::optional<double> gamma;
    std::optional<double> fcm_m;
    std::optional<std::string> damage_cluster;
    std::optional<int> disk_radius;
    std::optional<int> a_exponent;
    std::optional<int> parallel;
    bool no_timings = false;

    analyze->add_option("inputs", inputs, "Image files, directories, or globs")
        ->required();
    analyze->add_option("--out", out_dir, "Output directory");
    analyze->add_option("--config", config_file, "Config file (key = value lines)");
    analyze->add_option("--gamma", gamma, "Fixed gamma, skips automatic selection");
    analyze->add_option("--fcm-m", fcm_m, "FCM fuzzifier (> 1)");
    analyze->add_option("--damage-cluster", damage_cluster, "higher_v or lower_v");
    analyze->add_option("--disk-radius", disk_radius, "Opening disk radius in pixels");
    analyze->add_option("--a-exponent", a_exponent, "Salience a-channel exponent, 2 or 4");
    analyze->add_option("--debug-dir", debug_dir, "Write per-stage PNG dumps here");
    analyze->add_option("--parallel", parallel, "Worker threads (0 = all cores)");
    analyze->add_flag("--no-timings", no_timings, "Omit timings from reports");

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic leaf fixture");
    leafsev::SynthSpec spec;
    std::string bg = "uniform";
    std::string synth_out = ".";
    int size = 512;
    synth->add_option("--p", spec.damage_fraction, "Damage fraction in [0, 0.9]");
    synth->add_option("--seed", spec.seed, "Placement / jitter seed");
    synth->add_option("--bg", bg, "uniform | two-tone | foliage-noise");
    synth->add_option("--brightness", spec.brightness, "Global brightness scale");
    synth->add_option("--out", synth_out, "Output directory");
    synth->add_option("--size", size, "Square image size in pixels");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(synth)) {
            spec.width = size;
            spec.height = size;
            spec.background = leafsev::background_kind_from_name(bg);
            return run_synth(spec, synth_out);
        }

        config.inputs = inputs;
        config.out_dir = out_dir;
        config.debug_dir = debug_dir;
        config.include_timings = !no_timings;
        // CLI flags become highest-precedence config entries.
        std::vector<std::pair<std::string, std::string>> overrides;
        if (gamma) overrides.emplace_back("gamma.override", std::to_string(*gamma));
        if (fcm_m) overrides.emplace_back("fcm.m", std::to_string(*fcm_m));
        if (damage_cluster) overrides.emplace_back("damage.cluster", *damage_cluster);
        if (disk_radius)
            overrides.emplace_back("background.disk_radius",
                                   std::to_string(*disk_radius));
        if (a_exponent)
            overrides.emplace_back("background.a_exponent",
                                   std::to_string(*a_exponent));
        if (parallel) overrides.emplace_back("parallel", std::to_string(*parallel));
        return run_analyze(std::move(config), config_file, overrides);
    } catch (const leafsev::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
