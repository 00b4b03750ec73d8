#include "leafsev/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <thread>

#include "leafsev/color.hpp"
#include "leafsev/image_io.hpp"
#include "leafsev/severity.hpp"

namespace leafsev {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad numeric value for " + key + ": '" + value + "'");
    }
}

int parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad integer value for " + key + ": '" + value + "'");
    }
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

RasterImage ensure_rgb(const RasterImage& img) {
    if (img.channels == 3) return img;
    RasterImage out(img.width, img.height, 3);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(x, y);
    return out;
}

RasterImage render_overlay(const RasterImage& original, const LeafMask& leaf,
                           const BinaryMask* damage, double opacity) {
    RasterImage overlay = ensure_rgb(original);
    const int w = overlay.width;
    const int h = overlay.height;
    if (damage) {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (!(*damage)(y, x)) continue;
                overlay.at(x, y, 0) = static_cast<std::uint8_t>(std::lround(
                    (1.0 - opacity) * overlay.at(x, y, 0) + opacity * 255.0));
                overlay.at(x, y, 1) = static_cast<std::uint8_t>(
                    std::lround((1.0 - opacity) * overlay.at(x, y, 1)));
                overlay.at(x, y, 2) = static_cast<std::uint8_t>(
                    std::lround((1.0 - opacity) * overlay.at(x, y, 2)));
            }
    }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!leaf.mask(y, x)) continue;
            const bool boundary = x == 0 || x == w - 1 || y == 0 || y == h - 1 ||
                                  !leaf.mask(y, x - 1) || !leaf.mask(y, x + 1) ||
                                  !leaf.mask(y - 1, x) || !leaf.mask(y + 1, x);
            if (boundary) {
                overlay.at(x, y, 0) = 0;
                overlay.at(x, y, 1) = 0;
                overlay.at(x, y, 2) = 255;
            }
        }
    return overlay;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ImageIoError("cannot write " + path.string());
    out << text;
}

void dump_debug_stages(const RunConfig& config, const std::string& stem,
                       const BackgroundTrace& trace) {
    if (config.debug_dir.empty()) return;
    std::filesystem::create_directories(config.debug_dir);
    const auto at = [&](const char* stage) {
        return config.debug_dir / (stem + "." + stage + ".png");
    };
    save_png(at("salience"), map_to_image(trace.salience));
    save_png(at("threshold"), mask_to_image(trace.threshold));
    save_png(at("edges"), mask_to_image(trace.edges));
    save_png(at("fused"), mask_to_image(trace.fused));
    save_png(at("final"), mask_to_image(trace.final));
}

}  // namespace

void apply_config_entry(RunConfig& config, const std::string& key,
                        const std::string& value) {
    if (key == "gamma.override") {
        config.gamma_override = parse_double(key, value);
    } else if (key == "gamma.min") {
        config.gamma_limits.min = parse_double(key, value);
    } else if (key == "gamma.max") {
        config.gamma_limits.max = parse_double(key, value);
    } else if (key == "fcm.m") {
        config.fcm.fuzzifier = parse_double(key, value);
    } else if (key == "fcm.tolerance") {
        config.fcm.tolerance = parse_double(key, value);
    } else if (key == "fcm.max_iters") {
        config.fcm.max_iters = parse_int(key, value);
    } else if (key == "damage.cluster") {
        if (value == "higher_v")
            config.damage_cluster = DamageClusterRule::kHigherV;
        else if (value == "lower_v")
            config.damage_cluster = DamageClusterRule::kLowerV;
        else
            throw ConfigError("damage.cluster must be higher_v or lower_v");
    } else if (key == "background.canny_sigma") {
        config.background.canny_sigma = parse_double(key, value);
    } else if (key == "background.canny_low_pct") {
        config.background.canny_low_pct = parse_double(key, value);
    } else if (key == "background.canny_high_pct") {
        config.background.canny_high_pct = parse_double(key, value);
    } else if (key == "background.disk_radius") {
        config.background.disk_radius = parse_int(key, value);
    } else if (key == "background.a_exponent") {
        config.background.a_exponent = parse_int(key, value);
    } else if (key == "background.min_leaf_fraction") {
        config.background.min_leaf_fraction = parse_double(key, value);
    } else if (key == "overlay.opacity") {
        config.overlay_opacity = parse_double(key, value);
    } else if (key == "parallel") {
        config.parallelism = parse_int(key, value);
    } else {
        throw ConfigError("unknown config key: " + key);
    }
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path.string());
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                              ": expected key = value");
        apply_config_entry(config, trim(line.substr(0, eq)),
                           trim(line.substr(eq + 1)));
    }
}

std::string json_to_text(const nlohmann::json& j) { return j.dump(2) + "\n"; }

ImageOutcome run_pipeline(const std::filesystem::path& input,
                          const RunConfig& config) {
    return run_pipeline(input, config, input.stem().string());
}

ImageOutcome run_pipeline(const std::filesystem::path& input, const RunConfig& config,
                          const std::string& stem) {
    std::filesystem::create_directories(config.out_dir);

    nlohmann::json report;
    report["schema_version"] = 1;
    report["input_path"] = input.string();
    nlohmann::json timings;
    ImageOutcome outcome;

    const auto total_start = Clock::now();
    try {
        auto t = Clock::now();
        RasterImage original = ensure_rgb(load_image(input));
        timings["decode"] = ms_since(t);
        report["width"] = original.width;
        report["height"] = original.height;

        t = Clock::now();
        GammaDecision decision = auto_gamma(to_gray(original), config.gamma_limits);
        if (config.gamma_override) {
            decision.gamma_raw = *config.gamma_override;
            decision.gamma_clamped = std::clamp(
                *config.gamma_override, config.gamma_limits.min, config.gamma_limits.max);
        }
        const RasterImage enhanced =
            apply_lut(original, build_lut(decision.gamma_clamped));
        timings["enhance"] = ms_since(t);
        report["gamma"] = {{"i_avg", decision.i_avg},
                           {"r", decision.r},
                           {"gamma_raw", decision.gamma_raw},
                           {"gamma_applied", decision.gamma_clamped}};

        t = Clock::now();
        BackgroundTrace trace;
        auto [masked, leaf] = extract_leaf(enhanced, config.background, &trace);
        timings["background"] = ms_since(t);
        dump_debug_stages(config, stem, trace);
        report["leaf_pixels"] = leaf.pixels;

        t = Clock::now();
        const FloatMap v_map = rgb_to_yuv(masked).v;
        std::vector<double> v_values;
        v_values.reserve(static_cast<std::size_t>(leaf.pixels));
        for (int y = 0; y < masked.height; ++y)
            for (int x = 0; x < masked.width; ++x)
                if (leaf.mask(y, x)) v_values.push_back(v_map(y, x));

        try {
            const FcmResult fcm = fcm_cluster_hist(quantize_histogram(v_values),
                                                   config.fcm);
            const DamageMask damage =
                classify_damage(v_map, leaf, fcm, config.damage_cluster);
            SeverityReport severity = estimate_severity(damage, leaf);
            severity.gamma_used = decision.gamma_clamped;
            severity.fcm_centers = fcm.centers;
            severity.fcm_iterations = fcm.iterations;
            timings["segment"] = ms_since(t);

            outcome.status = "ok";
            outcome.severity_percent = round2(severity.severity_percent);
            report["damaged_pixels"] = severity.damaged_pixels;
            report["severity_percent"] = *outcome.severity_percent;
            report["fcm"] = {{"centers", {fcm.centers[0], fcm.centers[1]}},
                             {"iterations", fcm.iterations},
                             {"converged", fcm.converged}};
            save_png(config.out_dir / (stem + ".overlay.png"),
                     render_overlay(original, leaf, &damage.mask,
                                    config.overlay_opacity));
        } catch (const DegenerateChannelError&) {
            // A leaf whose V channel carries a single value is a uniform,
            // healthy leaf: report zero damage instead of failing.
            timings["segment"] = ms_since(t);
            outcome.status = "degenerate_channel";
            outcome.severity_percent = 0.0;
            report["damaged_pixels"] = 0;
            report["severity_percent"] = 0.0;
            save_png(config.out_dir / (stem + ".overlay.png"),
                     render_overlay(original, leaf, nullptr, config.overlay_opacity));
        }
        save_png(config.out_dir / (stem + ".mask.png"), mask_to_image(leaf.mask));
    } catch (const NoForegroundError& e) {
        outcome.status = "no_foreground";
        report["error"] = e.what();
    } catch (const std::exception& e) {
        outcome.status = "io_error";
        report["error"] = e.what();
    }

    report["status"] = outcome.status;
    if (config.include_timings) {
        timings["total"] = ms_since(total_start);
        report["timings_ms"] = timings;
    }
    outcome.report = report;
    write_text(config.out_dir / (stem + ".report.json"), json_to_text(report));
    return outcome;
}

std::vector<std::filesystem::path> resolve_inputs(
    const std::vector<std::string>& specs) {
    namespace fs = std::filesystem;
    auto is_image_file = [](const fs::path& p) {
        std::string ext = p.extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
    };
    // Shell-style match on a file name: '*' and '?' only.
    auto glob_match = [](const std::string& pattern, const std::string& name) {
        std::size_t p = 0, n = 0, star = std::string::npos, mark = 0;
        while (n < name.size()) {
            if (p < pattern.size() &&
                (pattern[p] == '?' || pattern[p] == name[n])) {
                ++p;
                ++n;
            } else if (p < pattern.size() && pattern[p] == '*') {
                star = p++;
                mark = n;
            } else if (star != std::string::npos) {
                p = star + 1;
                n = ++mark;
            } else {
                return false;
            }
        }
        while (p < pattern.size() && pattern[p] == '*') ++p;
        return p == pattern.size();
    };

    std::vector<fs::path> out;
    for (const std::string& spec : specs) {
        const fs::path p(spec);
        if (fs::is_directory(p)) {
            for (const auto& entry : fs::directory_iterator(p))
                if (entry.is_regular_file() && is_image_file(entry.path()))
                    out.push_back(entry.path());
        } else if (spec.find('*') != std::string::npos ||
                   spec.find('?') != std::string::npos) {
            const fs::path dir =
                p.has_parent_path() ? p.parent_path() : fs::path(".");
            if (fs::is_directory(dir))
                for (const auto& entry : fs::directory_iterator(dir))
                    if (entry.is_regular_file() &&
                        glob_match(p.filename().string(),
                                   entry.path().filename().string()))
                        out.push_back(entry.path());
        } else {
            out.push_back(p);  // missing files surface as io_error reports
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

BatchSummary run_batch(const RunConfig& config) {
    const std::vector<std::filesystem::path> inputs = resolve_inputs(config.inputs);
    if (inputs.empty()) throw ConfigError("no input images");
    config.background.validate();
    config.fcm.validate();
    if (!(config.overlay_opacity >= 0.0 && config.overlay_opacity <= 1.0))
        throw ConfigError("overlay.opacity must be in [0, 1]");
    if (config.parallelism < 0) throw ConfigError("parallel must be >= 0");

    std::filesystem::create_directories(config.out_dir);

    // Disambiguate repeated stems so images never clobber each other.
    std::vector<std::string> stems(inputs.size());
    std::map<std::string, int> seen;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        std::string stem = inputs[i].stem().string();
        const int n = ++seen[stem];
        if (n > 1) stem += "_" + std::to_string(n);
        stems[i] = stem;
    }

    unsigned int workers = config.parallelism > 0
                               ? static_cast<unsigned int>(config.parallelism)
                               : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned int>(workers,
                                     static_cast<unsigned int>(inputs.size()));

    std::vector<ImageOutcome> outcomes(inputs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < inputs.size();
             i = next.fetch_add(1)) {
            try {
                outcomes[i] = run_pipeline(inputs[i], config, stems[i]);
            } catch (const std::exception& e) {
                // run_pipeline contains per-image failures; anything that
                // still escapes (unwritable output, disk full) must not
                // take down the batch.
                outcomes[i].status = "io_error";
                outcomes[i].report = {{"schema_version", 1},
                                      {"input_path", inputs[i].string()},
                                      {"status", "io_error"},
                                      {"error", e.what()}};
            }
        }
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned int i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (std::thread& th : pool) th.join();
    }

    BatchSummary batch;
    batch.images = static_cast<int>(inputs.size());
    double sum = 0.0, sum_sq = 0.0;
    int with_severity = 0;
    nlohmann::json reports = nlohmann::json::array();
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const ImageOutcome& o = outcomes[i];
        nlohmann::json entry = {{"input_path", inputs[i].string()},
                                {"status", o.status}};
        if (o.severity_percent) {
            ++with_severity;
            sum += *o.severity_percent;
            sum_sq += *o.severity_percent * *o.severity_percent;
            entry["severity_percent"] = *o.severity_percent;
        }
        reports.push_back(std::move(entry));
        if (o.status == "ok" || o.status == "degenerate_channel")
            ++batch.ok;
        else
            ++batch.failed;
    }

    batch.summary["schema_version"] = 1;
    batch.summary["images"] = batch.images;
    batch.summary["ok"] = batch.ok;
    batch.summary["failed"] = batch.failed;
    if (with_severity > 0) {
        const double mean = sum / with_severity;
        const double var = std::max(0.0, sum_sq / with_severity - mean * mean);
        batch.summary["mean_severity"] = round2(mean);
        batch.summary["stddev_severity"] = round2(std::sqrt(var));
    }
    batch.summary["reports"] = std::move(reports);
    write_text(config.out_dir / "summary.json", json_to_text(batch.summary));

    batch.exit_code = batch.ok > 0 ? 0 : 2;
    return batch;
}

}  // namespace leafsev
