// Copyright 2026 The samrs-convert Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Exit status: 0 success, 1 validation or runtime
// failure, 2 configuration or usage error, 130 interrupted. Data goes to the
// output stream, progress and diagnostics to the error stream.

#pragma once

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "samrs/ablation.hpp"
#include "samrs/backends.hpp"
#include "samrs/errors.hpp"
#include "samrs/log.hpp"
#include "samrs/pipeline.hpp"
#include "samrs/stats.hpp"

namespace samrs {

enum ExitCode { kExitOk = 0, kExitFailure = 1, kExitUsage = 2, kExitInterrupted = 130 };

namespace detail {

/// "256" or "256x128" (width x height).
inline ImageSize parse_grid(const std::string& s) {
    try {
        const auto x = s.find_first_of("xX");
        std::size_t used = 0;
        const int w = std::stoi(s.substr(0, x), &used);
        if (used != (x == std::string::npos ? s.size() : x)) throw std::invalid_argument(s);
        int h = w;
        if (x != std::string::npos) {
            const std::string rest = s.substr(x + 1);
            h = std::stoi(rest, &used);
            if (used != rest.size()) throw std::invalid_argument(s);
        }
        if (w <= 0 || h <= 0) throw std::invalid_argument(s);
        return {w, h};
    } catch (const std::logic_error&) {
        throw ConfigError("bad mask grid '" + s + "' (expected N or WxH)");
    }
}

/// Comma-separated combination ids, or "table" for the fifteen ablation rows.
inline std::vector<PromptCombo> parse_combos(const std::string& s) {
    if (s == "table" || s == "table1" || s == "all") return ablation_table_combos();
    std::vector<PromptCombo> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(PromptCombo::parse(item));
    }
    if (out.empty()) throw ConfigError("no prompt combinations given");
    for (std::size_t i = 0; i < out.size(); ++i) {
        for (std::size_t k = 0; k < i; ++k) {
            if (out[k] == out[i]) throw ConfigError("combination " + out[i].id() + " is listed twice");
        }
    }
    return out;
}

inline std::string format_stats(const StatsReport& r) {
    std::ostringstream os;
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-4s %-12s %14s %10s\n", "id", "category", "pixels", "instances");
    os << buf;
    for (const auto& c : r.categories) {
        std::snprintf(buf, sizeof buf, "%-4d %-12s %14lld %10lld\n", c.id, c.abbreviation.c_str(), c.pixels,
                      c.instances);
        os << buf;
    }
    os << "\nmask size histogram\n";
    for (std::size_t k = 0; k < r.mask_sizes.counts.size(); ++k) {
        const double lo = r.mask_sizes.edges[k], hi = r.mask_sizes.edges[k + 1];
        std::snprintf(buf, sizeof buf, "[%.0f, %s) %lld\n", lo, std::isinf(hi) ? "inf" : std::to_string(static_cast<long long>(hi)).c_str(),
                      r.mask_sizes.counts[k]);
        os << buf;
    }
    os << "\ntiles " << r.tiles << ", valid instances " << r.valid_instances << ", labeled pixels "
       << r.labeled_pixels << "\ninvalid " << r.invalid << ", dropped " << r.dropped << ", failed " << r.failed
       << ", rejected " << r.rejected << '\n';
    return os.str();
}

}  // namespace detail

/// Runs one subcommand. `cancel`, when given, is polled between images.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
                   const std::atomic<bool>* cancel = nullptr) {
    CLI::App app{"Convert detection datasets into segmentation datasets with promptable segmentation"};
    app.require_subcommand(1);
    std::string log_level = "info";
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")->capture_default_str();

    std::string backend_spec = "oracle:fill";
    std::optional<int> workers;
    std::optional<std::uint64_t> seed;
    bool as_json = false;

    auto* convert = app.add_subcommand("convert", "Convert a detection dataset");
    std::string recipe_name = "custom", input, output;
    std::optional<std::string> convert_backend;
    std::optional<int> tile_size, stride;
    std::optional<double> retention, budget;
    bool resume = false, override_mode = false;
    convert->add_option("--recipe", recipe_name, "sota, sior, fast, custom or a recipe JSON file")->capture_default_str();
    convert->add_option("--input", input, "Directory with images/ and annotations/")->required();
    convert->add_option("--output", output, "Output directory")->required();
    convert->add_option("--backend", convert_backend, "URL, oracle:fill or oracle:erosion[:k=v,...]");
    convert->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    convert->add_option("--tile-size", tile_size, "Tile size in pixels")->check(CLI::PositiveNumber);
    convert->add_option("--stride", stride, "Tile stride in pixels")->check(CLI::PositiveNumber);
    convert->add_option("--retention", retention, "Minimum surviving box-area fraction");
    convert->add_option("--failure-budget", budget, "Maximum share of failed instances");
    convert->add_option("--seed", seed, "Seed for stochastic oracles");
    convert->add_flag("--resume", resume, "Continue an interrupted run");
    convert->add_flag("--allow-mode-override", override_mode, "Let H-Box recipes use RH-Box prompts");
    convert->add_flag("--json", as_json, "Print the manifest as JSON");

    auto* ablate = app.add_subcommand("ablate", "Score prompt combinations against ground-truth masks");
    std::string gt, combos = "hbox", grid = "256";
    double magnitude = 1000.0;
    ablate->add_option("--gt", gt, "Directory holding ablation_set.json")->required();
    ablate->add_option("--backend", backend_spec, "URL, oracle:fill or oracle:erosion[:k=v,...]")->capture_default_str();
    ablate->add_option("--combos", combos, "Comma-separated combinations, or 'table'")->capture_default_str();
    ablate->add_option("--mask-grid", grid, "Mask prompt grid, N or WxH")->capture_default_str();
    ablate->add_option("--magnitude", magnitude, "Mask prompt magnitude")->capture_default_str();
    ablate->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    ablate->add_option("--seed", seed, "Seed for stochastic oracles");
    ablate->add_flag("--json", as_json, "Print the report as JSON");

    auto* stats = app.add_subcommand("stats", "Recompute statistics from a converted dataset");
    std::string manifest;
    stats->add_option("--manifest", manifest, "manifest.json of a converted dataset")->required();
    stats->add_flag("--json", as_json, "Print the statistics as JSON");

    auto* validate = app.add_subcommand("validate", "Check a converted dataset for consistency");
    validate->add_option("--manifest", manifest, "manifest.json of a converted dataset")->required();
    validate->add_flag("--json", as_json, "Print the findings as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        const auto level = spdlog::level::from_str(log_level);
        if (level == spdlog::level::off && log_level != "off") throw ConfigError("unknown log level '" + log_level + "'");
        log().set_level(level);

        if (*convert) {
            ConversionRecipe recipe = load_recipe(recipe_name);
            if (convert_backend) recipe.backend = *convert_backend;
            if (workers) recipe.workers = *workers;
            if (seed) recipe.seed = *seed;
            if (tile_size) {
                recipe.tiling.tile_size = *tile_size;
                if (!stride) recipe.tiling.stride = std::min(recipe.tiling.stride, *tile_size);
            }
            if (stride) recipe.tiling.stride = *stride;
            if (retention) recipe.tiling.retention = *retention;
            if (budget) recipe.failure_budget = *budget;
            if (override_mode) recipe.allow_mode_override = true;
            recipe.check();
            auto backend = make_backend(recipe.backend, {recipe.seed, std::max(4, recipe.workers)});
            const auto result = convert_dataset(recipe, input, output, *backend, {resume, cancel});
            if (as_json) {
                out << write_manifest(result.manifest);
            } else {
                const auto& s = result.manifest.summary;
                out << "images " << s.images << ", tiles " << s.tiles << ", prompt mode " << to_string(result.mode)
                    << "\ninstances: valid " << s.valid << ", invalid " << s.invalid << ", dropped " << s.dropped
                    << ", failed " << s.failed << ", rejected at parse " << s.rejected << '\n';
            }
            return kExitOk;
        }
        if (*ablate) {
            const auto list = detail::parse_combos(combos);
            AblationOptions opt;
            opt.mask_grid = detail::parse_grid(grid);
            opt.magnitude = magnitude;
            opt.workers = workers.value_or(1);
            if (!(magnitude > 0.0)) throw ConfigError("magnitude must be positive");
            auto backend = make_backend(backend_spec, {seed.value_or(42), std::max(4, opt.workers)});
            if (!backend->health().ready) throw TransportError("backend " + backend->describe() + " is not ready");
            const AblationSet set = load_ablation_set(gt);
            const AblationReport report = run_ablation(set, list, *backend, opt);
            if (as_json) out << to_json(report).dump(2) << '\n';
            else out << format_table(report);
            return kExitOk;
        }
        if (*stats) {
            const auto path = std::filesystem::path(manifest);
            const DatasetManifest m = read_manifest_file(path, false);
            const StatsReport r = compute_stats(m, path.parent_path());
            if (as_json) out << to_json(r).dump(2) << '\n';
            else out << detail::format_stats(r);
            return kExitOk;
        }
        if (*validate) {
            const auto problems = validate_output(manifest);
            if (as_json) {
                out << nlohmann::json{{"ok", problems.empty()}, {"problems", problems}}.dump(2) << '\n';
            } else if (problems.empty()) {
                out << "OK\n";
            } else {
                for (const auto& p : problems) out << p << '\n';
            }
            return problems.empty() ? kExitOk : kExitFailure;
        }
    } catch (const CancelledError& e) {
        err << "interrupted: " << e.what() << '\n';
        return kExitInterrupted;
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace samrs
