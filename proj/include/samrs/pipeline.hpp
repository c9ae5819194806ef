// Copyright 2026 The samrs-convert Authors
// SPDX-License-Identifier: Apache-2.0
//
// Detection-to-segmentation conversion. Input layout:
//   <input>/images/<id>.{png,jpg,jpeg,tif,tiff,bmp}
//   <input>/annotations/<id>.{txt,xml}
// Output layout:
//   images/<tile>.png  sem_maps/<tile>.png  sem_maps/palette.json
//   instances/<tile>.json  manifest.json  stats.json
// Finished source images are checkpointed under .checkpoints/ until the run
// completes, so an interrupted run can resume.

#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "samrs/annotation.hpp"
#include "samrs/categories.hpp"
#include "samrs/errors.hpp"
#include "samrs/image.hpp"
#include "samrs/log.hpp"
#include "samrs/manifest.hpp"
#include "samrs/metrics.hpp"
#include "samrs/parallel.hpp"
#include "samrs/parsers.hpp"
#include "samrs/prompts.hpp"
#include "samrs/segmenter.hpp"
#include "samrs/semantic.hpp"
#include "samrs/stats.hpp"
#include "samrs/tiler.hpp"

namespace samrs {

enum class AnnotationFormat { Dota, Voc, Fair1m };

inline std::string to_string(AnnotationFormat f) {
    switch (f) {
        case AnnotationFormat::Dota: return "dota";
        case AnnotationFormat::Voc: return "voc";
        case AnnotationFormat::Fair1m: return "fair1m";
    }
    return "?";
}

inline AnnotationFormat annotation_format_from_string(std::string_view s) {
    if (s == "dota") return AnnotationFormat::Dota;
    if (s == "voc" || s == "dior") return AnnotationFormat::Voc;
    if (s == "fair1m") return AnnotationFormat::Fair1m;
    throw ConfigError("unknown annotation format '" + std::string(s) + "'");
}

/// XML with <objects>/<possibleresult> is FAIR1M, other XML is VOC, text is DOTA.
inline AnnotationFormat detect_annotation_format(std::string_view text) {
    const auto first = text.find_first_not_of(" \t\r\n\xEF\xBB\xBF");
    if (first == std::string_view::npos || text[first] != '<') return AnnotationFormat::Dota;
    if (text.find("<possibleresult") != std::string_view::npos || text.find("<objects") != std::string_view::npos) {
        return AnnotationFormat::Fair1m;
    }
    return AnnotationFormat::Voc;
}

inline ParsedAnnotations parse_annotations(const std::string& text, AnnotationFormat f, const CategoryTable& table) {
    switch (f) {
        case AnnotationFormat::Dota: return parse_dota(text, table);
        case AnnotationFormat::Voc: return parse_voc_xml(text, table);
        case AnnotationFormat::Fair1m: return parse_fair1m_xml(text, table);
    }
    throw ConfigError("unknown annotation format");
}

// --- recipes ---------------------------------------------------------------

/// Which built-in parameter set a recipe derives from; drives the mode guards.
enum class RecipeFamily { Custom, Sota, Sior, Fast };

struct ConversionRecipe {
    std::string name = "custom";
    RecipeFamily family = RecipeFamily::Custom;
    std::optional<AnnotationFormat> format;  // a hint; files are sniffed
    TilingPolicy tiling;
    std::optional<BoxMode> mode;  // nullopt: choose from the available boxes
    bool allow_mode_override = false;
    CategoryTable categories;
    std::string backend = "oracle:fill";
    int workers = 1;
    double failure_budget = 0.05;  // max share of prompted instances that may fail
    std::uint64_t seed = 42;

    void check() const {
        tiling.check();
        if (categories.size() == 0) throw ConfigError("recipe '" + name + "' has no category table");
        if (categories.size() > 255) throw ConfigError("more than 255 categories do not fit an 8-bit semantic map");
        if (workers < 1) throw ConfigError("workers must be >= 1");
        if (!(failure_budget >= 0.0 && failure_budget <= 1.0)) throw ConfigError("failure budget must lie in [0, 1]");
        if (mode == BoxMode::RBox) throw ConfigError("R-Box is not a box prompt; use hbox or rhbox");
        if (family == RecipeFamily::Fast && mode == BoxMode::HBox) {
            throw ConfigError("recipe '" + name + "' only has R-Boxes and refuses H-Box prompts");
        }
        if ((family == RecipeFamily::Sota || family == RecipeFamily::Sior) && mode == BoxMode::RHBox &&
            !allow_mode_override) {
            throw ConfigError("recipe '" + name + "' uses H-Box prompts; RH-Box needs the mode override");
        }
    }
};

inline ConversionRecipe builtin_recipe(std::string_view name) {
    std::string key(name);
    std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
    ConversionRecipe r;
    if (key == "sota" || key == "dota") {
        r.name = "SOTA";
        r.family = RecipeFamily::Sota;
        r.format = AnnotationFormat::Dota;
        r.tiling = {1024, 824, 0.5, SmallImageMode::Pad};
        r.mode = BoxMode::HBox;
        r.categories = sota_categories();
    } else if (key == "sior" || key == "dior") {
        r.name = "SIOR";
        r.family = RecipeFamily::Sior;
        r.format = AnnotationFormat::Voc;
        r.tiling = {800, 800, 0.5, SmallImageMode::Pad};
        r.mode = BoxMode::HBox;
        r.categories = sior_categories();
    } else if (key == "fast" || key == "fair1m") {
        r.name = "FAST";
        r.family = RecipeFamily::Fast;
        r.format = AnnotationFormat::Fair1m;
        r.tiling = {600, 600, 0.5, SmallImageMode::Pad};
        r.mode = BoxMode::RHBox;
        r.categories = fast_categories();
    } else if (key != "custom") {
        throw ConfigError("unknown recipe '" + std::string(name) + "' (expected sota, sior, fast, custom or a JSON file)");
    }
    return r;
}

inline BoxMode box_mode_from_string(std::string_view s) {
    if (s == "hbox") return BoxMode::HBox;
    if (s == "rhbox") return BoxMode::RHBox;
    throw ConfigError("unknown prompt mode '" + std::string(s) + "' (expected hbox or rhbox)");
}

inline SmallImageMode small_image_mode_from_string(std::string_view s) {
    if (s == "pad") return SmallImageMode::Pad;
    if (s == "shrink") return SmallImageMode::Shrink;
    throw ConfigError("unknown small-image mode '" + std::string(s) + "'");
}

/// Recipe document: {"base": builtin?, "name", "format", "tile_size", "stride",
/// "retention", "small_image", "mode", "allow_mode_override", "categories",
/// "backend", "workers", "failure_budget", "seed"}; every key is optional.
/// "categories" is a built-in table name or a list of names or
/// {"name", "abbreviation"} objects.
inline ConversionRecipe recipe_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("recipe must be a JSON object");
    try {
        ConversionRecipe r = builtin_recipe(j.value("base", std::string("custom")));
        if (j.contains("name")) r.name = j["name"].get<std::string>();
        if (j.contains("format")) r.format = annotation_format_from_string(j["format"].get<std::string>());
        if (j.contains("tile_size")) r.tiling.tile_size = j["tile_size"].get<int>();
        if (j.contains("stride")) r.tiling.stride = j["stride"].get<int>();
        if (j.contains("retention")) r.tiling.retention = j["retention"].get<double>();
        if (j.contains("small_image")) r.tiling.small_image = small_image_mode_from_string(j["small_image"].get<std::string>());
        if (j.contains("mode")) {
            if (j["mode"].is_null()) r.mode.reset();
            else r.mode = box_mode_from_string(j["mode"].get<std::string>());
        }
        if (j.contains("allow_mode_override")) r.allow_mode_override = j["allow_mode_override"].get<bool>();
        if (j.contains("categories")) {
            const auto& c = j["categories"];
            if (c.is_string()) {
                r.categories = builtin_categories(c.get<std::string>());
            } else {
                std::vector<std::pair<std::string, std::string>> entries;
                for (const auto& e : c) {
                    if (e.is_string()) entries.emplace_back(e.get<std::string>(), e.get<std::string>());
                    else entries.emplace_back(e.at("name").get<std::string>(), e.at("abbreviation").get<std::string>());
                }
                r.categories = CategoryTable(r.name, entries);
            }
        }
        if (j.contains("backend")) r.backend = j["backend"].get<std::string>();
        if (j.contains("workers")) r.workers = j["workers"].get<int>();
        if (j.contains("failure_budget")) r.failure_budget = j["failure_budget"].get<double>();
        if (j.contains("seed")) r.seed = j["seed"].get<std::uint64_t>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("recipe: ") + e.what());
    }
}

/// A built-in recipe name, or a path to a recipe JSON file.
inline ConversionRecipe load_recipe(const std::string& name_or_path) {
    if (std::filesystem::is_regular_file(name_or_path)) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(read_text_file(name_or_path));
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(name_or_path + ": " + e.what());
        }
        return recipe_from_json(j);
    }
    return builtin_recipe(name_or_path);
}

/// Applies the prompt-mode rule under the recipe's guards.
inline BoxMode resolve_prompt_mode(const ConversionRecipe& r, AvailableBoxes available) {
    auto need = [&](BoxMode m) {
        if (m == BoxMode::HBox && !available.hbox) {
            throw ConfigError("recipe '" + r.name + "' needs H-Boxes but some instances have none");
        }
        if (m == BoxMode::RHBox && !available.rbox) {
            throw ConfigError("recipe '" + r.name + "' needs R-Boxes but some instances have none");
        }
        return m;
    };
    switch (r.family) {
        case RecipeFamily::Fast: return need(BoxMode::RHBox);
        case RecipeFamily::Sota:
        case RecipeFamily::Sior:
            if (r.mode == BoxMode::RHBox) return need(BoxMode::RHBox);
            if (available.hbox) return BoxMode::HBox;
            if (available.rbox && r.allow_mode_override) {
                log().warn("recipe '{}': input has R-Boxes only, using RH-Box prompts by override", r.name);
                return BoxMode::RHBox;
            }
            throw ConfigError("recipe '" + r.name +
                              "' expects H-Box annotations; the input has R-Boxes only (pass the mode override to "
                              "use RH-Box prompts)");
        case RecipeFamily::Custom: break;
    }
    if (r.mode) return need(*r.mode);
    return choose_prompt_mode(available);
}

// --- inputs ----------------------------------------------------------------

struct SourceImage {
    std::string id;
    std::filesystem::path image;
    std::filesystem::path annotation;
};

inline std::vector<SourceImage> discover_inputs(const std::filesystem::path& input) {
    namespace fs = std::filesystem;
    const fs::path images = input / "images";
    const fs::path annotations = input / "annotations";
    if (!fs::is_directory(images)) throw IoError("missing image directory " + images.string());
    static const std::set<std::string> exts = {".png", ".jpg", ".jpeg", ".tif", ".tiff", ".bmp"};
    std::vector<SourceImage> out;
    for (const auto& e : fs::directory_iterator(images)) {
        if (!e.is_regular_file()) continue;
        std::string ext = e.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (!exts.count(ext)) continue;
        SourceImage s{e.path().stem().string(), e.path(), {}};
        for (const char* a : {".txt", ".xml"}) {
            if (fs::is_regular_file(annotations / (s.id + a))) {
                s.annotation = annotations / (s.id + a);
                break;
            }
        }
        if (s.annotation.empty()) throw IoError("no annotation file for image " + e.path().string());
        out.push_back(std::move(s));
    }
    std::sort(out.begin(), out.end(), [](const SourceImage& a, const SourceImage& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (out[i].id == out[i - 1].id) throw ConfigError("two images share the id '" + out[i].id + "'");
    }
    return out;
}

// --- conversion ------------------------------------------------------------

struct ConvertOptions {
    bool resume = false;
    const std::atomic<bool>* cancel = nullptr;
};

struct ConversionResult {
    DatasetManifest manifest;
    StatsReport stats;
    BoxMode mode = BoxMode::HBox;
};

/// Everything in the config snapshot except the worker count, which must not
/// change the output.
inline nlohmann::json config_snapshot(const ConversionRecipe& r, BoxMode mode, const std::string& backend) {
    return {{"recipe", r.name},
            {"tile_size", r.tiling.tile_size},
            {"stride", r.tiling.stride},
            {"retention", r.tiling.retention},
            {"small_image", r.tiling.small_image == SmallImageMode::Pad ? "pad" : "shrink"},
            {"edge_tiles", "anchored"},
            {"prompt_mode", to_string(mode)},
            {"backend", backend},
            {"seed", r.seed},
            {"failure_budget", r.failure_budget}};
}

namespace detail {

inline void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << text;
        if (!out) throw IoError("cannot write " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

struct SourceAnnotations {
    std::vector<InstanceAnnotation> instances;
    std::vector<ParseRejection> rejected;
};

struct ConvertedImage {
    std::vector<TileRecord> tiles;
    std::vector<ParseRejection> rejected;
    long long prompted = 0;
    long long failed = 0;
};

inline void count_prompted(ConvertedImage& o) {
    o.prompted = o.failed = 0;
    for (const auto& t : o.tiles) {
        for (const auto& i : t.instances) {
            if (i.status == InstanceStatus::Dropped) continue;
            ++o.prompted;
            if (i.status == InstanceStatus::Failed) ++o.failed;
        }
    }
}

class Converter {
public:
    Converter(const ConversionRecipe& recipe, BoxMode mode, Backend& backend, std::filesystem::path out)
        : recipe_(recipe), backend_(backend), out_(std::move(out)) {
        combo_.hbox = mode == BoxMode::HBox;
        combo_.rhbox = mode == BoxMode::RHBox;
    }

    ConvertedImage process(const SourceImage& src, const SourceAnnotations& ann, StatsAccumulator& stats) const {
        const Image image = read_image(src.image);
        ConvertedImage out;
        out.rejected = ann.rejected;
        for (const auto& spec : plan_tiles(image.size(), recipe_.tiling, src.id)) {
            out.tiles.push_back(process_tile(image, spec, ann.instances, stats));
        }
        count_prompted(out);
        return out;
    }

private:
    TileRecord process_tile(const Image& image, const TileSpec& spec, const std::vector<InstanceAnnotation>& instances,
                            StatsAccumulator& stats) const {
        const std::string name = spec.name();
        TileRecord rec;
        rec.name = name;
        rec.source_image = spec.image_id;
        rec.row = spec.row;
        rec.col = spec.col;
        rec.x = spec.x;
        rec.y = spec.y;
        rec.width = spec.width;
        rec.height = spec.height;
        rec.padded = spec.padded;
        rec.image_file = "images/" + name + ".png";
        rec.semantic_map_file = "sem_maps/" + name + ".png";
        rec.instances_file = "instances/" + name + ".json";

        const Image tile = crop_image(image, spec);
        const ImageSize dims = tile.size();
        const auto cropped = crop_annotations(instances, spec, recipe_.tiling);

        SegmentRequest req;
        req.image = tile;
        for (const auto& a : cropped.instances) req.prompt_sets.push_back(build_prompt_set(a, {combo_, {}, 1000.0}, dims));

        std::vector<std::vector<Candidate>> results(req.prompt_sets.size());
        try {
            results = segment(backend_, req).results;
        } catch (const ProtocolError& e) {
            log().warn("tile {}: backend failed: {}", name, e.what());
        } catch (const TransportError& e) {
            log().warn("tile {}: backend failed: {}", name, e.what());
        }

        TileInstances file{dims, {}};
        std::vector<LabeledMask> painted;
        std::map<std::string, InstanceRef> refs;
        for (std::size_t j = 0; j < cropped.instances.size(); ++j) {
            const auto& a = cropped.instances[j];
            InstanceRef ref{a.source_instance_id, a.category_id, InstanceStatus::Failed, -1, 0, req.prompt_sets[j].box};
            if (auto m = select_mask(results[j])) {
                m->valid = validate_mask(*m, *req.prompt_sets[j].box, dims);
                ref.status = m->valid ? InstanceStatus::Valid : InstanceStatus::Invalid;
                ref.record = static_cast<long long>(file.instances.size());
                ref.area = m->area;
                file.instances.push_back({a.category_id, m->rle, m->score, m->valid, m->bbox});
                if (m->valid) painted.push_back({*m, a.category_id});
            }
            refs.emplace(a.source_instance_id, std::move(ref));
        }
        for (const auto& id : cropped.dropped) {
            const auto it = std::find_if(instances.begin(), instances.end(),
                                         [&](const InstanceAnnotation& a) { return a.source_instance_id == id; });
            refs.emplace(id, InstanceRef{id, it->category_id, InstanceStatus::Dropped, -1, 0, std::nullopt});
        }
        // Source order keeps the record list independent of hashing or timing.
        for (const auto& a : instances) {
            auto it = refs.find(a.source_instance_id);
            if (it != refs.end()) rec.instances.push_back(std::move(it->second));
        }

        const SemanticMap sem = render_semantic_map(painted, dims);
        write_png(out_ / rec.image_file, tile);
        write_png(out_ / rec.semantic_map_file, sem.to_image());
        write_file_atomic(out_ / rec.instances_file, write_tile_instances(file));
        stats.add_tile(file, sem);
        return rec;
    }

    const ConversionRecipe& recipe_;
    PromptCombo combo_;
    Backend& backend_;
    std::filesystem::path out_;
};

inline nlohmann::json rejections_to_json(const std::vector<ParseRejection>& rs) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : rs) {
        out.push_back({{"source_image", r.source_image}, {"index", r.index}, {"line", r.line}, {"reason", r.reason}});
    }
    return out;
}

/// Loads a finished image from its checkpoint, re-reading its tile files for
/// the statistics. Returns nullopt when the checkpoint is unusable.
inline std::optional<ConvertedImage> load_checkpoint(const std::filesystem::path& path, const std::filesystem::path& root,
                                                   StatsAccumulator& stats) {
    if (!std::filesystem::exists(path)) return std::nullopt;
    try {
        const auto j = nlohmann::json::parse(read_text_file(path));
        ConvertedImage o;
        for (const auto& jt : j.at("tiles")) o.tiles.push_back(tile_record_from_json(jt));
        for (const auto& jr : j.at("rejected")) {
            o.rejected.push_back({jr.at("source_image").get<std::string>(), jr.at("index").get<std::size_t>(),
                                  jr.at("line").get<std::size_t>(), jr.at("reason").get<std::string>()});
        }
        StatsAccumulator local = stats;
        for (const auto& t : o.tiles) {
            local.add_tile(read_tile_instances(read_text_file(root / t.instances_file)),
                           SemanticMap::from_image(read_image(root / t.semantic_map_file)));
            if (!std::filesystem::exists(root / t.image_file)) return std::nullopt;
        }
        stats = std::move(local);
        count_prompted(o);
        return o;
    } catch (const std::exception& e) {
        log().warn("ignoring checkpoint {}: {}", path.string(), e.what());
        return std::nullopt;
    }
}

}  // namespace detail

/// Converts every image under `input` into tiles, masks and statistics under
/// `output`. Per-instance backend failures are recorded; the run aborts when
/// they exceed the recipe's failure budget.
inline ConversionResult convert_dataset(const ConversionRecipe& recipe, const std::filesystem::path& input,
                                        const std::filesystem::path& output, Backend& backend,
                                        const ConvertOptions& opt = {}) {
    namespace fs = std::filesystem;
    recipe.check();
    const auto sources = discover_inputs(input);

    std::vector<detail::SourceAnnotations> annotations(sources.size());
    std::vector<InstanceAnnotation> all;
    for (std::size_t i = 0; i < sources.size(); ++i) {
        const std::string text = read_text_file(sources[i].annotation);
        const AnnotationFormat f = detect_annotation_format(text);
        if (recipe.format && *recipe.format != f) {
            log().warn("{}: recipe expects {} annotations, file looks like {}", sources[i].annotation.string(),
                       to_string(*recipe.format), to_string(f));
        }
        ParsedAnnotations parsed;
        try {
            parsed = parse_annotations(text, f, recipe.categories);
        } catch (const ParseError& e) {
            throw ParseError(sources[i].annotation.string() + ": " + e.what());
        }
        for (auto& a : parsed.instances) a.source_instance_id = sources[i].id + ":" + a.source_instance_id;
        for (const auto& r : parsed.rejected) annotations[i].rejected.push_back({sources[i].id, r.index, r.line, r.reason});
        annotations[i].instances = std::move(parsed.instances);
        all.insert(all.end(), annotations[i].instances.begin(), annotations[i].instances.end());
    }
    const AvailableBoxes available = all.empty() ? AvailableBoxes{true, true} : available_boxes(all);
    const BoxMode mode = resolve_prompt_mode(recipe, available);

    const BackendHealth health = backend.health();
    if (!health.ready) throw TransportError("backend " + backend.describe() + " is not ready");

    const nlohmann::json config = config_snapshot(recipe, mode, backend.describe());
    const fs::path ckpt = output / ".checkpoints";
    if (opt.resume && fs::exists(ckpt / "config.json")) {
        if (nlohmann::json::parse(read_text_file(ckpt / "config.json")) != config) {
            throw ConfigError("cannot resume: the configuration differs from the interrupted run");
        }
    } else {
        for (const char* d : {".checkpoints", "images", "sem_maps", "instances"}) fs::remove_all(output / d);
        fs::remove(output / "manifest.json");
        fs::remove(output / "stats.json");
    }
    for (const char* d : {".checkpoints", "images", "sem_maps", "instances"}) fs::create_directories(output / d);
    detail::write_file_atomic(ckpt / "config.json", config.dump(2) + "\n");

    log().info("converting {} images with recipe {} ({} prompts, backend {})", sources.size(), recipe.name,
               to_string(mode), backend.describe());

    const detail::Converter converter(recipe, mode, backend, output);
    std::vector<detail::ConvertedImage> outcomes(sources.size());
    std::vector<StatsAccumulator> stats(sources.size(), StatsAccumulator(recipe.categories));
    std::atomic<long long> prompted{0}, failed{0}, done{0};
    std::atomic<bool> stop{false};
    auto over_budget = [&](long long p, long long f) {
        return p > 0 && static_cast<double>(f) > recipe.failure_budget * static_cast<double>(p);
    };

    parallel_for(
        sources.size(), recipe.workers,
        [&](std::size_t i) {
            const auto& src = sources[i];
            const fs::path cp = ckpt / (src.id + ".json");
            std::optional<detail::ConvertedImage> o;
            if (opt.resume) o = detail::load_checkpoint(cp, output, stats[i]);
            if (!o) {
                stats[i] = StatsAccumulator(recipe.categories);
                o = converter.process(src, annotations[i], stats[i]);
                nlohmann::json tiles = nlohmann::json::array();
                for (const auto& t : o->tiles) tiles.push_back(to_json(t));
                detail::write_file_atomic(cp, nlohmann::json{{"image", src.id},
                                                             {"tiles", std::move(tiles)},
                                                             {"rejected", detail::rejections_to_json(o->rejected)}}
                                                      .dump() +
                                                  "\n");
            }
            const long long p = prompted += o->prompted;
            const long long f = failed += o->failed;
            outcomes[i] = std::move(*o);
            log().info("[{}/{}] {}", ++done, sources.size(), src.id);
            if (p >= 100 && over_budget(p, f)) {
                stop = true;
                throw FailureBudgetError("backend failed on " + std::to_string(f) + " of " + std::to_string(p) +
                                         " prompted instances, over the budget of " +
                                         std::to_string(recipe.failure_budget));
            }
            if (opt.cancel && opt.cancel->load()) stop = true;
        },
        &stop);

    if (opt.cancel && opt.cancel->load()) {
        throw CancelledError("interrupted after " + std::to_string(done.load()) + " of " +
                             std::to_string(sources.size()) + " images; rerun with --resume to continue");
    }
    if (over_budget(prompted, failed)) {
        throw FailureBudgetError("backend failed on " + std::to_string(failed.load()) + " of " +
                                 std::to_string(prompted.load()) + " prompted instances, over the budget of " +
                                 std::to_string(recipe.failure_budget));
    }

    ConversionResult result;
    result.mode = mode;
    auto& m = result.manifest;
    m.dataset = recipe.name;
    m.categories = recipe.categories;
    m.config = config;
    StatsAccumulator total(recipe.categories);
    for (std::size_t i = 0; i < sources.size(); ++i) {
        for (auto& t : outcomes[i].tiles) m.tiles.push_back(std::move(t));
        m.rejected.insert(m.rejected.end(), outcomes[i].rejected.begin(), outcomes[i].rejected.end());
        total.merge(stats[i]);
    }
    m.summary = summarize(m, static_cast<long long>(sources.size()));
    total.set_failures(m.summary);
    result.stats = total.finish();

    detail::write_file_atomic(output / "sem_maps" / "palette.json", semantic_palette(recipe.categories).dump(2) + "\n");
    detail::write_file_atomic(output / "stats.json", to_json(result.stats).dump(2) + "\n");
    detail::write_file_atomic(output / "manifest.json", write_manifest(m));
    fs::remove_all(ckpt);
    log().info("wrote {} tiles: {} valid, {} invalid, {} dropped, {} failed", m.summary.tiles, m.summary.valid,
               m.summary.invalid, m.summary.dropped, m.summary.failed);
    return result;
}

/// Checks a converted tree: summary against tile records, referenced files,
/// instance-file consistency and the recorded statistics. Returns the list of
/// problems found; empty means the tree is consistent.
inline std::vector<std::string> validate_output(const std::filesystem::path& manifest_path) {
    namespace fs = std::filesystem;
    std::vector<std::string> problems;
    const DatasetManifest m = read_manifest_file(manifest_path, false);
    const fs::path root = manifest_path.parent_path();
    const ManifestSummary recount = summarize(m, m.summary.images);
    if (recount != m.summary) problems.push_back("summary counts differ from the tile records");
    for (const auto& t : m.tiles) {
        for (const auto* f : {&t.image_file, &t.semantic_map_file, &t.instances_file}) {
            if (!fs::exists(root / *f)) problems.push_back(t.name + ": missing " + *f);
        }
        if (!fs::exists(root / t.instances_file)) continue;
        TileInstances inst;
        try {
            inst = read_tile_instances(read_text_file(root / t.instances_file));
        } catch (const Error& e) {
            problems.push_back(t.name + ": " + e.what());
            continue;
        }
        if (inst.size.width != t.width || inst.size.height != t.height) {
            problems.push_back(t.name + ": instance file size differs from the tile");
        }
        for (const auto& r : t.instances) {
            if (!m.categories.contains(r.category_id)) problems.push_back(t.name + ": unknown category");
            const bool has_mask = r.status == InstanceStatus::Valid || r.status == InstanceStatus::Invalid;
            if (has_mask != (r.record >= 0)) {
                problems.push_back(t.name + ": " + r.source_instance_id + " has an inconsistent record index");
                continue;
            }
            if (!has_mask) continue;
            if (r.record >= static_cast<long long>(inst.instances.size())) {
                problems.push_back(t.name + ": " + r.source_instance_id + " points past the instance file");
                continue;
            }
            const auto& rec = inst.instances[static_cast<std::size_t>(r.record)];
            if (rec.valid != (r.status == InstanceStatus::Valid) || rec.rle.area() != r.area ||
                rec.category_id != r.category_id) {
                problems.push_back(t.name + ": " + r.source_instance_id + " disagrees with its mask record");
            }
        }
    }
    if (problems.empty() && fs::exists(root / "stats.json")) {
        try {
            const auto recorded = stats_from_json(nlohmann::json::parse(read_text_file(root / "stats.json")));
            if (recorded != compute_stats(m, root)) problems.push_back("stats.json differs from a recount of the files");
        } catch (const std::exception& e) {
            problems.push_back(std::string("stats: ") + e.what());
        }
    }
    return problems;
}

}  // namespace samrs
