// Copyright 2026 The samrs-convert Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "samrs/cli.hpp"
#include "samrs/samrs.hpp"
#include "support/synthetic.hpp"

namespace samrs {
namespace {

namespace fs = std::filesystem;
using testing::SynthFormat;
using testing::TempDir;

const bool quiet = [] {
    log().set_level(spdlog::level::warn);
    return true;
}();

ConversionRecipe small_recipe(const std::string& base, int tile, int stride) {
    auto r = builtin_recipe(base);
    r.tiling.tile_size = tile;
    r.tiling.stride = stride;
    return r;
}

long long count_nonzero(const std::vector<std::uint8_t>& v) {
    return std::count_if(v.begin(), v.end(), [](auto x) { return x != 0; });
}

// Wraps a backend, counting calls and optionally raising a flag after `after` calls.
struct CountingBackend : Backend {
    explicit CountingBackend(Backend& inner, std::atomic<bool>* flag = nullptr, int after = 0)
        : inner_(inner), flag_(flag), after_(after) {}
    std::string describe() const override { return inner_.describe(); }
    BackendHealth health() override { return inner_.health(); }
    SegmentResponse segment(const SegmentRequest& req) override {
        const int n = ++calls;
        if (flag_ && n >= after_) flag_->store(true);
        return inner_.segment(req);
    }
    std::atomic<int> calls{0};

private:
    Backend& inner_;
    std::atomic<bool>* flag_;
    int after_;
};

struct FailingBackend : Backend {
    std::string describe() const override { return "failing"; }
    BackendHealth health() override { return {"failing", true}; }
    SegmentResponse segment(const SegmentRequest& req) override {
        SegmentResponse r;
        r.results.resize(req.prompt_sets.size());
        return r;
    }
};

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult cli(std::vector<std::string> args) {
    args.insert(args.begin(), {"samrs", "--log-level", "warn"});
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(int(argv.size()), argv.data(), out, err);
    log().set_level(spdlog::level::warn);
    return {code, out.str(), err.str()};
}

// --- formats and recipes -----------------------------------------------------------

TEST(Formats, Detection) {
    EXPECT_EQ(detect_annotation_format("0 0 1 0 1 1 0 1 plane 0\n"), AnnotationFormat::Dota);
    EXPECT_EQ(detect_annotation_format("<annotation><object/></annotation>"), AnnotationFormat::Voc);
    EXPECT_EQ(detect_annotation_format("<annotation><objects/></annotation>"), AnnotationFormat::Fair1m);
    EXPECT_EQ(annotation_format_from_string("dior"), AnnotationFormat::Voc);
    EXPECT_THROW(annotation_format_from_string("coco"), ConfigError);
}

TEST(Recipes, Builtins) {
    const auto sota = builtin_recipe("sota");
    EXPECT_EQ(sota.tiling.tile_size, 1024);
    EXPECT_EQ(sota.tiling.stride, 824);
    EXPECT_EQ(sota.categories.size(), 18u);
    EXPECT_EQ(sota.mode, BoxMode::HBox);
    const auto sior = builtin_recipe("DIOR");
    EXPECT_EQ(sior.tiling.tile_size, 800);
    EXPECT_EQ(sior.tiling.stride, 800);
    EXPECT_EQ(sior.categories.size(), 20u);
    const auto fast = builtin_recipe("fair1m");
    EXPECT_EQ(fast.tiling.tile_size, 600);
    EXPECT_EQ(fast.tiling.stride, 600);
    EXPECT_EQ(fast.categories.size(), 37u);
    EXPECT_EQ(fast.mode, BoxMode::RHBox);
    EXPECT_THROW(builtin_recipe("coco"), ConfigError);
    EXPECT_THROW(builtin_recipe("custom").check(), ConfigError);
}

TEST(Recipes, GuardsInCheck) {
    auto fast = builtin_recipe("fast");
    fast.mode = BoxMode::HBox;
    EXPECT_THROW(fast.check(), ConfigError);
    auto sota = builtin_recipe("sota");
    sota.mode = BoxMode::RHBox;
    EXPECT_THROW(sota.check(), ConfigError);
    sota.allow_mode_override = true;
    EXPECT_NO_THROW(sota.check());
    sota.mode = BoxMode::RBox;
    EXPECT_THROW(sota.check(), ConfigError);
    auto r = builtin_recipe("sior");
    r.workers = 0;
    EXPECT_THROW(r.check(), ConfigError);
    r = builtin_recipe("sior");
    r.failure_budget = 1.5;
    EXPECT_THROW(r.check(), ConfigError);
}

TEST(Recipes, FromJson) {
    const auto r = recipe_from_json(nlohmann::json::parse(R"({
        "base": "sota", "tile_size": 512, "stride": 400, "retention": 0.3, "small_image": "shrink",
        "backend": "oracle:erosion", "workers": 3, "failure_budget": 0.1, "seed": 7})"));
    EXPECT_EQ(r.name, "SOTA");
    EXPECT_EQ(r.tiling.tile_size, 512);
    EXPECT_EQ(r.tiling.stride, 400);
    EXPECT_EQ(r.tiling.retention, 0.3);
    EXPECT_EQ(r.tiling.small_image, SmallImageMode::Shrink);
    EXPECT_EQ(r.backend, "oracle:erosion");
    EXPECT_EQ(r.workers, 3);
    EXPECT_EQ(r.seed, 7u);
    EXPECT_EQ(r.categories.size(), 18u);

    const auto c = recipe_from_json(nlohmann::json::parse(
        R"({"name": "mine", "categories": ["car", {"name": "big truck", "abbreviation": "BT"}], "mode": "rhbox"})"));
    EXPECT_EQ(c.family, RecipeFamily::Custom);
    EXPECT_EQ(c.categories.size(), 2u);
    EXPECT_EQ(c.categories.find("big-truck"), 2);
    EXPECT_EQ(c.mode, BoxMode::RHBox);

    EXPECT_THROW(recipe_from_json(nlohmann::json::array()), ConfigError);
    EXPECT_THROW(recipe_from_json(nlohmann::json::parse(R"({"tile_size": "big"})")), ConfigError);
    EXPECT_THROW(recipe_from_json(nlohmann::json::parse(R"({"mode": "rbox"})")), ConfigError);
}

TEST(Recipes, PromptModeResolution) {
    const auto sota = builtin_recipe("sota");
    EXPECT_EQ(resolve_prompt_mode(sota, {true, true}), BoxMode::HBox);
    EXPECT_EQ(resolve_prompt_mode(sota, {true, false}), BoxMode::HBox);
    EXPECT_THROW(resolve_prompt_mode(sota, {false, true}), ConfigError);
    auto over = sota;
    over.allow_mode_override = true;
    EXPECT_EQ(resolve_prompt_mode(over, {false, true}), BoxMode::RHBox);

    const auto fast = builtin_recipe("fast");
    EXPECT_EQ(resolve_prompt_mode(fast, {false, true}), BoxMode::RHBox);
    EXPECT_THROW(resolve_prompt_mode(fast, {true, false}), ConfigError);

    auto custom = builtin_recipe("custom");
    EXPECT_EQ(resolve_prompt_mode(custom, {false, true}), BoxMode::RHBox);
    EXPECT_EQ(resolve_prompt_mode(custom, {true, true}), BoxMode::HBox);
    EXPECT_THROW(resolve_prompt_mode(custom, {false, false}), ConfigError);
    custom.mode = BoxMode::RHBox;
    EXPECT_EQ(resolve_prompt_mode(custom, {true, true}), BoxMode::RHBox);
    EXPECT_THROW(resolve_prompt_mode(custom, {true, false}), ConfigError);
}

// --- statistics ---------------------------------------------------------------------

TEST(Histogram, Examples) {
    auto h = mask_size_histogram({50});
    EXPECT_EQ(h.counts[0], 1);
    h = mask_size_histogram({99, 100});
    EXPECT_EQ(h.counts[0], 1);
    EXPECT_EQ(h.counts[1], 1);
    h = mask_size_histogram({10, 500});
    EXPECT_EQ(h.counts, (std::vector<long long>{1, 0, 1, 0, 0, 0, 0, 0}));
    h = mask_size_histogram({1000000000LL});
    EXPECT_EQ(h.counts.back(), 1);
    h = mask_size_histogram({5, 15, 25}, {10, 20});
    EXPECT_EQ(h.counts, (std::vector<long long>{1}));
    EXPECT_THROW(mask_size_histogram({}, {1}), ConfigError);
    EXPECT_THROW(mask_size_histogram({}, {1, 1}), ConfigError);
}

TEST(Histogram, MatchesDirectRecount) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<long long> area(0, 200000);
    std::vector<long long> areas(1000);
    for (auto& a : areas) a = area(rng);
    const auto edges = default_mask_size_edges();
    const auto h = mask_size_histogram(areas);
    long long total = 0;
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
        const long long direct =
            std::count_if(areas.begin(), areas.end(), [&](long long a) { return a >= edges[k] && a < edges[k + 1]; });
        EXPECT_EQ(h.counts[k], direct);
        total += h.counts[k];
    }
    EXPECT_EQ(total, 1000);
}

TEST(Stats, ValidInstancesOnly) {
    StatsAccumulator acc(sota_categories());
    Bitmask a(4, 4), b(4, 4);
    a.at(0, 0) = 1;
    b.at(1, 1) = 1;
    b.at(2, 2) = 1;
    TileInstances t{{4, 4}, {{3, rle_encode(a), 1.0, true, {}}, {5, rle_encode(b), 0.5, false, {}}}};
    SemanticMap map(4, 4);
    map.labels[0] = 3;
    acc.add_tile(t, map);
    const auto r = acc.finish();
    EXPECT_EQ(r.valid_instances, 1);
    EXPECT_EQ(r.categories[2].instances, 1);
    EXPECT_EQ(r.categories[4].instances, 0);
    EXPECT_EQ(r.categories[2].pixels, 1);
    EXPECT_EQ(r.labeled_pixels, 1);
    EXPECT_EQ(r.mask_sizes.counts[0], 1);
    EXPECT_EQ(stats_from_json(to_json(r)), r);

    StatsAccumulator other(sota_categories());
    other.add_tile(t, map);
    acc.merge(other);
    EXPECT_EQ(acc.finish().valid_instances, 2);
    EXPECT_EQ(acc.finish().tiles, 2);
    EXPECT_THROW(acc.merge(StatsAccumulator(sior_categories())), ConfigError);
    TileInstances bad{{4, 4}, {{99, rle_encode(a), 1.0, true, {}}}};
    EXPECT_THROW(acc.add_tile(bad, map), IntegrityError);
}

// --- inputs ---------------------------------------------------------------------------

TEST(Inputs, Discovery) {
    TempDir dir("inputs");
    testing::write_detection_dataset(dir.path(), {{64, 64}, {64, 64}}, 2, SynthFormat::Voc, sior_categories(), 1);
    testing::write_text(dir / "images/notes.md", "not an image");
    const auto found = discover_inputs(dir.path());
    ASSERT_EQ(found.size(), 2u);
    EXPECT_EQ(found[0].id, "scene0");
    EXPECT_EQ(found[1].annotation.extension(), ".xml");
    fs::remove(dir / "annotations/scene1.xml");
    EXPECT_THROW(discover_inputs(dir.path()), IoError);
    EXPECT_THROW(discover_inputs(dir / "nowhere"), IoError);
}

// --- conversion -------------------------------------------------------------------------

TEST(Convert, TwoBoxesOneTile) {
    TempDir dir("convert");
    const auto specs =
        testing::write_detection_dataset(dir / "in", {{256, 256}}, 2, SynthFormat::Voc, sior_categories(), 2);
    FillOracle fill;
    const auto result = convert_dataset(small_recipe("sior", 256, 256), dir / "in", dir / "out", fill);
    const auto& m = result.manifest;
    EXPECT_EQ(result.mode, BoxMode::HBox);
    ASSERT_EQ(m.tiles.size(), 1u);
    EXPECT_EQ(m.summary.valid, 2);
    EXPECT_EQ(m.summary.images, 1);
    EXPECT_EQ(m.tiles[0].name, "scene0__0_0");
    EXPECT_EQ(m.tiles[0].instances[0].source_instance_id, "scene0:0");

    // The semantic map is exactly the union of the two boxes with their labels.
    const auto map = SemanticMap::from_image(read_image(dir / "out" / m.tiles[0].semantic_map_file));
    SemanticMap expect(256, 256);
    for (const auto& b : specs[0].boxes) {
        for (int y = b.y0; y < b.y1; ++y) {
            for (int x = b.x0; x < b.x1; ++x) expect.labels[std::size_t(y) * 256 + std::size_t(x)] = std::uint8_t(b.category);
        }
    }
    EXPECT_EQ(map, expect);

    // The tile image is the source image.
    EXPECT_EQ(read_image(dir / "out" / m.tiles[0].image_file).pixels, read_image(dir / "in/images/scene0.png").pixels);
    EXPECT_TRUE(fs::exists(dir / "out/sem_maps/palette.json"));
    EXPECT_FALSE(fs::exists(dir / "out/.checkpoints"));
    EXPECT_TRUE(validate_output(dir / "out/manifest.json").empty());
    EXPECT_EQ(read_manifest_file(dir / "out/manifest.json", true), m);
}

TEST(Convert, LargeImageGivesNineTiles) {
    TempDir dir("nine");
    testing::write_detection_dataset(dir / "in", {{2048, 2048}}, 6, SynthFormat::DotaAxis, sota_categories(), 3);
    FillOracle fill;
    const auto result = convert_dataset(builtin_recipe("sota"), dir / "in", dir / "out", fill);
    ASSERT_EQ(result.manifest.tiles.size(), 9u);
    const int origins[3] = {0, 824, 1024};
    for (std::size_t i = 0; i < 9; ++i) {
        EXPECT_EQ(result.manifest.tiles[i].x, origins[i % 3]);
        EXPECT_EQ(result.manifest.tiles[i].y, origins[i / 3]);
        EXPECT_EQ(result.manifest.tiles[i].width, 1024);
    }
    EXPECT_TRUE(validate_output(dir / "out/manifest.json").empty());
}

TEST(Convert, ConservationAndRecount) {
    TempDir dir("conserve");
    testing::write_detection_dataset(dir / "in", {{300, 260}, {500, 410}, {200, 200}}, 9, SynthFormat::DotaRotated,
                                     sota_categories(), 4);
    auto recipe = small_recipe("sota", 160, 120);
    recipe.allow_mode_override = true;
    ErosionOracle ero;
    const auto result = convert_dataset(recipe, dir / "in", dir / "out", ero);
    EXPECT_EQ(result.mode, BoxMode::RHBox);
    const auto& s = result.stats;
    const auto& sum = result.manifest.summary;
    EXPECT_EQ(sum.cropped, sum.valid + sum.invalid + sum.dropped + sum.failed);
    EXPECT_EQ(s.valid_instances, sum.valid);
    long long inst = 0, px = 0, hist = 0;
    for (const auto& c : s.categories) {
        inst += c.instances;
        px += c.pixels;
    }
    for (auto c : s.mask_sizes.counts) hist += c;
    EXPECT_EQ(inst, s.valid_instances);
    EXPECT_EQ(px, s.labeled_pixels);
    EXPECT_EQ(hist, s.valid_instances);
    EXPECT_EQ(s.tiles, sum.tiles);

    // Labeled pixels equal the union of valid masks, tile by tile.
    long long union_px = 0;
    for (const auto& t : result.manifest.tiles) {
        const auto ti = read_tile_instances(read_text_file(dir / "out" / t.instances_file));
        std::vector<std::uint8_t> u(std::size_t(t.width) * std::size_t(t.height), 0);
        for (const auto& i : ti.instances) {
            if (!i.valid) continue;
            const auto bits = rle_decode(i.rle);
            for (std::size_t k = 0; k < u.size(); ++k) u[k] |= bits.bits[k];
        }
        union_px += count_nonzero(u);
        const auto map = SemanticMap::from_image(read_image(dir / "out" / t.semantic_map_file));
        EXPECT_EQ(count_nonzero(map.labels), count_nonzero(u)) << t.name;
    }
    EXPECT_EQ(union_px, s.labeled_pixels);

    const auto again = compute_stats(read_manifest_file(dir / "out/manifest.json"), dir / "out");
    EXPECT_EQ(again, s);
    EXPECT_EQ(stats_from_json(nlohmann::json::parse(read_text_file(dir / "out/stats.json"))), s);
}

TEST(Convert, EmptyDataset) {
    TempDir dir("empty");
    fs::create_directories(dir / "in/images");
    fs::create_directories(dir / "in/annotations");
    FillOracle fill;
    const auto result = convert_dataset(builtin_recipe("sota"), dir / "in", dir / "out", fill);
    EXPECT_TRUE(result.manifest.tiles.empty());
    EXPECT_EQ(result.stats.valid_instances, 0);
    EXPECT_EQ(result.stats.labeled_pixels, 0);
    for (const auto& c : result.stats.categories) {
        EXPECT_EQ(c.pixels, 0);
        EXPECT_EQ(c.instances, 0);
    }
    for (auto c : result.stats.mask_sizes.counts) EXPECT_EQ(c, 0);
    EXPECT_TRUE(validate_output(dir / "out/manifest.json").empty());
}

TEST(Convert, RecipeGuardsOnInput) {
    TempDir dir("guards");
    testing::write_detection_dataset(dir / "rot", {{128, 128}}, 3, SynthFormat::DotaRotated, sota_categories(), 5);
    testing::write_detection_dataset(dir / "voc", {{128, 128}}, 3, SynthFormat::Voc, fast_categories(), 6);
    FillOracle fill;
    EXPECT_THROW(convert_dataset(small_recipe("sota", 128, 128), dir / "rot", dir / "o1", fill), ConfigError);
    EXPECT_THROW(convert_dataset(small_recipe("fast", 128, 128), dir / "voc", dir / "o2", fill), ConfigError);
    auto over = small_recipe("sota", 128, 128);
    over.allow_mode_override = true;
    EXPECT_EQ(convert_dataset(over, dir / "rot", dir / "o3", fill).mode, BoxMode::RHBox);
}

TEST(Convert, ParseFailuresNameTheFile) {
    TempDir dir("parsefail");
    testing::write_detection_dataset(dir / "in", {{64, 64}}, 1, SynthFormat::DotaAxis, sota_categories(), 7);
    testing::write_text(dir / "in/annotations/scene0.txt", "1 2 3\n");
    FillOracle fill;
    try {
        convert_dataset(small_recipe("sota", 64, 64), dir / "in", dir / "out", fill);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("scene0.txt"), std::string::npos);
    }
}

TEST(Convert, UnhealthyBackendAborts) {
    TempDir dir("unhealthy");
    testing::write_detection_dataset(dir / "in", {{64, 64}}, 1, SynthFormat::Voc, sior_categories(), 8);
    struct Down : FailingBackend {
        BackendHealth health() override { return {"", false}; }
    } down;
    EXPECT_THROW(convert_dataset(small_recipe("sior", 64, 64), dir / "in", dir / "out", down), TransportError);
}

TEST(Convert, FailureBudget) {
    TempDir dir("budget");
    testing::write_detection_dataset(dir / "in", {{128, 128}, {128, 128}}, 4, SynthFormat::Voc, sior_categories(), 9);
    FailingBackend failing;
    EXPECT_THROW(convert_dataset(small_recipe("sior", 128, 128), dir / "in", dir / "out", failing),
                 FailureBudgetError);
    auto lenient = small_recipe("sior", 128, 128);
    lenient.failure_budget = 1.0;
    const auto result = convert_dataset(lenient, dir / "in", dir / "out", failing);
    EXPECT_EQ(result.manifest.summary.failed, 8);
    EXPECT_EQ(result.manifest.summary.valid, 0);
    EXPECT_TRUE(validate_output(dir / "out/manifest.json").empty());
}

TEST(Convert, WorkerCountDoesNotChangeOutput) {
    TempDir dir("workers");
    testing::write_detection_dataset(dir / "in", {{200, 180}, {260, 240}, {150, 150}, {220, 300}}, 6,
                                     SynthFormat::DotaAxis, sota_categories(), 10);
    ErosionOptions opt;
    opt.jitter = 3;
    ErosionOracle ero(opt);
    auto recipe = small_recipe("sota", 128, 100);
    convert_dataset(recipe, dir / "in", dir / "a", ero);
    recipe.workers = 4;
    convert_dataset(recipe, dir / "in", dir / "b", ero);
    EXPECT_EQ(testing::snapshot_tree(dir / "a"), testing::snapshot_tree(dir / "b"));
}

TEST(Convert, CancelThenResumeMatchesACleanRun) {
    TempDir dir("resume");
    testing::write_detection_dataset(dir / "in", {{128, 128}, {128, 128}, {128, 128}, {128, 128}}, 3,
                                     SynthFormat::Voc, sior_categories(), 11);
    const auto recipe = small_recipe("sior", 128, 128);
    FillOracle fill;

    CountingBackend clean(fill);
    convert_dataset(recipe, dir / "in", dir / "clean", clean);

    std::atomic<bool> cancel{false};
    CountingBackend first(fill, &cancel, 2);
    EXPECT_THROW(convert_dataset(recipe, dir / "in", dir / "out", first, {false, &cancel}), CancelledError);
    EXPECT_TRUE(fs::exists(dir / "out/.checkpoints/config.json"));
    EXPECT_FALSE(fs::exists(dir / "out/manifest.json"));

    auto changed = recipe;
    changed.tiling.retention = 0.9;
    EXPECT_THROW(convert_dataset(changed, dir / "in", dir / "out", fill, {true, nullptr}), ConfigError);

    CountingBackend second(fill);
    convert_dataset(recipe, dir / "in", dir / "out", second, {true, nullptr});
    EXPECT_EQ(first.calls + second.calls, clean.calls);
    EXPECT_LT(second.calls, clean.calls);
    EXPECT_EQ(testing::snapshot_tree(dir / "out"), testing::snapshot_tree(dir / "clean"));
}

TEST(Convert, NonResumeRunStartsFresh) {
    TempDir dir("fresh");
    testing::write_detection_dataset(dir / "in", {{96, 96}}, 2, SynthFormat::Voc, sior_categories(), 12);
    FillOracle fill;
    testing::write_text(dir / "out/images/stale__0_0.png", "old");
    convert_dataset(small_recipe("sior", 96, 96), dir / "in", dir / "out", fill);
    EXPECT_FALSE(fs::exists(dir / "out/images/stale__0_0.png"));
}

TEST(Validate, DetectsTampering) {
    TempDir dir("tamper");
    testing::write_detection_dataset(dir / "in", {{128, 128}}, 3, SynthFormat::Voc, sior_categories(), 13);
    FillOracle fill;
    const auto result = convert_dataset(small_recipe("sior", 128, 128), dir / "in", dir / "out", fill);
    ASSERT_TRUE(validate_output(dir / "out/manifest.json").empty());

    auto stats = nlohmann::json::parse(read_text_file(dir / "out/stats.json"));
    stats["totals"]["labeled_pixels"] = 1;
    testing::write_text(dir / "out/stats.json", stats.dump());
    EXPECT_FALSE(validate_output(dir / "out/manifest.json").empty());

    auto m = result.manifest;
    m.summary.valid += 1;
    testing::write_text(dir / "out/manifest.json", write_manifest(m));
    EXPECT_FALSE(validate_output(dir / "out/manifest.json").empty());

    m = result.manifest;
    m.tiles[0].instances[0].area += 1;
    testing::write_text(dir / "out/manifest.json", write_manifest(m));
    EXPECT_FALSE(validate_output(dir / "out/manifest.json").empty());

    testing::write_text(dir / "out/manifest.json", write_manifest(result.manifest));
    fs::remove(dir / "out" / result.manifest.tiles[0].image_file);
    EXPECT_FALSE(validate_output(dir / "out/manifest.json").empty());
}

// --- command line -------------------------------------------------------------------------

TEST(Cli, UsageErrors) {
    EXPECT_EQ(cli({}).code, kExitUsage);
    EXPECT_EQ(cli({"convert", "--no-such-flag"}).code, kExitUsage);
    EXPECT_EQ(cli({"convert", "--output", "x"}).code, kExitUsage);
    EXPECT_EQ(cli({"frobnicate"}).code, kExitUsage);
    EXPECT_EQ(cli({"convert", "--input", "a", "--output", "b", "--recipe", "coco"}).code, kExitUsage);
    EXPECT_EQ(cli({"convert", "--input", "a", "--output", "b", "--workers", "0"}).code, kExitUsage);
    EXPECT_EQ(cli({"ablate", "--gt", "x", "--combos", "hbox+rhbox"}).code, kExitUsage);
    EXPECT_EQ(cli({"ablate", "--gt", "x", "--mask-grid", "0"}).code, kExitUsage);
    const auto help = cli({"--help"});
    EXPECT_EQ(help.code, kExitOk);
    EXPECT_NE(help.out.find("convert"), std::string::npos);
}

TEST(Cli, ConvertStatsValidate) {
    TempDir dir("cli");
    testing::write_detection_dataset(dir / "in", {{300, 300}, {200, 260}}, 5, SynthFormat::DotaAxis, sota_categories(),
                                     14);
    const std::string in = (dir / "in").string(), out = (dir / "out").string();
    const auto conv = cli({"convert", "--recipe", "sota", "--input", in, "--output", out, "--tile-size", "256",
                           "--backend", "oracle:erosion", "--json"});
    ASSERT_EQ(conv.code, kExitOk) << conv.err;
    const auto m = read_manifest(conv.out);
    EXPECT_EQ(m.config["tile_size"], 256);
    EXPECT_EQ(m.config["stride"], 256);
    EXPECT_EQ(m, read_manifest_file(dir / "out/manifest.json"));

    const auto st = cli({"stats", "--manifest", out + "/manifest.json", "--json"});
    ASSERT_EQ(st.code, kExitOk) << st.err;
    EXPECT_EQ(nlohmann::json::parse(st.out), nlohmann::json::parse(read_text_file(dir / "out/stats.json")));
    const auto text = cli({"stats", "--manifest", out + "/manifest.json"});
    EXPECT_NE(text.out.find("mask size histogram"), std::string::npos);

    const auto ok = cli({"validate", "--manifest", out + "/manifest.json", "--json"});
    EXPECT_EQ(ok.code, kExitOk);
    EXPECT_EQ(nlohmann::json::parse(ok.out)["ok"], true);
    fs::remove(dir / "out" / m.tiles[0].semantic_map_file);
    const auto bad = cli({"validate", "--manifest", out + "/manifest.json"});
    EXPECT_EQ(bad.code, kExitFailure);
    EXPECT_NE(bad.out.find("missing"), std::string::npos);
    EXPECT_EQ(cli({"stats", "--manifest", out + "/manifest.json"}).code, kExitFailure);
    EXPECT_EQ(cli({"stats", "--manifest", out + "/none.json"}).code, kExitFailure);
}

TEST(Cli, RecipeGuards) {
    TempDir dir("cliguard");
    testing::write_detection_dataset(dir / "voc", {{128, 128}}, 2, SynthFormat::Voc, fast_categories(), 15);
    testing::write_detection_dataset(dir / "rot", {{128, 128}}, 2, SynthFormat::DotaRotated, sota_categories(), 16);
    const auto fast = cli({"convert", "--recipe", "fair1m", "--input", (dir / "voc").string(), "--output",
                           (dir / "o1").string()});
    EXPECT_EQ(fast.code, kExitUsage);
    EXPECT_NE(fast.err.find("R-Box"), std::string::npos);
    const auto sota = cli({"convert", "--recipe", "sota", "--input", (dir / "rot").string(), "--output",
                           (dir / "o2").string()});
    EXPECT_EQ(sota.code, kExitUsage);
    const auto over = cli({"convert", "--recipe", "sota", "--allow-mode-override", "--input", (dir / "rot").string(),
                           "--output", (dir / "o3").string()});
    EXPECT_EQ(over.code, kExitOk) << over.err;
    EXPECT_NE(over.out.find("rhbox"), std::string::npos);

    testing::write_text(dir / "bad.json", R"({"base": "fast", "mode": "hbox"})");
    EXPECT_EQ(cli({"convert", "--recipe", (dir / "bad.json").string(), "--input", (dir / "voc").string(), "--output",
                   (dir / "o4").string()})
                  .code,
              kExitUsage);
}

TEST(Cli, SeedControlsTheStochasticOracle) {
    TempDir dir("seed");
    testing::write_detection_dataset(dir / "in", {{256, 256}, {256, 256}}, 8, SynthFormat::Voc, sior_categories(), 17);
    auto run = [&](const std::string& seed, const std::string& out) {
        return cli({"convert", "--recipe", "sior", "--input", (dir / "in").string(), "--output", (dir / out).string(),
                    "--tile-size", "256", "--backend", "oracle:erosion:radius=1,jitter=4", "--seed", seed})
            .code;
    };
    ASSERT_EQ(run("1", "a"), kExitOk);
    ASSERT_EQ(run("1", "b"), kExitOk);
    ASSERT_EQ(run("2", "c"), kExitOk);
    EXPECT_EQ(testing::snapshot_tree(dir / "a"), testing::snapshot_tree(dir / "b"));
    EXPECT_NE(testing::snapshot_tree(dir / "a"), testing::snapshot_tree(dir / "c"));
}

TEST(Cli, AblateTable) {
    TempDir dir("ablate");
    testing::write_ablation_set(testing::box_ablation_set(3, 4, 96, 96, 18), dir / "gt");
    const auto table = cli({"ablate", "--gt", (dir / "gt").string(), "--combos", "table", "--mask-grid", "96"});
    ASSERT_EQ(table.code, kExitOk) << table.err;
    EXPECT_NE(table.out.find("100.00"), std::string::npos);
    EXPECT_EQ(std::count(table.out.begin(), table.out.end(), '\n'), 17);

    const auto js = cli({"ablate", "--gt", (dir / "gt").string(), "--combos", "hbox,cp", "--json"});
    ASSERT_EQ(js.code, kExitOk) << js.err;
    const auto report = ablation_report_from_json(nlohmann::json::parse(js.out));
    ASSERT_EQ(report.rows.size(), 2u);
    EXPECT_EQ(report.rows[0].result->miou_instance, 1.0);
    EXPECT_EQ(report.rows[0].result->n, 12u);
    EXPECT_LT(report.rows[1].result->miou_instance, 1.0);

    EXPECT_EQ(cli({"ablate", "--gt", (dir / "none").string()}).code, kExitFailure);
    EXPECT_EQ(cli({"ablate", "--gt", (dir / "gt").string(), "--combos", "hbox,hbox"}).code, kExitUsage);
}

TEST(Cli, CancelExitsWithInterruptCode) {
    TempDir dir("cancel");
    testing::write_detection_dataset(dir / "in", {{64, 64}, {64, 64}}, 1, SynthFormat::Voc, sior_categories(), 19);
    std::atomic<bool> cancel{true};
    std::vector<std::string> args{"samrs", "--log-level", "off", "convert", "--recipe", "sior", "--input",
                                  (dir / "in").string(), "--output", (dir / "out").string()};
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    EXPECT_EQ(run_cli(int(argv.size()), argv.data(), out, err, &cancel), kExitInterrupted);
    log().set_level(spdlog::level::warn);
    EXPECT_NE(err.str().find("--resume"), std::string::npos);
}

}  // namespace
}  // namespace samrs
