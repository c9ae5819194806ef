// Copyright 2026 The samrs-convert Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "samrs/categories.hpp"
#include "samrs/errors.hpp"
#include "samrs/geometry.hpp"
#include "samrs/rle.hpp"

namespace samrs {

inline constexpr int kManifestSchemaVersion = 1;
inline constexpr const char* kToolVersion = "samrs-convert 0.1.0";

/// How one cropped instance ended up in a tile.
enum class InstanceStatus { Valid, Invalid, Dropped, Failed };

inline std::string to_string(InstanceStatus s) {
    switch (s) {
        case InstanceStatus::Valid: return "valid";
        case InstanceStatus::Invalid: return "invalid";
        case InstanceStatus::Dropped: return "dropped";
        case InstanceStatus::Failed: return "failed";
    }
    return "?";
}

inline InstanceStatus instance_status_from_string(const std::string& s) {
    if (s == "valid") return InstanceStatus::Valid;
    if (s == "invalid") return InstanceStatus::Invalid;
    if (s == "dropped") return InstanceStatus::Dropped;
    if (s == "failed") return InstanceStatus::Failed;
    throw SchemaError("unknown instance status '" + s + "'");
}

struct InstanceRef {
    std::string source_instance_id;
    int category_id = 0;
    InstanceStatus status = InstanceStatus::Failed;
    long long record = -1;  // index in the tile's instances file, -1 without a mask
    long long area = 0;
    std::optional<HBox> prompt_box;  // tile-local; absent for dropped instances

    friend bool operator==(const InstanceRef&, const InstanceRef&) = default;
};

struct TileRecord {
    std::string name;
    std::string source_image;
    int row = 0, col = 0;
    int x = 0, y = 0;
    int width = 0, height = 0;
    bool padded = false;
    std::string image_file;
    std::string semantic_map_file;
    std::string instances_file;
    std::vector<InstanceRef> instances;

    friend bool operator==(const TileRecord&, const TileRecord&) = default;
};

struct ParseRejection {
    std::string source_image;
    std::size_t index = 0;
    std::size_t line = 0;
    std::string reason;

    friend bool operator==(const ParseRejection&, const ParseRejection&) = default;
};

struct ManifestSummary {
    long long images = 0;
    long long tiles = 0;
    long long cropped = 0;  // instance/tile pairs that overlap
    long long valid = 0;
    long long invalid = 0;
    long long dropped = 0;
    long long failed = 0;
    long long rejected = 0;  // boxes rejected at parse time

    friend bool operator==(const ManifestSummary&, const ManifestSummary&) = default;
};

struct DatasetManifest {
    int schema_version = kManifestSchemaVersion;
    std::string tool_version = kToolVersion;
    std::string dataset;
    CategoryTable categories;
    nlohmann::json config = nlohmann::json::object();
    std::vector<TileRecord> tiles;
    std::vector<ParseRejection> rejected;
    ManifestSummary summary;

    friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

/// Recounts the summary from the tile records.
inline ManifestSummary summarize(const DatasetManifest& m, long long images) {
    ManifestSummary s;
    s.images = images;
    s.tiles = static_cast<long long>(m.tiles.size());
    s.rejected = static_cast<long long>(m.rejected.size());
    for (const auto& t : m.tiles) {
        for (const auto& i : t.instances) {
            ++s.cropped;
            switch (i.status) {
                case InstanceStatus::Valid: ++s.valid; break;
                case InstanceStatus::Invalid: ++s.invalid; break;
                case InstanceStatus::Dropped: ++s.dropped; break;
                case InstanceStatus::Failed: ++s.failed; break;
            }
        }
    }
    return s;
}

// --- JSON ------------------------------------------------------------------

inline nlohmann::json to_json(const CategoryTable& t) {
    nlohmann::json cats = nlohmann::json::array();
    for (const auto& c : t.categories()) cats.push_back({{"id", c.id}, {"name", c.name}, {"abbreviation", c.abbreviation}});
    return {{"dataset", t.dataset()}, {"entries", std::move(cats)}};
}

inline CategoryTable category_table_from_json(const nlohmann::json& j) {
    std::vector<std::pair<std::string, std::string>> entries;
    int expected = 1;
    for (const auto& c : j.at("entries")) {
        if (c.at("id").get<int>() != expected++) throw SchemaError("category ids must be 1..K in order");
        entries.emplace_back(c.at("name").get<std::string>(), c.at("abbreviation").get<std::string>());
    }
    return CategoryTable(j.at("dataset").get<std::string>(), entries);
}

inline nlohmann::json to_json(const TileRecord& t) {
    nlohmann::json insts = nlohmann::json::array();
    for (const auto& i : t.instances) {
        nlohmann::json box = nullptr;
        if (i.prompt_box) box = {i.prompt_box->x_min, i.prompt_box->y_min, i.prompt_box->x_max, i.prompt_box->y_max};
        insts.push_back({{"source_instance_id", i.source_instance_id},
                         {"category", i.category_id},
                         {"status", to_string(i.status)},
                         {"record", i.record},
                         {"area", i.area},
                         {"prompt_box", std::move(box)}});
    }
    return {{"name", t.name},
            {"source_image", t.source_image},
            {"index", {t.row, t.col}},
            {"origin", {t.x, t.y}},
            {"size", {t.width, t.height}},
            {"padded", t.padded},
            {"image", t.image_file},
            {"semantic_map", t.semantic_map_file},
            {"instances_file", t.instances_file},
            {"instances", std::move(insts)}};
}

inline TileRecord tile_record_from_json(const nlohmann::json& jt) {
    TileRecord t;
    t.name = jt.at("name").get<std::string>();
    t.source_image = jt.at("source_image").get<std::string>();
    t.row = jt.at("index").at(0).get<int>();
    t.col = jt.at("index").at(1).get<int>();
    t.x = jt.at("origin").at(0).get<int>();
    t.y = jt.at("origin").at(1).get<int>();
    t.width = jt.at("size").at(0).get<int>();
    t.height = jt.at("size").at(1).get<int>();
    t.padded = jt.at("padded").get<bool>();
    t.image_file = jt.at("image").get<std::string>();
    t.semantic_map_file = jt.at("semantic_map").get<std::string>();
    t.instances_file = jt.at("instances_file").get<std::string>();
    for (const auto& ji : jt.at("instances")) {
        InstanceRef r{ji.at("source_instance_id").get<std::string>(), ji.at("category").get<int>(),
                      instance_status_from_string(ji.at("status").get<std::string>()),
                      ji.at("record").get<long long>(), ji.at("area").get<long long>(), std::nullopt};
        const auto& b = ji.at("prompt_box");
        if (!b.is_null()) {
            r.prompt_box = HBox{b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(), b.at(3).get<double>()};
        }
        t.instances.push_back(std::move(r));
    }
    return t;
}

inline nlohmann::json to_json(const DatasetManifest& m) {
    nlohmann::json tiles = nlohmann::json::array();
    for (const auto& t : m.tiles) tiles.push_back(to_json(t));
    nlohmann::json rejected = nlohmann::json::array();
    for (const auto& r : m.rejected) {
        rejected.push_back({{"source_image", r.source_image}, {"index", r.index}, {"line", r.line}, {"reason", r.reason}});
    }
    const auto& s = m.summary;
    return {{"schema_version", m.schema_version},
            {"tool_version", m.tool_version},
            {"dataset", m.dataset},
            {"categories", to_json(m.categories)},
            {"config", m.config},
            {"tiles", std::move(tiles)},
            {"rejected", std::move(rejected)},
            {"summary",
             {{"images", s.images},
              {"tiles", s.tiles},
              {"cropped", s.cropped},
              {"valid", s.valid},
              {"invalid", s.invalid},
              {"dropped", s.dropped},
              {"failed", s.failed},
              {"rejected", s.rejected}}}};
}

/// Stable key order (sorted), two-space indent, trailing newline.
inline std::string write_manifest(const DatasetManifest& m) { return to_json(m).dump(2) + "\n"; }

struct ManifestReadOptions {
    bool strict = false;                 // verify that every referenced file exists
    std::filesystem::path root;          // base for relative file references
};

inline DatasetManifest read_manifest(const std::string& text, const ManifestReadOptions& opt = {}) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("manifest is not JSON: ") + e.what());
    }
    DatasetManifest m;
    try {
        m.schema_version = j.at("schema_version").get<int>();
        if (m.schema_version != kManifestSchemaVersion) {
            throw VersionError("manifest schema version " + std::to_string(m.schema_version) + " is not supported (expected " +
                               std::to_string(kManifestSchemaVersion) + ")");
        }
        m.tool_version = j.at("tool_version").get<std::string>();
        m.dataset = j.at("dataset").get<std::string>();
        m.categories = category_table_from_json(j.at("categories"));
        m.config = j.at("config");
        for (const auto& jt : j.at("tiles")) m.tiles.push_back(tile_record_from_json(jt));
        for (const auto& jr : j.at("rejected")) {
            m.rejected.push_back({jr.at("source_image").get<std::string>(), jr.at("index").get<std::size_t>(),
                                  jr.at("line").get<std::size_t>(), jr.at("reason").get<std::string>()});
        }
        const auto& js = j.at("summary");
        m.summary = {js.at("images").get<long long>(),  js.at("tiles").get<long long>(),
                     js.at("cropped").get<long long>(), js.at("valid").get<long long>(),
                     js.at("invalid").get<long long>(), js.at("dropped").get<long long>(),
                     js.at("failed").get<long long>(),  js.at("rejected").get<long long>()};
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("manifest: ") + e.what());
    }
    if (opt.strict) {
        for (const auto& t : m.tiles) {
            for (const auto* f : {&t.image_file, &t.semantic_map_file, &t.instances_file}) {
                if (!std::filesystem::exists(opt.root / *f)) {
                    throw ValidationError("tile " + t.name + " references missing file " + *f);
                }
            }
        }
    }
    return m;
}

inline DatasetManifest read_manifest_file(const std::filesystem::path& path, bool strict = false) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return read_manifest(ss.str(), {strict, path.parent_path()});
}

// --- per-tile instance files -----------------------------------------------

struct TileInstance {
    int category_id = 0;
    RleMask rle;
    double score = 0.0;
    bool valid = false;
    HBox bbox;

    friend bool operator==(const TileInstance&, const TileInstance&) = default;
};

struct TileInstances {
    ImageSize size;
    std::vector<TileInstance> instances;

    friend bool operator==(const TileInstances&, const TileInstances&) = default;
};

/// {"size": [H, W], "instances": [{"category", "rle", "score", "valid", "bbox"}]}
inline std::string write_tile_instances(const TileInstances& t) {
    nlohmann::json insts = nlohmann::json::array();
    for (const auto& i : t.instances) {
        insts.push_back({{"category", i.category_id},
                         {"rle", i.rle.counts},
                         {"score", i.score},
                         {"valid", i.valid},
                         {"bbox", {i.bbox.x_min, i.bbox.y_min, i.bbox.x_max, i.bbox.y_max}}});
    }
    nlohmann::json j = {{"size", {t.size.height, t.size.width}}, {"instances", std::move(insts)}};
    return j.dump() + "\n";
}

inline TileInstances read_tile_instances(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        TileInstances t;
        t.size = {j.at("size").at(1).get<int>(), j.at("size").at(0).get<int>()};
        for (const auto& ji : j.at("instances")) {
            TileInstance i;
            i.category_id = ji.at("category").get<int>();
            i.rle = {t.size.height, t.size.width, ji.at("rle").get<std::vector<std::int64_t>>()};
            check_rle(i.rle);
            i.score = ji.at("score").get<double>();
            i.valid = ji.at("valid").get<bool>();
            const auto& b = ji.at("bbox");
            i.bbox = {b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(), b.at(3).get<double>()};
            t.instances.push_back(std::move(i));
        }
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("tile instances: ") + e.what());
    }
}

}  // namespace samrs
