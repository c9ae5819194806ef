// Copyright 2026 The samrs-convert Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "samrs/errors.hpp"
#include "samrs/image.hpp"
#include "samrs/manifest.hpp"
#include "samrs/semantic.hpp"

namespace samrs {

struct Histogram {
    std::vector<double> edges;  // strictly increasing; bins are [e_k, e_k+1)
    std::vector<long long> counts;

    friend bool operator==(const Histogram&, const Histogram&) = default;
};

inline std::vector<double> default_mask_size_edges() {
    return {0, 100, 500, 1000, 5000, 10000, 50000, 100000, std::numeric_limits<double>::infinity()};
}

/// Half-open binning. Values outside [edges.front(), edges.back()) are ignored.
inline Histogram mask_size_histogram(const std::vector<long long>& areas,
                                     const std::vector<double>& edges = default_mask_size_edges()) {
    if (edges.size() < 2) throw ConfigError("histogram needs at least two edges");
    for (std::size_t i = 1; i < edges.size(); ++i) {
        if (!(edges[i] > edges[i - 1])) throw ConfigError("histogram edges must be strictly increasing");
    }
    Histogram h{edges, std::vector<long long>(edges.size() - 1, 0)};
    for (long long a : areas) {
        const double v = static_cast<double>(a);
        if (v < edges.front() || v >= edges.back()) continue;
        const auto it = std::upper_bound(edges.begin(), edges.end(), v);
        ++h.counts[static_cast<std::size_t>(it - edges.begin() - 1)];
    }
    return h;
}

struct CategoryStats {
    int id = 0;
    std::string abbreviation;
    long long pixels = 0;     // from semantic maps
    long long instances = 0;  // valid instance masks

    friend bool operator==(const CategoryStats&, const CategoryStats&) = default;
};

struct StatsReport {
    std::string dataset;
    std::vector<CategoryStats> categories;
    Histogram mask_sizes;
    long long tiles = 0;
    long long valid_instances = 0;
    long long labeled_pixels = 0;
    long long invalid = 0;
    long long dropped = 0;
    long long failed = 0;
    long long rejected = 0;

    friend bool operator==(const StatsReport&, const StatsReport&) = default;
};

/// Accumulates statistics tile by tile. Only valid instances are counted.
class StatsAccumulator {
public:
    explicit StatsAccumulator(const CategoryTable& table, std::vector<double> edges = default_mask_size_edges())
        : edges_(std::move(edges)) {
        report_.dataset = table.dataset();
        for (const auto& c : table.categories()) report_.categories.push_back({c.id, c.abbreviation, 0, 0});
    }

    void add_tile(const TileInstances& instances, const SemanticMap& map) {
        ++report_.tiles;
        for (const auto& inst : instances.instances) {
            if (!inst.valid) continue;
            category(inst.category_id).instances += 1;
            ++report_.valid_instances;
            areas_.push_back(inst.rle.area());
        }
        for (auto label : map.labels) {
            if (label == 0) continue;
            category(label).pixels += 1;
            ++report_.labeled_pixels;
        }
    }

    void merge(const StatsAccumulator& other) {
        if (other.report_.categories.size() != report_.categories.size()) {
            throw ConfigError("cannot merge statistics over different category tables");
        }
        for (std::size_t i = 0; i < report_.categories.size(); ++i) {
            report_.categories[i].pixels += other.report_.categories[i].pixels;
            report_.categories[i].instances += other.report_.categories[i].instances;
        }
        report_.tiles += other.report_.tiles;
        report_.valid_instances += other.report_.valid_instances;
        report_.labeled_pixels += other.report_.labeled_pixels;
        areas_.insert(areas_.end(), other.areas_.begin(), other.areas_.end());
    }

    void set_failures(const ManifestSummary& s) {
        report_.invalid = s.invalid;
        report_.dropped = s.dropped;
        report_.failed = s.failed;
        report_.rejected = s.rejected;
    }

    StatsReport finish() const {
        StatsReport r = report_;
        r.mask_sizes = mask_size_histogram(areas_, edges_);
        return r;
    }

private:
    CategoryStats& category(int id) {
        if (id < 1 || id > static_cast<int>(report_.categories.size())) {
            throw IntegrityError("category id " + std::to_string(id) + " is not in the category table");
        }
        return report_.categories[static_cast<std::size_t>(id - 1)];
    }

    std::vector<double> edges_;
    std::vector<long long> areas_;
    StatsReport report_;
};

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Recomputes statistics from the files a conversion wrote under `root`.
inline StatsReport compute_stats(const DatasetManifest& manifest, const std::filesystem::path& root) {
    StatsAccumulator acc(manifest.categories);
    for (const auto& tile : manifest.tiles) {
        const auto inst_path = root / tile.instances_file;
        const auto map_path = root / tile.semantic_map_file;
        if (!std::filesystem::exists(inst_path)) throw IntegrityError("missing instance file " + inst_path.string());
        if (!std::filesystem::exists(map_path)) throw IntegrityError("missing semantic map " + map_path.string());
        acc.add_tile(read_tile_instances(read_text_file(inst_path)), SemanticMap::from_image(read_image(map_path)));
    }
    acc.set_failures(manifest.summary);
    return acc.finish();
}

inline nlohmann::json to_json(const StatsReport& r) {
    nlohmann::json cats = nlohmann::json::array();
    for (const auto& c : r.categories) {
        cats.push_back({{"id", c.id}, {"abbreviation", c.abbreviation}, {"pixels", c.pixels}, {"instances", c.instances}});
    }
    nlohmann::json edges = nlohmann::json::array();
    for (double e : r.mask_sizes.edges) {
        edges.push_back(std::isinf(e) ? nlohmann::json("inf") : nlohmann::json(e));
    }
    return {{"dataset", r.dataset},
            {"categories", std::move(cats)},
            {"mask_size_histogram", {{"edges", std::move(edges)}, {"counts", r.mask_sizes.counts}}},
            {"totals",
             {{"tiles", r.tiles}, {"valid_instances", r.valid_instances}, {"labeled_pixels", r.labeled_pixels}}},
            {"failures", {{"invalid", r.invalid}, {"dropped", r.dropped}, {"failed", r.failed}, {"rejected", r.rejected}}}};
}

inline StatsReport stats_from_json(const nlohmann::json& j) {
    try {
        StatsReport r;
        r.dataset = j.at("dataset").get<std::string>();
        for (const auto& c : j.at("categories")) {
            r.categories.push_back({c.at("id").get<int>(), c.at("abbreviation").get<std::string>(),
                                    c.at("pixels").get<long long>(), c.at("instances").get<long long>()});
        }
        for (const auto& e : j.at("mask_size_histogram").at("edges")) {
            r.mask_sizes.edges.push_back(e.is_string() ? std::numeric_limits<double>::infinity() : e.get<double>());
        }
        r.mask_sizes.counts = j.at("mask_size_histogram").at("counts").get<std::vector<long long>>();
        const auto& t = j.at("totals");
        r.tiles = t.at("tiles").get<long long>();
        r.valid_instances = t.at("valid_instances").get<long long>();
        r.labeled_pixels = t.at("labeled_pixels").get<long long>();
        const auto& f = j.at("failures");
        r.invalid = f.at("invalid").get<long long>();
        r.dropped = f.at("dropped").get<long long>();
        r.failed = f.at("failed").get<long long>();
        r.rejected = f.at("rejected").get<long long>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("stats report: ") + e.what());
    }
}

}  // namespace samrs
