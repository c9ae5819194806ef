// Copyright 2026 The samrs-convert Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cctype>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "samrs/errors.hpp"

namespace samrs {

struct Category {
    int id = 0;
    std::string name;
    std::string abbreviation;

    friend bool operator==(const Category&, const Category&) = default;
};

/// Case-insensitive key with spaces, hyphens and underscores removed, so
/// "storage-tank", "Storage Tank" and "storage_tanK" all compare equal.
inline std::string normalize_category_name(std::string_view name) {
    std::string out;
    out.reserve(name.size());
    for (char c : name) {
        if (c == ' ' || c == '-' || c == '_' || c == '\t') continue;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

/// Ordered category list. Ids are 1..K; 0 is background.
class CategoryTable {
public:
    CategoryTable() = default;

    /// Entries are (full name, abbreviation) in id order.
    CategoryTable(std::string dataset, const std::vector<std::pair<std::string, std::string>>& entries)
        : dataset_(std::move(dataset)) {
        std::set<std::string> abbrevs;
        std::set<std::string> names;
        int id = 1;
        for (const auto& [name, abbr] : entries) {
            if (!abbrevs.insert(abbr).second) {
                throw ConfigError("duplicate category abbreviation '" + abbr + "'");
            }
            if (!names.insert(normalize_category_name(name)).second) {
                throw ConfigError("duplicate category name '" + name + "'");
            }
            categories_.push_back({id++, name, abbr});
        }
    }

    const std::string& dataset() const { return dataset_; }
    const std::vector<Category>& categories() const { return categories_; }
    std::size_t size() const { return categories_.size(); }
    bool contains(int id) const { return id >= 1 && id <= static_cast<int>(categories_.size()); }
    const Category& at(int id) const {
        if (!contains(id)) throw ConfigError("category id " + std::to_string(id) + " not in table");
        return categories_[static_cast<std::size_t>(id - 1)];
    }

    /// Matches full names first, then abbreviations.
    std::optional<int> find(std::string_view name) const {
        const std::string key = normalize_category_name(name);
        for (const auto& c : categories_) {
            if (normalize_category_name(c.name) == key) return c.id;
        }
        for (const auto& c : categories_) {
            if (normalize_category_name(c.abbreviation) == key) return c.id;
        }
        return std::nullopt;
    }

    friend bool operator==(const CategoryTable&, const CategoryTable&) = default;

private:
    std::string dataset_;
    std::vector<Category> categories_;
};

// Built-in tables, in the order the category abbreviation lists give them.

inline const CategoryTable& sota_categories() {
    static const CategoryTable table("SOTA", {
        {"large vehicle", "LV"},     {"swimming pool", "SP"},      {"helicopter", "HC"},
        {"bridge", "BR"},            {"plane", "PL"},              {"ship", "SH"},
        {"soccer ball field", "SBF"}, {"basketball court", "BC"},  {"ground track field", "GTF"},
        {"small vehicle", "SV"},     {"baseball diamond", "BD"},   {"tennis court", "TC"},
        {"roundabout", "RA"},        {"storage tanK", "ST"},       {"harbor", "HA"},
        {"container crane", "CC"},   {"airport", "AP"},            {"helipad", "HP"},
    });
    return table;
}

inline const CategoryTable& sior_categories() {
    static const CategoryTable table("SIOR", {
        {"airplane", "APL"},
        {"airport", "APO"},
        {"baseballfield", "BF"},
        {"basketballcourt", "BC"},
        {"bridge", "BR"},
        {"chimney", "CH"},
        {"expressway service area", "ESA"},
        {"expressway toll station", "ETS"},
        {"dam", "DA"},
        {"golffield", "GF"},
        {"groundtrackfield", "GTF"},
        {"harbor", "HA"},
        {"overpass", "OP"},
        {"ship", "SH"},
        {"stadium", "STD"},
        {"storagetank", "STT"},
        {"tenniscourt", "TC"},
        {"trainstation", "TS"},
        {"vehicle", "VH"},
        {"windmill", "WD"},
    });
    return table;
}

inline const CategoryTable& fast_categories() {
    static const CategoryTable table("FAST", {
        {"A220", "A2"},
        {"A321", "A3"},
        {"A330", "A4"},
        {"A350", "A5"},
        {"ARJ21", "ARJ"},
        {"baseball field", "BF"},
        {"basketball court", "BC"},
        {"boeing737", "B3"},
        {"boeing747", "B4"},
        {"boeing777", "B7"},
        {"boeing787", "B8"},
        {"bridge", "BR"},
        {"bus", "BU"},
        {"C919", "C9"},
        {"cargo truck", "CT"},
        {"dry cargo ship", "DCS"},
        {"dump truck", "DT"},
        {"engineering ship", "ES"},
        {"excavator", "EV"},
        {"fishing boat", "FB"},
        {"football field", "FF"},
        {"intersection", "IN"},
        {"liquid cargo ship", "LCS"},
        {"motorboat", "MB"},
        {"other airplane", "OA"},
        {"other ship", "OS"},
        {"other vehicle", "OV"},
        {"passenger ship", "PS"},
        {"roundabout", "RA"},
        {"small car", "SC"},
        {"tennis court", "TC"},
        {"tractor", "TRT"},
        {"trailer", "TRL"},
        {"truck tractor", "TUT"},
        {"tugboat", "TB"},
        {"van", "VA"},
        {"warship", "WS"},
    });
    return table;
}

/// Resolves "sota"/"dota", "sior"/"dior", "fast"/"fair1m".
inline const CategoryTable& builtin_categories(std::string_view name) {
    const std::string key = normalize_category_name(name);
    if (key == "sota" || key == "dota") return sota_categories();
    if (key == "sior" || key == "dior") return sior_categories();
    if (key == "fast" || key == "fair1m") return fast_categories();
    throw ConfigError("unknown built-in category table '" + std::string(name) + "'");
}

}  // namespace samrs
