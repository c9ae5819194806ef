// Copyright 2026 The samrs-convert Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <utility>
#include <vector>

#include "json.hpp"

#include "samrs/categories.hpp"
#include "samrs/errors.hpp"
#include "samrs/image.hpp"
#include "samrs/rle.hpp"

namespace samrs {

/// Per-pixel category index, row-major; 0 is background.
struct SemanticMap {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> labels;

    SemanticMap() = default;
    SemanticMap(int h, int w) : height(h), width(w), labels(std::size_t(h) * w, 0) {}

    std::uint8_t at(int x, int y) const { return labels[std::size_t(y) * width + x]; }

    Image to_image() const {
        Image img(width, height, 1);
        img.pixels = labels;
        return img;
    }

    static SemanticMap from_image(const Image& img) {
        if (img.channels != 1) throw DimensionError("semantic map image must be single-channel");
        SemanticMap m(img.height, img.width);
        m.labels = img.pixels;
        return m;
    }

    friend bool operator==(const SemanticMap&, const SemanticMap&) = default;
};

struct LabeledMask {
    InstanceMask mask;
    int category_id = 0;
};

/// Paints masks largest first so smaller instances stay visible where they
/// overlap larger ones. Equal areas keep input order.
inline SemanticMap render_semantic_map(const std::vector<LabeledMask>& instances, ImageSize dims) {
    for (const auto& inst : instances) {
        if (inst.mask.rle.width != dims.width || inst.mask.rle.height != dims.height) {
            throw DimensionError("instance mask size differs from the canvas");
        }
        if (inst.category_id < 0 || inst.category_id > 255) {
            throw ConfigError("category id does not fit an 8-bit semantic map");
        }
    }
    std::vector<std::size_t> order(instances.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return instances[a].mask.rle.area() > instances[b].mask.rle.area();
    });

    SemanticMap out(dims.height, dims.width);
    for (std::size_t idx : order) {
        const auto& inst = instances[idx];
        const auto label = static_cast<std::uint8_t>(inst.category_id);
        std::int64_t pos = 0;
        const auto& counts = inst.mask.rle.counts;
        for (std::size_t i = 0; i < counts.size(); ++i) {
            if (i % 2 == 1) {
                for (std::int64_t k = pos; k < pos + counts[i]; ++k) {
                    const auto x = k / dims.height;
                    const auto y = k % dims.height;
                    out.labels[std::size_t(y) * dims.width + std::size_t(x)] = label;
                }
            }
            pos += counts[i];
        }
    }
    return out;
}

/// Display palette sidecar: index -> [r, g, b], index 0 black.
inline nlohmann::json semantic_palette(const CategoryTable& table) {
    nlohmann::json pal = nlohmann::json::object();
    pal["0"] = {{"name", "background"}, {"color", {0, 0, 0}}};
    for (const auto& c : table.categories()) {
        // Golden-angle hue walk gives well separated, deterministic colors.
        const double hue = std::fmod(c.id * 137.508, 360.0) / 60.0;
        const double f = hue - std::floor(hue);
        const int v = 230, p = 60;
        const int q = static_cast<int>(v - (v - p) * f), t = static_cast<int>(p + (v - p) * f);
        int r = v, g = t, b = p;
        switch (static_cast<int>(hue)) {
            case 0: r = v, g = t, b = p; break;
            case 1: r = q, g = v, b = p; break;
            case 2: r = p, g = v, b = t; break;
            case 3: r = p, g = q, b = v; break;
            case 4: r = t, g = p, b = v; break;
            default: r = v, g = p, b = q; break;
        }
        pal[std::to_string(c.id)] = {{"name", c.name}, {"color", {r, g, b}}};
    }
    return pal;
}

/// Packs a pixel into one instance value: gray as-is, RGB as 0xRRGGBB.
inline std::uint32_t pixel_value(const Image& img, int x, int y) {
    if (img.channels == 1) return img.at(x, y);
    return (std::uint32_t(img.at(x, y, 0)) << 16) | (std::uint32_t(img.at(x, y, 1)) << 8) | img.at(x, y, 2);
}

struct GtInstance {
    std::uint32_t value = 0;
    InstanceMask mask;
    int category_id = 0;
};

/// Splits an instance-colored ground-truth image into one mask per distinct
/// nonzero value, ordered by value.
inline std::vector<GtInstance> parse_hrsc_gt(const Image& img, const std::map<std::uint32_t, int>& color_table) {
    std::map<std::uint32_t, Bitmask> masks;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const std::uint32_t v = pixel_value(img, x, y);
            if (v == 0) continue;
            auto it = masks.find(v);
            if (it == masks.end()) {
                if (!color_table.count(v)) {
                    throw ParseError("ground-truth value " + std::to_string(v) + " is not in the color table");
                }
                it = masks.emplace(v, Bitmask(img.height, img.width)).first;
            }
            it->second.at(x, y) = 1;
        }
    }
    std::vector<GtInstance> out;
    for (const auto& [v, m] : masks) out.push_back({v, make_instance_mask(m, 1.0), color_table.at(v)});
    return out;
}

}  // namespace samrs
