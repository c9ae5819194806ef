// Copyright 2026 The samrs-convert Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "samrs/annotation.hpp"
#include "samrs/errors.hpp"
#include "samrs/geometry.hpp"
#include "samrs/image.hpp"

namespace samrs {

/// What to do with an axis shorter than the tile size.
enum class SmallImageMode {
    Pad,     // emit a full T x T tile, zero padded beyond the image
    Shrink,  // emit a tile clipped to the image extent
};

struct TilingPolicy {
    int tile_size = 1024;
    int stride = 824;
    double retention = 0.5;  // minimum surviving fraction of box area
    SmallImageMode small_image = SmallImageMode::Pad;

    void check() const {
        if (tile_size <= 0) throw ConfigError("tile size must be positive");
        if (stride <= 0 || stride > tile_size) throw ConfigError("stride must satisfy 0 < S <= T");
        if (!(retention > 0.0 && retention <= 1.0)) throw ConfigError("retention must lie in (0, 1]");
    }
};

struct TileSpec {
    std::string image_id;
    int row = 0;
    int col = 0;
    int x = 0;  // origin in source pixels
    int y = 0;
    int width = 0;
    int height = 0;
    ImageSize source;
    bool padded = false;

    HBox window() const { return {double(x), double(y), double(x + width), double(y + height)}; }
    std::string name() const { return image_id + "__" + std::to_string(row) + "_" + std::to_string(col); }

    friend bool operator==(const TileSpec&, const TileSpec&) = default;
};

/// Origins {0, S, 2S, ...}; a tile that would overrun is anchored at dim - T.
inline std::vector<int> tile_origins(int dim, int tile, int stride) {
    if (dim <= tile) return {0};
    std::vector<int> out;
    for (long long o = 0;; o += stride) {
        if (o + tile >= dim) {
            const int anchored = dim - tile;
            if (out.empty() || out.back() != anchored) out.push_back(anchored);
            break;
        }
        out.push_back(static_cast<int>(o));
    }
    return out;
}

/// Tiles in row-major order.
inline std::vector<TileSpec> plan_tiles(ImageSize dims, const TilingPolicy& policy, const std::string& image_id = "") {
    policy.check();
    if (dims.width <= 0 || dims.height <= 0) throw ConfigError("image dimensions must be positive");
    const auto xs = tile_origins(dims.width, policy.tile_size, policy.stride);
    const auto ys = tile_origins(dims.height, policy.tile_size, policy.stride);
    const bool shrink = policy.small_image == SmallImageMode::Shrink;
    std::vector<TileSpec> out;
    out.reserve(xs.size() * ys.size());
    for (std::size_t r = 0; r < ys.size(); ++r) {
        for (std::size_t c = 0; c < xs.size(); ++c) {
            TileSpec t;
            t.image_id = image_id;
            t.row = static_cast<int>(r);
            t.col = static_cast<int>(c);
            t.x = xs[c];
            t.y = ys[r];
            t.width = shrink ? std::min(policy.tile_size, dims.width) : policy.tile_size;
            t.height = shrink ? std::min(policy.tile_size, dims.height) : policy.tile_size;
            t.source = dims;
            t.padded = !shrink && (dims.width < policy.tile_size || dims.height < policy.tile_size);
            out.push_back(std::move(t));
        }
    }
    return out;
}

struct CroppedAnnotations {
    std::vector<InstanceAnnotation> instances;  // tile-local
    std::vector<std::string> dropped;           // overlapping but below retention
    std::size_t overlapping = 0;                // instances whose box meets the tile
};

/// Clips every instance to the tile window and translates to tile-local
/// coordinates. Retention is measured on the H-Box when present, else the R-Box.
inline CroppedAnnotations crop_annotations(const std::vector<InstanceAnnotation>& instances, const TileSpec& tile,
                                           const TilingPolicy& policy) {
    const HBox window = tile.window();
    const double dx = -tile.x, dy = -tile.y;
    CroppedAnnotations out;
    for (const auto& a : instances) {
        std::optional<HBox> hbox;
        std::vector<Point> rpoly;
        double before = 0.0, after = 0.0;
        if (a.hbox) {
            hbox = clip_polygon_to_rect(*a.hbox, window);
            before = a.hbox->area();
            after = hbox ? hbox->area() : 0.0;
        }
        if (a.rbox) {
            rpoly = clip_polygon_to_rect(a.rbox->corners, window);
            if (!a.hbox) {
                before = a.rbox->area();
                after = polygon_area(rpoly);
            }
        }
        const bool touches = a.hbox ? hbox.has_value() : !rpoly.empty();
        if (!touches) continue;
        ++out.overlapping;
        if (!(before > 0.0) || after / before < policy.retention || (a.hbox && !(after > 0.0)) ||
            (a.rbox && rpoly.empty())) {
            out.dropped.push_back(a.source_instance_id);
            continue;
        }
        InstanceAnnotation local = a;
        if (hbox) local.hbox = hbox->translated(dx, dy);
        if (a.rbox) local.rbox = RBox{std::move(rpoly)}.translated(dx, dy);
        out.instances.push_back(std::move(local));
    }
    return out;
}

/// Pixel copy of the tile window; pixels outside the source are 0.
inline Image crop_image(const Image& image, const TileSpec& tile) {
    if (image.size() != tile.source) {
        throw DimensionError("image is " + std::to_string(image.width) + "x" + std::to_string(image.height) +
                             " but the tile was planned for " + std::to_string(tile.source.width) + "x" +
                             std::to_string(tile.source.height));
    }
    Image out(tile.width, tile.height, image.channels);
    const int x1 = std::min(tile.x + tile.width, image.width);
    const int y1 = std::min(tile.y + tile.height, image.height);
    const std::size_t run = std::size_t(std::max(0, x1 - tile.x)) * image.channels;
    for (int y = tile.y; y < y1; ++y) {
        const auto src = image.pixels.begin() + (std::size_t(y) * image.width + tile.x) * image.channels;
        std::copy_n(src, run, out.pixels.begin() + std::size_t(y - tile.y) * tile.width * image.channels);
    }
    return out;
}

}  // namespace samrs
