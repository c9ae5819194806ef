// Copyright 2026 The samrs-convert Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "samrs/annotation.hpp"
#include "samrs/errors.hpp"
#include "samrs/geometry.hpp"
#include "samrs/rle.hpp"

namespace samrs {

/// Single point prompt. Only foreground points are ever produced.
struct CenterPoint {
    Point at;
    static constexpr int label = 1;  // foreground

    friend bool operator==(const CenterPoint&, const CenterPoint&) = default;
};

/// Low-resolution score grid: +magnitude inside the region, -magnitude elsewhere.
/// Stored as the positive-region bitmask, so every cell is exactly +m or -m.
struct MaskPrompt {
    Bitmask positive;  // height x width cells
    double magnitude = 1000.0;

    int width() const { return positive.width; }
    int height() const { return positive.height; }
    float score(int col, int row) const {
        return static_cast<float>(positive.at(col, row) ? magnitude : -magnitude);
    }
    /// Row-major score grid.
    std::vector<float> scores() const {
        std::vector<float> s(positive.bits.size());
        for (std::size_t i = 0; i < s.size(); ++i) {
            s[i] = static_cast<float>(positive.bits[i] ? magnitude : -magnitude);
        }
        return s;
    }

    friend bool operator==(const MaskPrompt&, const MaskPrompt&) = default;
};

/// Which box a center point or box prompt is derived from.
enum class BoxMode { HBox, RHBox, RBox };

inline std::string to_string(BoxMode m) {
    switch (m) {
        case BoxMode::HBox: return "hbox";
        case BoxMode::RHBox: return "rhbox";
        case BoxMode::RBox: return "rbox";
    }
    return "?";
}

/// Set of active basic prompts. Ordering of `id()` follows the usual ablation
/// column order: CP, H-Box, H-Box-M, R-Box-M, RH-Box, RH-Box-M.
struct PromptCombo {
    bool cp = false;
    bool hbox = false;
    bool hbox_mask = false;
    bool rbox_mask = false;
    bool rhbox = false;
    bool rhbox_mask = false;

    friend bool operator==(const PromptCombo&, const PromptCombo&) = default;

    bool any() const { return cp || hbox || hbox_mask || rbox_mask || rhbox || rhbox_mask; }
    int mask_count() const { return int(hbox_mask) + int(rbox_mask) + int(rhbox_mask); }
    bool needs_hbox() const { return hbox || hbox_mask; }
    bool needs_rbox() const { return rhbox || rhbox_mask || rbox_mask; }

    std::string id() const {
        std::string out;
        auto add = [&out](bool on, const char* tok) {
            if (!on) return;
            if (!out.empty()) out += '+';
            out += tok;
        };
        add(cp, "cp");
        add(hbox, "hbox");
        add(hbox_mask, "hbox_m");
        add(rbox_mask, "rbox_m");
        add(rhbox, "rhbox");
        add(rhbox_mask, "rhbox_m");
        return out;
    }

    /// Parses ids like "cp+hbox" or "RH-Box-M"; tokens are case-insensitive and
    /// ignore '-' and '_'.
    static PromptCombo parse(std::string_view text) {
        PromptCombo c;
        std::size_t start = 0;
        while (start <= text.size()) {
            std::size_t end = text.find('+', start);
            if (end == std::string_view::npos) end = text.size();
            std::string tok;
            for (char ch : text.substr(start, end - start)) {
                if (ch == '-' || ch == '_' || ch == ' ') continue;
                tok.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
            }
            if (tok == "cp") c.cp = true;
            else if (tok == "hbox") c.hbox = true;
            else if (tok == "hboxm") c.hbox_mask = true;
            else if (tok == "rboxm") c.rbox_mask = true;
            else if (tok == "rhbox") c.rhbox = true;
            else if (tok == "rhboxm") c.rhbox_mask = true;
            else throw ConfigError("unknown prompt '" + std::string(text.substr(start, end - start)) + "'");
            start = end + 1;
        }
        c.check();
        return c;
    }

    /// A prompt set carries at most one box and one mask.
    void check() const {
        if (!any()) throw ConfigError("prompt combination is empty");
        if (hbox && rhbox) throw ConfigError("prompt combination carries two boxes: " + id());
        if (mask_count() > 1) throw ConfigError("prompt combination carries two masks: " + id());
    }
};

/// The fifteen prompt combinations of the HRSC2016 ablation, in table order.
inline std::vector<PromptCombo> ablation_table_combos() {
    std::vector<PromptCombo> out;
    for (const char* id : {"cp", "hbox", "hbox_m", "cp+hbox", "hbox+hbox_m", "cp+hbox_m", "cp+hbox+hbox_m",
                           "rbox_m", "cp+rbox_m", "rhbox", "rhbox_m", "cp+rhbox", "rhbox+rhbox_m",
                           "cp+rhbox_m", "cp+rhbox+rhbox_m"}) {
        out.push_back(PromptCombo::parse(id));
    }
    return out;
}

struct PromptConfig {
    PromptCombo combo;
    ImageSize mask_grid{256, 256};
    double magnitude = 1000.0;
};

/// Concrete prompt payload for one instance.
struct PromptSet {
    std::optional<CenterPoint> point;
    std::optional<HBox> box;
    std::optional<MaskPrompt> mask;
    std::string combo_id;

    friend bool operator==(const PromptSet&, const PromptSet&) = default;
};

using Shape = std::variant<HBox, RBox>;

inline HBox shape_bounds(const Shape& s) {
    if (const auto* h = std::get_if<HBox>(&s)) return *h;
    return bounding_box(std::get<RBox>(s).corners);
}

inline bool shape_contains(const Shape& s, Point p) {
    if (const auto* h = std::get_if<HBox>(&s)) return h->contains(p);
    return point_in_polygon(p, std::get<RBox>(s).corners);
}

/// Rasterizes a shape onto a grid laid uniformly over `extent`; a cell is set
/// iff its center lies inside the shape (boundary inclusive).
inline Bitmask rasterize_shape(const Shape& shape, ImageSize grid, const HBox& extent) {
    Bitmask out(grid.height, grid.width);
    const HBox bounds = shape_bounds(shape);
    const double sx = extent.width() / grid.width;
    const double sy = extent.height() / grid.height;
    for (int row = 0; row < grid.height; ++row) {
        const double cy = extent.y_min + (row + 0.5) * sy;
        if (cy < bounds.y_min || cy > bounds.y_max) continue;
        for (int col = 0; col < grid.width; ++col) {
            const double cx = extent.x_min + (col + 0.5) * sx;
            if (cx < bounds.x_min || cx > bounds.x_max) continue;
            if (shape_contains(shape, {cx, cy})) out.at(col, row) = 1;
        }
    }
    return out;
}

/// Pixel-resolution interior of a shape on an image of the given size.
inline Bitmask rasterize_shape(const Shape& shape, ImageSize image) {
    return rasterize_shape(shape, image, HBox{0, 0, double(image.width), double(image.height)});
}

inline MaskPrompt rasterize_mask_prompt(const Shape& shape, ImageSize grid, const HBox& image_extent,
                                        double magnitude = 1000.0) {
    if (grid.width <= 0 || grid.height <= 0) throw ConfigError("mask grid dimensions must be positive");
    if (!(image_extent.width() > 0) || !(image_extent.height() > 0)) {
        throw ConfigError("image dimensions must be positive");
    }
    if (!(magnitude > 0)) throw ConfigError("mask magnitude must be positive");
    if (!clip_polygon_to_rect(shape_bounds(shape), image_extent)) {
        throw EmptyPromptError("mask prompt shape lies outside the image");
    }
    MaskPrompt mp{rasterize_shape(shape, grid, image_extent), magnitude};
    if (mp.positive.count() == 0) throw EmptyPromptError("mask prompt has no positive cell");
    return mp;
}

inline MaskPrompt rasterize_mask_prompt(const Shape& shape, ImageSize grid, ImageSize image,
                                        double magnitude = 1000.0) {
    return rasterize_mask_prompt(shape, grid, HBox{0, 0, double(image.width), double(image.height)}, magnitude);
}

/// Box center for H-Box / RH-Box, corner mean for R-Box.
inline CenterPoint center_point(const InstanceAnnotation& a, BoxMode mode) {
    switch (mode) {
        case BoxMode::HBox:
            if (!a.hbox) throw ConfigError("center point needs an H-Box");
            return {a.hbox->center()};
        case BoxMode::RHBox:
            if (!a.rbox) throw ConfigError("center point needs an R-Box");
            return {rbox_to_rhbox(*a.rbox).center()};
        case BoxMode::RBox: {
            if (!a.rbox || a.rbox->corners.empty()) throw ConfigError("center point needs an R-Box");
            Point c;
            for (const auto& p : a.rbox->corners) {
                c.x += p.x;
                c.y += p.y;
            }
            const double n = double(a.rbox->corners.size());
            return {{c.x / n, c.y / n}};
        }
    }
    throw ConfigError("unknown box mode");
}

namespace detail {

inline BoxMode center_mode(const PromptCombo& c, const InstanceAnnotation& a) {
    if (c.hbox || c.hbox_mask) return BoxMode::HBox;
    if (c.rhbox || c.rhbox_mask) return BoxMode::RHBox;
    if (c.rbox_mask) return BoxMode::RBox;
    return a.hbox ? BoxMode::HBox : BoxMode::RBox;
}

}  // namespace detail

/// Deterministically assembles the prompt payload for one annotation.
inline PromptSet build_prompt_set(const InstanceAnnotation& a, const PromptConfig& cfg, ImageSize image) {
    const PromptCombo& c = cfg.combo;
    c.check();
    if (c.needs_hbox() && !a.hbox) {
        throw ConfigError("prompt combination " + c.id() + " needs an H-Box but instance '" +
                          a.source_instance_id + "' has none");
    }
    if (c.needs_rbox() && !a.rbox) {
        throw ConfigError("prompt combination " + c.id() + " needs an R-Box but instance '" +
                          a.source_instance_id + "' has none");
    }
    if (c.cp && !a.hbox && !a.rbox) throw ConfigError("center point needs a box");

    PromptSet ps;
    ps.combo_id = c.id();
    if (c.cp) ps.point = center_point(a, detail::center_mode(c, a));
    if (c.hbox) ps.box = *a.hbox;
    if (c.rhbox) ps.box = rbox_to_rhbox(*a.rbox);
    if (c.hbox_mask) ps.mask = rasterize_mask_prompt(*a.hbox, cfg.mask_grid, image, cfg.magnitude);
    if (c.rbox_mask) ps.mask = rasterize_mask_prompt(*a.rbox, cfg.mask_grid, image, cfg.magnitude);
    if (c.rhbox_mask) {
        ps.mask = rasterize_mask_prompt(rbox_to_rhbox(*a.rbox), cfg.mask_grid, image, cfg.magnitude);
    }
    return ps;
}

/// Box the instance's prompt refers to; used for mask validity checks.
inline HBox reference_box(const InstanceAnnotation& a, const PromptCombo& c) {
    const BoxMode m = detail::center_mode(c, a);
    if (m == BoxMode::HBox) return *a.hbox;
    return rbox_to_rhbox(*a.rbox);
}

}  // namespace samrs
