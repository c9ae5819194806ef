// Copyright 2026 The samrs-convert Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "samrs/errors.hpp"
#include "samrs/geometry.hpp"

namespace samrs {

/// Dense binary mask, row-major (index y * width + x).
struct Bitmask {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> bits;

    Bitmask() = default;
    Bitmask(int h, int w) : height(h), width(w), bits(static_cast<std::size_t>(h) * w, 0) {}

    std::uint8_t& at(int x, int y) { return bits[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x]; }
    long long count() const {
        return std::count_if(bits.begin(), bits.end(), [](std::uint8_t b) { return b != 0; });
    }
    ImageSize size() const { return {width, height}; }

    friend bool operator==(const Bitmask&, const Bitmask&) = default;
};

/// Uncompressed run-length mask. Runs alternate 0s then 1s over the pixels in
/// column-major order; the first run counts zeros and may be 0.
struct RleMask {
    int height = 0;
    int width = 0;
    std::vector<std::int64_t> counts;

    friend bool operator==(const RleMask&, const RleMask&) = default;

    long long pixels() const { return static_cast<long long>(height) * width; }
    long long area() const {
        long long a = 0;
        for (std::size_t i = 1; i < counts.size(); i += 2) a += counts[i];
        return a;
    }
};

/// Canonical encoding: no zero-length runs except a leading zero-run.
inline RleMask rle_encode(const Bitmask& mask) {
    if (mask.height <= 0 || mask.width <= 0) {
        throw DimensionError("cannot encode a mask with non-positive dimensions");
    }
    RleMask r{mask.height, mask.width, {}};
    std::uint8_t current = 0;
    std::int64_t run = 0;
    for (int x = 0; x < mask.width; ++x) {
        for (int y = 0; y < mask.height; ++y) {
            const std::uint8_t b = mask.at(x, y) ? 1 : 0;
            if (b != current) {
                r.counts.push_back(run);
                run = 0;
                current = b;
            }
            ++run;
        }
    }
    r.counts.push_back(run);
    return r;
}

inline void check_rle(const RleMask& r) {
    if (r.height <= 0 || r.width <= 0) throw CorruptionError("RLE has non-positive dimensions");
    std::int64_t total = 0;
    for (auto c : r.counts) {
        if (c < 0) throw CorruptionError("RLE has a negative run");
        total += c;
    }
    if (total != r.pixels()) {
        throw CorruptionError("RLE counts sum to " + std::to_string(total) + ", expected " +
                              std::to_string(r.pixels()));
    }
}

inline Bitmask rle_decode(const RleMask& r) {
    check_rle(r);
    Bitmask mask(r.height, r.width);
    std::int64_t pos = 0;
    for (std::size_t i = 0; i < r.counts.size(); ++i) {
        if (i % 2 == 1) {
            for (std::int64_t k = pos; k < pos + r.counts[i]; ++k) {
                const int x = static_cast<int>(k / r.height);
                const int y = static_cast<int>(k % r.height);
                mask.at(x, y) = 1;
            }
        }
        pos += r.counts[i];
    }
    return mask;
}

/// Number of pixels set in both masks, computed on the runs directly.
inline long long rle_intersection(const RleMask& a, const RleMask& b) {
    if (a.height != b.height || a.width != b.width) {
        throw DimensionError("RLE masks differ in size");
    }
    // Walk both run lists, tracking the value and remaining length of each.
    std::size_t ia = 0, ib = 0;
    std::int64_t ra = a.counts.empty() ? 0 : a.counts[0];
    std::int64_t rb = b.counts.empty() ? 0 : b.counts[0];
    long long inter = 0;
    while (ia < a.counts.size() && ib < b.counts.size()) {
        if (ra == 0) {
            if (++ia < a.counts.size()) ra = a.counts[ia];
            continue;
        }
        if (rb == 0) {
            if (++ib < b.counts.size()) rb = b.counts[ib];
            continue;
        }
        const std::int64_t step = std::min(ra, rb);
        if ((ia % 2 == 1) && (ib % 2 == 1)) inter += step;
        ra -= step;
        rb -= step;
    }
    return inter;
}

/// Tight pixel-extent box of the set pixels: (min x, min y, max x + 1, max y + 1).
inline std::optional<HBox> mask_bbox(const Bitmask& m) {
    int x0 = m.width, y0 = m.height, x1 = -1, y1 = -1;
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            if (!m.at(x, y)) continue;
            x0 = std::min(x0, x);
            y0 = std::min(y0, y);
            x1 = std::max(x1, x);
            y1 = std::max(y1, y);
        }
    }
    if (x1 < 0) return std::nullopt;
    return HBox{double(x0), double(y0), double(x1 + 1), double(y1 + 1)};
}

/// Segmentation result for one instance.
struct InstanceMask {
    RleMask rle;
    long long area = 0;
    HBox bbox;  // all zero when the mask is empty
    double score = 0.0;
    bool valid = false;

    friend bool operator==(const InstanceMask&, const InstanceMask&) = default;
};

/// Fills area and bbox from the mask; `valid` starts as area > 0.
inline InstanceMask make_instance_mask(const Bitmask& m, double score) {
    InstanceMask out;
    out.rle = rle_encode(m);
    out.area = m.count();
    out.bbox = mask_bbox(m).value_or(HBox{});
    out.score = score;
    out.valid = out.area > 0;
    return out;
}

inline InstanceMask make_instance_mask(const RleMask& r, double score) {
    return make_instance_mask(rle_decode(r), score);
}

}  // namespace samrs
