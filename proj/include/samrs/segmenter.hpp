// Copyright 2026 The samrs-convert Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "samrs/errors.hpp"
#include "samrs/geometry.hpp"
#include "samrs/image.hpp"
#include "samrs/prompts.hpp"
#include "samrs/rle.hpp"

namespace samrs {

struct SegmentRequest {
    Image image;  // tile pixels
    std::vector<PromptSet> prompt_sets;
    bool multimask = false;
};

struct Candidate {
    RleMask mask;
    double score = 0.0;

    friend bool operator==(const Candidate&, const Candidate&) = default;
};

/// results[i] holds the candidates for prompt_sets[i]; an empty list means
/// the backend failed on that instance.
struct SegmentResponse {
    std::vector<std::vector<Candidate>> results;
};

struct BackendHealth {
    std::string model;
    bool ready = false;
};

/// A promptable segmentation backend. Implementations must accept concurrent
/// calls to `segment`.
class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string describe() const = 0;
    virtual BackendHealth health() = 0;
    virtual SegmentResponse segment(const SegmentRequest& req) = 0;
};

namespace detail {

inline void check_request(const SegmentRequest& req) {
    const double w = req.image.width, h = req.image.height;
    if (w <= 0 || h <= 0) throw DimensionError("segment request has an empty image");
    auto inside = [&](Point p) { return p.x >= 0 && p.y >= 0 && p.x <= w && p.y <= h; };
    for (std::size_t i = 0; i < req.prompt_sets.size(); ++i) {
        const auto& ps = req.prompt_sets[i];
        if (!ps.point && !ps.box && !ps.mask) throw ConfigError("prompt set " + std::to_string(i) + " is empty");
        if (ps.point && !inside(ps.point->at)) {
            throw ConfigError("prompt set " + std::to_string(i) + ": point lies outside the tile");
        }
        if (ps.box && (!inside({ps.box->x_min, ps.box->y_min}) || !inside({ps.box->x_max, ps.box->y_max}))) {
            throw ConfigError("prompt set " + std::to_string(i) + ": box lies outside the tile");
        }
    }
}

}  // namespace detail

/// Validates the request, calls the backend and checks that the response is
/// aligned with the request and sized like the tile.
inline SegmentResponse segment(Backend& backend, const SegmentRequest& req) {
    detail::check_request(req);
    if (req.prompt_sets.empty()) return {};
    SegmentResponse resp = backend.segment(req);
    if (resp.results.size() != req.prompt_sets.size()) {
        throw ProtocolError("backend returned " + std::to_string(resp.results.size()) + " results for " +
                            std::to_string(req.prompt_sets.size()) + " prompt sets");
    }
    for (const auto& list : resp.results) {
        for (const auto& c : list) {
            if (c.mask.width != req.image.width || c.mask.height != req.image.height) {
                throw ProtocolError("candidate mask size differs from the tile");
            }
            if (!std::isfinite(c.score)) throw ProtocolError("candidate score is not finite");
            try {
                check_rle(c.mask);
            } catch (const CorruptionError& e) {
                throw ProtocolError(std::string("candidate mask: ") + e.what());
            }
        }
    }
    return resp;
}

// ---------------------------------------------------------------------------
// In-process oracles. Both derive a region from the prompt set:
//   box present   -> pixels whose centers lie in the box
//   else mask     -> positive cells of the score grid, nearest-cell upsampled
//   else point    -> pixels whose centers lie within `point_radius` (Chebyshev)
// ---------------------------------------------------------------------------

struct OracleOptions {
    double point_radius = 8.0;
};

inline Bitmask oracle_region(const PromptSet& ps, ImageSize tile, const OracleOptions& opt = {}) {
    if (ps.box) return rasterize_shape(*ps.box, tile);
    Bitmask out(tile.height, tile.width);
    if (ps.mask) {
        const auto& grid = ps.mask->positive;
        for (int y = 0; y < tile.height; ++y) {
            const int row = std::min(grid.height - 1, static_cast<int>((y + 0.5) * grid.height / tile.height));
            for (int x = 0; x < tile.width; ++x) {
                const int col = std::min(grid.width - 1, static_cast<int>((x + 0.5) * grid.width / tile.width));
                out.at(x, y) = grid.at(col, row);
            }
        }
        return out;
    }
    if (ps.point) {
        const Point c = ps.point->at;
        for (int y = 0; y < tile.height; ++y) {
            if (std::abs(y + 0.5 - c.y) > opt.point_radius) continue;
            for (int x = 0; x < tile.width; ++x) {
                if (std::abs(x + 0.5 - c.x) <= opt.point_radius) out.at(x, y) = 1;
            }
        }
    }
    return out;
}

/// Square erosion; pixels beyond the image count as background.
inline Bitmask erode(const Bitmask& in, int radius) {
    if (radius <= 0) return in;
    auto pass = [radius](const Bitmask& src, bool horizontal) {
        Bitmask dst(src.height, src.width);
        const int outer = horizontal ? src.height : src.width;
        const int inner = horizontal ? src.width : src.height;
        for (int o = 0; o < outer; ++o) {
            // Length of the run of ones ending at each position.
            std::vector<int> run(inner, 0);
            for (int i = 0; i < inner; ++i) {
                const bool on = horizontal ? src.at(i, o) : src.at(o, i);
                run[i] = on ? (i > 0 ? run[i - 1] : 0) + 1 : 0;
            }
            for (int i = radius; i + radius < inner; ++i) {
                if (run[i + radius] >= 2 * radius + 1) {
                    if (horizontal) dst.at(i, o) = 1;
                    else dst.at(o, i) = 1;
                }
            }
        }
        return dst;
    };
    return pass(pass(in, true), false);
}

/// Returns the prompt region itself with score 1.
class FillOracle : public Backend {
public:
    explicit FillOracle(OracleOptions opt = {}) : opt_(opt) {}

    std::string describe() const override { return "oracle:fill"; }
    BackendHealth health() override { return {"oracle:fill", true}; }

    SegmentResponse segment(const SegmentRequest& req) override {
        SegmentResponse resp;
        for (const auto& ps : req.prompt_sets) {
            resp.results.push_back({Candidate{rle_encode(oracle_region(ps, req.image.size(), opt_)), 1.0}});
        }
        return resp;
    }

private:
    OracleOptions opt_;
};

struct ErosionOptions {
    int radius = 1;
    int jitter = 0;  // extra radius drawn per prompt from [0, jitter]
    std::uint64_t seed = 42;
    double score = 0.9;
    OracleOptions region;
};

/// Seeded deterministic degradation: the prompt region eroded by a square of
/// half-size radius + u, u drawn from [0, jitter] by hashing (seed, prompt).
class ErosionOracle : public Backend {
public:
    explicit ErosionOracle(ErosionOptions opt = {}) : opt_(opt) {}

    std::string describe() const override {
        return "oracle:erosion:radius=" + std::to_string(opt_.radius) + ",jitter=" + std::to_string(opt_.jitter) +
               ",seed=" + std::to_string(opt_.seed);
    }
    BackendHealth health() override { return {"oracle:erosion", true}; }

    int effective_radius(const PromptSet& ps, ImageSize tile) const {
        if (opt_.jitter <= 0) return opt_.radius;
        return opt_.radius + static_cast<int>(prompt_hash(ps, tile) % std::uint64_t(opt_.jitter + 1));
    }

    SegmentResponse segment(const SegmentRequest& req) override {
        SegmentResponse resp;
        for (const auto& ps : req.prompt_sets) {
            const Bitmask region = oracle_region(ps, req.image.size(), opt_.region);
            const Bitmask eroded = erode(region, effective_radius(ps, req.image.size()));
            resp.results.push_back({Candidate{rle_encode(eroded), opt_.score}});
        }
        return resp;
    }

private:
    // FNV-1a over the bit patterns of the prompt; identical on every platform.
    std::uint64_t prompt_hash(const PromptSet& ps, ImageSize tile) const {
        std::uint64_t h = 1469598103934665603ull ^ opt_.seed;
        auto mix = [&h](std::uint64_t v) {
            for (int i = 0; i < 8; ++i) {
                h ^= (v >> (8 * i)) & 0xffu;
                h *= 1099511628211ull;
            }
        };
        auto mixd = [&mix](double d) { mix(std::bit_cast<std::uint64_t>(d)); };
        mix(std::uint64_t(tile.width));
        mix(std::uint64_t(tile.height));
        if (ps.point) {
            mixd(ps.point->at.x);
            mixd(ps.point->at.y);
        }
        if (ps.box) {
            mixd(ps.box->x_min);
            mixd(ps.box->y_min);
            mixd(ps.box->x_max);
            mixd(ps.box->y_max);
        }
        if (ps.mask) {
            mixd(ps.mask->magnitude);
            for (auto b : ps.mask->positive.bits) mix(b);
        }
        // splitmix64 finalizer
        h ^= h >> 30;
        h *= 0xbf58476d1ce4e5b9ull;
        h ^= h >> 27;
        h *= 0x94d049bb133111ebull;
        h ^= h >> 31;
        return h;
    }

    ErosionOptions opt_;
};

// ---------------------------------------------------------------------------

enum class SelectionPolicy { HighestScore };

/// Picks one candidate: highest score, then larger area, then the
/// lexicographically smaller RLE, then lower index. The RLE key makes the
/// choice independent of candidate order.
inline std::optional<InstanceMask> select_mask(const std::vector<Candidate>& candidates,
                                               SelectionPolicy = SelectionPolicy::HighestScore) {
    if (candidates.empty()) return std::nullopt;
    std::size_t best = 0;
    long long best_area = candidates[0].mask.area();
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        const auto& c = candidates[i];
        const auto& b = candidates[best];
        const long long area = c.mask.area();
        bool better = false;
        if (c.score != b.score) better = c.score > b.score;
        else if (area != best_area) better = area > best_area;
        else better = c.mask.counts < b.mask.counts;
        if (better) {
            best = i;
            best_area = area;
        }
    }
    return make_instance_mask(candidates[best].mask, candidates[best].score);
}

/// Valid iff the mask is nonempty and some set pixel overlaps the prompt box.
inline bool validate_mask(const InstanceMask& mask, const HBox& prompt_box, ImageSize tile) {
    if (mask.rle.width != tile.width || mask.rle.height != tile.height) {
        throw DimensionError("mask size differs from the tile");
    }
    if (mask.rle.area() == 0) return false;
    const Bitmask bits = rle_decode(mask.rle);
    const int x0 = std::max(0, static_cast<int>(std::floor(prompt_box.x_min)));
    const int y0 = std::max(0, static_cast<int>(std::floor(prompt_box.y_min)));
    const int x1 = std::min(tile.width - 1, std::max(x0, static_cast<int>(std::ceil(prompt_box.x_max)) - 1));
    const int y1 = std::min(tile.height - 1, std::max(y0, static_cast<int>(std::ceil(prompt_box.y_max)) - 1));
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            if (bits.at(x, y)) return true;
        }
    }
    return false;
}

}  // namespace samrs
