// Copyright 2026 The samrs-convert Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "samrs/errors.hpp"

namespace samrs {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

struct ImageSize {
    int width = 0;
    int height = 0;

    friend bool operator==(const ImageSize&, const ImageSize&) = default;
    long long area() const { return static_cast<long long>(width) * height; }
};

/// Axis-aligned box in continuous pixel coordinates. Pixel (x, y) covers
/// [x, x+1) x [y, y+1), so a box (0,0,W,H) spans a whole W x H image.
struct HBox {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    friend bool operator==(const HBox&, const HBox&) = default;

    /// Builds a box and enforces ordering and finiteness.
    static HBox checked(double x0, double y0, double x1, double y1) {
        if (!std::isfinite(x0) || !std::isfinite(y0) || !std::isfinite(x1) || !std::isfinite(y1)) {
            throw DegenerateBoxError("box coordinates must be finite");
        }
        if (x0 > x1 || y0 > y1) {
            throw DegenerateBoxError("box has min > max");
        }
        return HBox{x0, y0, x1, y1};
    }

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double area() const { return width() * height(); }
    Point center() const { return {(x_min + x_max) / 2.0, (y_min + y_max) / 2.0}; }

    bool contains(Point p) const {
        return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
    }

    /// Counter-clockwise in a y-up frame (clockwise on screen).
    std::array<Point, 4> corners() const {
        return {Point{x_min, y_min}, Point{x_max, y_min}, Point{x_max, y_max}, Point{x_min, y_max}};
    }

    HBox translated(double dx, double dy) const {
        return {x_min + dx, y_min + dy, x_max + dx, y_max + dy};
    }
};

namespace detail {

inline double cross(Point o, Point a, Point b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

inline bool on_segment(Point p, Point a, Point b, double eps) {
    if (p.x < std::min(a.x, b.x) - eps || p.x > std::max(a.x, b.x) + eps ||
        p.y < std::min(a.y, b.y) - eps || p.y > std::max(a.y, b.y) + eps) {
        return false;
    }
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    return std::abs(cross(a, b, p)) <= eps * std::max(1.0, len);
}

// Proper crossing of two segments (shared endpoints and touching do not count).
inline bool segments_cross(Point a, Point b, Point c, Point d) {
    const double d1 = cross(c, d, a);
    const double d2 = cross(c, d, b);
    const double d3 = cross(a, b, c);
    const double d4 = cross(a, b, d);
    return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

inline double scale_eps(std::span<const Point> poly) {
    double m = 1.0;
    for (const auto& p : poly) m = std::max({m, std::abs(p.x), std::abs(p.y)});
    return 1e-9 * m;
}

}  // namespace detail

/// Shoelace area; positive for counter-clockwise vertex order in a y-up frame.
inline double polygon_signed_area(std::span<const Point> poly) {
    if (poly.size() < 3) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Point& a = poly[i];
        const Point& b = poly[(i + 1) % poly.size()];
        acc += a.x * b.y - b.x * a.y;
    }
    return acc / 2.0;
}

inline double polygon_area(std::span<const Point> poly) { return std::abs(polygon_signed_area(poly)); }

/// Point-in-polygon by crossing number; points on an edge or vertex count as inside.
inline bool point_in_polygon(Point p, std::span<const Point> poly) {
    if (poly.size() < 3) return false;
    const double eps = detail::scale_eps(poly);
    bool inside = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const Point& a = poly[i];
        const Point& b = poly[j];
        if (detail::on_segment(p, a, b, eps)) return true;
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x_at = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < x_at) inside = !inside;
        }
    }
    return inside;
}

/// Rotated box. Parsed R-Boxes always carry exactly four corners; after tile
/// clipping the region may carry the clipped polygon (3 to 8 vertices).
struct RBox {
    std::vector<Point> corners;

    friend bool operator==(const RBox&, const RBox&) = default;

    /// Validates a parsed quadrilateral: finite, simple, positive area.
    static RBox from_corners(const std::array<Point, 4>& c) {
        for (const auto& p : c) {
            if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
                throw DegenerateBoxError("quadrilateral has non-finite corner");
            }
        }
        if (detail::segments_cross(c[0], c[1], c[2], c[3]) || detail::segments_cross(c[1], c[2], c[3], c[0])) {
            throw DegenerateBoxError("quadrilateral is self-intersecting");
        }
        RBox r{{c.begin(), c.end()}};
        if (polygon_area(r.corners) <= detail::scale_eps(r.corners)) {
            throw DegenerateBoxError("quadrilateral has zero area");
        }
        return r;
    }

    double area() const { return polygon_area(corners); }

    RBox translated(double dx, double dy) const {
        RBox out = *this;
        for (auto& p : out.corners) {
            p.x += dx;
            p.y += dy;
        }
        return out;
    }

    /// True when the four corners form an axis-aligned rectangle.
    bool is_axis_aligned() const {
        if (corners.size() != 4) return false;
        for (std::size_t i = 0; i < 4; ++i) {
            const Point& a = corners[i];
            const Point& b = corners[(i + 1) % 4];
            if (a.x != b.x && a.y != b.y) return false;
        }
        return true;
    }
};

inline HBox bounding_box(std::span<const Point> pts) {
    HBox b{pts.front().x, pts.front().y, pts.front().x, pts.front().y};
    for (const auto& p : pts) {
        b.x_min = std::min(b.x_min, p.x);
        b.y_min = std::min(b.y_min, p.y);
        b.x_max = std::max(b.x_max, p.x);
        b.y_max = std::max(b.y_max, p.y);
    }
    return b;
}

/// Minimum circumscribed horizontal rectangle (RH-Box) of an R-Box.
inline HBox rbox_to_rhbox(const RBox& r) {
    if (r.corners.size() < 3 || r.area() <= 0.0) {
        throw DegenerateBoxError("cannot derive RH-Box from a degenerate quadrilateral");
    }
    return bounding_box(r.corners);
}

/// Sutherland-Hodgman clipping against an axis-aligned window. Returns an
/// empty vector when the overlap has no area.
inline std::vector<Point> clip_polygon_to_rect(std::span<const Point> poly, const HBox& rect) {
    std::vector<Point> out(poly.begin(), poly.end());

    auto clip_edge = [&out](auto inside, auto intersect) {
        if (out.empty()) return;
        std::vector<Point> in;
        in.swap(out);
        Point prev = in.back();
        bool prev_in = inside(prev);
        for (const Point& cur : in) {
            const bool cur_in = inside(cur);
            if (cur_in) {
                if (!prev_in) out.push_back(intersect(prev, cur));
                out.push_back(cur);
            } else if (prev_in) {
                out.push_back(intersect(prev, cur));
            }
            prev = cur;
            prev_in = cur_in;
        }
    };
    auto at_x = [](double x) {
        return [x](Point a, Point b) { return Point{x, a.y + (x - a.x) * (b.y - a.y) / (b.x - a.x)}; };
    };
    auto at_y = [](double y) {
        return [y](Point a, Point b) { return Point{a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y), y}; };
    };

    clip_edge([&](Point p) { return p.x >= rect.x_min; }, at_x(rect.x_min));
    clip_edge([&](Point p) { return p.x <= rect.x_max; }, at_x(rect.x_max));
    clip_edge([&](Point p) { return p.y >= rect.y_min; }, at_y(rect.y_min));
    clip_edge([&](Point p) { return p.y <= rect.y_max; }, at_y(rect.y_max));

    // Drop consecutive duplicates introduced by vertices lying on the window.
    std::vector<Point> dedup;
    for (const auto& p : out) {
        if (dedup.empty() || !(dedup.back() == p)) dedup.push_back(p);
    }
    while (dedup.size() > 1 && dedup.front() == dedup.back()) dedup.pop_back();
    if (dedup.size() < 3 || polygon_area(dedup) <= 0.0) return {};
    return dedup;
}

/// Interval intersection of two boxes; nullopt when they do not overlap.
inline std::optional<HBox> clip_polygon_to_rect(const HBox& box, const HBox& rect) {
    HBox out{std::max(box.x_min, rect.x_min), std::max(box.y_min, rect.y_min),
             std::min(box.x_max, rect.x_max), std::min(box.y_max, rect.y_max)};
    if (out.x_min > out.x_max || out.y_min > out.y_max) return std::nullopt;
    return out;
}

}  // namespace samrs
