// Copyright 2026 The samrs-convert Authors
// SPDX-License-Identifier: Apache-2.0
//
// Readers and writers for the three detection annotation families:
//   - DOTA plain text: one object per line, "x1 y1 ... x4 y4 class difficulty",
//     optionally preceded by "imagesource:" / "gsd:" metadata lines.
//   - VOC XML (DIOR): <object><name/><difficult/><bndbox>xmin..ymax</bndbox>.
//   - FAIR1M XML: <objects><object><possibleresult><name/></possibleresult>
//     <points><point>x,y</point>...</points>, the ring optionally closed by
//     repeating the first point.
// Zero-area and self-intersecting boxes are not parse errors; they are
// returned in `rejected` and logged so audits can count them.

#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <charconv>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "samrs/annotation.hpp"
#include "samrs/categories.hpp"
#include "samrs/errors.hpp"
#include "samrs/geometry.hpp"
#include "samrs/log.hpp"

namespace samrs {

struct RejectedObject {
    std::size_t index = 0;  // object ordinal within the file
    std::size_t line = 0;   // 1-based for text formats, 0 for XML
    std::string reason;

    friend bool operator==(const RejectedObject&, const RejectedObject&) = default;
};

struct ParsedAnnotations {
    std::vector<InstanceAnnotation> instances;
    std::vector<RejectedObject> rejected;
};

/// Shortest decimal text that parses back to the same double.
inline std::string format_number(double v) {
    std::array<char, 32> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) throw Error("number formatting failed");
    return std::string(buf.data(), end);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline bool parse_double(std::string_view tok, double& out) {
    tok = trim(tok);
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return ec == std::errc{} && ptr == tok.data() + tok.size() && std::isfinite(out);
}

inline double require_double(std::string_view tok, std::size_t line, const char* what) {
    double v = 0;
    if (!parse_double(tok, v)) {
        throw ParseError(std::string("non-numeric ") + what + " '" + std::string(tok) + "'", line);
    }
    return v;
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

inline int resolve_category(const CategoryTable& table, std::string_view name, std::size_t line) {
    auto id = table.find(name);
    if (!id) throw ParseError("unknown category '" + std::string(name) + "'", line);
    return *id;
}

inline void reject(ParsedAnnotations& out, std::size_t index, std::size_t line, const std::string& reason,
                   std::string_view format) {
    log().warn("{}: rejecting object {}{}: {}", format, index,
               line ? " (line " + std::to_string(line) + ")" : std::string(), reason);
    out.rejected.push_back({index, line, reason});
}

/// Fills hbox as well when the quadrilateral is an axis-aligned rectangle.
inline InstanceAnnotation quad_instance(int category, const std::array<Point, 4>& corners, bool difficult,
                                        std::size_t index) {
    InstanceAnnotation a;
    a.category_id = category;
    a.rbox = RBox::from_corners(corners);
    if (a.rbox->is_axis_aligned()) a.hbox = rbox_to_rhbox(*a.rbox);
    a.difficult = difficult;
    a.source_instance_id = std::to_string(index);
    return a;
}

inline boost::property_tree::ptree read_xml_text(const std::string& text, std::string_view format) {
    if (trim(text).empty()) throw SchemaError(std::string(format) + ": empty document");
    std::istringstream in(text);
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_xml(in, tree, boost::property_tree::xml_parser::trim_whitespace);
    } catch (const boost::property_tree::xml_parser_error& e) {
        throw SchemaError(std::string(format) + ": " + e.message(), e.line());
    }
    return tree;
}

}  // namespace detail

inline ParsedAnnotations parse_dota(std::string_view text, const CategoryTable& table) {
    ParsedAnnotations out;
    std::size_t line_no = 0;
    std::size_t index = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        const std::string_view line = detail::trim(text.substr(pos, nl - pos));
        pos = nl + 1;
        ++line_no;
        if (line.empty()) continue;
        const auto tokens = detail::split_ws(line);
        // Metadata lines look like "imagesource:GoogleEarth" or "gsd:0.146".
        if (tokens.size() <= 2 && tokens.front().find(':') != std::string_view::npos) continue;
        if (tokens.size() != 10) {
            throw ParseError("expected 10 fields, got " + std::to_string(tokens.size()), line_no);
        }
        std::array<Point, 4> corners;
        for (std::size_t k = 0; k < 4; ++k) {
            corners[k] = {detail::require_double(tokens[2 * k], line_no, "coordinate"),
                          detail::require_double(tokens[2 * k + 1], line_no, "coordinate")};
        }
        const int category = detail::resolve_category(table, tokens[8], line_no);
        const std::string_view diff = tokens[9];
        if (diff != "0" && diff != "1") {
            throw ParseError("difficulty must be 0 or 1, got '" + std::string(diff) + "'", line_no);
        }
        try {
            out.instances.push_back(detail::quad_instance(category, corners, diff == "1", index));
        } catch (const DegenerateBoxError& e) {
            detail::reject(out, index, line_no, e.what(), "dota");
        }
        ++index;
    }
    return out;
}

inline ParsedAnnotations parse_voc_xml(const std::string& text, const CategoryTable& table) {
    const auto tree = detail::read_xml_text(text, "voc");
    const auto root = tree.get_child_optional("annotation");
    if (!root) throw SchemaError("voc: missing <annotation> root");
    ParsedAnnotations out;
    std::size_t index = 0;
    for (const auto& [tag, node] : *root) {
        if (tag != "object") continue;
        const std::string where = "object " + std::to_string(index);
        const auto name = node.get_optional<std::string>("name");
        if (!name) throw ParseError("voc: " + where + " has no <name>");
        const auto bnd = node.get_child_optional("bndbox");
        if (!bnd) throw ParseError("voc: " + where + " has no <bndbox>");
        auto coord = [&](const char* key) {
            const auto v = bnd->get_optional<std::string>(key);
            if (!v) throw ParseError("voc: " + where + " missing <" + key + ">");
            return detail::require_double(*v, 0, key);
        };
        const double x0 = coord("xmin"), y0 = coord("ymin"), x1 = coord("xmax"), y1 = coord("ymax");
        if (x0 > x1 || y0 > y1) throw ParseError("voc: " + where + " has min > max in <bndbox>");
        const int category = detail::resolve_category(table, *name, 0);
        const std::string diff = node.get<std::string>("difficult", "0");
        if (diff != "0" && diff != "1") throw ParseError("voc: " + where + " has bad <difficult>");

        if (x0 == x1 || y0 == y1) {
            detail::reject(out, index, 0, "box has zero area", "voc");
        } else {
            InstanceAnnotation a;
            a.category_id = category;
            a.hbox = HBox{x0, y0, x1, y1};
            a.difficult = diff == "1";
            a.source_instance_id = std::to_string(index);
            out.instances.push_back(std::move(a));
        }
        ++index;
    }
    return out;
}

inline ParsedAnnotations parse_fair1m_xml(const std::string& text, const CategoryTable& table) {
    const auto tree = detail::read_xml_text(text, "fair1m");
    const auto root = tree.get_child_optional("annotation");
    if (!root) throw SchemaError("fair1m: missing <annotation> root");
    ParsedAnnotations out;
    const auto objects = root->get_child_optional("objects");
    if (!objects) return out;
    std::size_t index = 0;
    for (const auto& [tag, node] : *objects) {
        if (tag != "object") continue;
        const std::string where = "object " + std::to_string(index);
        const auto name = node.get_optional<std::string>("possibleresult.name");
        if (!name) throw ParseError("fair1m: " + where + " has no <possibleresult><name>");
        std::vector<Point> pts;
        if (const auto points = node.get_child_optional("points")) {
            for (const auto& [ptag, pnode] : *points) {
                if (ptag != "point") continue;
                const std::string s = pnode.get_value<std::string>();
                const auto comma = s.find(',');
                if (comma == std::string::npos) throw ParseError("fair1m: " + where + " point '" + s + "' is not x,y");
                pts.push_back({detail::require_double(std::string_view(s).substr(0, comma), 0, "coordinate"),
                               detail::require_double(std::string_view(s).substr(comma + 1), 0, "coordinate")});
            }
        }
        if (pts.size() == 5 && pts[4] == pts[0]) pts.pop_back();  // closed ring
        if (pts.size() != 4) {
            throw ParseError("fair1m: " + where + " has " + std::to_string(pts.size()) + " points, expected 4");
        }
        const int category = detail::resolve_category(table, *name, 0);
        try {
            out.instances.push_back(detail::quad_instance(category, {pts[0], pts[1], pts[2], pts[3]}, false, index));
            // R-Box only, even when the polygon happens to be axis-aligned.
            out.instances.back().hbox.reset();
        } catch (const DegenerateBoxError& e) {
            detail::reject(out, index, 0, e.what(), "fair1m");
        }
        ++index;
    }
    return out;
}

// Writers. Used to export cropped annotations and for round-trip checks.

namespace detail {

inline std::array<Point, 4> quad_of(const InstanceAnnotation& a) {
    if (a.rbox && a.rbox->corners.size() == 4) {
        return {a.rbox->corners[0], a.rbox->corners[1], a.rbox->corners[2], a.rbox->corners[3]};
    }
    if (a.hbox) return a.hbox->corners();
    throw ConfigError("instance '" + a.source_instance_id + "' has no quadrilateral to write");
}

}  // namespace detail

inline std::string write_dota(const std::vector<InstanceAnnotation>& instances, const CategoryTable& table) {
    std::string out;
    for (const auto& a : instances) {
        for (const auto& p : detail::quad_of(a)) {
            out += format_number(p.x) + ' ' + format_number(p.y) + ' ';
        }
        // DOTA spells categories lowercase with hyphens ("storage-tank").
        for (char c : table.at(a.category_id).name) {
            out += c == ' ' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
        out += a.difficult ? " 1\n" : " 0\n";
    }
    return out;
}

inline std::string write_voc_xml(const std::vector<InstanceAnnotation>& instances, const CategoryTable& table) {
    boost::property_tree::ptree root;
    for (const auto& a : instances) {
        const HBox b = a.hbox ? *a.hbox : rbox_to_rhbox(*a.rbox);
        boost::property_tree::ptree obj;
        obj.put("name", table.at(a.category_id).name);
        obj.put("difficult", a.difficult ? "1" : "0");
        obj.put("bndbox.xmin", format_number(b.x_min));
        obj.put("bndbox.ymin", format_number(b.y_min));
        obj.put("bndbox.xmax", format_number(b.x_max));
        obj.put("bndbox.ymax", format_number(b.y_max));
        root.add_child("annotation.object", obj);
    }
    if (instances.empty()) root.put("annotation", "");
    std::ostringstream os;
    boost::property_tree::write_xml(os, root, boost::property_tree::xml_writer_make_settings<std::string>(' ', 2));
    return os.str();
}

inline std::string write_fair1m_xml(const std::vector<InstanceAnnotation>& instances, const CategoryTable& table) {
    boost::property_tree::ptree root;
    root.put("annotation.source.origin", "GF2/GF3");
    boost::property_tree::ptree objects;
    for (const auto& a : instances) {
        boost::property_tree::ptree obj;
        obj.put("coordinate", "pixel");
        obj.put("type", "rectangle");
        obj.put("possibleresult.name", table.at(a.category_id).name);
        boost::property_tree::ptree points;
        const auto quad = detail::quad_of(a);
        for (std::size_t k = 0; k <= 4; ++k) {
            const Point& p = quad[k % 4];
            points.add("point", format_number(p.x) + "," + format_number(p.y));
        }
        obj.add_child("points", points);
        objects.add_child("object", obj);
    }
    root.add_child("annotation.objects", objects);
    std::ostringstream os;
    boost::property_tree::write_xml(os, root, boost::property_tree::xml_writer_make_settings<std::string>(' ', 2));
    return os.str();
}

}  // namespace samrs
