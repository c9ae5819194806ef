// Copyright 2026 The samrs-convert Authors
// SPDX-License-Identifier: Apache-2.0
//
// Prompt-combination ablation: prompts built from ground-truth boxes are sent
// to a backend, and the selected masks are scored against ground-truth
// instance masks with instance-level and pixel-level mIOU.
//
// On-disk ablation sets are a directory holding `ablation_set.json`:
//   {"dataset": s, "categories": "sota" | [names...],
//    "images": [{"id": s, "image": path, "gt_mask": path,
//                "instances": [{"id": s, "category": name, "value": v,
//                               "hbox": [x0,y0,x1,y1]?, "rbox": [[x,y] x4]?,
//                               "difficult": b?}]}]}
// `gt_mask` is an instance-valued image (gray value or 0xRRGGBB); each
// instance's pixels carry its `value`. Paths are relative to the directory.

#pragma once

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "samrs/categories.hpp"
#include "samrs/errors.hpp"
#include "samrs/image.hpp"
#include "samrs/log.hpp"
#include "samrs/metrics.hpp"
#include "samrs/parallel.hpp"
#include "samrs/prompts.hpp"
#include "samrs/segmenter.hpp"
#include "samrs/semantic.hpp"

namespace samrs {

struct AblationInstance {
    InstanceAnnotation annotation;
    InstanceMask gt;
};

struct AblationImage {
    std::string id;
    Image image;
    std::vector<AblationInstance> instances;
};

struct AblationSet {
    std::string dataset;
    CategoryTable categories;
    std::vector<AblationImage> images;
};

struct AblationRow {
    PromptCombo combo;
    std::optional<MiouResult> result;  // nullopt when no sample had a nonzero union
    std::vector<IouSample> samples;    // in (image, instance) order
    std::size_t invalid = 0;           // scored as I = 0, U = area(GT)
    std::size_t failed = 0;            // backend or prompt failure; not scored
};

struct AblationReport {
    std::string dataset;
    std::string backend;
    std::vector<AblationRow> rows;
};

struct AblationOptions {
    ImageSize mask_grid{256, 256};
    double magnitude = 1000.0;
    int workers = 1;
};

namespace detail {

struct ImageOutcome {
    std::vector<IouSample> samples;
    std::size_t invalid = 0;
    std::size_t failed = 0;
};

inline ImageOutcome ablate_image(const AblationImage& img, const PromptConfig& cfg, Backend& backend) {
    ImageOutcome out;
    SegmentRequest req;
    req.image = img.image;
    std::vector<std::size_t> prompted;
    for (std::size_t k = 0; k < img.instances.size(); ++k) {
        try {
            req.prompt_sets.push_back(build_prompt_set(img.instances[k].annotation, cfg, img.image.size()));
            prompted.push_back(k);
        } catch (const EmptyPromptError& e) {
            log().warn("ablation: {} instance {}: {}", img.id, img.instances[k].annotation.source_instance_id,
                       e.what());
            ++out.failed;
        }
    }
    SegmentResponse resp;
    try {
        resp = segment(backend, req);
    } catch (const ProtocolError& e) {
        log().warn("ablation: {}: backend failed: {}", img.id, e.what());
        out.failed += prompted.size();
        return out;
    } catch (const TransportError& e) {
        log().warn("ablation: {}: backend failed: {}", img.id, e.what());
        out.failed += prompted.size();
        return out;
    }
    for (std::size_t j = 0; j < prompted.size(); ++j) {
        const auto& inst = img.instances[prompted[j]];
        auto pred = select_mask(resp.results[j]);
        if (!pred) {
            ++out.failed;
            continue;
        }
        const HBox ref = reference_box(inst.annotation, cfg.combo);
        pred->valid = validate_mask(*pred, ref, img.image.size());
        if (pred->valid) {
            out.samples.push_back(iou_sample(*pred, inst.gt, inst.annotation.source_instance_id));
        } else {
            ++out.invalid;
            out.samples.push_back({inst.annotation.source_instance_id, 0, inst.gt.rle.area()});
        }
    }
    return out;
}

}  // namespace detail

/// Evaluates every combination over the set. Per-instance backend failures
/// are excluded and counted; invalid masks are penalized.
inline AblationReport run_ablation(const AblationSet& set, const std::vector<PromptCombo>& combos, Backend& backend,
                                   const AblationOptions& opt = {}) {
    for (const auto& combo : combos) {
        combo.check();
        for (const auto& img : set.images) {
            for (const auto& inst : img.instances) {
                if ((combo.needs_hbox() && !inst.annotation.hbox) ||
                    (combo.needs_rbox() && !inst.annotation.rbox)) {
                    throw ConfigError("combination " + combo.id() + " is not realizable for instance '" +
                                      inst.annotation.source_instance_id + "'");
                }
            }
        }
    }
    AblationReport report{set.dataset, backend.describe(), {}};
    for (const auto& combo : combos) {
        const PromptConfig cfg{combo, opt.mask_grid, opt.magnitude};
        std::vector<detail::ImageOutcome> outcomes(set.images.size());
        parallel_for(set.images.size(), opt.workers,
                     [&](std::size_t i) { outcomes[i] = detail::ablate_image(set.images[i], cfg, backend); });
        AblationRow row;
        row.combo = combo;
        for (auto& o : outcomes) {
            row.samples.insert(row.samples.end(), o.samples.begin(), o.samples.end());
            row.invalid += o.invalid;
            row.failed += o.failed;
        }
        try {
            row.result = miou(row.samples);
        } catch (const UndefinedResultError&) {
            row.result.reset();
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

inline nlohmann::json to_json(const AblationReport& r) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : r.rows) {
        nlohmann::json j;
        j["combo"] = row.combo.id();
        j["prompts"] = {{"cp", row.combo.cp},           {"hbox", row.combo.hbox},
                        {"hbox_m", row.combo.hbox_mask}, {"rbox_m", row.combo.rbox_mask},
                        {"rhbox", row.combo.rhbox},      {"rhbox_m", row.combo.rhbox_mask}};
        j["miou_instance"] = row.result ? nlohmann::json(row.result->miou_instance) : nlohmann::json(nullptr);
        j["miou_pixel"] = row.result ? nlohmann::json(row.result->miou_pixel) : nlohmann::json(nullptr);
        j["n"] = row.result ? row.result->n : 0;
        j["excluded"] = row.result ? row.result->excluded : row.samples.size();
        j["invalid"] = row.invalid;
        j["failed"] = row.failed;
        rows.push_back(std::move(j));
    }
    return {{"dataset", r.dataset}, {"backend", r.backend}, {"rows", std::move(rows)}};
}

/// Reads the summary form written by `to_json`; per-instance samples are not kept.
inline AblationReport ablation_report_from_json(const nlohmann::json& j) {
    try {
        AblationReport r{j.at("dataset").get<std::string>(), j.at("backend").get<std::string>(), {}};
        for (const auto& jr : j.at("rows")) {
            AblationRow row;
            row.combo = PromptCombo::parse(jr.at("combo").get<std::string>());
            if (!jr.at("miou_instance").is_null()) {
                row.result = MiouResult{jr["miou_instance"].get<double>(), jr.at("miou_pixel").get<double>(),
                                        jr.at("n").get<std::size_t>(), jr.at("excluded").get<std::size_t>()};
            }
            row.invalid = jr.at("invalid").get<std::size_t>();
            row.failed = jr.at("failed").get<std::size_t>();
            r.rows.push_back(std::move(row));
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("ablation report: ") + e.what());
    }
}

/// Aligned text table: one column per basic prompt, then both metrics in percent.
inline std::string format_table(const AblationReport& r) {
    std::ostringstream os;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-4s %-6s %-8s %-8s %-7s %-9s| %8s %8s %6s %8s %7s\n", "CP", "H-Box", "H-Box-M",
                  "R-Box-M", "RH-Box", "RH-Box-M", "mIOU_I", "mIOU_P", "N", "invalid", "failed");
    os << buf;
    os << std::string(std::char_traits<char>::length(buf) - 1, '-') << '\n';
    auto mark = [](bool b) { return b ? "x" : ""; };
    for (const auto& row : r.rows) {
        const auto& c = row.combo;
        char mi[16] = "-", mp[16] = "-";
        if (row.result) {
            std::snprintf(mi, sizeof mi, "%.2f", 100.0 * row.result->miou_instance);
            std::snprintf(mp, sizeof mp, "%.2f", 100.0 * row.result->miou_pixel);
        }
        std::snprintf(buf, sizeof buf, "%-4s %-6s %-8s %-8s %-7s %-9s| %8s %8s %6zu %8zu %7zu\n", mark(c.cp),
                      mark(c.hbox), mark(c.hbox_mask), mark(c.rbox_mask), mark(c.rhbox), mark(c.rhbox_mask), mi, mp,
                      row.result ? row.result->n : std::size_t{0}, row.invalid, row.failed);
        os << buf;
    }
    return os.str();
}

// --- on-disk ablation sets -------------------------------------------------

inline AblationSet load_ablation_set(const std::filesystem::path& dir) {
    const auto index = dir / "ablation_set.json";
    std::ifstream in(index);
    if (!in) throw IoError("cannot open " + index.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(index.string() + ": " + e.what());
    }
    try {
        AblationSet set;
        set.dataset = j.value("dataset", std::string("custom"));
        const auto& cats = j.at("categories");
        if (cats.is_string()) {
            set.categories = builtin_categories(cats.get<std::string>());
        } else {
            std::vector<std::pair<std::string, std::string>> entries;
            for (const auto& n : cats) entries.emplace_back(n.get<std::string>(), n.get<std::string>());
            set.categories = CategoryTable(set.dataset, entries);
        }
        for (const auto& ji : j.at("images")) {
            AblationImage img;
            img.id = ji.at("id").get<std::string>();
            img.image = read_image(dir / ji.at("image").get<std::string>());
            const Image gt_img = read_image(dir / ji.at("gt_mask").get<std::string>());
            if (gt_img.size() != img.image.size()) {
                throw DimensionError("ground-truth mask of " + img.id + " differs in size from its image");
            }
            std::map<std::uint32_t, int> colors;
            for (const auto& inst : ji.at("instances")) {
                const std::string cname = inst.at("category").get<std::string>();
                const auto cat = set.categories.find(cname);
                if (!cat) throw ParseError("unknown category '" + cname + "' in " + img.id);
                colors[inst.at("value").get<std::uint32_t>()] = *cat;
            }
            std::map<std::uint32_t, InstanceMask> gt_by_value;
            for (auto& g : parse_hrsc_gt(gt_img, colors)) gt_by_value[g.value] = std::move(g.mask);
            for (const auto& inst : ji.at("instances")) {
                AblationInstance ai;
                ai.annotation.category_id = colors.at(inst.at("value").get<std::uint32_t>());
                ai.annotation.source_instance_id = inst.at("id").get<std::string>();
                ai.annotation.difficult = inst.value("difficult", false);
                if (inst.contains("hbox")) {
                    const auto b = inst["hbox"].get<std::vector<double>>();
                    if (b.size() != 4) throw ParseError("hbox of " + ai.annotation.source_instance_id + " needs 4 numbers");
                    ai.annotation.hbox = HBox::checked(b[0], b[1], b[2], b[3]);
                }
                if (inst.contains("rbox")) {
                    const auto pts = inst["rbox"].get<std::vector<std::vector<double>>>();
                    if (pts.size() != 4) throw ParseError("rbox of " + ai.annotation.source_instance_id + " needs 4 points");
                    std::array<Point, 4> c;
                    for (std::size_t k = 0; k < 4; ++k) {
                        if (pts[k].size() != 2) throw ParseError("rbox point must be [x, y]");
                        c[k] = {pts[k][0], pts[k][1]};
                    }
                    ai.annotation.rbox = RBox::from_corners(c);
                }
                if (!ai.annotation.hbox && !ai.annotation.rbox) {
                    throw ParseError("instance " + ai.annotation.source_instance_id + " has no box");
                }
                const auto v = inst.at("value").get<std::uint32_t>();
                auto it = gt_by_value.find(v);
                ai.gt = it != gt_by_value.end() ? it->second
                                                : make_instance_mask(Bitmask(img.image.height, img.image.width), 1.0);
                img.instances.push_back(std::move(ai));
            }
            set.images.push_back(std::move(img));
        }
        return set;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(index.string() + ": " + e.what());
    }
}

}  // namespace samrs
