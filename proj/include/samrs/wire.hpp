// Copyright 2026 The samrs-convert Authors
// SPDX-License-Identifier: Apache-2.0
//
// JSON codec for the segmentation wire protocol.
//
//   POST /v1/segment
//   {"id": s, "image_png_b64": s, "multimask": b,
//    "prompts": [{"point": {"x": f, "y": f, "label": 1} | null,
//                 "box": [x0, y0, x1, y1] | null,
//                 "mask": {"width": W, "height": H, "magnitude": m,
//                          "positive_rle": [counts...]} | null}]}
//   -> {"id": s, "results": [{"candidates": [{"size": [H, W], "rle": [...], "score": f}]}]}
//
//   GET /v1/health -> {"model": s, "ready": b}
//
// Mask prompts travel as the positive-region RLE plus magnitude; the server
// rebuilds the +/-m score grid.

#pragma once

#include <string>
#include <utility>

#include "json.hpp"

#include "samrs/errors.hpp"
#include "samrs/image.hpp"
#include "samrs/segmenter.hpp"

namespace samrs::wire {

using nlohmann::json;

inline json encode_prompt(const PromptSet& ps) {
    json p;
    p["point"] = ps.point ? json{{"x", ps.point->at.x}, {"y", ps.point->at.y}, {"label", CenterPoint::label}}
                          : json(nullptr);
    p["box"] = ps.box ? json{ps.box->x_min, ps.box->y_min, ps.box->x_max, ps.box->y_max} : json(nullptr);
    if (ps.mask) {
        p["mask"] = {{"width", ps.mask->width()},
                     {"height", ps.mask->height()},
                     {"magnitude", ps.mask->magnitude},
                     {"positive_rle", rle_encode(ps.mask->positive).counts}};
    } else {
        p["mask"] = nullptr;
    }
    return p;
}

inline json encode_request(const std::string& id, const SegmentRequest& req) {
    json prompts = json::array();
    for (const auto& ps : req.prompt_sets) prompts.push_back(encode_prompt(ps));
    return {{"id", id},
            {"image_png_b64", base64_encode(encode_png(req.image))},
            {"multimask", req.multimask},
            {"prompts", std::move(prompts)}};
}

/// Server-side decoding; malformed input raises ProtocolError.
inline std::pair<std::string, SegmentRequest> decode_request(const json& j) {
    try {
        SegmentRequest req;
        const std::string id = j.at("id").get<std::string>();
        req.image = decode_png(base64_decode(j.at("image_png_b64").get<std::string>()));
        req.multimask = j.at("multimask").get<bool>();
        for (const auto& p : j.at("prompts")) {
            PromptSet ps;
            if (!p.at("point").is_null()) {
                ps.point = CenterPoint{{p["point"].at("x").get<double>(), p["point"].at("y").get<double>()}};
            }
            if (!p.at("box").is_null()) {
                const auto& b = p["box"];
                if (b.size() != 4) throw ProtocolError("box must have 4 numbers");
                ps.box = HBox{b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
            }
            if (!p.at("mask").is_null()) {
                const auto& m = p["mask"];
                RleMask r{m.at("height").get<int>(), m.at("width").get<int>(),
                          m.at("positive_rle").get<std::vector<std::int64_t>>()};
                ps.mask = MaskPrompt{rle_decode(r), m.at("magnitude").get<double>()};
            }
            req.prompt_sets.push_back(std::move(ps));
        }
        return {id, std::move(req)};
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("malformed segment request: ") + e.what());
    } catch (const CorruptionError& e) {
        throw ProtocolError(std::string("malformed mask prompt: ") + e.what());
    } catch (const IoError& e) {
        throw ProtocolError(std::string("malformed image payload: ") + e.what());
    }
}

inline json encode_response(const std::string& id, const SegmentResponse& resp) {
    json results = json::array();
    for (const auto& list : resp.results) {
        json cands = json::array();
        for (const auto& c : list) {
            cands.push_back({{"size", {c.mask.height, c.mask.width}}, {"rle", c.mask.counts}, {"score", c.score}});
        }
        results.push_back({{"candidates", std::move(cands)}});
    }
    return {{"id", id}, {"results", std::move(results)}};
}

/// Client-side decoding; the echoed id must match the request id.
inline SegmentResponse decode_response(const json& j, const std::string& expected_id) {
    try {
        const std::string id = j.at("id").get<std::string>();
        if (id != expected_id) {
            throw ProtocolError("response id '" + id + "' does not echo request id '" + expected_id + "'");
        }
        SegmentResponse resp;
        for (const auto& r : j.at("results")) {
            std::vector<Candidate> list;
            for (const auto& c : r.at("candidates")) {
                const auto& size = c.at("size");
                if (size.size() != 2) throw ProtocolError("candidate size must be [H, W]");
                list.push_back({RleMask{size[0].get<int>(), size[1].get<int>(),
                                        c.at("rle").get<std::vector<std::int64_t>>()},
                                c.at("score").get<double>()});
            }
            resp.results.push_back(std::move(list));
        }
        return resp;
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("malformed segment response: ") + e.what());
    }
}

}  // namespace samrs::wire
