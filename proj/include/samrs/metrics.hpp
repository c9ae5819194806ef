// Copyright 2026 The samrs-convert Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "samrs/errors.hpp"
#include "samrs/prompts.hpp"
#include "samrs/rle.hpp"

namespace samrs {

struct IouSample {
    std::string instance_id;
    long long intersection = 0;
    long long union_ = 0;

    friend bool operator==(const IouSample&, const IouSample&) = default;
};

struct MiouResult {
    double miou_instance = 0.0;  // mean of per-instance I/U
    double miou_pixel = 0.0;     // sum I / sum U
    std::size_t n = 0;           // included samples
    std::size_t excluded = 0;    // samples with U = 0

    friend bool operator==(const MiouResult&, const MiouResult&) = default;
};

inline IouSample iou_sample(const InstanceMask& pred, const InstanceMask& gt, std::string instance_id = {}) {
    if (pred.rle.height != gt.rle.height || pred.rle.width != gt.rle.width) {
        throw DimensionError("prediction and ground truth differ in size");
    }
    const long long inter = rle_intersection(pred.rle, gt.rle);
    return {std::move(instance_id), inter, pred.rle.area() + gt.rle.area() - inter};
}

/// Instance-level and pixel-level mIOU. Samples with an empty union are
/// skipped and counted in `excluded`.
inline MiouResult miou(const std::vector<IouSample>& samples) {
    MiouResult r;
    double ratio_sum = 0.0;
    long long inter_sum = 0, union_sum = 0;
    for (const auto& s : samples) {
        if (s.intersection < 0 || s.intersection > s.union_) {
            throw ConfigError("IoU sample '" + s.instance_id + "' violates 0 <= I <= U");
        }
        if (s.union_ == 0) {
            ++r.excluded;
            continue;
        }
        ratio_sum += static_cast<double>(s.intersection) / static_cast<double>(s.union_);
        inter_sum += s.intersection;
        union_sum += s.union_;
        ++r.n;
    }
    if (r.n == 0) throw UndefinedResultError("mIOU is undefined without samples of nonzero union");
    r.miou_instance = ratio_sum / static_cast<double>(r.n);
    r.miou_pixel = static_cast<double>(inter_sum) / static_cast<double>(union_sum);
    return r;
}

struct AvailableBoxes {
    bool hbox = false;
    bool rbox = false;
};

/// R-Box only -> RH-Box prompts; any H-Box available -> H-Box prompts.
inline BoxMode choose_prompt_mode(AvailableBoxes available) {
    if (available.hbox) return BoxMode::HBox;
    if (available.rbox) return BoxMode::RHBox;
    throw ConfigError("dataset provides neither H-Boxes nor R-Boxes");
}

/// The dataset provides a box kind when every instance carries it.
inline AvailableBoxes available_boxes(const std::vector<InstanceAnnotation>& instances) {
    AvailableBoxes av{!instances.empty(), !instances.empty()};
    for (const auto& a : instances) {
        av.hbox = av.hbox && a.hbox.has_value();
        av.rbox = av.rbox && a.rbox.has_value();
    }
    return av;
}

}  // namespace samrs
