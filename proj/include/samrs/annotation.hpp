// Copyright 2026 The samrs-convert Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>

#include "samrs/geometry.hpp"

namespace samrs {

/// One detected object. At least one of `hbox` / `rbox` is present.
struct InstanceAnnotation {
    int category_id = 0;
    std::optional<HBox> hbox;
    std::optional<RBox> rbox;
    bool difficult = false;
    std::string source_instance_id;

    friend bool operator==(const InstanceAnnotation&, const InstanceAnnotation&) = default;
};

}  // namespace samrs
