// Copyright 2026 The samrs-convert Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace samrs {

// Data goes to stdout, so diagnostics always go to stderr.
inline spdlog::logger& log() {
    static std::shared_ptr<spdlog::logger> logger = [] {
        auto existing = spdlog::get("samrs");
        return existing ? existing : spdlog::stderr_color_mt("samrs");
    }();
    return *logger;
}

}  // namespace samrs
