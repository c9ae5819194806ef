// Copyright 2026 The samrs-convert Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "samrs/errors.hpp"
#include "samrs/remote_backend.hpp"
#include "samrs/segmenter.hpp"

namespace samrs {

struct BackendSettings {
    std::uint64_t seed = 42;
    int max_in_flight = 4;
};

/// Builds a backend from "oracle:fill", "oracle:erosion[:radius=R,jitter=J,seed=S]"
/// or an http:// URL. An explicit seed inside the spec wins over `settings.seed`.
inline std::unique_ptr<Backend> make_backend(std::string_view spec, const BackendSettings& settings = {}) {
    if (spec == "oracle:fill") return std::make_unique<FillOracle>();
    if (spec.starts_with("oracle:erosion")) {
        ErosionOptions opt;
        opt.seed = settings.seed;
        std::string_view rest = spec.substr(std::string_view("oracle:erosion").size());
        if (!rest.empty()) {
            if (rest.front() != ':') throw ConfigError("bad backend spec '" + std::string(spec) + "'");
            rest.remove_prefix(1);
            while (!rest.empty()) {
                const auto comma = rest.find(',');
                const std::string_view kv = rest.substr(0, comma);
                rest = comma == std::string_view::npos ? std::string_view() : rest.substr(comma + 1);
                const auto eq = kv.find('=');
                if (eq == std::string_view::npos) throw ConfigError("bad oracle option '" + std::string(kv) + "'");
                const std::string key(kv.substr(0, eq));
                const std::string value(kv.substr(eq + 1));
                try {
                    if (key == "radius") opt.radius = std::stoi(value);
                    else if (key == "jitter") opt.jitter = std::stoi(value);
                    else if (key == "seed") opt.seed = std::stoull(value);
                    else if (key == "point_radius") opt.region.point_radius = std::stod(value);
                    else throw ConfigError("unknown oracle option '" + key + "'");
                } catch (const std::logic_error&) {
                    throw ConfigError("bad value for oracle option '" + key + "'");
                }
            }
        }
        if (opt.radius < 0 || opt.jitter < 0) throw ConfigError("oracle radius and jitter must be >= 0");
        return std::make_unique<ErosionOracle>(opt);
    }
    if (spec.starts_with("http://")) {
        RemoteOptions opt;
        opt.max_in_flight = settings.max_in_flight;
        return std::make_unique<RemoteBackend>(std::string(spec), opt);
    }
    throw ConfigError("unknown backend '" + std::string(spec) + "' (expected URL, oracle:fill or oracle:erosion)");
}

}  // namespace samrs
