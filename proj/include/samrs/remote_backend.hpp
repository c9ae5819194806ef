// Copyright 2026 The samrs-convert Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <memory>
#include <semaphore>
#include <string>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "samrs/errors.hpp"
#include "samrs/log.hpp"
#include "samrs/segmenter.hpp"
#include "samrs/wire.hpp"

namespace samrs {

struct RemoteOptions {
    int max_in_flight = 4;
    int attempts = 3;
    std::chrono::milliseconds initial_backoff{1000};  // doubled after each failed attempt
    std::chrono::seconds timeout{300};
};

/// HTTP client for a model server speaking the wire protocol in wire.hpp.
class RemoteBackend : public Backend {
public:
    explicit RemoteBackend(std::string base_url, RemoteOptions opt = {})
        : url_(std::move(base_url)), opt_(opt), slots_(std::max(1, opt.max_in_flight)) {
        if (opt_.max_in_flight < 1 || opt_.max_in_flight > kMaxInFlight) {
            throw ConfigError("backend concurrency bound must lie in [1, " + std::to_string(kMaxInFlight) + "]");
        }
        if (opt_.attempts < 1) throw ConfigError("backend attempts must be >= 1");
        while (!url_.empty() && url_.back() == '/') url_.pop_back();
    }

    std::string describe() const override { return url_; }

    BackendHealth health() override {
        auto cli = client();
        auto res = cli.Get("/v1/health");
        if (!res || res->status != 200) return {"", false};
        try {
            const auto j = nlohmann::json::parse(res->body);
            return {j.value("model", std::string()), j.at("ready").get<bool>()};
        } catch (const nlohmann::json::exception&) {
            return {"", false};
        }
    }

    /// Retries transport failures and 5xx answers with exponential backoff.
    /// When every attempt fails, each prompt set gets an empty candidate list.
    SegmentResponse segment(const SegmentRequest& req) override {
        Slot slot(slots_);
        const std::string id = "req-" + std::to_string(next_id_.fetch_add(1));
        const std::string body = wire::encode_request(id, req).dump();
        auto backoff = opt_.initial_backoff;
        std::string last_error;
        for (int attempt = 1; attempt <= opt_.attempts; ++attempt) {
            auto cli = client();
            auto res = cli.Post("/v1/segment", body, "application/json");
            if (!res) {
                last_error = "transport: " + httplib::to_string(res.error());
            } else if (res->status >= 500) {
                last_error = "server status " + std::to_string(res->status);
            } else if (res->status != 200) {
                throw ProtocolError("backend rejected request " + id + " with status " + std::to_string(res->status) +
                                    ": " + res->body);
            } else {
                nlohmann::json j;
                try {
                    j = nlohmann::json::parse(res->body);
                } catch (const nlohmann::json::exception& e) {
                    throw ProtocolError(std::string("response is not JSON: ") + e.what());
                }
                return wire::decode_response(j, id);
            }
            log().warn("segment {} attempt {}/{} failed: {}", id, attempt, opt_.attempts, last_error);
            if (attempt < opt_.attempts) {
                std::this_thread::sleep_for(backoff);
                backoff *= 2;
            }
        }
        log().error("segment {} gave up after {} attempts: {}", id, opt_.attempts, last_error);
        SegmentResponse failed;
        failed.results.resize(req.prompt_sets.size());
        return failed;
    }

private:
    static constexpr int kMaxInFlight = 256;

    struct Slot {
        explicit Slot(std::counting_semaphore<kMaxInFlight>& s) : sem(s) { sem.acquire(); }
        ~Slot() { sem.release(); }
        std::counting_semaphore<kMaxInFlight>& sem;
    };

    httplib::Client client() const {
        httplib::Client cli(url_);
        cli.set_connection_timeout(std::chrono::seconds(10));
        cli.set_read_timeout(opt_.timeout);
        cli.set_write_timeout(opt_.timeout);
        return cli;
    }

    std::string url_;
    RemoteOptions opt_;
    std::counting_semaphore<kMaxInFlight> slots_;
    std::atomic<std::uint64_t> next_id_{0};
};

}  // namespace samrs
