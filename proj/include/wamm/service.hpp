// Copyright (C) 2026 the wamm project authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef WAMM_SERVICE_HPP
#define WAMM_SERVICE_HPP

#include <chrono>
#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "wamm/gbdt.hpp"

namespace wamm {

/// Latency counters shared by all worker threads; the only mutable state in
/// the service. Keeps a bounded ring of recent end-to-end latencies.
class ServiceMetrics {
public:
    void record(double latency_us) {
        std::lock_guard<std::mutex> lock(mu_);
        ++total_;
        if (ring_.size() < kRingCapacity) ring_.push_back(latency_us);
        else ring_[next_++ % kRingCapacity] = latency_us;
    }

    nlohmann::json snapshot() const {
        std::vector<double> lat;
        uint64_t total;
        {
            std::lock_guard<std::mutex> lock(mu_);
            lat = ring_;
            total = total_;
        }
        double p50 = 0, p99 = 0;
        if (!lat.empty()) {
            std::sort(lat.begin(), lat.end());
            auto pick = [&](double q) {
                return lat[static_cast<size_t>(q * static_cast<double>(lat.size() - 1))];
            };
            p50 = pick(0.50);
            p99 = pick(0.99);
        }
        return {{"requests_total", total},
                {"latency_window", lat.size()},
                {"p50_us", p50},
                {"p99_us", p99}};
    }

private:
    static constexpr size_t kRingCapacity = 8192;
    mutable std::mutex mu_;
    uint64_t total_ = 0;
    size_t next_ = 0;
    std::vector<double> ring_;
};

/// JSON-over-HTTP classification service. The model is loaded once and
/// shared read-only; request handling never mutates it. Schemas are frozen
/// in docs/service_schema.json.
class ClassifierService {
public:
    static constexpr size_t kMaxBatchItems = 1000;

    explicit ClassifierService(GbdtModel model)
        : model_(std::move(model)), start_(std::chrono::steady_clock::now()) {}

    const GbdtModel& model() const { return model_; }

    void bind_routes(httplib::Server& srv) {
        srv.Post("/classify", [this](const httplib::Request& req, httplib::Response& res) {
            handle_classify(req, res);
        });
        srv.Post("/classify_batch", [this](const httplib::Request& req, httplib::Response& res) {
            handle_batch(req, res);
        });
        // Fast paths: no classification work, no metrics lock.
        srv.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
            nlohmann::json body{{"status", "ok"},
                                {"format_version", model_.format_version},
                                {"classes", model_.class_count()},
                                {"rounds", model_.completed_rounds()},
                                {"uptime_s", uptime_s()}};
            res.set_content(body.dump(), "application/json");
        });
        srv.Get("/metrics", [this](const httplib::Request&, httplib::Response& res) {
            nlohmann::json body = metrics_.snapshot();
            body["uptime_s"] = uptime_s();
            res.set_content(body.dump(), "application/json");
        });
    }

    /// Blocking serve loop. `bind` is "host:port"; returns false if the
    /// address cannot be bound.
    bool run(const std::string& bind, int workers) {
        auto colon = bind.rfind(':');
        if (colon == std::string::npos)
            throw ValidationError("InvalidParams", "bind address must be host:port");
        std::string host = bind.substr(0, colon);
        int port;
        try {
            port = std::stoi(bind.substr(colon + 1));
        } catch (const std::exception&) {
            throw ValidationError("InvalidParams", "bad port in bind address");
        }
        httplib::Server srv;
        if (workers > 0)
            srv.new_task_queue = [workers] { return new httplib::ThreadPool(static_cast<size_t>(workers)); };
        bind_routes(srv);
        return srv.listen(host, port);
    }

private:
    double uptime_s() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

    static bool is_json(const httplib::Request& req) {
        auto ct = req.get_header_value("Content-Type");
        return ct.rfind("application/json", 0) == 0;
    }

    static void error_response(httplib::Response& res, int status, const std::string& message) {
        res.status = status;
        res.set_content(nlohmann::json{{"error", message}}.dump(), "application/json");
    }

    nlohmann::json classify_one(const std::string& full_request) {
        auto t0 = std::chrono::steady_clock::now();
        auto outcome = model_.classify(full_request);
        double us = std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0)
                        .count();
        metrics_.record(us);
        nlohmann::json out{{"class", class_name(outcome.label)},
                           {"confidence", outcome.confidence},
                           {"blocked", outcome.label != AttackClass::Normal},
                           {"latency_us", us}};
        if (auto capec = class_capec(outcome.label))
            out["capec_id"] = *capec;
        else
            out["capec_id"] = nullptr;
        return out;
    }

    void handle_classify(const httplib::Request& req, httplib::Response& res) {
        if (!is_json(req)) return error_response(res, 415, "content-type must be application/json");
        auto body = nlohmann::json::parse(req.body, nullptr, false);
        if (body.is_discarded()) return error_response(res, 400, "malformed JSON body");
        if (!body.is_object() || !body.contains("full_request") || !body["full_request"].is_string())
            return error_response(res, 422, "missing string field full_request");
        res.set_content(classify_one(body["full_request"].get<std::string>()).dump(),
                        "application/json");
    }

    void handle_batch(const httplib::Request& req, httplib::Response& res) {
        if (!is_json(req)) return error_response(res, 415, "content-type must be application/json");
        auto body = nlohmann::json::parse(req.body, nullptr, false);
        if (body.is_discarded()) return error_response(res, 400, "malformed JSON body");
        if (!body.is_array()) return error_response(res, 422, "body must be a JSON array");
        if (body.size() > kMaxBatchItems)
            return error_response(res, 400, "batch exceeds " + std::to_string(kMaxBatchItems) + " items");
        nlohmann::json out = nlohmann::json::array();
        for (const auto& item : body) {
            if (!item.is_object() || !item.contains("full_request") || !item["full_request"].is_string())
                return error_response(res, 422, "every item needs a string full_request");
            out.push_back(classify_one(item["full_request"].get<std::string>()));
        }
        res.set_content(out.dump(), "application/json");
    }

    GbdtModel model_;
    std::chrono::steady_clock::time_point start_;
    ServiceMetrics metrics_;
};

} // namespace wamm

#endif // WAMM_SERVICE_HPP
