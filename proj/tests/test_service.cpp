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

#include <catch2/catch_amalgamated.hpp>

#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "helpers.hpp"
#include "wamm/seedgen.hpp"
#include "wamm/service.hpp"

using namespace wamm;
using nlohmann::json;

namespace {

GbdtModel service_model() {
    SeedGenerator gen(8899);
    Dataset ds;
    uint64_t id = 0;
    for (int i = 0; i < 120; ++i)
        ds.records.push_back({gen.benign_request(), AttackClass::Normal, id++, {}});
    for (int i = 0; i < 80; ++i)
        ds.records.push_back({gen.attack_request(AttackClass::Sqli), AttackClass::Sqli, id++, {}});
    for (int i = 0; i < 80; ++i)
        ds.records.push_back({gen.attack_request(AttackClass::Xss), AttackClass::Xss, id++, {}});

    std::vector<std::string> texts;
    for (const auto& r : ds.records) texts.push_back(r.full_request);
    FeaturePipeline pipeline;
    pipeline.vectorizer.fit(texts, 600, 1, 2);

    std::vector<FeatureVector> x;
    std::vector<AttackClass> y;
    for (const auto& r : ds.records) {
        x.push_back(pipeline.featurize(parse_request(r.full_request)));
        y.push_back(r.label);
    }
    TrainConfig cfg;
    cfg.max_rounds = 20;
    cfg.max_depth = 4;
    auto [model, log] = train_gbdt(x, y, class_weights(ds), cfg, std::move(pipeline));
    return std::move(model);
}

struct RunningService {
    ClassifierService service;
    httplib::Server server;
    int port = 0;
    std::thread thread;

    explicit RunningService(GbdtModel model) : service(std::move(model)) {
        service.bind_routes(server);
        port = server.bind_to_any_port("127.0.0.1");
        REQUIRE(port > 0);
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~RunningService() {
        server.stop();
        thread.join();
    }
    httplib::Client client() { return httplib::Client("127.0.0.1", port); }
};

} // namespace

TEST_CASE("service classify endpoint") {
    RunningService rs(service_model());
    auto client = rs.client();

    SECTION("attack request is blocked") {
        auto res = client.Post("/classify",
                               json{{"full_request", "GET /a?id=1 UNION SELECT password FROM users--"}}.dump(),
                               "application/json");
        REQUIRE(res);
        REQUIRE(res->status == 200);
        auto body = json::parse(res->body);
        CHECK(body["class"] != "Normal");
        CHECK(body["blocked"] == true);
        CHECK(body["confidence"].get<double>() > 0.0);
        CHECK(body["confidence"].get<double>() <= 1.0);
        CHECK(body["latency_us"].get<double>() > 0.0);
        CHECK_FALSE(body["capec_id"].is_null());
    }
    SECTION("benign request passes") {
        auto res = client.Post("/classify", json{{"full_request", "GET /index.html"}}.dump(),
                               "application/json");
        REQUIRE(res);
        REQUIRE(res->status == 200);
        auto body = json::parse(res->body);
        CHECK(body["class"] == "Normal");
        CHECK(body["blocked"] == false);
        CHECK(body["capec_id"].is_null());
    }
    SECTION("replaying a request gives identical class and confidence") {
        auto payload = json{{"full_request", "GET /search?q=<script>alert(1)</script>"}}.dump();
        auto r1 = client.Post("/classify", payload, "application/json");
        auto r2 = client.Post("/classify", payload, "application/json");
        REQUIRE(r1);
        REQUIRE(r2);
        auto b1 = json::parse(r1->body), b2 = json::parse(r2->body);
        CHECK(b1["class"] == b2["class"]);
        CHECK(b1["confidence"].get<double>() == b2["confidence"].get<double>());
    }
}

TEST_CASE("service request validation") {
    RunningService rs(service_model());
    auto client = rs.client();

    SECTION("wrong content type") {
        auto res = client.Post("/classify", "full_request=GET+/", "text/plain");
        REQUIRE(res);
        CHECK(res->status == 415);
    }
    SECTION("malformed JSON") {
        auto res = client.Post("/classify", "{not json", "application/json");
        REQUIRE(res);
        CHECK(res->status == 400);
        CHECK(json::parse(res->body).contains("error"));
    }
    SECTION("missing field") {
        auto res = client.Post("/classify", json{{"payload", "x"}}.dump(), "application/json");
        REQUIRE(res);
        CHECK(res->status == 422);
    }
}

TEST_CASE("service batch endpoint") {
    RunningService rs(service_model());
    auto client = rs.client();

    SECTION("array in, array out, order preserved") {
        json batch = json::array();
        batch.push_back({{"full_request", "GET /index.html"}});
        batch.push_back({{"full_request", "1 UNION SELECT a FROM b--"}});
        auto res = client.Post("/classify_batch", batch.dump(), "application/json");
        REQUIRE(res);
        REQUIRE(res->status == 200);
        auto body = json::parse(res->body);
        REQUIRE(body.is_array());
        REQUIRE(body.size() == 2);
        CHECK(body[0]["blocked"] == false);
        CHECK(body[1]["blocked"] == true);
    }
    SECTION("batch cap") {
        json batch = json::array();
        for (size_t i = 0; i < ClassifierService::kMaxBatchItems + 1; ++i)
            batch.push_back({{"full_request", "GET /"}});
        auto res = client.Post("/classify_batch", batch.dump(), "application/json");
        REQUIRE(res);
        CHECK(res->status == 400);
    }
    SECTION("non-array body") {
        auto res = client.Post("/classify_batch", json{{"full_request", "x"}}.dump(),
                               "application/json");
        REQUIRE(res);
        CHECK(res->status == 422);
    }
}

TEST_CASE("service health and metrics endpoints") {
    RunningService rs(service_model());
    auto client = rs.client();

    auto health = client.Get("/health");
    REQUIRE(health);
    REQUIRE(health->status == 200);
    auto hb = json::parse(health->body);
    CHECK(hb["status"] == "ok");
    CHECK(hb["format_version"] == kModelFormatVersion);
    CHECK(hb["classes"].get<size_t>() == 3);

    // generate some traffic, then read counters
    for (int i = 0; i < 5; ++i)
        client.Post("/classify", json{{"full_request", "GET /x"}}.dump(), "application/json");
    auto metrics = client.Get("/metrics");
    REQUIRE(metrics);
    REQUIRE(metrics->status == 200);
    auto mb = json::parse(metrics->body);
    CHECK(mb["requests_total"].get<uint64_t>() >= 5);
    CHECK(mb["p50_us"].get<double>() >= 0.0);
    CHECK(mb["p99_us"].get<double>() >= mb["p50_us"].get<double>());
}

TEST_CASE("concurrent classification traffic is handled safely") {
    RunningService rs(service_model());
    std::vector<std::thread> workers;
    std::atomic<int> failures{0};
    for (int t = 0; t < 4; ++t)
        workers.emplace_back([&rs, &failures] {
            auto client = rs.client();
            for (int i = 0; i < 25; ++i) {
                auto res = client.Post(
                    "/classify",
                    json{{"full_request", i % 2 ? "GET /a?id=1 UNION SELECT 1" : "GET /home"}}.dump(),
                    "application/json");
                if (!res || res->status != 200) ++failures;
            }
        });
    for (auto& w : workers) w.join();
    CHECK(failures == 0);

    auto metrics = rs.client().Get("/metrics");
    REQUIRE(metrics);
    CHECK(json::parse(metrics->body)["requests_total"].get<uint64_t>() >= 100);
}
