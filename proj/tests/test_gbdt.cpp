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

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "wamm/gbdt.hpp"
#include "wamm/model_file.hpp"
#include "wamm/seedgen.hpp"

using namespace wamm;
using wamm_test::error_code_of;

namespace {

FeatureVector fv(std::initializer_list<double> dense) {
    FeatureVector x;
    x.dense.assign(dense.begin(), dense.end());
    return x;
}

struct Synthetic {
    std::vector<FeatureVector> x;
    std::vector<AttackClass> y;
};

// Three classes separable on feature 0; feature 1 is uninformative noise.
Synthetic separable_three_class(size_t n, uint64_t seed) {
    Synthetic data;
    std::mt19937_64 rng(seed);
    auto unit = [&] { return static_cast<double>(rng() % 1000) / 1000.0; };
    const AttackClass classes[3] = {AttackClass::Normal, AttackClass::Sqli, AttackClass::Xss};
    for (size_t i = 0; i < n; ++i) {
        size_t c = i % 3;
        data.x.push_back(fv({static_cast<double>(c) * 5.0 + unit(), unit()}));
        data.y.push_back(classes[c]);
    }
    return data;
}

double accuracy(const GbdtModel& model, const Synthetic& data) {
    size_t hits = 0;
    for (size_t i = 0; i < data.x.size(); ++i)
        hits += model.predict(data.x[i]) == data.y[i];
    return static_cast<double>(hits) / static_cast<double>(data.x.size());
}

} // namespace

TEST_CASE("stump leaf values match the hand-computed -G/(H+lambda)") {
    // Two points, one feature, softmax gradients at the uniform prior:
    // g = p - 1{y=c} with p = 0.5, h = p(1-p) = 0.25.
    std::vector<FeatureVector> x = {fv({-1.0}), fv({1.0})};
    std::vector<double> g = {-0.5, 0.5};
    std::vector<double> h = {0.25, 0.25};

    TrainConfig cfg;
    cfg.max_depth = 1;
    cfg.min_samples_leaf = 1;
    cfg.min_gain = 1e-9;

    auto matrix = gbdt_detail::build_columns(x, 1, 1);
    auto result = gbdt_detail::build_tree(matrix, {0, 1}, g, h, cfg);

    REQUIRE(result.tree.nodes.size() == 3);
    const auto& root = result.tree.nodes[0];
    REQUIRE_FALSE(root.is_leaf());
    CHECK(root.feature == 0);
    CHECK(root.threshold > -1.0);
    CHECK(root.threshold <= 1.0);

    double expect = 0.5 / 1.25; // |g| / (h + 1)
    CHECK(result.tree.nodes[root.left].leaf_value == Catch::Approx(expect).epsilon(1e-12));
    CHECK(result.tree.nodes[root.right].leaf_value == Catch::Approx(-expect).epsilon(1e-12));

    CHECK(result.node_of_row[0] == root.left);
    CHECK(result.node_of_row[1] == root.right);
}

TEST_CASE("splits respect the zero-block routing for implicit entries") {
    // Feature 0 is absent (0.0) for the first class and positive for the rest.
    std::vector<FeatureVector> x = {fv({0.0}), fv({0.0}), fv({2.0}), fv({2.0})};
    std::vector<double> g = {-1.0, -1.0, 1.0, 1.0};
    std::vector<double> h = {0.25, 0.25, 0.25, 0.25};
    TrainConfig cfg;
    cfg.max_depth = 1;
    cfg.min_samples_leaf = 1;
    cfg.min_gain = 1e-9;

    auto matrix = gbdt_detail::build_columns(x, 1, 1);
    REQUIRE(matrix.columns[0].size() == 2); // zeros are implicit
    auto result = gbdt_detail::build_tree(matrix, {0, 1, 2, 3}, g, h, cfg);

    const auto& root = result.tree.nodes[0];
    REQUIRE_FALSE(root.is_leaf());
    CHECK(root.threshold > 0.0);
    CHECK(root.threshold <= 2.0);
    CHECK(result.node_of_row[0] == root.left);
    CHECK(result.node_of_row[2] == root.right);
}

TEST_CASE("softmax gradient matches finite differences") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        size_t k = 2 + rng() % 6;
        std::vector<double> z(k);
        for (double& v : z) v = (static_cast<double>(rng() % 2000) - 1000.0) / 250.0;
        size_t truth = rng() % k;

        std::vector<double> p = z;
        softmax_inplace(p);

        const double step = 1e-6;
        for (size_t c = 0; c < k; ++c) {
            auto plus = z, minus = z;
            plus[c] += step;
            minus[c] -= step;
            double numeric =
                (softmax_logloss(plus, truth) - softmax_logloss(minus, truth)) / (2 * step);
            double analytic = p[c] - (c == truth ? 1.0 : 0.0);
            CHECK(numeric == Catch::Approx(analytic).margin(1e-5));
        }
    }
}

TEST_CASE("separable three-class data trains to high accuracy") {
    auto data = separable_three_class(500, 12);
    TrainConfig cfg;
    cfg.max_depth = 3;
    cfg.max_rounds = 50;
    cfg.seed = 5;
    auto [model, log] = train_gbdt(data.x, data.y, ClassWeights{}, cfg);

    CHECK(accuracy(model, data) >= 0.99);
    CHECK(log.completed_rounds <= 50);
    for (size_t r = 1; r < log.train_logloss.size(); ++r)
        CHECK(log.train_logloss[r] <= log.train_logloss[r - 1] + 1e-9);
    CHECK_FALSE(log.valid_logloss.empty());
}

TEST_CASE("training is deterministic: identical serialized bytes") {
    auto data = separable_three_class(240, 77);
    TrainConfig cfg;
    cfg.max_depth = 3;
    cfg.max_rounds = 12;
    cfg.seed = 9;
    auto [m1, log1] = train_gbdt(data.x, data.y, ClassWeights{}, cfg);
    auto [m2, log2] = train_gbdt(data.x, data.y, ClassWeights{}, cfg);
    CHECK(serialize_model(m1) == serialize_model(m2));
    CHECK(log1.train_logloss == log2.train_logloss);
}

TEST_CASE("balanced class weights lift minority recall on skewed data") {
    // Majority class A at f0 in {0,1}; minority B overlaps at f0=1 and owns f0=2.
    std::vector<FeatureVector> x;
    std::vector<AttackClass> y;
    for (int i = 0; i < 240; ++i) { x.push_back(fv({0.0})); y.push_back(AttackClass::Normal); }
    for (int i = 0; i < 240; ++i) { x.push_back(fv({1.0})); y.push_back(AttackClass::Normal); }
    for (int i = 0; i < 11; ++i) { x.push_back(fv({1.0})); y.push_back(AttackClass::Sqli); }
    for (int i = 0; i < 9; ++i) { x.push_back(fv({2.0})); y.push_back(AttackClass::Sqli); }

    double n = 500, k = 2;
    ClassWeights balanced;
    balanced.weights[AttackClass::Normal] = n / (k * 480.0);
    balanced.weights[AttackClass::Sqli] = n / (k * 20.0);

    TrainConfig cfg;
    cfg.max_depth = 2;
    cfg.max_rounds = 60;
    cfg.learning_rate = 0.5;
    cfg.seed = 3;

    auto [plain, lp] = train_gbdt(x, y, ClassWeights{}, cfg);
    auto [weighted, lw] = train_gbdt(x, y, balanced, cfg);

    auto recall_minority = [&](const GbdtModel& m) {
        size_t tp = 0, total = 0;
        for (size_t i = 0; i < x.size(); ++i) {
            if (y[i] != AttackClass::Sqli) continue;
            ++total;
            tp += m.predict(x[i]) == AttackClass::Sqli;
        }
        return static_cast<double>(tp) / static_cast<double>(total);
    };

    double r_plain = recall_minority(plain);
    double r_weighted = recall_minority(weighted);
    CHECK(r_weighted >= r_plain);
    CHECK(r_plain <= 0.5);      // collapses to the majority at the overlap
    CHECK(r_weighted >= 0.95);  // weights rescue the overlap region
}

TEST_CASE("zero-round model predicts the class priors") {
    GbdtModel m;
    m.classes = {AttackClass::Normal, AttackClass::Sqli, AttackClass::Xss};
    m.base_score = {std::log(1.0 / 3), std::log(1.0 / 3), std::log(1.0 / 3)};
    m.feature_schema = {"f0"};
    auto p = m.predict_proba(fv({0.7}));
    for (double v : p) CHECK(v == Catch::Approx(1.0 / 3).epsilon(1e-12));
    CHECK(m.predict(fv({0.7})) == AttackClass::Normal); // tie -> first class
}

TEST_CASE("predict_proba is a distribution and argmax follows class order") {
    GbdtModel m;
    m.classes = {AttackClass::Normal, AttackClass::Sqli, AttackClass::Xss};
    m.base_score = {std::log(0.1), std::log(0.7), std::log(0.2)};
    m.feature_schema = {"f0"};
    auto p = m.predict_proba(fv({0.0}));
    double sum = 0;
    for (double v : p) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        sum += v;
    }
    CHECK(sum == Catch::Approx(1.0).margin(1e-9));
    CHECK(m.predict(fv({0.0})) == AttackClass::Sqli);
}

TEST_CASE("features never read by any tree cannot change the output") {
    GbdtModel m;
    m.classes = {AttackClass::Normal, AttackClass::Sqli};
    m.base_score = {0.0, 0.0};
    m.feature_schema = {"f0", "f1"};
    RegressionTree stump;
    stump.nodes.push_back({0, 0.5, 1, 2, 0.0});
    stump.nodes.push_back({-1, 0.0, -1, -1, -1.0});
    stump.nodes.push_back({-1, 0.0, -1, -1, 1.0});
    m.trees = {stump, stump};

    auto p1 = m.predict_proba(fv({0.2, -55.0}));
    auto p2 = m.predict_proba(fv({0.2, 1e9}));
    CHECK(p1 == p2);
}

TEST_CASE("input validation") {
    auto data = separable_three_class(30, 1);
    TrainConfig cfg;

    SECTION("length mismatch") {
        auto y = data.y;
        y.pop_back();
        CHECK(error_code_of([&] { train_gbdt(data.x, y, ClassWeights{}, cfg); }) == "ShapeMismatch");
    }
    SECTION("single class") {
        std::vector<AttackClass> y(data.x.size(), AttackClass::Normal);
        CHECK(error_code_of([&] { train_gbdt(data.x, y, ClassWeights{}, cfg); }) ==
              "SingleClassInput");
    }
    SECTION("inconsistent widths") {
        auto x = data.x;
        x[3] = fv({1.0, 2.0, 3.0});
        CHECK(error_code_of([&] { train_gbdt(x, data.y, ClassWeights{}, cfg); }) == "ShapeMismatch");
    }
    SECTION("bad config") {
        TrainConfig bad;
        bad.validation_fraction = 0.9;
        CHECK(error_code_of([&] { train_gbdt(data.x, data.y, ClassWeights{}, bad); }) ==
              "InvalidParams");
    }
    SECTION("schema mismatch at predict time") {
        auto [model, log] = train_gbdt(data.x, data.y, ClassWeights{}, cfg);
        CHECK(error_code_of([&] { model.predict_proba(fv({1.0, 2.0, 3.0})); }) == "SchemaMismatch");
    }
}

TEST_CASE("save/load round trip is bit-identical") {
    // Real pipeline so the vectorizer section is exercised.
    SeedGenerator gen(5150);
    Dataset ds;
    uint64_t id = 0;
    for (int i = 0; i < 60; ++i)
        ds.records.push_back({gen.benign_request(), AttackClass::Normal, id++, {}});
    for (int i = 0; i < 60; ++i)
        ds.records.push_back({gen.attack_request(AttackClass::Sqli), AttackClass::Sqli, id++, {}});

    std::vector<std::string> texts;
    for (const auto& r : ds.records) texts.push_back(r.full_request);
    FeaturePipeline pipeline;
    pipeline.vectorizer.fit(texts, 300, 1, 2);

    std::vector<FeatureVector> x;
    std::vector<AttackClass> y;
    for (const auto& r : ds.records) {
        x.push_back(pipeline.featurize(parse_request(r.full_request)));
        y.push_back(r.label);
    }
    TrainConfig cfg;
    cfg.max_rounds = 8;
    cfg.max_depth = 3;
    auto [model, log] = train_gbdt(x, y, class_weights(ds), cfg, std::move(pipeline));

    wamm_test::TempDir tmp("model");
    auto path = tmp.file("m.wamm");
    save_model(model, path);
    auto loaded = load_model(path);

    CHECK(serialize_model(loaded) == serialize_model(model));

    SeedGenerator probe(999);
    for (int i = 0; i < 500; ++i) {
        std::string req = (i % 2) ? probe.benign_request() : probe.attack_request(AttackClass::Sqli);
        auto a = model.classify(req);
        auto b = loaded.classify(req);
        CHECK(a.label == b.label);
        CHECK(a.proba == b.proba); // bit-identical, not approximately equal
    }
}

TEST_CASE("corrupted and future-version files are rejected") {
    auto data = separable_three_class(60, 4);
    TrainConfig cfg;
    cfg.max_rounds = 3;
    auto [model, log] = train_gbdt(data.x, data.y, ClassWeights{}, cfg);
    std::string bytes = serialize_model(model);

    SECTION("truncation") {
        std::string cut = bytes.substr(0, bytes.size() / 2);
        CHECK(error_code_of([&] { deserialize_model(cut); }) == "CorruptFile");
    }
    SECTION("bit flip fails the checksum") {
        std::string flipped = bytes;
        flipped[flipped.size() / 2] ^= 0x40;
        CHECK(error_code_of([&] { deserialize_model(flipped); }) == "CorruptFile");
    }
    SECTION("future major version") {
        std::string future = bytes;
        future[4] = 2; // little-endian major version field
        CHECK(error_code_of([&] { deserialize_model(future); }) == "VersionMismatch");
    }
    SECTION("wrong magic") {
        std::string junk = "JUNK" + bytes.substr(4);
        CHECK(error_code_of([&] { deserialize_model(junk); }) == "CorruptFile");
    }
}
