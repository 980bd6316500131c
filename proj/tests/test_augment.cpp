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

#include <map>
#include <random>

#include "helpers.hpp"
#include "wamm/augment.hpp"
#include "wamm/normalize.hpp"

using namespace wamm;
using wamm_test::error_code_of;

TEST_CASE("augment op definitions") {
    CHECK(apply_augment(AugmentOp::UrlEncodeAll, "a b") == "a%20b");
    CHECK(apply_augment(AugmentOp::DoubleUrlEncode, "a b") == "a%2520b");
    CHECK(apply_augment(AugmentOp::SqlInlineComment, "UNION SELECT") == "UNION/**/SELECT");
    CHECK(apply_augment(AugmentOp::HtmlEntityEncode, "<a href=\"x\">'&'</a>") ==
          "&lt;a href=&quot;x&quot;&gt;&apos;&amp;&apos;&lt;/a&gt;");

    SECTION("whitespace substitution cycles through the replacement set") {
        CHECK(apply_augment(AugmentOp::WhitespaceSubstitute, "a b c d e") ==
              "a/**/b%09c%0ad/**/e");
    }
    SECTION("inline comments only join alphabetic tokens") {
        CHECK(apply_augment(AugmentOp::SqlInlineComment, "1 = 1") == "1 = 1");
        CHECK(apply_augment(AugmentOp::SqlInlineComment, "OR  TRUE") == "OR/**/TRUE");
    }
    SECTION("case toggle is deterministic and length-preserving") {
        std::string in = "Select Union From Table 123";
        auto a = apply_augment(AugmentOp::CaseToggle, in, 5);
        auto b = apply_augment(AugmentOp::CaseToggle, in, 5);
        auto c = apply_augment(AugmentOp::CaseToggle, in, 6);
        CHECK(a == b);
        CHECK(a.size() == in.size());
        CHECK(a != c); // different seed, different coin flips
        for (size_t i = 0; i < in.size(); ++i) {
            char lo = static_cast<char>(std::tolower(static_cast<unsigned char>(in[i])));
            char got = static_cast<char>(std::tolower(static_cast<unsigned char>(a[i])));
            CHECK(lo == got);
        }
    }
}

TEST_CASE("percent_decode inverts url_encode_all") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 2000; ++trial) {
        size_t len = rng() % 150;
        std::string s;
        for (size_t j = 0; j < len; ++j) s.push_back(static_cast<char>(rng() % 256));
        CHECK(percent_decode(url_encode_all(s)) == s);
        CHECK(percent_decode(percent_decode(apply_augment(AugmentOp::DoubleUrlEncode, s))) == s);
    }
}

TEST_CASE("expand_dataset appends labeled variants for attacks only") {
    Dataset ds = wamm_test::make_dataset({
        {"GET /home", AttackClass::Normal},
        {"1 UNION SELECT a", AttackClass::Sqli},
        {"<script>alert(1)</script>", AttackClass::Xss},
    });
    auto op_list = all_augment_ops();
    std::vector<AugmentOp> ops(op_list.begin(), op_list.end());

    auto out = expand_dataset(ds, ops, 2, 11);
    CHECK(out.size() == 3 + 2 * 2);

    std::map<AttackClass, size_t> dist = class_distribution(out);
    CHECK(dist[AttackClass::Normal] == 1);
    CHECK(dist[AttackClass::Sqli] == 3);
    CHECK(dist[AttackClass::Xss] == 3);

    // originals survive byte-for-byte (label preservation as sub-multiset)
    for (size_t i = 0; i < ds.size(); ++i) {
        CHECK(out.records[i].full_request == ds.records[i].full_request);
        CHECK(out.records[i].label == ds.records[i].label);
    }
    // variants carry provenance tags and unique ids
    std::set<uint64_t> ids;
    for (const auto& r : out.records) CHECK(ids.insert(r.record_id).second);
    for (size_t i = ds.size(); i < out.size(); ++i)
        CHECK(out.records[i].aug.rfind("augmented:", 0) == 0);
}

TEST_CASE("expand_dataset determinism and edge cases") {
    Dataset ds = wamm_test::make_dataset({{"payload UNION SELECT x", AttackClass::Sqli}});
    auto op_list = all_augment_ops();
    std::vector<AugmentOp> ops(op_list.begin(), op_list.end());

    auto a = expand_dataset(ds, ops, 3, 99);
    auto b = expand_dataset(ds, ops, 3, 99);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a.records[i].full_request == b.records[i].full_request);
        CHECK(a.records[i].aug == b.records[i].aug);
    }

    SECTION("zero variants is the identity on records") {
        auto zero = expand_dataset(ds, ops, 0, 1);
        REQUIRE(zero.size() == ds.size());
        CHECK(zero.records[0].full_request == ds.records[0].full_request);
    }
    SECTION("more variants than ops is rejected") {
        CHECK(error_code_of([&] { expand_dataset(ds, ops, ops.size() + 1, 1); }) == "InvalidParams");
    }
    SECTION("ops are drawn without replacement per record") {
        auto full = expand_dataset(ds, ops, ops.size(), 3);
        std::set<std::string> tags;
        for (size_t i = ds.size(); i < full.size(); ++i) tags.insert(full.records[i].aug);
        CHECK(tags.size() == ops.size());
    }
}
