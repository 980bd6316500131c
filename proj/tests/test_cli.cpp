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

#include <cstdlib>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "helpers.hpp"
#include "wamm/corpus.hpp"

using nlohmann::json;
using wamm_test::TempDir;

namespace {

int run_cli(const std::string& args) {
    std::string cmd = std::string(WAMM_CLI_PATH) + " " + args + " >/dev/null 2>/dev/null";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("cli pipeline: gen-corpus, split, train, eval, blockrate") {
    TempDir tmp("cli");
    auto corpus = tmp.file("corpus.jsonl");
    auto tr = tmp.file("train.jsonl");
    auto te = tmp.file("test.jsonl");
    auto model = tmp.file("model.wamm");
    auto report = tmp.file("report.json");
    auto br = tmp.file("blockrate.json");
    std::string bank = wamm_test::data_file("patterns.txt");

    REQUIRE(run_cli("gen-corpus --out " + corpus + " --seed 5 --normal 260") == 0);
    auto loaded = wamm::load_dataset(corpus, wamm::DatasetFormat::Jsonl);
    CHECK(loaded.dataset.size() > 1000);

    REQUIRE(run_cli("split --data " + corpus + " --train " + tr + " --test " + te +
                    " --fraction 0.8 --seed 7") == 0);
    REQUIRE(std::filesystem::exists(tr));
    REQUIRE(std::filesystem::exists(te));

    REQUIRE(run_cli("train --data " + tr + " --out " + model +
                    " --seed 7 --max-rounds 6 --max-features 400") == 0);
    REQUIRE(std::filesystem::exists(model));

    REQUIRE(run_cli("eval --model " + model + " --data " + te + " --json " + report) == 0);
    auto rj = json::parse(wamm_test::read_file(report));
    CHECK(rj.contains("accuracy"));
    CHECK(rj.contains("macro_f1"));
    CHECK(rj.contains("inference_us_mean"));
    CHECK(rj["accuracy"].get<double>() > 0.5);

    REQUIRE(run_cli("blockrate --model " + model + " --bank " + bank + " --data " + te +
                    " --json " + br) == 0);
    auto bj = json::parse(wamm_test::read_file(br));
    CHECK(bj["rows"].is_array());
    CHECK(bj["rows"].size() == 8);

    SECTION("same seed twice produces byte-identical models") {
        auto model2 = tmp.file("model2.wamm");
        REQUIRE(run_cli("train --data " + tr + " --out " + model2 +
                        " --seed 7 --max-rounds 6 --max-features 400") == 0);
        CHECK(wamm_test::read_file(model) == wamm_test::read_file(model2));
    }
    SECTION("eval --no-timing omits wall-clock fields") {
        auto report2 = tmp.file("report2.json");
        REQUIRE(run_cli("eval --model " + model + " --data " + te + " --json " + report2 +
                        " --no-timing") == 0);
        auto rj2 = json::parse(wamm_test::read_file(report2));
        CHECK_FALSE(rj2.contains("inference_us_mean"));
    }
}

TEST_CASE("cli curation subcommands") {
    TempDir tmp("cli_cur");
    auto data = tmp.file("data.jsonl");
    wamm_test::write_file(
        data,
        "{\"full_request\":\"GET /home?session=abcdefgh12345678\",\"class\":\"Normal\"}\n"
        "{\"full_request\":\"GET /home?session=abcdefgh12345678\",\"class\":\"Normal\"}\n"
        "{\"full_request\":\"1 UNION SELECT a FROM b--\",\"class\":\"Normal\"}\n"
        "{\"full_request\":\"1 UNION SELECT a FROM b--\",\"class\":\"SQLi\"}\n");
    std::string bank = wamm_test::data_file("patterns.txt");

    auto deduped = tmp.file("dedup.jsonl");
    auto dd_report = tmp.file("dedup.json");
    REQUIRE(run_cli("dedupe --data " + data + " --out " + deduped + " --report " + dd_report +
                    " --seed 3") == 0);
    auto dj = json::parse(wamm_test::read_file(dd_report));
    CHECK(dj["removed_total"].get<size_t>() == 1);

    auto fm_report = tmp.file("mislabels.json");
    REQUIRE(run_cli("flag-mislabels --data " + data + " --bank " + bank + " --report " + fm_report) ==
            0);
    auto fj = json::parse(wamm_test::read_file(fm_report));
    CHECK(fj["flagged_total"].get<size_t>() == 1);

    auto corrections = tmp.file("fix.csv");
    wamm_test::write_file(corrections, "record_id,new_class\n2,SQLi\n");
    auto corrected = tmp.file("corrected.jsonl");
    REQUIRE(run_cli("apply-corrections --data " + data + " --corrections " + corrections +
                    " --out " + corrected) == 0);
    auto corrected_ds = wamm::load_dataset(corrected, wamm::DatasetFormat::Jsonl);
    CHECK(corrected_ds.dataset.records[2].label == wamm::AttackClass::Sqli);

    auto augmented = tmp.file("aug.jsonl");
    REQUIRE(run_cli("augment --data " + data + " --out " + augmented +
                    " --ops url_encode_all,double_url_encode --variants 1 --seed 9") == 0);
    auto aug_ds = wamm::load_dataset(augmented, wamm::DatasetFormat::Jsonl);
    CHECK(aug_ds.dataset.size() == 5); // one variant for the single attack record
}

TEST_CASE("cli exit codes") {
    TempDir tmp("cli_err");
    CHECK(run_cli("eval --model /nonexistent.wamm --data /nonexistent.jsonl") == 2);
    CHECK(run_cli("nonsense-subcommand") == 1);
    CHECK(run_cli("train --data /nonexistent.jsonl --out " + tmp.file("m.wamm")) == 2);

    auto data = tmp.file("tiny.jsonl");
    wamm_test::write_file(data,
                          "{\"full_request\":\"a\",\"class\":\"Normal\"}\n"
                          "{\"full_request\":\"b\",\"class\":\"Normal\"}\n");
    CHECK(run_cli("split --data " + data + " --train " + tmp.file("t.jsonl") + " --test " +
                  tmp.file("e.jsonl") + " --fraction 1.5") == 1);
    CHECK(run_cli("--help") == 0);
}
