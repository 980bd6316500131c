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

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "wamm/augment.hpp"
#include "wamm/corpus.hpp"
#include "wamm/curation.hpp"
#include "wamm/eval.hpp"
#include "wamm/features.hpp"
#include "wamm/fingerprints.hpp"
#include "wamm/gbdt.hpp"
#include "wamm/model_file.hpp"
#include "wamm/seedgen.hpp"
#include "wamm/service.hpp"

namespace {

using nlohmann::json;

wamm::Dataset load_any(const std::string& path) {
    auto result = wamm::load_dataset(path, wamm::dataset_format_from_path(path));
    if (!result.report.rejections.empty()) {
        json notice{{"notice", "rows rejected during load"},
                    {"path", path},
                    {"rejected", result.report.rejections.size()},
                    {"accepted", result.report.accepted}};
        std::cerr << notice.dump() << "\n";
    }
    return std::move(result.dataset);
}

void write_json_file(const json& j, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw wamm::IoError("FileNotFound", "cannot write " + path);
    out << j.dump(2) << "\n";
}

std::vector<wamm::FeatureVector> featurize_all(const wamm::FeaturePipeline& pipeline,
                                               const wamm::Dataset& ds) {
    std::vector<wamm::FeatureVector> x;
    x.reserve(ds.size());
    for (const auto& rec : ds.records)
        x.push_back(pipeline.featurize(wamm::parse_request(rec.full_request)));
    return x;
}

struct TrainFlags {
    std::string data;
    std::string out;
    size_t max_features = 2000;
    wamm::TrainConfig cfg;
};

int run_train(const TrainFlags& flags) {
    wamm::Dataset ds = load_any(flags.data);
    if (ds.empty()) throw wamm::ValidationError("EmptyDataset", flags.data);

    std::vector<std::string> texts;
    texts.reserve(ds.size());
    for (const auto& rec : ds.records) texts.push_back(rec.full_request);

    wamm::FeaturePipeline pipeline;
    pipeline.vectorizer.fit(texts, flags.max_features, 1, 2);

    auto x = featurize_all(pipeline, ds);
    std::vector<wamm::AttackClass> y;
    y.reserve(ds.size());
    for (const auto& rec : ds.records) y.push_back(rec.label);

    auto t0 = std::chrono::steady_clock::now();
    auto [model, log] = wamm::train_gbdt(x, y, wamm::class_weights(ds), flags.cfg, std::move(pipeline));
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    wamm::save_model(model, flags.out);

    json summary{{"model", flags.out},
                 {"records", ds.size()},
                 {"classes", model.class_count()},
                 {"vocabulary", model.sparse_width},
                 {"rounds", log.completed_rounds},
                 {"best_round", log.best_round},
                 {"early_stopped", log.early_stopped},
                 {"train_logloss", log.train_logloss.empty() ? 0.0 : log.train_logloss.back()},
                 {"train_seconds", secs}};
    if (!log.valid_logloss.empty()) summary["valid_logloss"] = log.valid_logloss.back();
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int run_eval(const std::string& model_path, const std::string& data_path,
             const std::string& json_path, bool with_timing) {
    auto model = wamm::load_model(model_path);
    auto ds = load_any(data_path);
    if (ds.empty()) throw wamm::ValidationError("EmptyDataset", data_path);

    std::vector<wamm::AttackClass> classes = model.classes;
    for (const auto& rec : ds.records)
        if (std::find(classes.begin(), classes.end(), rec.label) == classes.end())
            classes.push_back(rec.label);

    std::vector<wamm::AttackClass> truth, predicted;
    truth.reserve(ds.size());
    predicted.reserve(ds.size());
    auto t0 = std::chrono::steady_clock::now();
    for (const auto& rec : ds.records) {
        truth.push_back(rec.label);
        predicted.push_back(model.classify(rec.full_request).label);
    }
    double total_us =
        std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count();

    auto report = wamm::metrics(wamm::confusion(truth, predicted, classes));
    std::cout << wamm::render_metrics(report);

    json j = report.to_json();
    if (with_timing) {
        j["inference_us_mean"] = total_us / static_cast<double>(ds.size());
        std::cout << "mean end-to-end inference: " << total_us / static_cast<double>(ds.size())
                  << " us/request\n";
    }
    if (!json_path.empty()) write_json_file(j, json_path);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"web attack payload classification toolkit"};
    app.require_subcommand(1);

    // gen-corpus
    auto* gen = app.add_subcommand("gen-corpus", "emit the bundled seed corpus as JSONL");
    std::string gen_out = "seed_corpus.jsonl";
    wamm::SeedCorpusConfig gen_cfg;
    gen->add_option("--out", gen_out, "output JSONL path");
    gen->add_option("--seed", gen_cfg.seed, "generator seed");
    gen->add_option("--normal", gen_cfg.normal_count, "benign record count");
    gen->add_option("--variants", gen_cfg.variants_per_attack, "augmented variants per attack record");

    // dedupe
    auto* dd = app.add_subcommand("dedupe", "remove near-duplicate benign records (MinHash/LSH)");
    std::string dd_data, dd_out, dd_report;
    wamm::DedupParams dd_params;
    uint64_t dd_seed = 42;
    dd->add_option("--data", dd_data, "input dataset")->required();
    dd->add_option("--out", dd_out, "deduplicated output JSONL")->required();
    dd->add_option("--report", dd_report, "JSON report path");
    dd->add_option("--shingle", dd_params.shingle_k, "shingle size");
    dd->add_option("--perms", dd_params.permutations, "MinHash permutations");
    dd->add_option("--bands", dd_params.bands, "LSH bands");
    dd->add_option("--rows", dd_params.rows, "rows per band");
    dd->add_option("--threshold", dd_params.jaccard_threshold, "verified Jaccard removal threshold");
    dd->add_option("--seed", dd_seed, "hash seed");

    // flag-mislabels
    auto* fm = app.add_subcommand("flag-mislabels", "fingerprint benign records that look malicious");
    std::string fm_data, fm_bank = "data/patterns.txt", fm_report;
    fm->add_option("--data", fm_data, "input dataset")->required();
    fm->add_option("--bank", fm_bank, "pattern bank file");
    fm->add_option("--report", fm_report, "JSON report path");

    // apply-corrections
    auto* ac = app.add_subcommand("apply-corrections", "relabel records from a corrections CSV");
    std::string ac_data, ac_corrections, ac_out;
    ac->add_option("--data", ac_data, "input dataset")->required();
    ac->add_option("--corrections", ac_corrections, "CSV of record_id,new_class")->required();
    ac->add_option("--out", ac_out, "output JSONL")->required();

    // augment
    auto* ag = app.add_subcommand("augment", "append obfuscated variants of attack records");
    std::string ag_data, ag_out, ag_ops;
    size_t ag_variants = 1;
    uint64_t ag_seed = 42;
    ag->add_option("--data", ag_data, "input dataset")->required();
    ag->add_option("--out", ag_out, "output JSONL")->required();
    ag->add_option("--ops", ag_ops, "comma-separated op names (default: all)");
    ag->add_option("--variants", ag_variants, "variants per attack record");
    ag->add_option("--seed", ag_seed, "op selection seed");

    // split
    auto* sp = app.add_subcommand("split", "stratified train/test partition");
    std::string sp_data, sp_train, sp_test;
    double sp_fraction = 0.8;
    uint64_t sp_seed = 42;
    sp->add_option("--data", sp_data, "input dataset")->required();
    sp->add_option("--train", sp_train, "train output JSONL")->required();
    sp->add_option("--test", sp_test, "test output JSONL")->required();
    sp->add_option("--fraction", sp_fraction, "train fraction in (0,1)");
    sp->add_option("--seed", sp_seed, "shuffle seed");

    // train
    auto* tr = app.add_subcommand("train", "fit the vectorizer and boosted trees");
    TrainFlags tr_flags;
    tr->add_option("--data", tr_flags.data, "training dataset")->required();
    tr->add_option("--out", tr_flags.out, "model output path (.wamm)")->required();
    tr->add_option("--max-features", tr_flags.max_features, "TF-IDF vocabulary cap");
    tr->add_option("--max-depth", tr_flags.cfg.max_depth, "tree depth limit");
    tr->add_option("--learning-rate", tr_flags.cfg.learning_rate, "shrinkage");
    tr->add_option("--max-rounds", tr_flags.cfg.max_rounds, "boosting rounds cap");
    tr->add_option("--patience", tr_flags.cfg.early_stopping_patience, "early stopping patience");
    tr->add_option("--min-samples-leaf", tr_flags.cfg.min_samples_leaf, "minimum rows per leaf");
    tr->add_option("--min-gain", tr_flags.cfg.min_gain, "minimum split gain");
    tr->add_option("--validation-fraction", tr_flags.cfg.validation_fraction,
                   "fraction carved out for early stopping");
    tr->add_option("--seed", tr_flags.cfg.seed, "validation carve seed");

    // eval
    auto* ev = app.add_subcommand("eval", "classification metrics on a labeled set");
    std::string ev_model, ev_data, ev_json;
    bool ev_no_timing = false;
    ev->add_option("--model", ev_model, "model path")->required();
    ev->add_option("--data", ev_data, "labeled dataset")->required();
    ev->add_option("--json", ev_json, "JSON report path");
    ev->add_flag("--no-timing", ev_no_timing, "omit wall-clock fields (reproducible reports)");

    // blockrate
    auto* br = app.add_subcommand("blockrate", "rule baseline vs model per-class block rates");
    std::string br_model, br_bank = "data/patterns.txt", br_data, br_json;
    bool br_raw_only = false;
    br->add_option("--model", br_model, "model path")->required();
    br->add_option("--bank", br_bank, "pattern bank file");
    br->add_option("--data", br_data, "labeled dataset")->required();
    br->add_option("--json", br_json, "JSON report path");
    br->add_flag("--raw-only", br_raw_only, "match rules against raw text only (no decoded variants)");

    // bench
    auto* be = app.add_subcommand("bench", "end-to-end classify latency");
    std::string be_model, be_data, be_json;
    size_t be_warmup = 200, be_iters = 5000;
    be->add_option("--model", be_model, "model path")->required();
    be->add_option("--data", be_data, "requests to measure (labels ignored)")->required();
    be->add_option("--warmup", be_warmup, "warmup iterations");
    be->add_option("--iters", be_iters, "measured iterations (>= 1000)");
    be->add_option("--json", be_json, "JSON report path");

    // serve
    auto* sv = app.add_subcommand("serve", "HTTP classification service");
    std::string sv_model, sv_bind = "127.0.0.1:8080";
    int sv_workers = 4;
    sv->add_option("--model", sv_model, "model path (env WAMM_MODEL overrides)");
    sv->add_option("--bind", sv_bind, "host:port (env WAMM_BIND overrides)");
    sv->add_option("--workers", sv_workers, "handler thread count");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        std::cerr << json{{"error", "UsageError"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    }

    try {
        if (gen->parsed()) {
            wamm::save_dataset_jsonl(wamm::generate_seed_corpus(gen_cfg), gen_out);
            std::cout << json{{"out", gen_out}, {"seed", gen_cfg.seed}}.dump(2) << "\n";
            return 0;
        }
        if (dd->parsed()) {
            auto ds = load_any(dd_data);
            auto [deduped, report] = wamm::lsh_dedupe(ds, dd_params, dd_seed);
            wamm::save_dataset_jsonl(deduped, dd_out);
            if (!dd_report.empty()) write_json_file(report.to_json(), dd_report);
            std::cout << json{{"input", report.input_records},
                              {"removed", report.removed_total},
                              {"kept", deduped.size()}}
                             .dump(2)
                      << "\n";
            return 0;
        }
        if (fm->parsed()) {
            auto ds = load_any(fm_data);
            auto bank = wamm::PatternBank::load_file(fm_bank);
            auto report = wamm::flag_mislabeled(ds, bank);
            if (!fm_report.empty()) write_json_file(report.to_json(), fm_report);
            std::cout << json{{"benign_total", report.benign_total},
                              {"flagged_total", report.flagged_total()},
                              {"bank_version", report.bank_version}}
                             .dump(2)
                      << "\n";
            return 0;
        }
        if (ac->parsed()) {
            auto ds = load_any(ac_data);
            wamm::save_dataset_jsonl(wamm::apply_corrections(ds, ac_corrections), ac_out);
            std::cout << json{{"out", ac_out}}.dump(2) << "\n";
            return 0;
        }
        if (ag->parsed()) {
            auto ds = load_any(ag_data);
            std::vector<wamm::AugmentOp> ops;
            if (ag_ops.empty()) {
                auto op_list = wamm::all_augment_ops();
                ops.assign(op_list.begin(), op_list.end());
            } else {
                std::stringstream ss(ag_ops);
                std::string tok;
                while (std::getline(ss, tok, ',')) {
                    auto op = wamm::parse_augment_op(tok);
                    if (!op) throw wamm::ValidationError("InvalidParams", "unknown op " + tok);
                    ops.push_back(*op);
                }
            }
            auto out = wamm::expand_dataset(ds, ops, ag_variants, ag_seed);
            wamm::save_dataset_jsonl(out, ag_out);
            std::cout << json{{"input", ds.size()}, {"output", out.size()}}.dump(2) << "\n";
            return 0;
        }
        if (sp->parsed()) {
            auto ds = load_any(sp_data);
            auto [train, test] = wamm::stratified_split(ds, sp_fraction, sp_seed);
            wamm::save_dataset_jsonl(train, sp_train);
            wamm::save_dataset_jsonl(test, sp_test);
            std::cout << json{{"train", train.size()}, {"test", test.size()}}.dump(2) << "\n";
            return 0;
        }
        if (tr->parsed()) return run_train(tr_flags);
        if (ev->parsed()) return run_eval(ev_model, ev_data, ev_json, !ev_no_timing);
        if (br->parsed()) {
            auto model = wamm::load_model(br_model);
            auto bank = wamm::PatternBank::load_file(br_bank);
            auto ds = load_any(br_data);
            auto report = wamm::block_rate_table(
                ds, bank, model,
                br_raw_only ? wamm::MatchScope::RawOnly : wamm::MatchScope::DecodedVariants);
            std::cout << wamm::render_block_rate_table(report);
            if (!br_json.empty()) write_json_file(report.to_json(), br_json);
            return 0;
        }
        if (be->parsed()) {
            auto model = wamm::load_model(be_model);
            auto ds = load_any(be_data);
            std::vector<std::string> requests;
            requests.reserve(ds.size());
            for (const auto& rec : ds.records) requests.push_back(rec.full_request);
            auto report = wamm::latency_bench(model, requests, be_warmup, be_iters);
            std::cout << report.to_json().dump(2) << "\n";
            if (!be_json.empty()) write_json_file(report.to_json(), be_json);
            return 0;
        }
        if (sv->parsed()) {
            if (const char* env = std::getenv("WAMM_MODEL")) sv_model = env;
            if (const char* env = std::getenv("WAMM_BIND")) sv_bind = env;
            if (sv_model.empty())
                throw wamm::ValidationError("InvalidParams", "no model path (--model or WAMM_MODEL)");
            wamm::ClassifierService service(wamm::load_model(sv_model));
            std::cerr << json{{"serving", sv_bind},
                              {"model", sv_model},
                              {"workers", sv_workers}}
                             .dump()
                      << "\n";
            if (!service.run(sv_bind, sv_workers))
                throw wamm::IoError("BindFailed", "cannot listen on " + sv_bind);
            return 0;
        }
    } catch (const wamm::IoError& e) {
        std::cerr << json{{"error", e.code()}, {"message", e.what()}}.dump() << "\n";
        return 2;
    } catch (const wamm::Error& e) {
        std::cerr << json{{"error", e.code()}, {"message", e.what()}}.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", "InternalError"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    }
    return 1;
}
