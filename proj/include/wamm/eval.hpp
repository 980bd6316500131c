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

#ifndef WAMM_EVAL_HPP
#define WAMM_EVAL_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "wamm/corpus.hpp"
#include "wamm/error.hpp"
#include "wamm/fingerprints.hpp"
#include "wamm/gbdt.hpp"

namespace wamm {

// ---------------------------------------------------------------------------
// Confusion matrix and derived metrics
// ---------------------------------------------------------------------------

/// K x K counts, rows = true class, columns = predicted class.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::vector<AttackClass> classes) : classes_(std::move(classes)) {
        if (classes_.empty()) throw ValidationError("EmptyMatrix", "no classes");
        counts_.assign(classes_.size() * classes_.size(), 0);
    }

    size_t index_of(AttackClass c) const {
        for (size_t i = 0; i < classes_.size(); ++i)
            if (classes_[i] == c) return i;
        throw ValidationError("UnknownLabel", class_name(c));
    }

    void add(AttackClass truth, AttackClass predicted) {
        ++counts_[index_of(truth) * classes_.size() + index_of(predicted)];
    }

    size_t at(size_t i, size_t j) const { return counts_[i * classes_.size() + j]; }
    const std::vector<AttackClass>& classes() const { return classes_; }
    size_t class_count() const { return classes_.size(); }

    size_t total() const {
        size_t t = 0;
        for (size_t c : counts_) t += c;
        return t;
    }
    size_t trace() const {
        size_t t = 0;
        for (size_t i = 0; i < classes_.size(); ++i) t += at(i, i);
        return t;
    }

private:
    std::vector<AttackClass> classes_;
    std::vector<size_t> counts_;
};

inline ConfusionMatrix confusion(const std::vector<AttackClass>& truth,
                                 const std::vector<AttackClass>& predicted,
                                 std::vector<AttackClass> classes) {
    if (truth.size() != predicted.size())
        throw ValidationError("LengthMismatch", "label vectors differ in length");
    ConfusionMatrix cm(std::move(classes));
    for (size_t i = 0; i < truth.size(); ++i) cm.add(truth[i], predicted[i]);
    return cm;
}

struct ClassMetrics {
    double precision = 0;
    double recall = 0;
    double f1 = 0;
    size_t support = 0;
};

struct MetricsReport {
    double accuracy = 0;
    double macro_f1 = 0;
    size_t total = 0;
    std::vector<std::pair<AttackClass, ClassMetrics>> per_class;

    nlohmann::json to_json() const {
        nlohmann::json pc = nlohmann::json::array();
        for (const auto& [cls, m] : per_class)
            pc.push_back({{"class", class_name(cls)},
                          {"precision", m.precision},
                          {"recall", m.recall},
                          {"f1", m.f1},
                          {"support", m.support}});
        return {{"accuracy", accuracy},
                {"macro_f1", macro_f1},
                {"total", total},
                {"per_class", pc},
                {"zero_division_convention", "metric reported as 0 when its denominator is 0"}};
    }
};

/// Accuracy = trace/total; per-class one-vs-rest precision/recall/F1 with
/// the zero-denominator-means-zero convention; macro-F1 is the unweighted
/// mean over the matrix's classes.
inline MetricsReport metrics(const ConfusionMatrix& cm) {
    MetricsReport report;
    report.total = cm.total();
    if (report.total == 0) throw ValidationError("EmptyMatrix", "confusion matrix has no samples");
    report.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(report.total);

    size_t k = cm.class_count();
    double f1_sum = 0;
    for (size_t i = 0; i < k; ++i) {
        size_t tp = cm.at(i, i), row = 0, col = 0;
        for (size_t j = 0; j < k; ++j) {
            row += cm.at(i, j);
            col += cm.at(j, i);
        }
        size_t fn = row - tp, fp = col - tp;
        ClassMetrics m;
        m.support = row;
        m.precision = (tp + fp) ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
        m.recall = (tp + fn) ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
        m.f1 = (m.precision + m.recall > 0) ? 2 * m.precision * m.recall / (m.precision + m.recall)
                                            : 0.0;
        f1_sum += m.f1;
        report.per_class.emplace_back(cm.classes()[i], m);
    }
    report.macro_f1 = f1_sum / static_cast<double>(k);
    return report;
}

// ---------------------------------------------------------------------------
// Rule-vs-model block rates
// ---------------------------------------------------------------------------

struct BlockRateRow {
    int capec_id = 0;
    std::string name;
    size_t samples = 0;
    double rule_rate = 0;         // % blocked by the pattern bank
    double model_rate = 0;        // % predicted as any non-Normal class
    double model_rate_strict = 0; // % predicted as the correct attack class
    double delta = 0;             // model_rate - rule_rate
};

struct BlockRateReport {
    std::string bank_version;
    std::vector<BlockRateRow> rows;
    size_t excluded_legacy_samples = 0;

    nlohmann::json to_json() const {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& r : rows)
            out.push_back({{"capec_id", r.capec_id},
                           {"name", r.name},
                           {"samples", r.samples},
                           {"rule_rate", r.rule_rate},
                           {"model_rate", r.model_rate},
                           {"model_rate_strict", r.model_rate_strict},
                           {"delta", r.delta}});
        return {{"bank_version", bank_version},
                {"rows", out},
                {"excluded_legacy_samples", excluded_legacy_samples},
                {"blocked_definition", "model blocks when the predicted class is not Normal"}};
    }
};

/// Per attack class: % of samples blocked by the rule bank vs % the model
/// classifies as any attack. Rows are sorted by sample count descending.
/// Legacy-labeled records (no CAPEC id) are excluded from the table.
inline BlockRateReport block_rate_table(const Dataset& ds_test, const PatternBank& bank,
                                        const GbdtModel& model,
                                        MatchScope rule_scope = MatchScope::DecodedVariants) {
    struct Acc {
        size_t samples = 0, rule_blocked = 0, model_blocked = 0, model_strict = 0;
    };
    std::map<AttackClass, Acc> acc;
    BlockRateReport report;
    report.bank_version = bank.version();

    size_t attack_samples = 0;
    for (const auto& rec : ds_test.records) {
        if (!is_attack(rec.label)) continue;
        ++attack_samples;
        if (!class_capec(rec.label)) {
            ++report.excluded_legacy_samples;
            continue;
        }
        auto& a = acc[rec.label];
        ++a.samples;
        auto req = parse_request(rec.full_request);
        if (rule_block(bank, req, rule_scope).blocked) ++a.rule_blocked;
        auto outcome = model.classify(rec.full_request);
        if (outcome.label != AttackClass::Normal) ++a.model_blocked;
        if (outcome.label == rec.label) ++a.model_strict;
    }
    if (attack_samples == 0)
        throw ValidationError("NoAttackSamples", "test set contains no attack records");

    for (const auto& [cls, a] : acc) {
        BlockRateRow row;
        row.capec_id = *class_capec(cls);
        row.name = class_name(cls);
        row.samples = a.samples;
        double n = static_cast<double>(a.samples);
        row.rule_rate = 100.0 * static_cast<double>(a.rule_blocked) / n;
        row.model_rate = 100.0 * static_cast<double>(a.model_blocked) / n;
        row.model_rate_strict = 100.0 * static_cast<double>(a.model_strict) / n;
        row.delta = row.model_rate - row.rule_rate;
        report.rows.push_back(std::move(row));
    }
    std::sort(report.rows.begin(), report.rows.end(), [](const BlockRateRow& a, const BlockRateRow& b) {
        if (a.samples != b.samples) return a.samples > b.samples;
        return a.capec_id < b.capec_id;
    });
    return report;
}

inline std::string render_block_rate_table(const BlockRateReport& report) {
    std::ostringstream os;
    os << std::left << std::setw(6) << "ID" << std::setw(24) << "Name" << std::right << std::setw(9)
       << "samples" << std::setw(9) << "rule" << std::setw(9) << "model" << std::setw(9) << "delta"
       << "\n";
    os << std::string(66, '-') << "\n";
    os << std::fixed << std::setprecision(2);
    for (const auto& r : report.rows)
        os << std::left << std::setw(6) << r.capec_id << std::setw(24) << r.name << std::right
           << std::setw(9) << r.samples << std::setw(9) << r.rule_rate << std::setw(9) << r.model_rate
           << std::setw(9) << r.delta << "\n";
    return os.str();
}

inline std::string render_metrics(const MetricsReport& report) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(4);
    os << "accuracy " << report.accuracy << "  macro_f1 " << report.macro_f1 << "  n " << report.total
       << "\n";
    os << std::left << std::setw(24) << "class" << std::right << std::setw(10) << "precision"
       << std::setw(10) << "recall" << std::setw(10) << "f1" << std::setw(10) << "support" << "\n";
    for (const auto& [cls, m] : report.per_class)
        os << std::left << std::setw(24) << class_name(cls) << std::right << std::setw(10) << m.precision
           << std::setw(10) << m.recall << std::setw(10) << m.f1 << std::setw(10) << m.support << "\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Latency benchmark
// ---------------------------------------------------------------------------

struct LatencyStage {
    double mean_us = 0;
    double p50_us = 0;
    double p99_us = 0;
};

struct LatencyReport {
    LatencyStage normalize;
    LatencyStage featurize;
    LatencyStage predict;
    LatencyStage end_to_end;
    size_t samples = 0;
    unsigned cpu_count = 0;

    nlohmann::json to_json() const {
        auto stage = [](const LatencyStage& s) {
            return nlohmann::json{{"mean_us", s.mean_us}, {"p50_us", s.p50_us}, {"p99_us", s.p99_us}};
        };
        return {{"normalize", stage(normalize)},
                {"featurize", stage(featurize)},
                {"predict", stage(predict)},
                {"end_to_end", stage(end_to_end)},
                {"samples", samples},
                {"cpu_count", cpu_count}};
    }
};

namespace eval_detail {

inline LatencyStage summarize_us(std::vector<double>& v) {
    LatencyStage s;
    if (v.empty()) return s;
    double sum = 0;
    for (double x : v) sum += x;
    s.mean_us = sum / static_cast<double>(v.size());
    std::sort(v.begin(), v.end());
    auto pick = [&](double q) {
        size_t idx = static_cast<size_t>(std::llround(q * static_cast<double>(v.size() - 1)));
        return v[idx];
    };
    s.p50_us = pick(0.50);
    s.p99_us = pick(0.99);
    return s;
}

} // namespace eval_detail

/// Times the single-thread normalize -> featurize -> predict hot path with a
/// monotonic clock, cycling through `requests`. Warmup iterations are
/// dropped. Needs at least 1000 measured iterations for stable percentiles.
inline LatencyReport latency_bench(const GbdtModel& model, const std::vector<std::string>& requests,
                                   size_t warmup, size_t iters) {
    if (iters < 1000)
        throw ValidationError("InsufficientIterations", "need >= 1000 iterations");
    if (requests.empty()) throw ValidationError("InvalidParams", "no requests to measure");

    using clock = std::chrono::steady_clock;
    auto us = [](clock::time_point a, clock::time_point b) {
        return std::chrono::duration<double, std::micro>(b - a).count();
    };

    volatile double sink = 0;
    for (size_t i = 0; i < warmup; ++i) {
        auto outcome = model.classify(requests[i % requests.size()]);
        sink = sink + outcome.confidence;
    }

    std::vector<double> t_norm, t_feat, t_pred, t_all;
    t_norm.reserve(iters);
    t_feat.reserve(iters);
    t_pred.reserve(iters);
    t_all.reserve(iters);

    for (size_t i = 0; i < iters; ++i) {
        const std::string& raw = requests[i % requests.size()];
        auto t0 = clock::now();
        auto req = parse_request(raw);
        auto t1 = clock::now();
        auto fv = model.pipeline.featurize(req);
        auto t2 = clock::now();
        auto proba = model.predict_proba(fv);
        auto t3 = clock::now();
        sink = sink + proba[0];
        t_norm.push_back(us(t0, t1));
        t_feat.push_back(us(t1, t2));
        t_pred.push_back(us(t2, t3));
        t_all.push_back(us(t0, t3));
    }

    LatencyReport report;
    report.samples = iters;
    report.cpu_count = std::thread::hardware_concurrency();
    report.normalize = eval_detail::summarize_us(t_norm);
    report.featurize = eval_detail::summarize_us(t_feat);
    report.predict = eval_detail::summarize_us(t_pred);
    report.end_to_end = eval_detail::summarize_us(t_all);
    return report;
}

} // namespace wamm

#endif // WAMM_EVAL_HPP
