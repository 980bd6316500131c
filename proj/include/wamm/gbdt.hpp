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

#ifndef WAMM_GBDT_HPP
#define WAMM_GBDT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "wamm/corpus.hpp"
#include "wamm/error.hpp"
#include "wamm/features.hpp"
#include "wamm/normalize.hpp"

namespace wamm {

// ---------------------------------------------------------------------------
// Trees
// ---------------------------------------------------------------------------

/// Routing rule: value < threshold goes left; absent sparse entries read as
/// 0.0. feature < 0 marks a leaf.
struct TreeNode {
    int32_t feature = -1;
    double threshold = 0.0;
    int32_t left = -1;
    int32_t right = -1;
    double leaf_value = 0.0;

    bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
    std::vector<TreeNode> nodes;

    /// value_at(feature_index) -> double
    template <typename ValueAt>
    double predict(ValueAt&& value_at) const {
        if (nodes.empty()) return 0.0;
        size_t n = 0;
        while (!nodes[n].is_leaf()) {
            const TreeNode& node = nodes[n];
            n = static_cast<size_t>(value_at(static_cast<uint32_t>(node.feature)) < node.threshold
                                        ? node.left
                                        : node.right);
        }
        return nodes[n].leaf_value;
    }
};

// ---------------------------------------------------------------------------
// Softmax helpers
// ---------------------------------------------------------------------------

inline void softmax_inplace(std::span<double> logits) {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : logits) m = std::max(m, v);
    double sum = 0.0;
    for (double& v : logits) {
        v = std::exp(v - m);
        sum += v;
    }
    for (double& v : logits) v /= sum;
}

/// -ln softmax(logits)[true_class]; the loss whose per-logit gradient is
/// p_c - 1{c == true_class}.
inline double softmax_logloss(std::span<const double> logits, size_t true_class) {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : logits) m = std::max(m, v);
    double sum = 0.0;
    for (double v : logits) sum += std::exp(v - m);
    return std::log(sum) - (logits[true_class] - m);
}

// ---------------------------------------------------------------------------
// Training configuration
// ---------------------------------------------------------------------------

struct TrainConfig {
    int max_depth = 6;
    double learning_rate = 0.3;
    int max_rounds = 200;
    int early_stopping_patience = 10;
    int min_samples_leaf = 5;
    double min_gain = 1e-6;
    double validation_fraction = 0.1;
    uint64_t seed = 42;

    void validate() const {
        if (max_depth <= 0 || learning_rate <= 0 || max_rounds <= 0 || early_stopping_patience <= 0 ||
            min_samples_leaf <= 0 || min_gain < 0)
            throw ValidationError("InvalidParams", "training parameters must be positive");
        if (!(validation_fraction > 0.0 && validation_fraction <= 0.5))
            throw ValidationError("InvalidParams", "validation_fraction must be in (0, 0.5]");
    }
};

constexpr double kGbdtLambda = 1.0;

struct TrainLog {
    std::vector<double> train_logloss; // per completed round, after update
    std::vector<double> valid_logloss; // empty when no validation rows
    size_t completed_rounds = 0;
    size_t best_round = 0;
    bool early_stopped = false;
};

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

constexpr const char* kModelFormatVersion = "1.0";

struct ClassifyOutcome {
    AttackClass label;
    double confidence; // max probability
    std::vector<double> proba;
};

struct GbdtModel {
    std::vector<AttackClass> classes;       // canonical enum order, size K
    std::vector<double> base_score;         // per-class prior log-probability
    std::vector<RegressionTree> trees;      // rounds * K, round-major
    double learning_rate = 0.3;
    std::vector<std::string> feature_schema; // dense column names
    size_t sparse_width = 0;                 // TF-IDF block width
    FeaturePipeline pipeline;                // fitted for real models
    std::string format_version = kModelFormatVersion;

    size_t class_count() const { return classes.size(); }
    size_t completed_rounds() const { return classes.empty() ? 0 : trees.size() / classes.size(); }
    size_t width() const { return feature_schema.size() + sparse_width; }

    void check_schema(const FeatureVector& x) const {
        if (x.dense.size() != feature_schema.size())
            throw ValidationError("SchemaMismatch",
                                  "dense width " + std::to_string(x.dense.size()) + " != " +
                                      std::to_string(feature_schema.size()));
        for (const auto& [col, v] : x.sparse) {
            (void)v;
            if (col >= sparse_width)
                throw ValidationError("SchemaMismatch",
                                      "sparse column " + std::to_string(col) + " out of range");
        }
    }

    /// Softmax over (base_score + lr * sum of per-round trees). Output is
    /// aligned with `classes`, sums to 1.
    std::vector<double> predict_proba(const FeatureVector& x) const {
        check_schema(x);
        thread_local std::vector<double> scratch;
        size_t w = width();
        if (scratch.size() < w) scratch.resize(w, 0.0);
        size_t dense_w = feature_schema.size();
        for (size_t i = 0; i < dense_w; ++i) scratch[i] = x.dense[i];
        for (const auto& [col, v] : x.sparse) scratch[dense_w + col] = v;

        std::vector<double> scores = base_score;
        size_t k = classes.size();
        auto value_at = [&](uint32_t f) { return scratch[f]; };
        for (size_t t = 0; t < trees.size(); ++t)
            scores[t % k] += learning_rate * trees[t].predict(value_at);

        for (size_t i = 0; i < dense_w; ++i) scratch[i] = 0.0;
        for (const auto& [col, v] : x.sparse) {
            (void)v;
            scratch[dense_w + col] = 0.0;
        }
        softmax_inplace(scores);
        return scores;
    }

    /// Argmax of predict_proba; ties break toward the first class in order.
    AttackClass predict(const FeatureVector& x) const {
        auto p = predict_proba(x);
        size_t best = 0;
        for (size_t i = 1; i < p.size(); ++i)
            if (p[i] > p[best]) best = i;
        return classes[best];
    }

    /// Serving hot path: normalize, featurize, predict.
    ClassifyOutcome classify(std::string_view full_request) const {
        auto fv = pipeline.featurize(parse_request(full_request));
        ClassifyOutcome out;
        out.proba = predict_proba(fv);
        size_t best = 0;
        for (size_t i = 1; i < out.proba.size(); ++i)
            if (out.proba[i] > out.proba[best]) best = i;
        out.label = classes[best];
        out.confidence = out.proba[best];
        return out;
    }
};

// ---------------------------------------------------------------------------
// Exact greedy tree construction
// ---------------------------------------------------------------------------

namespace gbdt_detail {

struct ColumnEntry {
    uint32_t row;
    double value;
};

struct ColumnMatrix {
    size_t n_rows = 0;
    size_t dense_width = 0;
    size_t total_width = 0;
    std::vector<std::vector<ColumnEntry>> columns; // per column, sorted by (value, row)
};

inline ColumnMatrix build_columns(const std::vector<FeatureVector>& x, size_t dense_width,
                                  size_t total_width) {
    ColumnMatrix m;
    m.n_rows = x.size();
    m.dense_width = dense_width;
    m.total_width = total_width;
    m.columns.resize(total_width);
    for (uint32_t i = 0; i < x.size(); ++i) {
        for (size_t d = 0; d < dense_width; ++d)
            if (x[i].dense[d] != 0.0) m.columns[d].push_back({i, x[i].dense[d]});
        uint32_t prev_col = 0;
        bool first = true;
        for (const auto& [col, v] : x[i].sparse) {
            if (!first && col <= prev_col)
                throw ValidationError("ShapeMismatch", "sparse entries must be sorted by column");
            first = false;
            prev_col = col;
            if (v != 0.0) m.columns[dense_width + col].push_back({i, v});
        }
    }
    for (auto& col : m.columns)
        std::sort(col.begin(), col.end(), [](const ColumnEntry& a, const ColumnEntry& b) {
            if (a.value != b.value) return a.value < b.value;
            return a.row < b.row;
        });
    return m;
}

inline double feature_value(const FeatureVector& x, size_t dense_width, uint32_t col) {
    if (col < dense_width) return x.dense[col];
    uint32_t sc = col - static_cast<uint32_t>(dense_width);
    auto it = std::lower_bound(x.sparse.begin(), x.sparse.end(), sc,
                               [](const auto& p, uint32_t c) { return p.first < c; });
    return (it != x.sparse.end() && it->first == sc) ? it->second : 0.0;
}

struct TreeBuildResult {
    RegressionTree tree;
    std::vector<int32_t> node_of_row; // leaf index per training row, -1 elsewhere
};

/// Level-wise exact greedy builder. Each column is scanned twice per level:
/// once for per-node present-entry totals (the implicit zero block is the
/// node total minus these), once to evaluate split candidates at midpoints
/// between distinct values and around the zero block.
inline TreeBuildResult build_tree(const ColumnMatrix& m, const std::vector<uint32_t>& rows,
                                  const std::vector<double>& g, const std::vector<double>& h,
                                  const TrainConfig& cfg) {
    TreeBuildResult out;
    auto& nodes = out.tree.nodes;
    out.node_of_row.assign(m.n_rows, -1);

    struct NodeStats {
        double g = 0, h = 0;
        uint32_t n = 0;
    };
    std::vector<NodeStats> stats;
    std::vector<std::vector<uint32_t>> node_rows;

    nodes.push_back({});
    stats.push_back({});
    node_rows.emplace_back(rows);
    for (uint32_t r : rows) {
        out.node_of_row[r] = 0;
        stats[0].g += g[r];
        stats[0].h += h[r];
        ++stats[0].n;
    }

    struct Best {
        double gain = 0;
        int32_t feature = -1;
        double threshold = 0;
    };
    struct Scan {
        uint64_t stamp1 = 0, stamp2 = 0;
        double pres_g = 0, pres_h = 0;
        uint32_t pres_n = 0;
        double pre_g = 0, pre_h = 0;
        uint32_t pre_n = 0;
        double last_v = 0;
        bool has_last = false;
    };

    std::vector<int32_t> frontier{0};
    uint64_t epoch = 0;

    auto objective = [](double gs, double hs) { return gs * gs / (hs + kGbdtLambda); };

    for (int depth = 0; depth < cfg.max_depth && !frontier.empty(); ++depth) {
        std::vector<char> splittable(nodes.size(), 0);
        bool any = false;
        for (int32_t nd : frontier)
            if (stats[nd].n >= 2 * static_cast<uint32_t>(cfg.min_samples_leaf)) {
                splittable[nd] = 1;
                any = true;
            }
        if (!any) break;

        std::vector<Best> best(nodes.size());
        std::vector<Scan> scan(nodes.size());
        std::vector<int32_t> touched;

        for (uint32_t j = 0; j < m.total_width; ++j) {
            const auto& col = m.columns[j];
            if (col.empty()) continue;
            ++epoch;
            touched.clear();

            // Pass 1: present-entry totals per node.
            for (const auto& e : col) {
                int32_t nd = out.node_of_row[e.row];
                if (nd < 0 || !splittable[nd]) continue;
                Scan& s = scan[nd];
                if (s.stamp1 != epoch) {
                    s.stamp1 = epoch;
                    s.pres_g = 0;
                    s.pres_h = 0;
                    s.pres_n = 0;
                    touched.push_back(nd);
                }
                s.pres_g += g[e.row];
                s.pres_h += h[e.row];
                ++s.pres_n;
            }
            if (touched.empty()) continue;

            auto try_split = [&](int32_t nd, double t, double lg, double lh, uint32_t ln) {
                const NodeStats& ns = stats[nd];
                uint32_t rn = ns.n - ln;
                if (ln < static_cast<uint32_t>(cfg.min_samples_leaf) ||
                    rn < static_cast<uint32_t>(cfg.min_samples_leaf))
                    return;
                double rg = ns.g - lg, rh = ns.h - lh;
                double gain = 0.5 * (objective(lg, lh) + objective(rg, rh) - objective(ns.g, ns.h));
                Best& b = best[nd];
                if (gain > cfg.min_gain && gain > b.gain) {
                    b.gain = gain;
                    b.feature = static_cast<int32_t>(j);
                    b.threshold = t;
                }
            };

            // Candidate with the zero block on the left when t > 0.
            auto candidate = [&](int32_t nd, double t, const Scan& s) {
                const NodeStats& ns = stats[nd];
                double zg = ns.g - s.pres_g, zh = ns.h - s.pres_h;
                uint32_t zn = ns.n - s.pres_n;
                if (t > 0.0)
                    try_split(nd, t, s.pre_g + zg, s.pre_h + zh, s.pre_n + zn);
                else
                    try_split(nd, t, s.pre_g, s.pre_h, s.pre_n);
            };

            // Pass 2: boundary evaluation in ascending value order.
            for (const auto& e : col) {
                int32_t nd = out.node_of_row[e.row];
                if (nd < 0 || !splittable[nd]) continue;
                Scan& s = scan[nd];
                if (s.stamp2 != epoch) {
                    s.stamp2 = epoch;
                    s.pre_g = 0;
                    s.pre_h = 0;
                    s.pre_n = 0;
                    s.has_last = false;
                }
                uint32_t zn = stats[nd].n - s.pres_n;
                if (!s.has_last) {
                    if (e.value > 0.0 && zn > 0) candidate(nd, e.value / 2.0, s);
                } else if (e.value != s.last_v) {
                    if (s.last_v < 0.0 && e.value > 0.0 && zn > 0) {
                        candidate(nd, s.last_v / 2.0, s);
                        candidate(nd, e.value / 2.0, s);
                    } else {
                        double t = s.last_v + (e.value - s.last_v) / 2.0;
                        if (t > s.last_v) candidate(nd, t, s);
                    }
                }
                s.pre_g += g[e.row];
                s.pre_h += h[e.row];
                ++s.pre_n;
                s.last_v = e.value;
                s.has_last = true;
            }
            // Trailing boundary: all present entries negative, zeros right.
            for (int32_t nd : touched) {
                Scan& s = scan[nd];
                if (s.stamp2 == epoch && s.has_last && s.last_v < 0.0 && stats[nd].n > s.pres_n)
                    candidate(nd, s.last_v / 2.0, s);
            }
        }

        // Apply the best split of each frontier node, in node order.
        std::vector<int32_t> next_frontier;
        for (int32_t nd : frontier) {
            if (!splittable[nd] || best[nd].feature < 0) continue;
            const Best& b = best[nd];
            int32_t left = static_cast<int32_t>(nodes.size());
            int32_t right = left + 1;
            nodes[nd].feature = b.feature;
            nodes[nd].threshold = b.threshold;
            nodes[nd].left = left;
            nodes[nd].right = right;
            nodes.push_back({});
            nodes.push_back({});
            stats.push_back({});
            stats.push_back({});
            node_rows.emplace_back();
            node_rows.emplace_back();

            int32_t zero_side = (0.0 < b.threshold) ? left : right;
            for (uint32_t r : node_rows[nd]) out.node_of_row[r] = zero_side;
            for (const auto& e : m.columns[b.feature]) {
                int32_t cur = out.node_of_row[e.row];
                if (cur != left && cur != right) continue;
                out.node_of_row[e.row] = e.value < b.threshold ? left : right;
            }
            for (uint32_t r : node_rows[nd]) {
                int32_t child = out.node_of_row[r];
                node_rows[child].push_back(r);
                stats[child].g += g[r];
                stats[child].h += h[r];
                ++stats[child].n;
            }
            node_rows[nd].clear();
            node_rows[nd].shrink_to_fit();
            next_frontier.push_back(left);
            next_frontier.push_back(right);
        }
        frontier = std::move(next_frontier);
    }

    for (size_t nd = 0; nd < nodes.size(); ++nd)
        if (nodes[nd].is_leaf()) nodes[nd].leaf_value = -stats[nd].g / (stats[nd].h + kGbdtLambda);

    return out;
}

} // namespace gbdt_detail

// ---------------------------------------------------------------------------
// Boosting
// ---------------------------------------------------------------------------

/// Multiclass softmax boosting with class-weighted gradients, exact greedy
/// splits, and validation-based early stopping. Deterministic for a fixed
/// (inputs, config) pair; per-class trees within a round are built on
/// independent state, so they may be built concurrently.
inline std::pair<GbdtModel, TrainLog> train_gbdt(const std::vector<FeatureVector>& x,
                                                 const std::vector<AttackClass>& y,
                                                 const ClassWeights& weights, const TrainConfig& cfg,
                                                 FeaturePipeline pipeline = {}) {
    cfg.validate();
    if (x.size() != y.size())
        throw ValidationError("ShapeMismatch", "feature and label counts differ");
    if (x.empty()) throw ValidationError("ShapeMismatch", "empty training set");

    size_t dense_w = x[0].dense.size();
    for (const auto& fv : x)
        if (fv.dense.size() != dense_w)
            throw ValidationError("ShapeMismatch", "inconsistent dense widths");

    GbdtModel model;
    model.learning_rate = cfg.learning_rate;
    std::map<AttackClass, size_t> counts;
    for (AttackClass c : y) ++counts[c];
    for (const auto& [cls, n] : counts) {
        (void)n;
        model.classes.push_back(cls);
    }
    size_t k = model.classes.size();
    if (k < 2) throw ValidationError("SingleClassInput", "need at least two classes");
    if (x.size() < 2 * k)
        throw ValidationError("ShapeMismatch", "need at least 2 samples per class");

    if (pipeline.vectorizer.fitted()) {
        if (dense_w != HandcraftedFeatures::kWidth)
            throw ValidationError("ShapeMismatch", "dense width does not match the feature schema");
        for (const char* name : HandcraftedFeatures::schema()) model.feature_schema.emplace_back(name);
        model.sparse_width = pipeline.vectorizer.vocabulary_size();
    } else {
        for (size_t i = 0; i < dense_w; ++i) model.feature_schema.push_back("f" + std::to_string(i));
        uint32_t max_col = 0;
        bool any_sparse = false;
        for (const auto& fv : x)
            for (const auto& [col, v] : fv.sparse) {
                (void)v;
                any_sparse = true;
                max_col = std::max(max_col, col);
            }
        model.sparse_width = any_sparse ? max_col + 1 : 0;
    }
    model.pipeline = std::move(pipeline);

    for (const auto& fv : x) model.check_schema(fv);

    std::vector<size_t> class_index(kClassCount, SIZE_MAX);
    for (size_t c = 0; c < k; ++c) class_index[static_cast<size_t>(model.classes[c])] = c;

    double n_total = static_cast<double>(x.size());
    model.base_score.resize(k);
    for (size_t c = 0; c < k; ++c)
        model.base_score[c] =
            std::log(std::max(static_cast<double>(counts[model.classes[c]]) / n_total, 1e-12));

    // Stratified validation carve-out for early stopping.
    std::vector<uint32_t> train_rows, valid_rows;
    {
        std::map<AttackClass, std::vector<uint32_t>> by_class;
        for (uint32_t i = 0; i < y.size(); ++i) by_class[y[i]].push_back(i);
        for (auto& [cls, idx] : by_class) {
            std::mt19937_64 rng(cfg.seed ^ (0x9E3779B97F4A7C15ull * (static_cast<uint64_t>(cls) + 1)));
            detail::deterministic_shuffle(idx, rng);
            long long nv = std::llround(cfg.validation_fraction * static_cast<double>(idx.size()));
            nv = std::clamp<long long>(nv, 0, static_cast<long long>(idx.size()) - 1);
            for (size_t i = 0; i < idx.size(); ++i)
                (i < static_cast<size_t>(nv) ? valid_rows : train_rows).push_back(idx[i]);
        }
        std::sort(train_rows.begin(), train_rows.end());
        std::sort(valid_rows.begin(), valid_rows.end());
    }
    bool has_valid = !valid_rows.empty();

    auto matrix = gbdt_detail::build_columns(x, dense_w, model.width());

    std::vector<double> sample_weight(x.size());
    for (size_t i = 0; i < x.size(); ++i) sample_weight[i] = weights.at(y[i]);

    std::vector<double> scores(x.size() * k);
    for (size_t i = 0; i < x.size(); ++i)
        for (size_t c = 0; c < k; ++c) scores[i * k + c] = model.base_score[c];

    auto weighted_logloss = [&](const std::vector<uint32_t>& rows) {
        double loss = 0.0, wsum = 0.0;
        for (uint32_t i : rows) {
            std::span<const double> row(scores.data() + i * k, k);
            double w = sample_weight[i];
            loss += w * softmax_logloss(row, class_index[static_cast<size_t>(y[i])]);
            wsum += w;
        }
        return wsum > 0.0 ? loss / wsum : 0.0;
    };

    TrainLog log;
    double best_valid = std::numeric_limits<double>::infinity();
    int rounds_since_improve = 0;

    std::vector<double> prob(x.size() * k);
    constexpr double kHessFloor = 1e-16;

    for (int round = 0; round < cfg.max_rounds; ++round) {
        for (size_t i = 0; i < x.size(); ++i) {
            std::copy(scores.begin() + i * k, scores.begin() + (i + 1) * k, prob.begin() + i * k);
            softmax_inplace(std::span<double>(prob.data() + i * k, k));
        }

        std::vector<gbdt_detail::TreeBuildResult> built(k);
        auto fit_class = [&](size_t c) {
            std::vector<double> g(x.size(), 0.0), h(x.size(), 0.0);
            for (uint32_t i : train_rows) {
                double p = prob[i * k + c];
                double target = class_index[static_cast<size_t>(y[i])] == c ? 1.0 : 0.0;
                g[i] = (p - target) * sample_weight[i];
                h[i] = std::max(p * (1.0 - p), kHessFloor) * sample_weight[i];
            }
            built[c] = gbdt_detail::build_tree(matrix, train_rows, g, h, cfg);
        };
        {
            std::vector<std::thread> pool;
            pool.reserve(k);
            for (size_t c = 0; c < k; ++c) pool.emplace_back(fit_class, c);
            for (auto& t : pool) t.join();
        }

        for (size_t c = 0; c < k; ++c) {
            const auto& result = built[c];
            for (uint32_t i : train_rows)
                scores[i * k + c] +=
                    cfg.learning_rate * result.tree.nodes[result.node_of_row[i]].leaf_value;
            for (uint32_t i : valid_rows)
                scores[i * k + c] += cfg.learning_rate * result.tree.predict([&](uint32_t f) {
                    return gbdt_detail::feature_value(x[i], dense_w, f);
                });
            model.trees.push_back(result.tree);
        }

        log.train_logloss.push_back(weighted_logloss(train_rows));
        if (has_valid) log.valid_logloss.push_back(weighted_logloss(valid_rows));
        double monitored = has_valid ? log.valid_logloss.back() : log.train_logloss.back();
        log.completed_rounds = static_cast<size_t>(round) + 1;

        if (monitored < best_valid) {
            best_valid = monitored;
            log.best_round = static_cast<size_t>(round);
            rounds_since_improve = 0;
        } else if (++rounds_since_improve >= cfg.early_stopping_patience) {
            log.early_stopped = true;
            break;
        }
    }

    return {std::move(model), std::move(log)};
}

} // namespace wamm

#endif // WAMM_GBDT_HPP
