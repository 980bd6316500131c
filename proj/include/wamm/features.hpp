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

#ifndef WAMM_FEATURES_HPP
#define WAMM_FEATURES_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "wamm/error.hpp"
#include "wamm/normalize.hpp"

namespace wamm {

// ---------------------------------------------------------------------------
// Handcrafted statistics
// ---------------------------------------------------------------------------

/// -sum(p * log2 p) over byte frequencies; empty string -> 0.
inline double shannon_entropy(std::string_view s) {
    if (s.empty()) return 0.0;
    std::array<size_t, 256> freq{};
    for (unsigned char c : s) ++freq[c];
    double h = 0.0;
    double n = static_cast<double>(s.size());
    for (size_t f : freq) {
        if (f == 0) continue;
        double p = static_cast<double>(f) / n;
        h -= p * std::log2(p);
    }
    return h < 0.0 ? 0.0 : h;
}

/// Count of maximal %HH escapes (HH hex, case-insensitive), scanning left
/// to right with the same munching rule percent_decode uses.
inline size_t count_percent_encoded(std::string_view s) {
    size_t count = 0;
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '%' && i + 2 < s.size() && detail::hex_value(s[i + 1]) >= 0 &&
            detail::hex_value(s[i + 2]) >= 0) {
            ++count;
            i += 2;
        }
    }
    return count;
}

/// Substrings whose presence sets sql_keyword_flag. Mirrored in
/// data/sql_keywords.txt; a test keeps the two in sync.
inline const std::vector<std::string>& sql_keyword_list() {
    static const std::vector<std::string> kKeywords = {
        "select", "union", "insert", "update", "delete",
        "drop",   "sleep", "benchmark", "or 1=1"};
    return kKeywords;
}

namespace detail {

inline bool contains_ci(std::string_view haystack, std::string_view needle) {
    if (needle.empty() || needle.size() > haystack.size()) return false;
    auto lower = [](char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32) : c; };
    for (size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
        size_t j = 0;
        while (j < needle.size() && lower(haystack[i + j]) == lower(needle[j])) ++j;
        if (j == needle.size()) return true;
    }
    return false;
}

} // namespace detail

/// Dense statistical block of the feature space. All fields are computed on
/// the raw text except url_depth (request path) and traversal_flag (raw or
/// once-decoded).
struct HandcraftedFeatures {
    double payload_length = 0;
    double count_angle_open = 0;   // <
    double count_angle_close = 0;  // >
    double count_double_quote = 0; // "
    double count_single_quote = 0; // '
    double count_semicolon = 0;    // ;
    double special_char_ratio = 0;
    double digit_count = 0;
    double digit_ratio = 0;
    double percent_encoded_count = 0;
    double entropy_bits = 0;
    double url_depth_value = 0;
    double unique_char_count = 0;
    double word_count = 0;
    double sql_keyword_flag = 0;
    double traversal_flag = 0;

    static constexpr size_t kWidth = 16;

    static const std::array<const char*, kWidth>& schema() {
        static const std::array<const char*, kWidth> kSchema = {
            "payload_length",     "count_angle_open",   "count_angle_close",
            "count_double_quote", "count_single_quote", "count_semicolon",
            "special_char_ratio", "digit_count",        "digit_ratio",
            "percent_encoded_count", "shannon_entropy", "url_depth",
            "unique_char_count",  "word_count",         "sql_keyword_flag",
            "traversal_flag"};
        return kSchema;
    }

    std::array<double, kWidth> flatten() const {
        return {payload_length,     count_angle_open,   count_angle_close,
                count_double_quote, count_single_quote, count_semicolon,
                special_char_ratio, digit_count,        digit_ratio,
                percent_encoded_count, entropy_bits,    url_depth_value,
                unique_char_count,  word_count,         sql_keyword_flag,
                traversal_flag};
    }
};

inline HandcraftedFeatures extract_handcrafted(const NormalizedRequest& req) {
    HandcraftedFeatures f;
    const std::string& s = req.raw;
    f.payload_length = static_cast<double>(s.size());

    std::array<bool, 256> seen{};
    size_t digits = 0, words = 0;
    bool in_word = false;
    for (unsigned char c : s) {
        seen[c] = true;
        switch (c) {
        case '<': f.count_angle_open += 1; break;
        case '>': f.count_angle_close += 1; break;
        case '"': f.count_double_quote += 1; break;
        case '\'': f.count_single_quote += 1; break;
        case ';': f.count_semicolon += 1; break;
        default: break;
        }
        if (c >= '0' && c <= '9') ++digits;
        bool ws = (c == ' ' || c == '\t' || c == '\r' || c == '\n');
        if (!ws && !in_word) ++words;
        in_word = !ws;
    }
    double denom = std::max<double>(f.payload_length, 1.0);
    f.special_char_ratio = (f.count_angle_open + f.count_angle_close + f.count_double_quote +
                            f.count_single_quote + f.count_semicolon) /
                           denom;
    f.digit_count = static_cast<double>(digits);
    f.digit_ratio = f.digit_count / denom;
    f.percent_encoded_count = static_cast<double>(count_percent_encoded(s));
    f.entropy_bits = shannon_entropy(s);
    f.url_depth_value = static_cast<double>(url_depth(req.path));
    f.unique_char_count = static_cast<double>(std::count(seen.begin(), seen.end(), true));
    f.word_count = static_cast<double>(words);

    for (const auto& kw : sql_keyword_list()) {
        if (detail::contains_ci(s, kw)) {
            f.sql_keyword_flag = 1;
            break;
        }
    }
    auto has_traversal = [](std::string_view t) {
        return t.find("../") != std::string_view::npos || t.find("..\\") != std::string_view::npos;
    };
    f.traversal_flag = (has_traversal(s) || has_traversal(req.decoded_once)) ? 1 : 0;
    return f;
}

// ---------------------------------------------------------------------------
// TF-IDF character n-grams
// ---------------------------------------------------------------------------

namespace detail {

struct TransparentStringHash {
    using is_transparent = void;
    size_t operator()(std::string_view sv) const noexcept {
        return std::hash<std::string_view>{}(sv);
    }
};

inline uint64_t fnv1a(std::string_view data, uint64_t h = 0xcbf29ce484222325ull) {
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

} // namespace detail

/// Character n-gram TF-IDF vectorizer with a document-frequency-capped
/// vocabulary. Fit on the training split only; a fitted instance is
/// immutable and safe for concurrent transform calls.
///
/// idf(t) = ln((1+N)/(1+df(t))) + 1; transformed vectors are L2-normalized.
class TfidfVectorizer {
public:
    using SparseEntry = std::pair<uint32_t, double>;

    void fit(std::span<const std::string> corpus, size_t max_features = 2000, size_t n_lo = 1,
             size_t n_hi = 2) {
        if (corpus.empty()) throw ValidationError("EmptyCorpus", "cannot fit on an empty corpus");
        if (n_lo == 0 || n_hi < n_lo)
            throw ValidationError("InvalidParams", "bad n-gram range");
        n_lo_ = n_lo;
        n_hi_ = n_hi;

        std::unordered_map<std::string, uint32_t, detail::TransparentStringHash, std::equal_to<>> df;
        std::vector<std::string_view> doc_terms;
        uint64_t fp = 0xcbf29ce484222325ull;
        for (const auto& doc : corpus) {
            fp = detail::fnv1a(doc, fp);
            fp = detail::fnv1a(std::string_view("\x1f", 1), fp);
            doc_terms.clear();
            for_each_ngram(doc, [&](std::string_view g) { doc_terms.push_back(g); });
            std::sort(doc_terms.begin(), doc_terms.end());
            doc_terms.erase(std::unique(doc_terms.begin(), doc_terms.end()), doc_terms.end());
            for (auto g : doc_terms) {
                auto it = df.find(g);
                if (it == df.end()) df.emplace(std::string(g), 1);
                else ++it->second;
            }
        }

        std::vector<std::pair<std::string_view, uint32_t>> ranked;
        ranked.reserve(df.size());
        for (const auto& [term, count] : df) ranked.emplace_back(term, count);
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        if (ranked.size() > max_features) ranked.resize(max_features);

        terms_.clear();
        idf_.clear();
        index_.clear();
        double n_docs = static_cast<double>(corpus.size());
        for (uint32_t col = 0; col < ranked.size(); ++col) {
            terms_.emplace_back(ranked[col].first);
            idf_.push_back(std::log((1.0 + n_docs) / (1.0 + static_cast<double>(ranked[col].second))) +
                           1.0);
            index_.emplace(terms_.back(), col);
        }
        fingerprint_ = fp ^ (static_cast<uint64_t>(corpus.size()) << 1);
        fitted_ = true;
    }

    /// Raw-count tf * idf, L2-normalized; out-of-vocabulary n-grams are
    /// ignored. Output is sorted by column index.
    std::vector<SparseEntry> transform(std::string_view s) const {
        if (!fitted_) throw ValidationError("NotFitted", "vectorizer has not been fit");
        std::vector<uint32_t> cols;
        for_each_ngram(s, [&](std::string_view g) {
            auto it = index_.find(g);
            if (it != index_.end()) cols.push_back(it->second);
        });
        if (cols.empty()) return {};
        std::sort(cols.begin(), cols.end());

        std::vector<SparseEntry> out;
        double norm_sq = 0.0;
        for (size_t i = 0; i < cols.size();) {
            size_t j = i;
            while (j < cols.size() && cols[j] == cols[i]) ++j;
            double w = static_cast<double>(j - i) * idf_[cols[i]];
            out.emplace_back(cols[i], w);
            norm_sq += w * w;
            i = j;
        }
        double norm = std::sqrt(norm_sq);
        if (norm > 0.0)
            for (auto& [col, w] : out) w /= norm;
        return out;
    }

    bool fitted() const { return fitted_; }
    size_t vocabulary_size() const { return terms_.size(); }
    const std::vector<std::string>& terms() const { return terms_; }
    const std::vector<double>& idf() const { return idf_; }
    uint64_t fingerprint() const { return fingerprint_; }
    size_t ngram_lo() const { return n_lo_; }
    size_t ngram_hi() const { return n_hi_; }

    /// Rebuilds a fitted instance from serialized state (model loading).
    static TfidfVectorizer from_parts(std::vector<std::string> terms, std::vector<double> idf,
                                      size_t n_lo, size_t n_hi, uint64_t fingerprint) {
        if (terms.size() != idf.size())
            throw ValidationError("CorruptFile", "vectorizer terms/idf length mismatch");
        TfidfVectorizer v;
        v.terms_ = std::move(terms);
        v.idf_ = std::move(idf);
        v.n_lo_ = n_lo;
        v.n_hi_ = n_hi;
        v.fingerprint_ = fingerprint;
        for (uint32_t col = 0; col < v.terms_.size(); ++col) v.index_.emplace(v.terms_[col], col);
        v.fitted_ = true;
        return v;
    }

private:
    template <typename Fn>
    void for_each_ngram(std::string_view s, Fn&& fn) const {
        for (size_t n = n_lo_; n <= n_hi_; ++n) {
            if (s.size() < n) break;
            for (size_t i = 0; i + n <= s.size(); ++i) fn(s.substr(i, n));
        }
    }

    std::vector<std::string> terms_;
    std::vector<double> idf_;
    std::unordered_map<std::string, uint32_t, detail::TransparentStringHash, std::equal_to<>> index_;
    size_t n_lo_ = 1, n_hi_ = 2;
    uint64_t fingerprint_ = 0;
    bool fitted_ = false;
};

// ---------------------------------------------------------------------------
// Combined feature space
// ---------------------------------------------------------------------------

/// Dense handcrafted block followed by the sparse TF-IDF block. Sparse
/// column indices are relative to the TF-IDF block.
struct FeatureVector {
    std::vector<double> dense;
    std::vector<TfidfVectorizer::SparseEntry> sparse;
    std::string schema_version;

    size_t width(size_t vocabulary_size) const { return dense.size() + vocabulary_size; }
};

constexpr const char* kFeatureSchemaVersion = "hf16.tfidf12.v1";

struct FeaturePipeline {
    TfidfVectorizer vectorizer;
    std::string schema_version = kFeatureSchemaVersion;

    size_t width() const { return HandcraftedFeatures::kWidth + vectorizer.vocabulary_size(); }

    FeatureVector featurize(const NormalizedRequest& req) const {
        if (!vectorizer.fitted()) throw ValidationError("NotFitted", "pipeline vectorizer not fit");
        FeatureVector fv;
        auto flat = extract_handcrafted(req).flatten();
        fv.dense.assign(flat.begin(), flat.end());
        fv.sparse = vectorizer.transform(req.raw);
        fv.schema_version = schema_version;
        return fv;
    }
};

} // namespace wamm

#endif // WAMM_FEATURES_HPP
