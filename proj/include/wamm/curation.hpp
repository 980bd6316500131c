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

#ifndef WAMM_CURATION_HPP
#define WAMM_CURATION_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "wamm/corpus.hpp"
#include "wamm/error.hpp"
#include "wamm/features.hpp"
#include "wamm/fingerprints.hpp"

namespace wamm {

// ---------------------------------------------------------------------------
// Shingles and MinHash
// ---------------------------------------------------------------------------

/// Set of all contiguous k-character substrings; strings shorter than k
/// yield the singleton {s}.
inline std::set<std::string> shingle(std::string_view s, size_t k) {
    if (k == 0) throw ValidationError("InvalidParams", "shingle size must be >= 1");
    std::set<std::string> out;
    if (s.size() < k) {
        out.emplace(s);
        return out;
    }
    for (size_t i = 0; i + k <= s.size(); ++i) out.emplace(s.substr(i, k));
    return out;
}

namespace detail {

/// Sorted, deduplicated 64-bit shingle hashes; the working representation
/// behind the string-set contract.
inline std::vector<uint64_t> hashed_shingles(std::string_view s, size_t k) {
    std::vector<uint64_t> out;
    if (s.size() < k) {
        out.push_back(fnv1a(s));
    } else {
        out.reserve(s.size() - k + 1);
        for (size_t i = 0; i + k <= s.size(); ++i) out.push_back(fnv1a(s.substr(i, k)));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

inline double jaccard_sorted(const std::vector<uint64_t>& a, const std::vector<uint64_t>& b) {
    if (a.empty() && b.empty()) return 1.0;
    size_t inter = 0, i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) { ++inter; ++i; ++j; }
        else if (a[i] < b[j]) ++i;
        else ++j;
    }
    size_t uni = a.size() + b.size() - inter;
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

} // namespace detail

inline double exact_jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 1.0;
    size_t inter = 0;
    const auto& small = a.size() <= b.size() ? a : b;
    const auto& large = a.size() <= b.size() ? b : a;
    for (const auto& s : small) inter += large.count(s);
    size_t uni = a.size() + b.size() - inter;
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

struct MinHashSignature {
    uint64_t record_id = 0;
    std::vector<uint64_t> hashes; // length P; all-max sentinel for empty sets
};

/// Seeded affine permutation family over 64-bit shingle hashes. Coordinate i
/// holds min over shingles of (a_i * x + b_i) with odd a_i.
class MinHasher {
public:
    MinHasher(size_t permutations, uint64_t seed) {
        if (permutations < 16)
            throw ValidationError("InvalidParams", "need at least 16 permutations");
        std::mt19937_64 rng(seed);
        a_.resize(permutations);
        b_.resize(permutations);
        for (size_t i = 0; i < permutations; ++i) {
            a_[i] = rng() | 1ull;
            b_[i] = rng();
        }
    }

    size_t permutations() const { return a_.size(); }

    MinHashSignature sign(const std::vector<uint64_t>& hashed_shingles, uint64_t record_id = 0) const {
        MinHashSignature sig;
        sig.record_id = record_id;
        sig.hashes.assign(a_.size(), UINT64_MAX);
        for (uint64_t x : hashed_shingles)
            for (size_t i = 0; i < a_.size(); ++i) {
                uint64_t h = a_[i] * x + b_[i];
                if (h < sig.hashes[i]) sig.hashes[i] = h;
            }
        return sig;
    }

private:
    std::vector<uint64_t> a_, b_;
};

inline MinHashSignature minhash(const std::set<std::string>& shingles, size_t permutations,
                                uint64_t seed) {
    std::vector<uint64_t> hashed;
    hashed.reserve(shingles.size());
    for (const auto& s : shingles) hashed.push_back(detail::fnv1a(s));
    std::sort(hashed.begin(), hashed.end());
    hashed.erase(std::unique(hashed.begin(), hashed.end()), hashed.end());
    return MinHasher(permutations, seed).sign(hashed);
}

/// Fraction of equal coordinates; unbiased estimator of the Jaccard
/// similarity of the underlying sets.
inline double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b) {
    if (a.hashes.size() != b.hashes.size() || a.hashes.empty())
        throw ValidationError("InvalidParams", "signatures come from different index parameters");
    size_t eq = 0;
    for (size_t i = 0; i < a.hashes.size(); ++i) eq += a.hashes[i] == b.hashes[i];
    return static_cast<double>(eq) / static_cast<double>(a.hashes.size());
}

// ---------------------------------------------------------------------------
// Banded LSH near-duplicate removal
// ---------------------------------------------------------------------------

struct DedupParams {
    size_t shingle_k = 5;
    size_t permutations = 128;
    size_t bands = 16;
    size_t rows = 8;
    double jaccard_threshold = 0.9;
};

struct DedupCluster {
    uint64_t kept_id = 0;
    std::vector<std::pair<uint64_t, double>> removed; // (record_id, verified Jaccard)
};

struct DedupReport {
    DedupParams params;
    size_t input_records = 0;
    size_t eligible_records = 0; // Normal-labeled
    size_t removed_total = 0;
    std::vector<DedupCluster> clusters;

    nlohmann::json to_json() const {
        nlohmann::json cl = nlohmann::json::array();
        for (const auto& c : clusters) {
            nlohmann::json removed = nlohmann::json::array();
            for (const auto& [id, j] : c.removed) removed.push_back({{"id", id}, {"jaccard", j}});
            cl.push_back({{"kept_id", c.kept_id}, {"removed", removed}});
        }
        return {{"params",
                 {{"shingle_k", params.shingle_k},
                  {"permutations", params.permutations},
                  {"bands", params.bands},
                  {"rows", params.rows},
                  {"jaccard_threshold", params.jaccard_threshold}}},
                {"input_records", input_records},
                {"eligible_records", eligible_records},
                {"removed_total", removed_total},
                {"clusters", cl}};
    }
};

/// Removes near-duplicate Normal records. Candidate pairs must share an LSH
/// band; every candidate is then verified by exact Jaccard on shingle sets
/// before removal, so precision is 1.0 by construction. Attack-labeled
/// records are never touched; first-seen records are kept.
inline std::pair<Dataset, DedupReport> lsh_dedupe(const Dataset& ds, const DedupParams& params,
                                                  uint64_t seed) {
    if (params.bands * params.rows != params.permutations)
        throw ValidationError("InvalidParams", "bands*rows must equal permutation count");
    if (!(params.jaccard_threshold > 0.0 && params.jaccard_threshold <= 1.0))
        throw ValidationError("InvalidParams", "jaccard_threshold must be in (0,1]");

    DedupReport report;
    report.params = params;
    report.input_records = ds.size();

    MinHasher hasher(params.permutations, seed);

    struct Kept {
        uint64_t record_id;
        std::vector<uint64_t> shingles;
        size_t cluster = SIZE_MAX; // index into report.clusters, lazily created
    };
    std::vector<Kept> kept_normals;
    // band hash -> indices into kept_normals
    std::unordered_map<uint64_t, std::vector<uint32_t>> buckets;
    std::vector<char> remove_flag(ds.size(), 0);
    std::unordered_map<uint64_t, size_t> cluster_of_kept; // record_id -> cluster index

    std::vector<uint64_t> band_keys(params.bands);

    for (size_t rec_idx = 0; rec_idx < ds.records.size(); ++rec_idx) {
        const auto& rec = ds.records[rec_idx];
        if (rec.label != AttackClass::Normal) continue;
        ++report.eligible_records;

        auto shingles = detail::hashed_shingles(rec.full_request, params.shingle_k);
        auto sig = hasher.sign(shingles, rec.record_id);

        for (size_t b = 0; b < params.bands; ++b) {
            uint64_t h = 0xcbf29ce484222325ull ^ (b * 0x9E3779B97F4A7C15ull);
            for (size_t r = 0; r < params.rows; ++r) {
                uint64_t v = sig.hashes[b * params.rows + r];
                h ^= v;
                h *= 0x100000001b3ull;
            }
            band_keys[b] = h;
        }

        // Gather candidate keepers (ascending first-seen order), verify
        // exact Jaccard, remove on the first keeper meeting the threshold.
        std::vector<uint32_t> candidates;
        for (size_t b = 0; b < params.bands; ++b) {
            auto it = buckets.find(band_keys[b]);
            if (it == buckets.end()) continue;
            candidates.insert(candidates.end(), it->second.begin(), it->second.end());
        }
        std::sort(candidates.begin(), candidates.end());
        candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

        bool removed = false;
        for (uint32_t cand : candidates) {
            double j = detail::jaccard_sorted(shingles, kept_normals[cand].shingles);
            if (j >= params.jaccard_threshold) {
                uint64_t keeper_id = kept_normals[cand].record_id;
                auto [it, fresh] = cluster_of_kept.try_emplace(keeper_id, report.clusters.size());
                if (fresh) report.clusters.push_back({keeper_id, {}});
                report.clusters[it->second].removed.emplace_back(rec.record_id, j);
                remove_flag[rec_idx] = 1;
                ++report.removed_total;
                removed = true;
                break;
            }
        }
        if (!removed) {
            uint32_t idx = static_cast<uint32_t>(kept_normals.size());
            kept_normals.push_back({rec.record_id, std::move(shingles), SIZE_MAX});
            for (size_t b = 0; b < params.bands; ++b) buckets[band_keys[b]].push_back(idx);
        }
    }

    Dataset out;
    out.provenance = ds.provenance.empty() ? "dedup" : ds.provenance + "+dedup";
    for (size_t i = 0; i < ds.records.size(); ++i)
        if (!remove_flag[i]) out.records.push_back(ds.records[i]);
    return {std::move(out), std::move(report)};
}

// ---------------------------------------------------------------------------
// Fingerprint-driven mislabel flagging
// ---------------------------------------------------------------------------

struct MislabelReport {
    struct Flag {
        uint64_t record_id;
        std::set<AttackClass> categories;
    };
    std::string bank_version;
    size_t benign_total = 0;
    std::vector<Flag> flagged;
    std::map<AttackClass, size_t> per_category;

    size_t flagged_total() const { return flagged.size(); }

    nlohmann::json to_json() const {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& [cls, count] : per_category) {
            double pct = benign_total == 0
                             ? 0.0
                             : 100.0 * static_cast<double>(count) / static_cast<double>(benign_total);
            rows.push_back({{"category", class_name(cls)}, {"count", count}, {"percent_of_benign", pct}});
        }
        nlohmann::json flags = nlohmann::json::array();
        for (const auto& f : flagged) {
            nlohmann::json cats = nlohmann::json::array();
            for (auto c : f.categories) cats.push_back(class_name(c));
            flags.push_back({{"record_id", f.record_id}, {"categories", cats}});
        }
        return {{"bank_version", bank_version},
                {"benign_total", benign_total},
                {"flagged_total", flagged.size()},
                {"per_category", rows},
                {"flagged", flags}};
    }
};

/// Runs the bank over every Normal-labeled record. A record is flagged when
/// any category matches; a multi-category hit counts once per category but
/// only once overall. Labels are never modified.
inline MislabelReport flag_mislabeled(const Dataset& ds, const PatternBank& bank) {
    MislabelReport report;
    report.bank_version = bank.version();
    for (const auto& rec : ds.records) {
        if (rec.label != AttackClass::Normal) continue;
        ++report.benign_total;
        auto match = match_categories(bank, parse_request(rec.full_request),
                                      MatchScope::DecodedVariants, rec.record_id);
        if (match.matched_categories.empty()) continue;
        for (AttackClass c : match.matched_categories) ++report.per_category[c];
        report.flagged.push_back({rec.record_id, std::move(match.matched_categories)});
    }
    return report;
}

// ---------------------------------------------------------------------------
// External corrections
// ---------------------------------------------------------------------------

/// Applies (record_id, new_class) corrections from a CSV file with header
/// `record_id,new_class`. Every referenced record must exist.
inline Dataset apply_corrections(const Dataset& ds, const std::string& corrections_csv_path) {
    if (!std::filesystem::exists(corrections_csv_path))
        throw IoError("FileNotFound", corrections_csv_path);
    std::ifstream in(corrections_csv_path, std::ios::binary);
    if (!in) throw IoError("FileNotFound", "cannot open " + corrections_csv_path);
    auto rows = read_csv(in);
    if (rows.empty())
        throw ValidationError("MalformedRow", "corrections file has no header row");
    const auto& header = rows.front().fields;
    if (header.size() < 2 || !detail::iequals(header[0], "record_id") ||
        !detail::iequals(header[1], "new_class"))
        throw ValidationError("MalformedRow", "corrections header must be record_id,new_class");

    std::unordered_map<uint64_t, size_t> by_id;
    for (size_t i = 0; i < ds.records.size(); ++i) by_id[ds.records[i].record_id] = i;

    Dataset out = ds;
    size_t applied = 0;
    for (size_t r = 1; r < rows.size(); ++r) {
        const auto& f = rows[r].fields;
        if (f.size() < 2)
            throw ValidationError("MalformedRow",
                                  "corrections line " + std::to_string(rows[r].line) + " has too few columns");
        uint64_t id;
        try {
            id = std::stoull(f[0]);
        } catch (const std::exception&) {
            throw ValidationError("MalformedRow",
                                  "bad record_id at line " + std::to_string(rows[r].line));
        }
        auto it = by_id.find(id);
        if (it == by_id.end())
            throw ValidationError("UnknownRecordId", std::to_string(id));
        auto cls = parse_class(f[1]);
        if (!cls) throw ValidationError("UnknownClass", f[1]);
        out.records[it->second].label = *cls;
        ++applied;
    }
    out.provenance = (out.provenance.empty() ? "" : out.provenance + "+") + "corrections(" +
                     std::to_string(applied) + ")";
    return out;
}

} // namespace wamm

#endif // WAMM_CURATION_HPP
