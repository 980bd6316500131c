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

#ifndef WAMM_CORPUS_HPP
#define WAMM_CORPUS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "wamm/csv.hpp"
#include "wamm/error.hpp"

namespace wamm {

// ---------------------------------------------------------------------------
// Taxonomy
// ---------------------------------------------------------------------------

/// CAPEC-aligned attack taxonomy plus the benign class. ProtocolManipulation
/// is a legacy label kept for ingestion compatibility with older corpora; it
/// has no CAPEC id and is tracked separately in load reports.
enum class AttackClass : uint8_t {
    Normal = 0,
    Sqli,
    OsCommandInjection,
    PathTraversal,
    Xss,
    Ssrf,
    CommandInjection,
    Ssti,
    CodeInjection,
    ProtocolManipulation,
};

constexpr size_t kClassCount = 10;

constexpr std::array<AttackClass, kClassCount> all_classes() {
    return {AttackClass::Normal,           AttackClass::Sqli,
            AttackClass::OsCommandInjection, AttackClass::PathTraversal,
            AttackClass::Xss,              AttackClass::Ssrf,
            AttackClass::CommandInjection, AttackClass::Ssti,
            AttackClass::CodeInjection,    AttackClass::ProtocolManipulation};
}

inline const char* class_name(AttackClass c) {
    switch (c) {
    case AttackClass::Normal: return "Normal";
    case AttackClass::Sqli: return "SQLi";
    case AttackClass::OsCommandInjection: return "OS Command Injection";
    case AttackClass::PathTraversal: return "Path Traversal";
    case AttackClass::Xss: return "XSS";
    case AttackClass::Ssrf: return "SSRF";
    case AttackClass::CommandInjection: return "Command Injection";
    case AttackClass::Ssti: return "SSTI";
    case AttackClass::CodeInjection: return "Code Injection";
    case AttackClass::ProtocolManipulation: return "Protocol Manipulation";
    }
    return "?";
}

/// CAPEC id for attack classes; nullopt for Normal and the legacy class.
inline std::optional<int> class_capec(AttackClass c) {
    switch (c) {
    case AttackClass::Sqli: return 66;
    case AttackClass::OsCommandInjection: return 88;
    case AttackClass::PathTraversal: return 126;
    case AttackClass::Xss: return 79;
    case AttackClass::Ssrf: return 918;
    case AttackClass::CommandInjection: return 248;
    case AttackClass::Ssti: return 1336;
    case AttackClass::CodeInjection: return 94;
    default: return std::nullopt;
    }
}

inline bool is_attack(AttackClass c) { return c != AttackClass::Normal; }

namespace detail {

inline bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        char x = a[i], y = b[i];
        if (x >= 'A' && x <= 'Z') x += 32;
        if (y >= 'A' && y <= 'Z') y += 32;
        if (x != y) return false;
    }
    return true;
}

inline std::string_view trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '\n')) --e;
    return s.substr(b, e - b);
}

/// Re-encodes arbitrary bytes as valid UTF-8, replacing every invalid
/// sequence with U+FFFD.
inline std::string utf8_lossy(std::string_view in) {
    static const char* kReplacement = "\xEF\xBF\xBD";
    std::string out;
    out.reserve(in.size());
    size_t i = 0;
    while (i < in.size()) {
        unsigned char b = static_cast<unsigned char>(in[i]);
        size_t len = 0;
        uint32_t min_cp = 0, cp = 0;
        if (b < 0x80) {
            out.push_back(static_cast<char>(b));
            ++i;
            continue;
        } else if ((b & 0xE0) == 0xC0) {
            len = 2; min_cp = 0x80; cp = b & 0x1F;
        } else if ((b & 0xF0) == 0xE0) {
            len = 3; min_cp = 0x800; cp = b & 0x0F;
        } else if ((b & 0xF8) == 0xF0) {
            len = 4; min_cp = 0x10000; cp = b & 0x07;
        } else {
            out += kReplacement;
            ++i;
            continue;
        }
        bool ok = i + len <= in.size();
        for (size_t j = 1; ok && j < len; ++j) {
            unsigned char cb = static_cast<unsigned char>(in[i + j]);
            if ((cb & 0xC0) != 0x80) ok = false;
            else cp = (cp << 6) | (cb & 0x3F);
        }
        if (ok && (cp < min_cp || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))) ok = false;
        if (ok) {
            out.append(in.substr(i, len));
            i += len;
        } else {
            out += kReplacement;
            ++i;
        }
    }
    return out;
}

/// Deterministic Fisher-Yates; avoids std::shuffle so results do not depend
/// on the standard library's distribution details.
template <typename T>
void deterministic_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
    for (size_t i = v.size(); i > 1; --i) {
        size_t j = static_cast<size_t>(rng() % i);
        std::swap(v[i - 1], v[j]);
    }
}

} // namespace detail

/// Accepts canonical class names (case-insensitive) and CAPEC-id aliases.
inline std::optional<AttackClass> parse_class(std::string_view s) {
    std::string_view t = detail::trim(s);
    for (AttackClass c : all_classes()) {
        if (detail::iequals(t, class_name(c))) return c;
        if (auto id = class_capec(c); id && t == std::to_string(*id)) return c;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Dataset
// ---------------------------------------------------------------------------

struct LabeledRecord {
    std::string full_request;
    AttackClass label = AttackClass::Normal;
    uint64_t record_id = 0;
    std::string aug; // augmentation provenance tag, empty for originals
};

struct Dataset {
    std::vector<LabeledRecord> records;
    std::string provenance;

    size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }
};

/// Row-level problems found during ingestion. Rejected rows are excluded
/// from the dataset but always accounted for here.
struct LoadReport {
    struct Rejection {
        size_t line;        // 1-based line number in the source file
        std::string reason; // "MalformedRow" | "UnknownClass" | "EmptyRequest"
        std::string detail;
    };
    size_t total_rows = 0;
    size_t accepted = 0;
    size_t legacy_rows = 0; // records ingested under the legacy class
    std::vector<Rejection> rejections;

    nlohmann::json to_json() const {
        std::map<std::string, size_t> by_reason;
        for (const auto& r : rejections) ++by_reason[r.reason];
        nlohmann::json rej = nlohmann::json::array();
        for (const auto& r : rejections)
            rej.push_back({{"line", r.line}, {"reason", r.reason}, {"detail", r.detail}});
        return {{"total_rows", total_rows},
                {"accepted", accepted},
                {"rejected", rejections.size()},
                {"legacy_rows", legacy_rows},
                {"rejections_by_reason", by_reason},
                {"rejections", rej}};
    }
};

struct LoadResult {
    Dataset dataset;
    LoadReport report;
};

enum class DatasetFormat { Jsonl, Csv };

inline DatasetFormat dataset_format_from_path(const std::string& path) {
    auto ext = std::filesystem::path(path).extension().string();
    if (detail::iequals(ext, ".csv")) return DatasetFormat::Csv;
    return DatasetFormat::Jsonl;
}

namespace detail {

struct RawRow {
    size_t line;
    bool malformed = false;
    std::string malformed_detail;
    std::string full_request;
    std::string class_text;
    std::optional<uint64_t> id;
};

inline void ingest_rows(const std::vector<RawRow>& rows, LoadResult& out) {
    std::map<uint64_t, bool> used_ids;
    uint64_t auto_id = 0;
    for (const auto& row : rows) {
        ++out.report.total_rows;
        uint64_t row_auto_id = auto_id++;
        if (row.malformed) {
            out.report.rejections.push_back({row.line, "MalformedRow", row.malformed_detail});
            continue;
        }
        if (trim(row.full_request).empty()) {
            out.report.rejections.push_back({row.line, "EmptyRequest", "full_request is empty"});
            continue;
        }
        auto cls = parse_class(row.class_text);
        if (!cls) {
            out.report.rejections.push_back({row.line, "UnknownClass", row.class_text});
            continue;
        }
        uint64_t id = row.id ? *row.id : row_auto_id;
        if (used_ids.count(id)) {
            out.report.rejections.push_back({row.line, "MalformedRow",
                                             "duplicate record id " + std::to_string(id)});
            continue;
        }
        used_ids[id] = true;
        if (*cls == AttackClass::ProtocolManipulation) ++out.report.legacy_rows;
        out.dataset.records.push_back({utf8_lossy(row.full_request), *cls, id, {}});
        ++out.report.accepted;
    }
}

} // namespace detail

/// Loads a labeled corpus. Rows with empty requests, unknown classes, or
/// structural problems are reported, never silently dropped. Record ids come
/// from the optional `id` column when present, otherwise from the 0-based
/// data-row ordinal; collisions reject the later row.
inline LoadResult load_dataset(const std::string& path, DatasetFormat format) {
    if (!std::filesystem::exists(path))
        throw IoError("FileNotFound", path);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("FileNotFound", "cannot open " + path);

    std::vector<detail::RawRow> rows;

    if (format == DatasetFormat::Jsonl) {
        std::string line;
        size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (detail::trim(line).empty()) continue;
            detail::RawRow row;
            row.line = line_no;
            nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded() || !j.is_object()) {
                row.malformed = true;
                row.malformed_detail = "invalid JSON object";
            } else if (!j.contains("full_request") || !j["full_request"].is_string() ||
                       !j.contains("class") || !j["class"].is_string()) {
                row.malformed = true;
                row.malformed_detail = "missing full_request/class string fields";
            } else {
                row.full_request = j["full_request"].get<std::string>();
                row.class_text = j["class"].get<std::string>();
                if (j.contains("id")) {
                    if (j["id"].is_number_unsigned())
                        row.id = j["id"].get<uint64_t>();
                    else {
                        row.malformed = true;
                        row.malformed_detail = "id must be a non-negative integer";
                    }
                }
            }
            rows.push_back(std::move(row));
        }
    } else {
        auto csv = read_csv(in);
        if (csv.empty())
            throw ValidationError("MalformedRow", "CSV file has no header row: " + path);
        int col_req = -1, col_class = -1, col_id = -1;
        const auto& header = csv.front().fields;
        for (size_t i = 0; i < header.size(); ++i) {
            if (detail::iequals(header[i], "full_request")) col_req = static_cast<int>(i);
            else if (detail::iequals(header[i], "class")) col_class = static_cast<int>(i);
            else if (detail::iequals(header[i], "id")) col_id = static_cast<int>(i);
        }
        if (col_req < 0 || col_class < 0)
            throw ValidationError("MalformedRow",
                                  "CSV header must contain full_request and class columns: " + path);
        for (size_t r = 1; r < csv.size(); ++r) {
            detail::RawRow row;
            row.line = csv[r].line;
            const auto& f = csv[r].fields;
            if (static_cast<int>(f.size()) <= std::max(col_req, col_class)) {
                row.malformed = true;
                row.malformed_detail = "row has too few columns";
            } else {
                row.full_request = f[static_cast<size_t>(col_req)];
                row.class_text = f[static_cast<size_t>(col_class)];
                if (col_id >= 0 && static_cast<size_t>(col_id) < f.size() && !f[static_cast<size_t>(col_id)].empty()) {
                    try {
                        row.id = std::stoull(f[static_cast<size_t>(col_id)]);
                    } catch (const std::exception&) {
                        row.malformed = true;
                        row.malformed_detail = "id must be a non-negative integer";
                    }
                }
            }
            rows.push_back(std::move(row));
        }
    }

    LoadResult result;
    result.dataset.provenance = path;
    detail::ingest_rows(rows, result);
    return result;
}

inline void save_dataset_jsonl(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("FileNotFound", "cannot write " + path);
    for (const auto& rec : ds.records) {
        nlohmann::json j{{"full_request", rec.full_request},
                         {"class", class_name(rec.label)},
                         {"id", rec.record_id}};
        if (!rec.aug.empty()) j["aug"] = rec.aug;
        out << j.dump() << '\n';
    }
    if (!out) throw IoError("FileNotFound", "write failed: " + path);
}

// ---------------------------------------------------------------------------
// Distribution, weights, split
// ---------------------------------------------------------------------------

inline std::map<AttackClass, size_t> class_distribution(const Dataset& ds) {
    std::map<AttackClass, size_t> dist;
    for (const auto& rec : ds.records) ++dist[rec.label];
    return dist;
}

/// Balanced weights w_c = N / (K * n_c) over the classes present, so that
/// the weighted sample count stays equal to N.
struct ClassWeights {
    std::map<AttackClass, double> weights;

    double at(AttackClass c) const {
        auto it = weights.find(c);
        return it == weights.end() ? 1.0 : it->second;
    }
};

inline ClassWeights class_weights(const Dataset& ds) {
    if (ds.empty()) throw ValidationError("EmptyDataset", "cannot weight an empty dataset");
    auto dist = class_distribution(ds);
    double n = static_cast<double>(ds.size());
    double k = static_cast<double>(dist.size());
    ClassWeights w;
    for (const auto& [cls, count] : dist)
        w.weights[cls] = n / (k * static_cast<double>(count));
    return w;
}

/// Per-class 80/20-style partition. Train takes round(fraction * n_c) of
/// each class (clamped so both sides keep at least one record), the largest
/// classes absorb any global rounding drift, and within-class assignment is
/// shuffled by a seeded PRNG. Output order preserves input order.
inline std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, double train_fraction,
                                                    uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ValidationError("InvalidParams", "train_fraction must be in (0,1)");

    std::map<AttackClass, std::vector<size_t>> by_class;
    for (size_t i = 0; i < ds.records.size(); ++i)
        by_class[ds.records[i].label].push_back(i);

    for (const auto& [cls, idx] : by_class)
        if (idx.size() < 2)
            throw ValidationError("ClassTooSmall",
                                  std::string(class_name(cls)) + " has fewer than 2 records");

    std::map<AttackClass, size_t> take;
    long long total_take = 0;
    for (const auto& [cls, idx] : by_class) {
        long long n = static_cast<long long>(idx.size());
        long long t = std::llround(train_fraction * static_cast<double>(n));
        t = std::clamp<long long>(t, 1, n - 1);
        take[cls] = static_cast<size_t>(t);
        total_take += t;
    }

    // Absorb global rounding drift in the largest classes, one record at a
    // time, without violating the one-per-side floor.
    long long target = std::llround(train_fraction * static_cast<double>(ds.size()));
    std::vector<AttackClass> by_size;
    for (const auto& [cls, idx] : by_class) by_size.push_back(cls);
    std::sort(by_size.begin(), by_size.end(), [&](AttackClass a, AttackClass b) {
        if (by_class[a].size() != by_class[b].size()) return by_class[a].size() > by_class[b].size();
        return static_cast<int>(a) < static_cast<int>(b);
    });
    size_t guard = 0;
    while (total_take != target && guard++ < 2 * kClassCount) {
        bool moved = false;
        for (AttackClass cls : by_size) {
            long long n = static_cast<long long>(by_class[cls].size());
            long long t = static_cast<long long>(take[cls]);
            if (total_take < target && t < n - 1) {
                take[cls] = static_cast<size_t>(t + 1);
                ++total_take;
                moved = true;
                break;
            }
            if (total_take > target && t > 1) {
                take[cls] = static_cast<size_t>(t - 1);
                --total_take;
                moved = true;
                break;
            }
        }
        if (!moved) break;
    }

    std::vector<char> in_train(ds.records.size(), 0);
    for (auto& [cls, idx] : by_class) {
        std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ull * (static_cast<uint64_t>(cls) + 1)));
        std::vector<size_t> shuffled = idx;
        detail::deterministic_shuffle(shuffled, rng);
        for (size_t i = 0; i < take[cls]; ++i) in_train[shuffled[i]] = 1;
    }

    Dataset train, test;
    train.provenance = ds.provenance;
    test.provenance = ds.provenance;
    for (size_t i = 0; i < ds.records.size(); ++i)
        (in_train[i] ? train : test).records.push_back(ds.records[i]);
    return {std::move(train), std::move(test)};
}

} // namespace wamm

#endif // WAMM_CORPUS_HPP
