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

#ifndef WAMM_AUGMENT_HPP
#define WAMM_AUGMENT_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "wamm/corpus.hpp"
#include "wamm/error.hpp"

namespace wamm {

/// Label-preserving payload transformations: pure syntactic rewrites that
/// generate encoding/obfuscation variants. Deterministic given
/// (input, op, seed); only case_toggle consumes the seed.
enum class AugmentOp : uint8_t {
    UrlEncodeAll,
    DoubleUrlEncode,
    CaseToggle,
    SqlInlineComment,
    WhitespaceSubstitute,
    HtmlEntityEncode,
};

constexpr std::array<AugmentOp, 6> all_augment_ops() {
    return {AugmentOp::UrlEncodeAll,      AugmentOp::DoubleUrlEncode,
            AugmentOp::CaseToggle,        AugmentOp::SqlInlineComment,
            AugmentOp::WhitespaceSubstitute, AugmentOp::HtmlEntityEncode};
}

inline const char* augment_op_name(AugmentOp op) {
    switch (op) {
    case AugmentOp::UrlEncodeAll: return "url_encode_all";
    case AugmentOp::DoubleUrlEncode: return "double_url_encode";
    case AugmentOp::CaseToggle: return "case_toggle";
    case AugmentOp::SqlInlineComment: return "sql_inline_comment";
    case AugmentOp::WhitespaceSubstitute: return "whitespace_substitute";
    case AugmentOp::HtmlEntityEncode: return "html_entity_encode";
    }
    return "?";
}

inline std::optional<AugmentOp> parse_augment_op(std::string_view name) {
    for (AugmentOp op : all_augment_ops())
        if (name == augment_op_name(op)) return op;
    return std::nullopt;
}

/// Percent-encodes every non-alphanumeric byte (uppercase hex).
inline std::string url_encode_all(std::string_view s) {
    static const char* kHex = "0123456789ABCDEF";
    std::string out;
    out.reserve(s.size() * 3);
    for (unsigned char c : s) {
        bool alnum = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
        if (alnum) {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(kHex[c >> 4]);
            out.push_back(kHex[c & 0xF]);
        }
    }
    return out;
}

namespace detail {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

} // namespace detail

inline std::string apply_augment(AugmentOp op, std::string_view s, uint64_t seed = 0) {
    switch (op) {
    case AugmentOp::UrlEncodeAll:
        return url_encode_all(s);
    case AugmentOp::DoubleUrlEncode:
        return url_encode_all(url_encode_all(s));
    case AugmentOp::CaseToggle: {
        std::mt19937_64 rng(detail::splitmix64(seed));
        std::string out(s);
        for (char& c : out) {
            if (c >= 'a' && c <= 'z') {
                if (rng() & 1) c = static_cast<char>(c - 32);
            } else if (c >= 'A' && c <= 'Z') {
                if (rng() & 1) c = static_cast<char>(c + 32);
            }
        }
        return out;
    }
    case AugmentOp::SqlInlineComment: {
        // Whitespace runs separating two alphabetic tokens become /**/.
        std::string out;
        auto is_alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); };
        auto is_ws = [](char c) { return c == ' ' || c == '\t'; };
        size_t i = 0;
        while (i < s.size()) {
            if (is_ws(s[i]) && !out.empty() && is_alpha(out.back())) {
                size_t j = i;
                while (j < s.size() && is_ws(s[j])) ++j;
                if (j < s.size() && is_alpha(s[j])) {
                    out += "/**/";
                    i = j;
                    continue;
                }
            }
            out.push_back(s[i]);
            ++i;
        }
        return out;
    }
    case AugmentOp::WhitespaceSubstitute: {
        static const std::array<std::string_view, 3> kSubs = {"/**/", "%09", "%0a"};
        std::string out;
        size_t n = 0;
        for (char c : s) {
            if (c == ' ') out += kSubs[n++ % kSubs.size()];
            else out.push_back(c);
        }
        return out;
    }
    case AugmentOp::HtmlEntityEncode: {
        std::string out;
        for (char c : s) {
            switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            case '&': out += "&amp;"; break;
            default: out.push_back(c); break;
            }
        }
        return out;
    }
    }
    throw ValidationError("InvalidParams", "unknown augment op");
}

/// Appends per_record_variants transformed copies of every attack-labeled
/// record (Normal records pass through untouched). Ops are drawn without
/// replacement per record from a seeded shuffle, so the same seed yields a
/// byte-identical dataset. Variants carry an "augmented:<op>" tag and fresh
/// sequential record ids.
inline Dataset expand_dataset(const Dataset& ds, const std::vector<AugmentOp>& ops,
                              size_t per_record_variants, uint64_t seed) {
    if (per_record_variants > ops.size())
        throw ValidationError("InvalidParams",
                              "per_record_variants exceeds the number of available ops");
    Dataset out = ds;
    if (per_record_variants == 0 || ops.empty()) return out;

    uint64_t next_id = 0;
    for (const auto& rec : ds.records) next_id = std::max(next_id, rec.record_id + 1);

    for (const auto& rec : ds.records) {
        if (!is_attack(rec.label)) continue;
        uint64_t rec_seed = detail::splitmix64(seed ^ detail::splitmix64(rec.record_id));
        std::mt19937_64 rng(rec_seed);
        std::vector<size_t> order(ops.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        detail::deterministic_shuffle(order, rng);
        for (size_t v = 0; v < per_record_variants; ++v) {
            AugmentOp op = ops[order[v]];
            LabeledRecord variant;
            variant.full_request = apply_augment(op, rec.full_request, rec_seed + v);
            variant.label = rec.label;
            variant.record_id = next_id++;
            variant.aug = std::string("augmented:") + augment_op_name(op);
            out.records.push_back(std::move(variant));
        }
    }
    out.provenance = (ds.provenance.empty() ? "" : ds.provenance + "+") + "augmented";
    return out;
}

} // namespace wamm

#endif // WAMM_AUGMENT_HPP
