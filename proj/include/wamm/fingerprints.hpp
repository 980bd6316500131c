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

#ifndef WAMM_FINGERPRINTS_HPP
#define WAMM_FINGERPRINTS_HPP

#include <fstream>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "wamm/corpus.hpp"
#include "wamm/error.hpp"
#include "wamm/normalize.hpp"

namespace wamm {

/// One signature: a category, a stable id, and a case-insensitive regex.
struct FingerprintPattern {
    AttackClass category;
    std::string id;
    std::string source;
    std::regex re;
};

/// Immutable regex bank loaded from a versioned text file
/// (`category<TAB>id<TAB>regex`, `#` comments, `!version <semver>` header).
/// Matching is read-only and safe to share across threads.
class PatternBank {
public:
    static PatternBank parse(std::string_view text) {
        PatternBank bank;
        std::set<std::string> seen_ids;
        size_t line_no = 0;
        size_t pos = 0;
        while (pos <= text.size()) {
            size_t eol = text.find('\n', pos);
            std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos
                                                                                   : eol - pos);
            pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
            ++line_no;
            std::string_view t = detail::trim(line);
            if (t.empty() || t[0] == '#') continue;
            if (t[0] == '!') {
                if (t.substr(0, 9) == "!version ") {
                    bank.version_ = std::string(detail::trim(t.substr(9)));
                    continue;
                }
                throw ValidationError("MalformedRow",
                                      "unknown bank directive at line " + std::to_string(line_no));
            }
            size_t tab1 = t.find('\t');
            size_t tab2 = tab1 == std::string_view::npos ? std::string_view::npos : t.find('\t', tab1 + 1);
            if (tab1 == std::string_view::npos || tab2 == std::string_view::npos)
                throw ValidationError("MalformedRow",
                                      "bank line " + std::to_string(line_no) +
                                          " is not category<TAB>id<TAB>regex");
            auto category = parse_class(t.substr(0, tab1));
            if (!category)
                throw ValidationError("UnknownClass", std::string(t.substr(0, tab1)) + " at line " +
                                                          std::to_string(line_no));
            std::string id(detail::trim(t.substr(tab1 + 1, tab2 - tab1 - 1)));
            std::string source(t.substr(tab2 + 1));
            if (id.empty())
                throw ValidationError("MalformedRow", "empty pattern id at line " + std::to_string(line_no));
            if (!seen_ids.insert(id).second)
                throw ValidationError("MalformedRow", "duplicate pattern id " + id);
            FingerprintPattern p;
            p.category = *category;
            p.id = std::move(id);
            p.source = source;
            try {
                p.re = std::regex(source, std::regex::ECMAScript | std::regex::icase | std::regex::optimize);
            } catch (const std::regex_error& e) {
                throw ValidationError("MalformedRow",
                                      "pattern " + p.id + " does not compile: " + e.what());
            }
            bank.patterns_.push_back(std::move(p));
        }
        if (bank.version_.empty())
            throw ValidationError("MalformedRow", "bank file is missing the !version header");
        bank.check_category_floor();
        return bank;
    }

    static PatternBank load_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("FileNotFound", path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse(ss.str());
    }

    const std::string& version() const { return version_; }
    const std::vector<FingerprintPattern>& patterns() const { return patterns_; }
    size_t size() const { return patterns_.size(); }

    std::set<AttackClass> categories() const {
        std::set<AttackClass> cats;
        for (const auto& p : patterns_) cats.insert(p.category);
        return cats;
    }

private:
    void check_category_floor() const {
        static constexpr std::array<AttackClass, 6> kRequired = {
            AttackClass::Sqli, AttackClass::Xss,  AttackClass::PathTraversal,
            AttackClass::OsCommandInjection, AttackClass::Ssti, AttackClass::Ssrf};
        auto cats = categories();
        for (AttackClass c : kRequired)
            if (!cats.count(c))
                throw ValidationError("MalformedRow",
                                      std::string("bank must cover category ") + class_name(c));
    }

    std::string version_;
    std::vector<FingerprintPattern> patterns_;
};

/// Which texts a pattern is checked against. The default scans the raw text
/// and both percent-decoded variants; RawOnly restricts to raw (used for
/// evasion comparisons).
enum class MatchScope { RawOnly, DecodedVariants };

struct MatchReport {
    uint64_t record_id = 0;
    std::set<AttackClass> matched_categories;
    std::vector<std::string> matched_pattern_ids;

    bool empty() const { return matched_pattern_ids.empty(); }
};

/// A pattern matches if it hits ANY of the scoped texts; all matching
/// patterns are reported (multi-hit allowed), in bank order.
inline MatchReport match_categories(const PatternBank& bank, const NormalizedRequest& req,
                                    MatchScope scope = MatchScope::DecodedVariants,
                                    uint64_t record_id = 0) {
    MatchReport report;
    report.record_id = record_id;

    std::array<const std::string*, 3> texts{};
    size_t n_texts = 0;
    texts[n_texts++] = &req.raw;
    if (scope == MatchScope::DecodedVariants) {
        if (req.decoded_once != req.raw) texts[n_texts++] = &req.decoded_once;
        if (req.decoded_twice != req.decoded_once) texts[n_texts++] = &req.decoded_twice;
    }

    for (const auto& p : bank.patterns()) {
        for (size_t i = 0; i < n_texts; ++i) {
            if (std::regex_search(*texts[i], p.re)) {
                report.matched_categories.insert(p.category);
                report.matched_pattern_ids.push_back(p.id);
                break;
            }
        }
    }
    return report;
}

struct BlockDecision {
    bool blocked = false;
    MatchReport report;
};

/// Boolean match→block rule engine: blocked iff any category matched.
inline BlockDecision rule_block(const PatternBank& bank, const NormalizedRequest& req,
                                MatchScope scope = MatchScope::DecodedVariants,
                                uint64_t record_id = 0) {
    BlockDecision d;
    d.report = match_categories(bank, req, scope, record_id);
    d.blocked = !d.report.matched_categories.empty();
    return d;
}

} // namespace wamm

#endif // WAMM_FINGERPRINTS_HPP
