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

#ifndef WAMM_NORMALIZE_HPP
#define WAMM_NORMALIZE_HPP

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace wamm {

/// Best-effort structural view of one raw request string. Parsing never
/// fails: inputs without a request-line shape fall back to an opaque
/// payload where `path` holds the whole text and `method` is absent.
struct NormalizedRequest {
    std::string raw;
    std::optional<std::string> method;
    std::string path;
    std::string query;
    std::string body;
    std::string decoded_once;  // percent_decode(raw)
    std::string decoded_twice; // percent_decode(decoded_once)
};

namespace detail {

inline int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

} // namespace detail

/// Replaces every maximal %HH sequence with the byte it encodes. A '%' not
/// followed by two hex digits passes through unchanged, and '+' is never
/// translated to space. Total function.
inline std::string percent_decode(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '%' && i + 2 < s.size()) {
            int hi = detail::hex_value(s[i + 1]);
            int lo = detail::hex_value(s[i + 2]);
            if (hi >= 0 && lo >= 0) {
                out.push_back(static_cast<char>(hi * 16 + lo));
                i += 2;
                continue;
            }
        }
        out.push_back(s[i]);
    }
    return out;
}

/// Number of non-empty '/'-separated segments. "/a/b/c" -> 3, "/" -> 0,
/// "//a//b" -> 2; a slashless string counts as one segment.
inline size_t url_depth(std::string_view path) {
    size_t depth = 0;
    size_t seg_len = 0;
    for (char c : path) {
        if (c == '/') {
            if (seg_len > 0) ++depth;
            seg_len = 0;
        } else {
            ++seg_len;
        }
    }
    if (seg_len > 0) ++depth;
    return depth;
}

inline bool is_http_method(std::string_view tok) {
    static constexpr std::array<std::string_view, 9> kMethods = {
        "GET", "POST", "PUT", "DELETE", "PATCH", "HEAD", "OPTIONS", "TRACE", "CONNECT"};
    for (auto m : kMethods)
        if (tok == m) return true;
    return false;
}

/// Splits raw text into method/path/query/body when the first token is an
/// HTTP method; otherwise returns the opaque fallback (path = raw). Text
/// after the first blank line is the body. Headers are not parsed.
inline NormalizedRequest parse_request(std::string_view raw) {
    NormalizedRequest req;
    req.raw = std::string(raw);
    req.decoded_once = percent_decode(raw);
    req.decoded_twice = percent_decode(req.decoded_once);

    auto is_ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };

    size_t tok_end = 0;
    while (tok_end < raw.size() && !is_ws(raw[tok_end])) ++tok_end;
    std::string_view first = raw.substr(0, tok_end);

    if (!is_http_method(first)) {
        req.path = req.raw; // opaque payload
        return req;
    }

    req.method = std::string(first);

    size_t uri_begin = tok_end;
    while (uri_begin < raw.size() && (raw[uri_begin] == ' ' || raw[uri_begin] == '\t')) ++uri_begin;
    size_t uri_end = uri_begin;
    while (uri_end < raw.size() && !is_ws(raw[uri_end])) ++uri_end;
    std::string_view uri = raw.substr(uri_begin, uri_end - uri_begin);

    size_t qmark = uri.find('?');
    if (qmark == std::string_view::npos) {
        req.path = std::string(uri);
    } else {
        req.path = std::string(uri.substr(0, qmark));
        req.query = std::string(uri.substr(qmark + 1));
    }

    // Body begins after the first blank line ("\n\n" or "\r\n\r\n").
    size_t blank = raw.find("\n\n");
    size_t body_begin = std::string_view::npos;
    if (blank != std::string_view::npos) body_begin = blank + 2;
    size_t crlf = raw.find("\r\n\r\n");
    if (crlf != std::string_view::npos && (body_begin == std::string_view::npos || crlf + 4 < body_begin))
        body_begin = crlf + 4;
    if (body_begin != std::string_view::npos && body_begin <= raw.size())
        req.body = std::string(raw.substr(body_begin));

    return req;
}

} // namespace wamm

#endif // WAMM_NORMALIZE_HPP
