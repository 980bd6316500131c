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

#ifndef WAMM_CSV_HPP
#define WAMM_CSV_HPP

#include <istream>
#include <string>
#include <vector>

#include "wamm/error.hpp"

namespace wamm {

struct CsvRow {
    std::vector<std::string> fields;
    size_t line; // 1-based line number where the row starts
};

/// RFC-4180 reader: quoted fields, "" escapes, embedded newlines, LF or
/// CRLF row terminators. Returns all rows including the header.
inline std::vector<CsvRow> read_csv(std::istream& in) {
    std::vector<CsvRow> rows;
    std::string field;
    CsvRow row;
    row.line = 1;
    size_t line = 1;
    bool in_quotes = false;
    bool row_has_data = false;

    char c;
    while (in.get(c)) {
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
        case '"':
            if (field.empty()) {
                in_quotes = true;
            } else {
                throw ValidationError("MalformedRow",
                                      "stray quote in unquoted CSV field at line " + std::to_string(line));
            }
            row_has_data = true;
            break;
        case ',':
            row.fields.push_back(std::move(field));
            field.clear();
            row_has_data = true;
            break;
        case '\r':
            break; // swallowed; the following \n ends the row
        case '\n':
            ++line;
            if (row_has_data || !field.empty()) {
                row.fields.push_back(std::move(field));
                field.clear();
                rows.push_back(std::move(row));
            }
            row = CsvRow{};
            row.line = line;
            row_has_data = false;
            break;
        default:
            field.push_back(c);
            row_has_data = true;
            break;
        }
    }
    if (in_quotes) throw ValidationError("MalformedRow", "unterminated quoted CSV field");
    if (row_has_data || !field.empty()) {
        row.fields.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

/// RFC-4180 field writer: quotes when the value contains a comma, quote,
/// or newline.
inline std::string csv_escape(const std::string& value) {
    bool needs_quotes = value.find_first_of(",\"\r\n") != std::string::npos;
    if (!needs_quotes) return value;
    std::string out = "\"";
    for (char ch : value) {
        if (ch == '"') out += "\"\"";
        else out.push_back(ch);
    }
    out += "\"";
    return out;
}

} // namespace wamm

#endif // WAMM_CSV_HPP
