//
// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 the SIT project contributors
//

#include "sit/csv.hpp"

#include "sit/errors.hpp"

namespace sit::csv {

namespace {

bool needs_quoting(const std::string& field) {
    return field.find_first_of(",\"\r\n") != std::string::npos;
}

void append_field(std::string& out, const std::string& field) {
    if (!needs_quoting(field)) {
        out += field;
        return;
    }
    out.push_back('"');
    for (char c : field) {
        if (c == '"')
            out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
}

} // namespace

std::string write_rows(const std::vector<std::vector<std::string>>& rows) {
    std::string out;
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i > 0)
                out.push_back(',');
            append_field(out, row[i]);
        }
        out += "\r\n";
    }
    return out;
}

std::vector<std::vector<std::string>> parse(std::span<const uint8_t> bytes) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool field_was_quoted = false;
    size_t i = 0;

    auto end_field = [&]() {
        row.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
    };
    auto end_row = [&]() {
        end_field();
        rows.push_back(std::move(row));
        row.clear();
    };

    while (i < bytes.size()) {
        const char c = static_cast<char>(bytes[i]);
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < bytes.size() && bytes[i + 1] == '"') {
                    field.push_back('"');
                    i += 2;
                } else {
                    in_quotes = false;
                    ++i;
                }
            } else {
                field.push_back(c);
                ++i;
            }
            continue;
        }
        switch (c) {
        case '"':
            if (!field.empty() || field_was_quoted)
                raise(ErrorCode::CsvMalformed, "quote inside unquoted field at byte " +
                                                   std::to_string(i));
            in_quotes = true;
            field_was_quoted = true;
            ++i;
            break;
        case ',':
            end_field();
            ++i;
            break;
        case '\r':
            if (i + 1 >= bytes.size() || bytes[i + 1] != '\n')
                raise(ErrorCode::CsvMalformed, "bare CR at byte " + std::to_string(i));
            end_row();
            i += 2;
            break;
        case '\n':
            end_row();
            ++i;
            break;
        default:
            if (field_was_quoted)
                raise(ErrorCode::CsvMalformed,
                      "garbage after closing quote at byte " + std::to_string(i));
            field.push_back(c);
            ++i;
            break;
        }
    }
    if (in_quotes)
        raise(ErrorCode::CsvMalformed, "unterminated quoted field");
    if (!field.empty() || field_was_quoted || !row.empty())
        end_row(); // final row without trailing newline

    if (!rows.empty()) {
        const size_t arity = rows.front().size();
        for (size_t r = 0; r < rows.size(); ++r)
            if (rows[r].size() != arity)
                raise(ErrorCode::CsvMalformed, "row " + std::to_string(r) + " has " +
                                                   std::to_string(rows[r].size()) +
                                                   " fields, expected " + std::to_string(arity));
    }
    return rows;
}

} // namespace sit::csv
