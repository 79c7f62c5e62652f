//
// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 the SIT project contributors
//

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sit::csv {

// RFC-4180: CRLF row endings, fields quoted when they contain a comma,
// quote or line break, embedded quotes doubled.
std::string write_rows(const std::vector<std::vector<std::string>>& rows);

// Strict reader for the same dialect (LF-only endings also accepted).
// Throws CsvMalformed on unbalanced quotes or garbage after a closing
// quote. All rows must have the same arity as the first.
std::vector<std::vector<std::string>> parse(std::span<const uint8_t> bytes);

} // namespace sit::csv
