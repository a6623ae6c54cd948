/*
 * Copyright 2026 the nightlights authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef NIGHTLIGHTS_CSV_HPP
#define NIGHTLIGHTS_CSV_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nightlights/errors.hpp"

namespace nightlights {

NIGHTLIGHTS_DEFINE_ERROR(MalformedCsv);

/// RFC 4180 record reader over an in-memory document: quoted fields may
/// contain commas, doubled quotes and newlines; records end at unquoted
/// LF or CRLF.
class CsvReader {
public:
  explicit CsvReader(std::string_view text) : text_(text) {}

  /// Next record's fields, or nullopt at end of input.
  std::optional<std::vector<std::string>> next_record();

private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

/// Quotes a field if it contains a comma, quote or newline.
std::string csv_escape(std::string_view field);

/// Appends the shortest decimal form of v that parses back to the same
/// double; all pipeline outputs format numbers through this so reruns are
/// byte-identical.
void append_double(std::string& out, double v);
std::string double_to_string(double v);

/// Strict numeric field parsers; the whole field must be consumed.
double parse_double_field(std::string_view field, std::string_view context);
long parse_int_field(std::string_view field, std::string_view context);

}  // namespace nightlights

#endif  // NIGHTLIGHTS_CSV_HPP
