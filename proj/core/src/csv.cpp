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

#include "nightlights/csv.hpp"

#include <array>
#include <charconv>
#include <cstdlib>

namespace nightlights {

std::optional<std::vector<std::string>> CsvReader::next_record() {
  if (pos_ >= text_.size()) {
    return std::nullopt;
  }
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  while (pos_ < text_.size()) {
    const char c = text_[pos_];
    if (quoted) {
      if (c == '"') {
        if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '"') {
          field.push_back('"');
          pos_ += 2;
        } else {
          quoted = false;
          ++pos_;
        }
      } else {
        field.push_back(c);
        ++pos_;
      }
      continue;
    }
    if (c == '"') {
      if (!field.empty()) {
        throw MalformedCsv("quote in the middle of an unquoted field");
      }
      quoted = true;
      ++pos_;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      ++pos_;
    } else if (c == '\r' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '\n') {
      pos_ += 2;
      fields.push_back(std::move(field));
      return fields;
    } else if (c == '\n') {
      ++pos_;
      fields.push_back(std::move(field));
      return fields;
    } else {
      field.push_back(c);
      ++pos_;
    }
  }
  if (quoted) {
    throw MalformedCsv("unterminated quoted field at end of input");
  }
  fields.push_back(std::move(field));
  return fields;
}

std::string csv_escape(std::string_view field) {
  const bool needs_quotes =
      field.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs_quotes) {
    return std::string(field);
  }
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void append_double(std::string& out, double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), res.ptr);
}

std::string double_to_string(double v) {
  std::string out;
  append_double(out, v);
  return out;
}

double parse_double_field(std::string_view field, std::string_view context) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = field.data() + field.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end) {
    throw MalformedCsv(std::string(context) + ": cannot parse '" + std::string(field) +
                       "' as a number");
  }
  return value;
}

long parse_int_field(std::string_view field, std::string_view context) {
  long value = 0;
  const char* begin = field.data();
  const char* end = field.data() + field.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end) {
    throw MalformedCsv(std::string(context) + ": cannot parse '" + std::string(field) +
                       "' as an integer");
  }
  return value;
}

}  // namespace nightlights
