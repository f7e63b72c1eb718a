// Copyright 2026 The citeweave Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "citeweave/error.hpp"

namespace citeweave::detail {

// Insertion-ordered keys; f32 floats so feature values print in their
// shortest float form and survive text round trips bit-exactly.
using FloatJson = nlohmann::basic_json<nlohmann::ordered_map, std::vector,
                                       std::string, bool, std::int64_t,
                                       std::uint64_t, float>;

// Insertion-ordered keys with f64 floats, for reports and transcripts.
using Json = nlohmann::ordered_json;

// Applies `parse(line, line_no)` to every non-blank line; line numbers are
// 1-based.
template <typename Record, typename Parser>
std::vector<Record> parse_lines(std::string_view text, Parser parse) {
  std::vector<Record> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    ++line_no;
    pos = nl + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    out.push_back(parse(line, line_no));
  }
  return out;
}

inline FloatJson parse_json_line(std::string_view text, std::size_t line) {
  try {
    return FloatJson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), line);
  }
}

}  // namespace citeweave::detail
