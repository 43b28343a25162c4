// Copyright 2026 The dsx Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dsx/text.hpp"

#include <array>
#include <cctype>

namespace dsx::text {

namespace {

constexpr std::array<std::string_view, 4> kMarkers = {kStateMarker, kEosState,
                                                      kEos, kUnk};

bool matches_at(std::string_view text, std::size_t pos, std::string_view m) {
  return text.size() - pos >= m.size() && text.substr(pos, m.size()) == m;
}

bool no_space_after(std::string_view tok) {
  return tok == "(" || tok == "=" || tok == ",";
}

bool no_space_before(std::string_view tok) {
  return tok == "(" || tok == ")" || tok == "=" || tok == ",";
}

}  // namespace

std::vector<std::string> split_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) {
      out.push_back(word);
      word.clear();
    }
  };
  std::size_t i = 0;
  while (i < text.size()) {
    bool matched = false;
    for (std::string_view m : kMarkers) {
      if (matches_at(text, i, m)) {
        flush();
        out.emplace_back(m);
        i += m.size();
        matched = true;
        break;
      }
    }
    if (matched) continue;
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else if (is_structural(c)) {
      flush();
      out.emplace_back(1, c);
    } else {
      word.push_back(c);
    }
    ++i;
  }
  flush();
  return out;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0 && !no_space_after(tokens[i - 1]) && !no_space_before(tokens[i]))
      out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

std::string join_text(std::string_view left, std::string_view right) {
  if (left.empty()) return std::string(right);
  if (right.empty()) return std::string(left);
  std::string out(left);
  const char last = left.back();
  const char first = right.front();
  const bool glue_left = last == '(' || last == '=' || last == ',' ||
                         std::isspace(static_cast<unsigned char>(last));
  const bool glue_right =
      first == '(' || first == ')' || first == '=' || first == ',';
  if (!glue_left && !glue_right) out.push_back(' ');
  out += right;
  return out;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string normalize_value(std::string_view value) {
  std::string out;
  bool in_space = true;  // swallows leading whitespace
  for (char c : value) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      in_space = true;
      continue;
    }
    if (in_space && !out.empty()) out.push_back(' ');
    in_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

}  // namespace dsx::text
