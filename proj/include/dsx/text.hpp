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

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dsx::text {

// Surface markers of the serialized turn format. These are part of the bot's
// public output format, not model internals, so both sides of the black-box
// boundary may rely on them.
inline constexpr std::string_view kStateMarker = "Belief State:";
inline constexpr std::string_view kEosState = "[EOS_STATE]";
inline constexpr std::string_view kEos = "[EOS]";
inline constexpr std::string_view kUnk = "[UNK]";

inline bool is_structural(char c) {
  return c == '(' || c == ')' || c == ',' || c == '=';
}

// Splits text into surface tokens: multi-word markers, single structural
// characters, and whitespace-delimited words. Inverse of join_tokens for any
// string the corpus generator or the bot can produce.
std::vector<std::string> split_tokens(std::string_view text);

// Joins surface tokens back into text. No space is inserted after `(` `=` `,`
// or before `)` `=` `,`; a single space separates everything else.
std::string join_tokens(const std::vector<std::string>& tokens);

// Concatenates two already-joined fragments with the same spacing rule used
// between tokens (e.g. a prefix ending in `,` takes no space before the
// suffix).
std::string join_text(std::string_view left, std::string_view right);

// Lowercases ASCII, trims outer whitespace, and collapses internal runs of
// whitespace to single spaces. Used wherever values are compared.
std::string normalize_value(std::string_view value);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

}  // namespace dsx::text
