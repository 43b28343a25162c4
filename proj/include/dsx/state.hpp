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

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dsx/error.hpp"

namespace dsx {

// One user constraint. Domains are capitalized identifiers (`Restaurant`),
// slots are lowercase identifiers with underscores (`price_range`), values
// are free text without the reserved characters `(` `)` `,` `=`.
struct Triplet {
  std::string domain;
  std::string slot;
  std::string value;

  bool operator==(const Triplet&) const = default;
};

bool is_valid_domain(std::string_view s);
bool is_valid_slot(std::string_view s);
bool is_valid_value(std::string_view s);

// A belief state: the ordered collection of constraints expressed so far.
// Triplets are kept grouped by domain in first-appearance order, which makes
// the serialized form canonical.
class DialogueState {
 public:
  DialogueState() = default;

  // Inserts in canonical position (appended to its domain group, or a new
  // group at the end). Throws std::invalid_argument on an invalid triplet or
  // a duplicate (domain, slot) pair.
  void add(Triplet t);

  // Replaces the value of an existing (domain, slot). Returns false if the
  // pair is absent.
  bool set_value(std::string_view domain, std::string_view slot,
                 std::string_view value);

  bool remove(std::string_view domain, std::string_view slot);

  bool contains(std::string_view domain, std::string_view slot) const;
  const std::string* value_of(std::string_view domain,
                              std::string_view slot) const;

  const std::vector<Triplet>& triplets() const { return triplets_; }
  std::size_t size() const { return triplets_.size(); }
  bool empty() const { return triplets_.empty(); }

  bool operator==(const DialogueState&) const = default;

 private:
  std::vector<Triplet> triplets_;
};

// Canonical surface form: `Domain(slot=value,slot=value) Domain(...)`.
// The empty state serializes to the empty string.
std::string serialize_state(const DialogueState& state);

// Inverse of serialize_state. Tolerates an optional leading `Belief State:`
// marker, whitespace after commas, and repeated groups for the same domain
// (merged in first-appearance order). Throws ParseError with a byte offset
// on malformed input.
DialogueState parse_state(std::string_view text);

// True when every triplet of `candidate` occurs in `reference`. Domains and
// slots match exactly; values match case-insensitively with whitespace
// collapsed.
bool state_subset(const DialogueState& candidate,
                  const DialogueState& reference);

// Serializes the first `n_triplets` constraints and cuts the string right
// after the n-th value, keeping the following delimiter so the result is a
// strict prefix of the full serialization (`Restaurant(name=pizza hut,` or
// `Restaurant(food=Chinese) `). Throws PrefixTooLong when no suffix would
// remain.
std::string truncate_prefix(const DialogueState& state,
                            std::size_t n_triplets);

}  // namespace dsx
