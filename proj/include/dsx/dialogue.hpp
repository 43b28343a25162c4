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

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dsx/state.hpp"

namespace dsx {

// System act for one turn: a closed intent plus slot-value arguments.
struct Action {
  std::string intent;  // one of: inform, request, offer, confirm, bye
  std::vector<std::pair<std::string, std::string>> args;

  bool operator==(const Action&) const = default;
};

bool is_known_intent(std::string_view intent);

// Deterministic database lookup result. entity_name is present iff at least
// one entity matched.
struct DbResult {
  int match_count = 0;
  std::optional<std::string> entity_name;

  bool operator==(const DbResult&) const = default;
};

struct Turn {
  std::string user_utterance;
  DbResult db_result;
  Action action;
  std::string system_response;
  DialogueState state;  // cumulative constraints up to this turn

  bool operator==(const Turn&) const = default;
};

struct Dialogue {
  std::string id;
  std::vector<Turn> turns;

  bool operator==(const Dialogue&) const = default;
};

// The bot's service scope: which domains exist and which slots each accepts.
struct Schema {
  std::vector<std::pair<std::string, std::vector<std::string>>> domains;

  bool has_domain(std::string_view domain) const;
  const std::vector<std::string>* slots_of(std::string_view domain) const;
  std::size_t slot_count() const;
  bool empty() const { return domains.empty(); }

  bool operator==(const Schema&) const = default;
};

// JSON object encodings used by corpus and schema files.
std::string dialogue_to_json(const Dialogue& d);
Dialogue dialogue_from_json(const std::string& line);
std::string schema_to_json(const Schema& s);
Schema schema_from_json(const std::string& text);

}  // namespace dsx
