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

#include "dsx/dialogue.hpp"

#include <json.hpp>

namespace dsx {

using nlohmann::json;

bool is_known_intent(std::string_view intent) {
  return intent == "inform" || intent == "request" || intent == "offer" ||
         intent == "confirm" || intent == "bye";
}

bool Schema::has_domain(std::string_view domain) const {
  return slots_of(domain) != nullptr;
}

const std::vector<std::string>* Schema::slots_of(
    std::string_view domain) const {
  for (const auto& [name, slots] : domains)
    if (name == domain) return &slots;
  return nullptr;
}

std::size_t Schema::slot_count() const {
  std::size_t n = 0;
  for (const auto& [name, slots] : domains) n += slots.size();
  return n;
}

namespace {

json turn_to_json(const Turn& t) {
  json j;
  j["user"] = t.user_utterance;
  j["db"]["match_count"] = t.db_result.match_count;
  if (t.db_result.entity_name) j["db"]["entity_name"] = *t.db_result.entity_name;
  j["action"]["intent"] = t.action.intent;
  json args = json::array();
  for (const auto& [slot, value] : t.action.args)
    args.push_back(json::array({slot, value}));
  j["action"]["args"] = args;
  j["response"] = t.system_response;
  j["state"] = serialize_state(t.state);
  return j;
}

Turn turn_from_json(const json& j) {
  Turn t;
  t.user_utterance = j.at("user").get<std::string>();
  t.db_result.match_count = j.at("db").at("match_count").get<int>();
  if (j.at("db").contains("entity_name"))
    t.db_result.entity_name = j.at("db").at("entity_name").get<std::string>();
  t.action.intent = j.at("action").at("intent").get<std::string>();
  for (const auto& a : j.at("action").at("args"))
    t.action.args.emplace_back(a.at(0).get<std::string>(),
                               a.at(1).get<std::string>());
  t.system_response = j.at("response").get<std::string>();
  t.state = parse_state(j.at("state").get<std::string>());
  return t;
}

}  // namespace

std::string dialogue_to_json(const Dialogue& d) {
  json j;
  j["id"] = d.id;
  json turns = json::array();
  for (const Turn& t : d.turns) turns.push_back(turn_to_json(t));
  j["turns"] = turns;
  return j.dump();
}

Dialogue dialogue_from_json(const std::string& line) {
  const json j = json::parse(line);
  Dialogue d;
  d.id = j.at("id").get<std::string>();
  for (const auto& t : j.at("turns")) d.turns.push_back(turn_from_json(t));
  return d;
}

std::string schema_to_json(const Schema& s) {
  json j;
  json domains = json::array();
  for (const auto& [name, slots] : s.domains) {
    json d;
    d["name"] = name;
    d["slots"] = slots;
    domains.push_back(d);
  }
  j["domains"] = domains;
  return j.dump(2) + "\n";
}

Schema schema_from_json(const std::string& txt) {
  const json j = json::parse(txt);
  Schema s;
  for (const auto& d : j.at("domains"))
    s.domains.emplace_back(d.at("name").get<std::string>(),
                           d.at("slots").get<std::vector<std::string>>());
  return s;
}

}  // namespace dsx
