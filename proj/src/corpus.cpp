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

#include "dsx/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "dsx/error.hpp"
#include "dsx/text.hpp"

namespace dsx {

namespace {

using nlohmann::json;

constexpr const char* kDomainWords[] = {
    "Restaurant", "Hotel",    "Train",   "Taxi",    "Attraction",
    "Hospital",   "Flight",   "Cinema",  "Museum",  "Gym",
    "Library",    "Pharmacy", "Bakery",  "Salon",   "Ferry",
    "Bank",       "Theater",  "Park",    "Cafe",    "Market",
    "Clinic",     "Bus",      "Gallery", "Spa",     "Arena"};

constexpr const char* kSlotWords[] = {
    "area",      "price_range", "food",     "name",     "day",
    "time",      "people",      "stars",    "type",     "parking",
    "internet",  "departure",   "destination", "arrive_by", "leave_at",
    "duration",  "phone",       "address",  "postcode", "rating",
    "cuisine",   "style",       "capacity", "floor",    "language",
    "category"};

constexpr const char* kValueAdjectives[] = {
    "amber",  "bright", "cedar",  "dusty",  "early",  "fancy",  "golden",
    "hidden", "ivory",  "jolly",  "keen",   "lively", "mellow", "noble",
    "opal",   "plain",  "quiet",  "rustic", "silver", "tidy",   "urban",
    "velvet", "warm",   "young",  "zesty",  "brisk",  "calm",   "deep",
    "eager",  "fresh",  "grand",  "humble", "iron",   "jade",   "kind",
    "lunar",  "misty",  "north",  "olive",  "pale"};

constexpr const char* kValueNouns[] = {
    "anchor", "birch",  "candle", "dune",   "ember",  "fig",    "grove",
    "harbor", "inlet",  "juniper", "kestrel", "lantern", "meadow", "nutmeg",
    "orchid", "pebble", "quince", "reef",   "saffron", "thistle", "umbra",
    "violet", "willow", "yarrow", "zephyr", "aspen",  "bramble", "cove",
    "delta",  "elm",    "fern",   "glen",   "heron",  "iris",   "lagoon",
    "maple",  "oak",    "pine",   "ridge",  "stone"};

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string lower_domain(std::string_view domain) {
  return text::to_lower(domain);
}

std::string slot_words(std::string_view slot) {
  std::string out(slot);
  std::replace(out.begin(), out.end(), '_', ' ');
  return out;
}

std::size_t zipf_index(Rng& rng, std::size_t n, double s) {
  if (s == 0.0) return rng.below(n);
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = std::pow(static_cast<double>(i + 1), -s);
  return rng.weighted(w);
}

// One per-domain table of entities with fixed attributes; lookups scan it.
struct EntityTable {
  struct Entity {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attrs;  // slot -> value
  };
  std::vector<std::pair<std::string, std::vector<Entity>>> by_domain;

  const std::vector<Entity>* entities(std::string_view domain) const {
    for (const auto& [d, es] : by_domain)
      if (d == domain) return &es;
    return nullptr;
  }
};

EntityTable build_entity_table(const Schema& schema, const ValueTable& values,
                               const CorpusConfig& config) {
  constexpr int kEntitiesPerDomain = 25;
  // Entities draw attributes from the popular end of each pool so that
  // lookups on one or two constraints sometimes match.
  EntityTable table;
  for (const auto& [domain, slots] : schema.domains) {
    Rng rng(derive_seed(config.seed, fnv1a(domain), 0xe7));
    std::vector<EntityTable::Entity> entities;
    for (int e = 0; e < kEntitiesPerDomain; ++e) {
      EntityTable::Entity ent;
      for (const std::string& slot : slots) {
        const auto& pool = values.values(domain, slot);
        const std::size_t top = std::max<std::size_t>(1, pool.size() / 5);
        ent.attrs.emplace_back(slot, pool[rng.below(top)]);
      }
      if (const auto* name = [&]() -> const std::string* {
            for (const auto& [s, v] : ent.attrs)
              if (s == "name") return &v;
            return nullptr;
          }()) {
        ent.name = *name;
      } else {
        ent.name = "the " + lower_domain(domain) + " " +
                   kValueNouns[rng.below(std::size(kValueNouns))];
      }
      entities.push_back(std::move(ent));
    }
    table.by_domain.emplace_back(domain, std::move(entities));
  }
  return table;
}

DbResult db_lookup(const EntityTable& table, const DialogueState& state,
                   std::string_view focus_domain) {
  DbResult r;
  const auto* entities = table.entities(focus_domain);
  if (entities == nullptr) return r;
  for (const auto& ent : *entities) {
    bool ok = true;
    for (const Triplet& t : state.triplets()) {
      if (t.domain != focus_domain) continue;
      bool matched = false;
      for (const auto& [slot, value] : ent.attrs) {
        if (slot == t.slot) {
          matched = text::normalize_value(value) ==
                    text::normalize_value(t.value);
          break;
        }
      }
      if (!matched) {
        ok = false;
        break;
      }
    }
    if (ok) {
      if (r.match_count == 0) r.entity_name = ent.name;
      ++r.match_count;
    }
  }
  return r;
}

struct TurnEvent {
  bool modified = false;  // false: newly added constraint
  Triplet triplet;
};

std::vector<TurnEvent> events_between(const DialogueState& prev,
                                      const DialogueState& cur) {
  std::vector<TurnEvent> out;
  for (const Triplet& t : cur.triplets()) {
    const std::string* old = prev.value_of(t.domain, t.slot);
    if (old == nullptr) {
      out.push_back({false, t});
    } else if (*old != t.value) {
      out.push_back({true, t});
    }
  }
  return out;
}

std::string render_utterance(Rng& rng, int turn_index,
                             const std::vector<TurnEvent>& events) {
  if (events.empty()) {
    static constexpr const char* kOpeners[] = {
        "hello i need some help", "hi there can you assist me",
        "good day i have a request"};
    static constexpr const char* kFillers[] = {
        "that sounds good", "can you book that for me ?",
        "great please go ahead", "okay what do you suggest ?"};
    if (turn_index == 0) return kOpeners[rng.below(std::size(kOpeners))];
    return kFillers[rng.below(std::size(kFillers))];
  }
  std::string out;
  for (const TurnEvent& ev : events) {
    const std::string sw = slot_words(ev.triplet.slot);
    const std::string dw = lower_domain(ev.triplet.domain);
    std::string clause;
    if (ev.modified) {
      clause = "actually change the " + sw + " to " + ev.triplet.value;
    } else {
      switch (rng.below(4)) {
        case 0:
          clause = "i want the " + sw + " to be " + ev.triplet.value;
          break;
        case 1:
          clause = "i am looking for a " + dw + " with " + sw + " " +
                   ev.triplet.value;
          break;
        case 2:
          clause = "please find a " + dw + " where the " + sw + " is " +
                   ev.triplet.value;
          break;
        default:
          clause = "find me a " + dw + " and make the " + sw + " " +
                   ev.triplet.value;
          break;
      }
    }
    if (!out.empty()) out += " and ";
    out += clause;
  }
  return out;
}

Action render_action(const std::vector<TurnEvent>& events, const DbResult& db,
                     bool last_turn) {
  Action a;
  if (last_turn) {
    a.intent = "bye";
    return a;
  }
  if (!events.empty()) {
    a.intent = "inform";
    for (const TurnEvent& ev : events)
      a.args.emplace_back(ev.triplet.slot, ev.triplet.value);
    return a;
  }
  if (db.match_count >= 1) {
    a.intent = "offer";
    a.args.emplace_back("name", *db.entity_name);
    return a;
  }
  a.intent = "confirm";
  return a;
}

std::string render_response(Rng& rng, const Action& action,
                            const DbResult& db) {
  if (action.intent == "bye") return "you are welcome goodbye .";
  if (action.intent == "offer")
    return "i recommend " + *db.entity_name + " shall i book it ?";
  if (action.intent == "confirm") return "sure anything else ?";
  // inform
  if (db.match_count >= 1) {
    switch (rng.below(2)) {
      case 0:
        return "i found " + std::to_string(db.match_count) +
               " matching options for you .";
      default:
        return "sure there are " + std::to_string(db.match_count) +
               " places that fit .";
    }
  }
  return "sorry i could not find a match for that .";
}

// Action args join slot and value with a space rather than `=` so action
// n-gram windows never shadow the state grammar's `slot=value` windows.
std::string action_text(const Action& a) {
  std::string out = a.intent + "(";
  bool first = true;
  for (const auto& [slot, value] : a.args) {
    if (!first) out.push_back(',');
    first = false;
    out += slot + " " + value;
  }
  out.push_back(')');
  return out;
}

std::string db_text(const DbResult& db) {
  std::string out = std::to_string(db.match_count);
  if (db.entity_name) out += " " + *db.entity_name;
  return out;
}

std::string focus_of_turn(const std::vector<TurnEvent>& events,
                          const std::string& previous_focus) {
  if (!events.empty()) return events.back().triplet.domain;
  return previous_focus;
}

// Renders the user-visible surface of every turn from the state sequence
// alone. Pure in (config seed, dialogue id, states), which lets augmentation
// rewrite states and regenerate consistent histories.
void render_dialogue_surface(Dialogue& d, const EntityTable& entities,
                             const CorpusConfig& config) {
  DialogueState prev;
  std::string focus =
      d.turns.empty() || d.turns.front().state.empty()
          ? std::string()
          : d.turns.front().state.triplets().front().domain;
  for (std::size_t t = 0; t < d.turns.size(); ++t) {
    Turn& turn = d.turns[t];
    Rng rng(derive_seed(config.seed, fnv1a(d.id), 0x100 + t));
    const auto events = events_between(prev, turn.state);
    focus = focus_of_turn(events, focus);
    if (focus.empty() && !turn.state.empty())
      focus = turn.state.triplets().front().domain;
    turn.user_utterance = render_utterance(rng, static_cast<int>(t), events);
    turn.db_result = focus.empty() ? DbResult{}
                                   : db_lookup(entities, turn.state, focus);
    turn.action =
        render_action(events, turn.db_result, t + 1 == d.turns.size());
    turn.system_response = render_response(rng, turn.action, turn.db_result);
    prev = turn.state;
  }
}

}  // namespace

void CorpusConfig::validate() const {
  auto check = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("invalid corpus config: ") + what);
  };
  check(n_domains >= 1, "n_domains must be >= 1");
  check(n_domains <= static_cast<int>(std::size(kDomainWords)),
        "n_domains exceeds the domain word list");
  check(slots_per_domain.lo >= 1 &&
            slots_per_domain.hi >= slots_per_domain.lo,
        "slots_per_domain range");
  check(slots_per_domain.hi <= static_cast<int>(std::size(kSlotWords)),
        "slots_per_domain exceeds the slot word list");
  check(values_per_slot >= 1, "values_per_slot must be >= 1");
  check(n_dialogues >= 1, "n_dialogues must be >= 1");
  check(turns_per_dialogue.lo >= 1 &&
            turns_per_dialogue.hi >= turns_per_dialogue.lo,
        "turns_per_dialogue range");
  check(value_frequency_skew >= 0.0, "value_frequency_skew must be >= 0");
  check(cross_domain_copy_rate >= 0.0 && cross_domain_copy_rate <= 1.0,
        "cross_domain_copy_rate must be a probability");
  check(modification_rate >= 0.0 && modification_rate <= 1.0,
        "modification_rate must be a probability");
}

std::string corpus_config_to_json(const CorpusConfig& c) {
  json j;
  j["n_domains"] = c.n_domains;
  j["slots_per_domain"] = {c.slots_per_domain.lo, c.slots_per_domain.hi};
  j["values_per_slot"] = c.values_per_slot;
  j["n_dialogues"] = c.n_dialogues;
  j["turns_per_dialogue"] = {c.turns_per_dialogue.lo, c.turns_per_dialogue.hi};
  j["value_frequency_skew"] = c.value_frequency_skew;
  j["cross_domain_copy_rate"] = c.cross_domain_copy_rate;
  j["modification_rate"] = c.modification_rate;
  j["seed"] = c.seed;
  return j.dump(2) + "\n";
}

CorpusConfig corpus_config_from_json(const std::string& txt) {
  const json j = json::parse(txt);
  CorpusConfig c;
  c.n_domains = j.value("n_domains", c.n_domains);
  if (j.contains("slots_per_domain"))
    c.slots_per_domain = {j["slots_per_domain"][0].get<int>(),
                          j["slots_per_domain"][1].get<int>()};
  c.values_per_slot = j.value("values_per_slot", c.values_per_slot);
  c.n_dialogues = j.value("n_dialogues", c.n_dialogues);
  if (j.contains("turns_per_dialogue"))
    c.turns_per_dialogue = {j["turns_per_dialogue"][0].get<int>(),
                            j["turns_per_dialogue"][1].get<int>()};
  c.value_frequency_skew =
      j.value("value_frequency_skew", c.value_frequency_skew);
  c.cross_domain_copy_rate =
      j.value("cross_domain_copy_rate", c.cross_domain_copy_rate);
  c.modification_rate = j.value("modification_rate", c.modification_rate);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

ValueTable::ValueTable(const Schema& schema, const CorpusConfig& config) {
  for (const auto& [domain, slots] : schema.domains) {
    for (const std::string& slot : slots) {
      Rng rng(derive_seed(config.seed, fnv1a(domain + "." + slot), 0x7a));
      std::vector<std::string> pool;
      std::unordered_set<std::string> seen;
      while (pool.size() < static_cast<std::size_t>(config.values_per_slot)) {
        std::string v;
        if (slot == "phone") {
          v = std::to_string(100000 + rng.below(900000));
        } else if (slot == "postcode") {
          v = std::string(1, static_cast<char>('a' + rng.below(26))) +
              std::string(1, static_cast<char>('a' + rng.below(26))) +
              std::to_string(10 + rng.below(90));
        } else {
          v = std::string(kValueAdjectives[rng.below(
                  std::size(kValueAdjectives))]) +
              " " + kValueNouns[rng.below(std::size(kValueNouns))];
        }
        if (seen.insert(v).second) pool.push_back(std::move(v));
      }
      pools_.emplace_back(domain + "." + slot, std::move(pool));
    }
  }
}

const std::vector<std::string>& ValueTable::values(
    std::string_view domain, std::string_view slot) const {
  const std::string key = std::string(domain) + "." + std::string(slot);
  for (const auto& [k, pool] : pools_)
    if (k == key) return pool;
  throw ConfigError("no value pool for " + key);
}

Schema generate_schema(const CorpusConfig& config) {
  config.validate();
  Rng rng(derive_seed(config.seed, 0x5c, 0));
  std::vector<std::string> domains(std::begin(kDomainWords),
                                   std::end(kDomainWords));
  std::shuffle(domains.begin(), domains.end(), rng.engine());
  domains.resize(static_cast<std::size_t>(config.n_domains));

  Schema schema;
  for (const std::string& domain : domains) {
    const int n_slots = static_cast<int>(
        rng.between(config.slots_per_domain.lo, config.slots_per_domain.hi));
    std::vector<std::string> slots(std::begin(kSlotWords),
                                   std::end(kSlotWords));
    std::shuffle(slots.begin(), slots.end(), rng.engine());
    slots.resize(static_cast<std::size_t>(n_slots));
    schema.domains.emplace_back(domain, std::move(slots));
  }
  return schema;
}

std::vector<Dialogue> generate_dialogues(const Schema& schema,
                                         const CorpusConfig& config) {
  config.validate();
  if (schema.empty()) throw ConfigError("schema is empty");
  const ValueTable values(schema, config);
  const EntityTable entities = build_entity_table(schema, values, config);

  std::vector<Dialogue> dialogues;
  dialogues.reserve(static_cast<std::size_t>(config.n_dialogues));
  for (int i = 0; i < config.n_dialogues; ++i) {
    Rng rng(derive_seed(config.seed, 0xd1a, static_cast<std::uint64_t>(i)));
    Dialogue d;
    {
      std::ostringstream id;
      id << "dlg-" << std::setw(5) << std::setfill('0') << i;
      d.id = id.str();
    }
    const int n_turns = static_cast<int>(
        rng.between(config.turns_per_dialogue.lo, config.turns_per_dialogue.hi));

    DialogueState state;
    std::string focus = schema.domains[rng.below(schema.domains.size())].first;
    for (int t = 0; t < n_turns; ++t) {
      // Decide the turn's constraint edits.
      enum { kAdd, kModify, kNoop } kind = kNoop;
      if (t == 0) {
        kind = rng.bernoulli(0.9) ? kAdd : kNoop;
      } else {
        const double u = rng.uniform();
        if (u < config.modification_rate && !state.empty())
          kind = kModify;
        else if (u < config.modification_rate + 0.70)
          kind = kAdd;
      }
      if (kind == kAdd) {
        // Stay on the focus domain most of the time; otherwise hop to any
        // domain that still has an unfilled slot.
        auto unfilled = [&](const std::string& domain) {
          std::vector<std::string> open;
          for (const std::string& slot : *schema.slots_of(domain))
            if (!state.contains(domain, slot)) open.push_back(slot);
          return open;
        };
        std::string domain = focus;
        if (unfilled(domain).empty() || !rng.bernoulli(0.75)) {
          std::vector<std::string> open_domains;
          for (const auto& [name, slots] : schema.domains)
            if (!unfilled(name).empty()) open_domains.push_back(name);
          if (open_domains.empty()) {
            kind = kNoop;
          } else {
            domain = open_domains[rng.below(open_domains.size())];
          }
        }
        if (kind == kAdd) {
          const auto open = unfilled(domain);
          const std::string slot = open[rng.below(open.size())];
          std::string value;
          std::vector<const Triplet*> other_domain;
          for (const Triplet& tr : state.triplets())
            if (tr.domain != domain) other_domain.push_back(&tr);
          if (!other_domain.empty() &&
              rng.bernoulli(config.cross_domain_copy_rate)) {
            value = other_domain[rng.below(other_domain.size())]->value;
          } else {
            const auto& pool = values.values(domain, slot);
            value = pool[zipf_index(rng, pool.size(),
                                    config.value_frequency_skew)];
          }
          state.add({domain, slot, value});
          focus = domain;
        }
      } else if (kind == kModify) {
        const auto& ts = state.triplets();
        const Triplet& victim = ts[rng.below(ts.size())];
        const auto& pool = values.values(victim.domain, victim.slot);
        const std::string next =
            pool[zipf_index(rng, pool.size(), config.value_frequency_skew)];
        if (next != victim.value)
          state.set_value(victim.domain, victim.slot, next);
        focus = victim.domain;
      }
      Turn turn;
      turn.state = state;
      d.turns.push_back(std::move(turn));
    }
    render_dialogue_surface(d, entities, config);
    dialogues.push_back(std::move(d));
  }
  return dialogues;
}

Corpus generate_corpus(const CorpusConfig& config) {
  Corpus corpus;
  corpus.config = config;
  corpus.schema = generate_schema(config);
  corpus.dialogues = generate_dialogues(corpus.schema, config);
  return corpus;
}

std::string TrainingExample::text() const {
  std::string out;
  for (const Segment& s : segments) out = text::join_text(out, s.text);
  return out;
}

namespace {

void append_turn_segments(TrainingExample& ex, const Turn& turn,
                          const std::string& state_text, bool final_eos) {
  std::string state_seg(text::kStateMarker);
  if (!state_text.empty()) state_seg += " " + state_text;
  state_seg += " ";
  state_seg += text::kEosState;
  ex.segments.push_back({state_seg, true});
  ex.segments.push_back({"DB: " + db_text(turn.db_result), false});
  ex.segments.push_back({"Action:", false});
  ex.segments.push_back({action_text(turn.action), true});
  ex.segments.push_back({"Response:", false});
  std::string resp = turn.system_response;
  if (final_eos) {
    resp += " ";
    resp += text::kEos;
  }
  ex.segments.push_back({resp, true});
}

}  // namespace

std::string history_text(const Dialogue& d, std::size_t t) {
  std::string out;
  for (std::size_t i = 0; i <= t && i < d.turns.size(); ++i) {
    out = text::join_text(out, d.turns[i].user_utterance);
    if (i < t) out = text::join_text(out, d.turns[i].system_response);
  }
  return out;
}

std::vector<TrainingExample> to_turn_level(const Dialogue& d) {
  std::vector<TrainingExample> out;
  for (std::size_t t = 0; t < d.turns.size(); ++t) {
    TrainingExample ex;
    ex.dialogue_id = d.id;
    ex.turn_index = static_cast<int>(t);
    ex.segments.push_back({history_text(d, t), false});
    const std::string state_text = serialize_state(d.turns[t].state);
    append_turn_segments(ex, d.turns[t], state_text, /*final_eos=*/true);
    ex.state_texts.push_back(state_text);
    out.push_back(std::move(ex));
  }
  return out;
}

TrainingExample to_dialogue_level(const Dialogue& d) {
  TrainingExample ex;
  ex.dialogue_id = d.id;
  ex.turn_index = -1;
  DialogueState prev;
  for (std::size_t t = 0; t < d.turns.size(); ++t) {
    const Turn& turn = d.turns[t];
    ex.segments.push_back({turn.user_utterance, false});
    DialogueState delta;
    for (const Triplet& tr : state_delta(prev, turn.state)) delta.add(tr);
    const std::string delta_text = serialize_state(delta);
    append_turn_segments(ex, turn, delta_text,
                         /*final_eos=*/t + 1 == d.turns.size());
    ex.state_texts.push_back(delta_text);
    prev = turn.state;
  }
  return ex;
}

std::vector<TrainingExample> corpus_to_examples(const Corpus& corpus,
                                                TrainingMode mode) {
  std::vector<TrainingExample> out;
  for (const Dialogue& d : corpus.dialogues) {
    if (mode == TrainingMode::kTurnLevel) {
      auto exs = to_turn_level(d);
      out.insert(out.end(), std::make_move_iterator(exs.begin()),
                 std::make_move_iterator(exs.end()));
    } else {
      out.push_back(to_dialogue_level(d));
    }
  }
  return out;
}

std::vector<Triplet> state_delta(const DialogueState& prev,
                                 const DialogueState& cur) {
  std::vector<Triplet> out;
  for (const TurnEvent& ev : events_between(prev, cur)) out.push_back(ev.triplet);
  return out;
}

namespace {

bool marker_occurs(const Corpus& corpus, const std::string& marker) {
  const std::string needle = text::normalize_value(marker);
  auto contains_token = [&](const std::string& txt) {
    for (const std::string& tok : text::split_tokens(txt))
      if (text::to_lower(tok) == needle) return true;
    return false;
  };
  for (const Dialogue& d : corpus.dialogues) {
    for (const Turn& t : d.turns) {
      if (contains_token(t.user_utterance) ||
          contains_token(t.system_response))
        return true;
      if (t.db_result.entity_name && contains_token(*t.db_result.entity_name))
        return true;
      for (const Triplet& tr : t.state.triplets())
        if (contains_token(tr.value)) return true;
    }
  }
  return false;
}

}  // namespace

void plant_canary(Corpus& corpus, const Canary& canary) {
  if (canary.repetitions < 0)
    throw ConfigError("canary repetitions must be >= 0");
  bool marker_in_state = false;
  for (const Triplet& t : canary.state.triplets())
    for (const std::string& tok : text::split_tokens(t.value))
      if (text::to_lower(tok) == text::normalize_value(canary.marker))
        marker_in_state = true;
  if (!marker_in_state)
    throw ConfigError("canary marker must appear among the state's values");
  if (marker_occurs(corpus, canary.marker))
    throw MarkerCollision("canary marker '" + canary.marker +
                          "' already occurs in the corpus");
  if (canary.repetitions == 0) return;

  const EntityTable entities = build_entity_table(
      corpus.schema, ValueTable(corpus.schema, corpus.config), corpus.config);
  Rng rng(derive_seed(corpus.config.seed, fnv1a(canary.marker), 0xca));
  for (int k = 0; k < canary.repetitions; ++k) {
    Dialogue d;
    d.id = "canary-" + std::to_string(k) + "-" +
           std::to_string(fnv1a(canary.marker) & 0xffff);
    Turn turn;
    turn.state = canary.state;
    d.turns.push_back(std::move(turn));
    render_dialogue_surface(d, entities, corpus.config);
    const std::size_t pos = rng.below(corpus.dialogues.size() + 1);
    corpus.dialogues.insert(
        corpus.dialogues.begin() + static_cast<std::ptrdiff_t>(pos),
        std::move(d));
  }
}

Corpus counterfactual_augment(const Corpus& corpus, double replace_rate,
                              double remove_rate, std::uint64_t seed) {
  if (replace_rate < 0 || remove_rate < 0 ||
      replace_rate + remove_rate > 1.0 + 1e-12)
    throw ConfigError("replace_rate + remove_rate must stay within [0, 1]");
  Corpus out = corpus;
  const ValueTable values(corpus.schema, corpus.config);
  const EntityTable entities =
      build_entity_table(corpus.schema, values, corpus.config);

  for (Dialogue& d : out.dialogues) {
    // Constraint identities in first-appearance order.
    std::vector<Triplet> identities;
    for (const Turn& t : d.turns)
      for (const Triplet& tr : t.state.triplets()) {
        bool seen = false;
        for (const Triplet& id : identities)
          if (id == tr) seen = true;
        if (!seen) identities.push_back(tr);
      }

    Rng rng(derive_seed(seed, fnv1a(d.id), 0xcf));
    enum class Edit { kKeep, kReplace, kRemove };
    std::vector<std::pair<Triplet, std::pair<Edit, std::string>>> plan;
    for (const Triplet& id : identities) {
      const double u = rng.uniform();
      Edit edit = Edit::kKeep;
      std::string replacement;
      if (u < replace_rate) {
        edit = Edit::kReplace;
        const auto& pool = values.values(id.domain, id.slot);
        if (pool.size() > 1) {
          do {
            replacement = pool[rng.below(pool.size())];
          } while (replacement == id.value);
        } else {
          replacement = pool.empty() ? id.value : pool.front();
        }
      } else if (u < replace_rate + remove_rate) {
        edit = Edit::kRemove;
      }
      plan.emplace_back(id, std::make_pair(edit, replacement));
    }

    bool edited = false;
    for (Turn& t : d.turns) {
      DialogueState next;
      for (const Triplet& tr : t.state.triplets()) {
        Edit edit = Edit::kKeep;
        std::string replacement;
        for (const auto& [id, action] : plan) {
          if (id == tr) {
            edit = action.first;
            replacement = action.second;
            break;
          }
        }
        if (edit == Edit::kRemove) {
          edited = true;
          continue;
        }
        Triplet copy = tr;
        if (edit == Edit::kReplace && replacement != tr.value) {
          copy.value = replacement;
          edited = true;
        }
        next.add(copy);
      }
      t.state = std::move(next);
    }
    if (edited) render_dialogue_surface(d, entities, out.config);
  }
  return out;
}

DialogueState random_state(const Schema& schema, const ValueTable& values,
                           Rng& rng, int n_triplets) {
  DialogueState state;
  int guard = 0;
  while (static_cast<int>(state.size()) < n_triplets && guard++ < 1000) {
    const auto& [domain, slots] = schema.domains[rng.below(schema.domains.size())];
    const std::string& slot = slots[rng.below(slots.size())];
    if (state.contains(domain, slot)) continue;
    const auto& pool = values.values(domain, slot);
    state.add({domain, slot, pool[rng.below(pool.size())]});
  }
  return state;
}

void save_corpus(const Corpus& corpus, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    std::ofstream f(fs::path(dir) / "corpus.jsonl");
    if (!f) throw IoError("cannot write corpus.jsonl under " + dir);
    for (const Dialogue& d : corpus.dialogues) f << dialogue_to_json(d) << '\n';
  }
  {
    std::ofstream f(fs::path(dir) / "schema.json");
    f << schema_to_json(corpus.schema);
  }
  {
    std::ofstream f(fs::path(dir) / "gen_config.json");
    f << corpus_config_to_json(corpus.config);
  }
}

Corpus load_corpus(const std::string& dir) {
  namespace fs = std::filesystem;
  Corpus corpus;
  {
    std::ifstream f(fs::path(dir) / "gen_config.json");
    if (!f) throw IoError("cannot read gen_config.json under " + dir);
    std::stringstream ss;
    ss << f.rdbuf();
    corpus.config = corpus_config_from_json(ss.str());
  }
  {
    std::ifstream f(fs::path(dir) / "schema.json");
    if (!f) throw IoError("cannot read schema.json under " + dir);
    std::stringstream ss;
    ss << f.rdbuf();
    corpus.schema = schema_from_json(ss.str());
  }
  {
    std::ifstream f(fs::path(dir) / "corpus.jsonl");
    if (!f) throw IoError("cannot read corpus.jsonl under " + dir);
    std::string line;
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      corpus.dialogues.push_back(dialogue_from_json(line));
    }
  }
  return corpus;
}

}  // namespace dsx
