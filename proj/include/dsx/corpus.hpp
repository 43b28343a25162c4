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

#include <cstdint>
#include <string>
#include <vector>

#include "dsx/dialogue.hpp"
#include "dsx/rng.hpp"

namespace dsx {

struct Range {
  int lo = 1;
  int hi = 1;
};

struct CorpusConfig {
  int n_domains = 7;
  Range slots_per_domain{3, 4};
  int values_per_slot = 40;
  int n_dialogues = 2000;
  Range turns_per_dialogue{6, 12};
  double value_frequency_skew = 1.0;  // Zipf exponent; 0 = uniform
  double cross_domain_copy_rate = 0.05;
  double modification_rate = 0.05;  // per-turn chance of editing a constraint
  std::uint64_t seed = 1;

  void validate() const;  // throws ConfigError
};

std::string corpus_config_to_json(const CorpusConfig& c);
CorpusConfig corpus_config_from_json(const std::string& text);

struct Corpus {
  Schema schema;
  std::vector<Dialogue> dialogues;
  CorpusConfig config;
};

// A planted probe state. `marker` names the value that must be unique to the
// canary; planting fails with MarkerCollision if it already occurs anywhere
// in the corpus.
struct Canary {
  DialogueState state;
  std::string marker;
  int repetitions = 0;
};

// One serialized training sequence. Segments alternate between conditioning
// context and target spans; only target positions incur loss during training.
struct TrainingExample {
  struct Segment {
    std::string text;
    bool target = false;
  };
  std::string dialogue_id;
  int turn_index = -1;  // -1 for dialogue-level examples
  std::vector<Segment> segments;
  // Serialized state span(s) carried by this example: one entry (S_t) at turn
  // level, one entry per turn delta (S'_t) at dialogue level.
  std::vector<std::string> state_texts;

  std::string text() const;
};

enum class TrainingMode { kTurnLevel, kDialogueLevel };

// Deterministic value pools per (domain, slot), derived from the schema and
// the corpus seed so they can be recomputed without the corpus itself.
class ValueTable {
 public:
  ValueTable(const Schema& schema, const CorpusConfig& config);
  const std::vector<std::string>& values(std::string_view domain,
                                         std::string_view slot) const;

 private:
  std::vector<std::pair<std::string, std::vector<std::string>>> pools_;
};

Schema generate_schema(const CorpusConfig& config);
std::vector<Dialogue> generate_dialogues(const Schema& schema,
                                         const CorpusConfig& config);
Corpus generate_corpus(const CorpusConfig& config);

std::vector<TrainingExample> to_turn_level(const Dialogue& d);
TrainingExample to_dialogue_level(const Dialogue& d);
std::vector<TrainingExample> corpus_to_examples(const Corpus& corpus,
                                                TrainingMode mode);

void plant_canary(Corpus& corpus, const Canary& canary);

// Counterfactual augmentation: per (domain, slot, value) constraint of each
// dialogue, replaces the value with another from the same slot's pool or
// removes the constraint, rewriting histories and states consistently.
Corpus counterfactual_augment(const Corpus& corpus, double replace_rate,
                              double remove_rate, std::uint64_t seed);

// Triplets added or value-changed between consecutive states, in `cur` order.
std::vector<Triplet> state_delta(const DialogueState& prev,
                                 const DialogueState& cur);

// Serialized history H_t for turn `t`: U_0 R_0 ... U_t.
std::string history_text(const Dialogue& d, std::size_t t);

// A schema-valid state with values from the corpus pools; used to build
// non-member controls.
DialogueState random_state(const Schema& schema, const ValueTable& values,
                           Rng& rng, int n_triplets);

void save_corpus(const Corpus& corpus, const std::string& dir);
Corpus load_corpus(const std::string& dir);

}  // namespace dsx
