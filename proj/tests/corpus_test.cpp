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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "dsx/corpus.hpp"
#include "dsx/error.hpp"
#include "dsx/text.hpp"

using namespace dsx;

namespace {

CorpusConfig small_config() {
  CorpusConfig c;
  c.n_domains = 3;
  c.slots_per_domain = {2, 3};
  c.values_per_slot = 8;
  c.n_dialogues = 40;
  c.turns_per_dialogue = {4, 8};
  c.seed = 42;
  return c;
}

std::string file_bytes(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("generate_schema respects counts and is deterministic") {
  CorpusConfig c;
  c.n_domains = 7;
  c.slots_per_domain = {3, 4};
  c.seed = 5;
  const Schema s = generate_schema(c);
  CHECK(s.domains.size() == 7);
  const std::size_t slots = s.slot_count();
  CHECK(slots >= 21);
  CHECK(slots <= 28);
  CHECK(generate_schema(c) == s);

  CorpusConfig single;
  single.n_domains = 1;
  single.slots_per_domain = {1, 1};
  const Schema one = generate_schema(single);
  CHECK(one.domains.size() == 1);
  CHECK(one.domains[0].second.size() == 1);

  std::set<std::string> names;
  for (const auto& [name, sl] : s.domains) {
    names.insert(name);
    std::set<std::string> unique_slots(sl.begin(), sl.end());
    CHECK(unique_slots.size() == sl.size());
  }
  CHECK(names.size() == 7);
}

TEST_CASE("config validation rejects degenerate settings") {
  CorpusConfig c = small_config();
  c.n_dialogues = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.value_frequency_skew = -1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.cross_domain_copy_rate = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("dialogue states accumulate turn by turn") {
  CorpusConfig c = small_config();
  c.modification_rate = 0.0;
  c.turns_per_dialogue = {10, 10};
  const Corpus corpus = generate_corpus(c);
  REQUIRE(corpus.dialogues.size() == 40);
  for (const Dialogue& d : corpus.dialogues) {
    REQUIRE(d.turns.size() == 10);
    const auto& first = d.turns[0].state.triplets();
    for (std::size_t t = 0; t < d.turns.size(); ++t) {
      const auto& ts = d.turns[t].state.triplets();
      // Without modifications the turn-1 state is a triplet-prefix of every
      // later state.
      REQUIRE(ts.size() >= first.size());
      for (std::size_t i = 0; i < first.size(); ++i) CHECK(ts[i] == first[i]);
      if (t > 0) CHECK(ts.size() >= d.turns[t - 1].state.size());
    }
  }
}

TEST_CASE("turn-level repetition law") {
  CorpusConfig c = small_config();
  c.modification_rate = 0.0;
  c.turns_per_dialogue = {6, 6};
  const Corpus corpus = generate_corpus(c);
  for (const Dialogue& d : corpus.dialogues) {
    const auto examples = to_turn_level(d);
    REQUIRE(examples.size() == 6);
    const DialogueState& first = d.turns[0].state;
    int containing = 0;
    for (const TrainingExample& ex : examples) {
      const DialogueState s = parse_state(ex.state_texts.at(0));
      if (state_subset(first, s)) ++containing;
    }
    CHECK(containing == 6);  // every turn's state contains the turn-1 triplets
  }
}

TEST_CASE("zipf exponent zero gives uniform value frequencies") {
  CorpusConfig c;
  c.n_domains = 2;
  c.slots_per_domain = {2, 2};
  c.values_per_slot = 10;
  c.n_dialogues = 400;
  c.turns_per_dialogue = {4, 8};
  c.value_frequency_skew = 0.0;
  c.cross_domain_copy_rate = 0.0;
  c.modification_rate = 0.0;
  c.seed = 11;
  const Corpus corpus = generate_corpus(c);
  const ValueTable values(corpus.schema, c);

  // Count first occurrences of each (domain, slot, value) draw.
  std::map<std::pair<std::string, std::string>, std::map<std::string, int>>
      counts;
  for (const Dialogue& d : corpus.dialogues) {
    DialogueState prev;
    for (const Turn& t : d.turns) {
      for (const Triplet& tr : state_delta(prev, t.state))
        counts[{tr.domain, tr.slot}][tr.value] += 1;
      prev = t.state;
    }
  }
  double chi2 = 0.0;
  double df = 0.0;
  for (const auto& [key, per_value] : counts) {
    const auto& pool = values.values(key.first, key.second);
    double n = 0;
    for (const auto& [v, k] : per_value) n += k;
    const double expected = n / static_cast<double>(pool.size());
    if (expected < 5) continue;  // chi-square needs enough mass
    for (const std::string& v : pool) {
      const auto it = per_value.find(v);
      const double o = it == per_value.end() ? 0.0 : it->second;
      chi2 += (o - expected) * (o - expected) / expected;
    }
    df += static_cast<double>(pool.size() - 1);
  }
  REQUIRE(df > 0);
  CHECK(chi2 < df + 4.0 * std::sqrt(2.0 * df));
}

TEST_CASE("zipf skew concentrates mass on popular values") {
  CorpusConfig c = small_config();
  c.value_frequency_skew = 1.5;
  c.cross_domain_copy_rate = 0.0;
  c.n_dialogues = 200;
  const Corpus corpus = generate_corpus(c);
  std::map<std::string, int> value_counts;
  for (const Dialogue& d : corpus.dialogues)
    for (const Triplet& t : d.turns.back().state.triplets())
      value_counts[t.domain + "." + t.slot + "=" + t.value] += 1;
  int max_count = 0;
  for (const auto& [v, k] : value_counts) max_count = std::max(max_count, k);
  CHECK(max_count >= 10);  // a popular value dominates somewhere
}

TEST_CASE("turn-level serialization layout") {
  const Corpus corpus = generate_corpus(small_config());
  const Dialogue& d = corpus.dialogues.front();
  const auto examples = to_turn_level(d);
  REQUIRE(examples.size() == d.turns.size());

  // History of example t is U_0 R_0 ... U_t in order.
  for (std::size_t t = 0; t < d.turns.size(); ++t) {
    const TrainingExample& ex = examples[t];
    REQUIRE(ex.segments.size() == 7);
    std::string expected;
    for (std::size_t i = 0; i <= t; ++i) {
      expected = text::join_text(expected, d.turns[i].user_utterance);
      if (i < t) expected = text::join_text(expected, d.turns[i].system_response);
    }
    CHECK(ex.segments[0].text == expected);
    // Target spans are exactly the state/action/response segments.
    const std::vector<bool> mask = {false, true, false, false, true, false, true};
    for (std::size_t i = 0; i < ex.segments.size(); ++i)
      CHECK(ex.segments[i].target == mask[i]);
    CHECK(ex.segments[1].text.find(text::kStateMarker) == 0);
    CHECK(ex.segments[1].text.find(text::kEosState) != std::string::npos);
    CHECK(ex.segments[6].text.find(text::kEos) != std::string::npos);
    CHECK(ex.state_texts.at(0) == serialize_state(d.turns[t].state));
  }
}

TEST_CASE("dialogue-level transform carries per-turn deltas") {
  CorpusConfig c = small_config();
  c.turns_per_dialogue = {10, 10};
  const Corpus corpus = generate_corpus(c);
  for (const Dialogue& d : corpus.dialogues) {
    const TrainingExample ex = to_dialogue_level(d);
    REQUIRE(ex.state_texts.size() == d.turns.size());

    // Replay oracle: folding the deltas with modification overwrite must
    // reproduce the cumulative turn-level state at every turn.
    DialogueState replay;
    for (std::size_t t = 0; t < d.turns.size(); ++t) {
      const DialogueState delta = parse_state(ex.state_texts[t]);
      for (const Triplet& tr : delta.triplets()) {
        if (replay.contains(tr.domain, tr.slot))
          replay.set_value(tr.domain, tr.slot, tr.value);
        else
          replay.add(tr);
      }
      CHECK(state_subset(replay, d.turns[t].state));
      CHECK(state_subset(d.turns[t].state, replay));
    }
  }
}

TEST_CASE("dialogue-level transform eliminates repetition") {
  CorpusConfig c = small_config();
  c.modification_rate = 0.0;
  const Corpus corpus = generate_corpus(c);
  for (const Dialogue& d : corpus.dialogues) {
    const TrainingExample ex = to_dialogue_level(d);
    std::map<std::string, int> occurrences;
    for (const std::string& span : ex.state_texts) {
      if (span.empty()) continue;
      const DialogueState delta = parse_state(span);
      for (const Triplet& t : delta.triplets())
        occurrences[t.domain + "." + t.slot] += 1;
    }
    for (const auto& [key, n] : occurrences) CHECK(n == 1);
  }
}

TEST_CASE("unchanged states produce empty deltas") {
  const Corpus corpus = generate_corpus(small_config());
  Dialogue d = corpus.dialogues.front();
  for (std::size_t t = 1; t < d.turns.size(); ++t)
    d.turns[t].state = d.turns[0].state;
  const TrainingExample ex = to_dialogue_level(d);
  for (std::size_t t = 1; t < ex.state_texts.size(); ++t)
    CHECK(ex.state_texts[t].empty());
}

TEST_CASE("plant_canary inserts exact repetitions") {
  Corpus corpus = generate_corpus(small_config());
  const std::string domain = corpus.schema.domains.front().first;
  const std::string slot = corpus.schema.domains.front().second.front();
  Canary canary;
  canary.state.add({domain, slot, "zq7marker"});
  canary.marker = "zq7marker";
  canary.repetitions = 50;
  const std::size_t before = corpus.dialogues.size();
  plant_canary(corpus, canary);
  CHECK(corpus.dialogues.size() == before + 50);

  const std::string canary_text = serialize_state(canary.state);
  int count = 0;
  for (const Dialogue& d : corpus.dialogues)
    for (const TrainingExample& ex : to_turn_level(d))
      if (ex.state_texts.at(0) == canary_text) ++count;
  CHECK(count == 50);
}

TEST_CASE("plant_canary rejects colliding markers and zero is a no-op") {
  Corpus corpus = generate_corpus(small_config());
  const Dialogue snapshot = corpus.dialogues.front();

  Canary zero;
  const std::string domain = corpus.schema.domains.front().first;
  const std::string slot = corpus.schema.domains.front().second.front();
  zero.state.add({domain, slot, "qx9unique"});
  zero.marker = "qx9unique";
  zero.repetitions = 0;
  const std::size_t n = corpus.dialogues.size();
  plant_canary(corpus, zero);
  CHECK(corpus.dialogues.size() == n);
  CHECK(corpus.dialogues.front() == snapshot);

  // A marker equal to an existing corpus value must collide.
  std::string existing;
  for (const Dialogue& d : corpus.dialogues) {
    for (const Triplet& t : d.turns.back().state.triplets()) {
      existing = text::split_tokens(t.value).front();
      break;
    }
    if (!existing.empty()) break;
  }
  REQUIRE(!existing.empty());
  Canary clash;
  clash.state.add({domain, slot, existing});
  clash.marker = existing;
  clash.repetitions = 1;
  CHECK_THROWS_AS(plant_canary(corpus, clash), MarkerCollision);
}

TEST_CASE("counterfactual augmentation at zero rates is the identity") {
  const Corpus corpus = generate_corpus(small_config());
  const Corpus same = counterfactual_augment(corpus, 0.0, 0.0, 123);
  REQUIRE(same.dialogues.size() == corpus.dialogues.size());
  for (std::size_t i = 0; i < corpus.dialogues.size(); ++i)
    CHECK(dialogue_to_json(same.dialogues[i]) ==
          dialogue_to_json(corpus.dialogues[i]));
}

TEST_CASE("full replacement changes every constraint value") {
  CorpusConfig c = small_config();
  c.cross_domain_copy_rate = 0.0;
  const Corpus corpus = generate_corpus(c);
  const Corpus swapped = counterfactual_augment(corpus, 1.0, 0.0, 9);
  for (std::size_t i = 0; i < corpus.dialogues.size(); ++i) {
    const Dialogue& before = corpus.dialogues[i];
    const Dialogue& after = swapped.dialogues[i];
    REQUIRE(before.turns.size() == after.turns.size());
    for (std::size_t t = 0; t < before.turns.size(); ++t) {
      for (const Triplet& tr : before.turns[t].state.triplets()) {
        const std::string* now =
            after.turns[t].state.value_of(tr.domain, tr.slot);
        REQUIRE(now != nullptr);
        CHECK(*now != tr.value);
      }
    }
  }
}

TEST_CASE("replacement edits histories consistently") {
  CorpusConfig c = small_config();
  c.cross_domain_copy_rate = 0.0;
  const Corpus corpus = generate_corpus(c);
  const Corpus swapped = counterfactual_augment(corpus, 1.0, 0.0, 9);
  for (const Dialogue& d : swapped.dialogues) {
    DialogueState prev;
    for (const Turn& t : d.turns) {
      for (const Triplet& tr : state_delta(prev, t.state))
        CHECK(t.user_utterance.find(tr.value) != std::string::npos);
      prev = t.state;
    }
  }
}

TEST_CASE("removal drops constraints and their mentions") {
  CorpusConfig c = small_config();
  const Corpus corpus = generate_corpus(c);
  const Corpus removed = counterfactual_augment(corpus, 0.0, 1.0, 9);
  for (const Dialogue& d : removed.dialogues)
    for (const Turn& t : d.turns) CHECK(t.state.empty());
}

TEST_CASE("replacement frequency tracks the configured rate") {
  CorpusConfig c = small_config();
  c.n_dialogues = 150;
  c.cross_domain_copy_rate = 0.0;
  const double rate = 0.3;
  const Corpus corpus = generate_corpus(c);
  const Corpus swapped = counterfactual_augment(corpus, rate, 0.0, 77);
  std::size_t total = 0, changed = 0;
  for (std::size_t i = 0; i < corpus.dialogues.size(); ++i) {
    // One decision per constraint identity, counted at its first appearance.
    std::set<std::string> seen;
    const Dialogue& before = corpus.dialogues[i];
    const Dialogue& after = swapped.dialogues[i];
    for (std::size_t t = 0; t < before.turns.size(); ++t) {
      for (const Triplet& tr : before.turns[t].state.triplets()) {
        const std::string key = tr.domain + "." + tr.slot + "=" + tr.value;
        if (!seen.insert(key).second) continue;
        ++total;
        const std::string* now =
            after.turns[t].state.value_of(tr.domain, tr.slot);
        if (now == nullptr || *now != tr.value) ++changed;
      }
    }
  }
  REQUIRE(total > 300);
  const double p = static_cast<double>(changed) / static_cast<double>(total);
  const double sigma = std::sqrt(rate * (1 - rate) / static_cast<double>(total));
  CHECK(p > rate - 4 * sigma);
  CHECK(p < rate + 4 * sigma);
}

TEST_CASE("corpus files are byte-identical across runs and reload cleanly") {
  namespace fs = std::filesystem;
  const CorpusConfig c = small_config();
  const fs::path dir1 = fs::temp_directory_path() / "dsx_corpus_a";
  const fs::path dir2 = fs::temp_directory_path() / "dsx_corpus_b";
  save_corpus(generate_corpus(c), dir1.string());
  save_corpus(generate_corpus(c), dir2.string());
  for (const char* name : {"corpus.jsonl", "schema.json", "gen_config.json"})
    CHECK(file_bytes(dir1 / name) == file_bytes(dir2 / name));

  const Corpus loaded = load_corpus(dir1.string());
  const Corpus original = generate_corpus(c);
  REQUIRE(loaded.dialogues.size() == original.dialogues.size());
  for (std::size_t i = 0; i < loaded.dialogues.size(); ++i)
    CHECK(loaded.dialogues[i] == original.dialogues[i]);
  CHECK(loaded.schema == original.schema);
  fs::remove_all(dir1);
  fs::remove_all(dir2);
}

TEST_CASE("cross-domain copies reuse values across domains") {
  CorpusConfig c = small_config();
  c.cross_domain_copy_rate = 0.9;
  c.n_dialogues = 120;
  c.turns_per_dialogue = {8, 10};
  const Corpus corpus = generate_corpus(c);
  int copies = 0;
  for (const Dialogue& d : corpus.dialogues) {
    const auto& ts = d.turns.back().state.triplets();
    for (std::size_t a = 0; a < ts.size(); ++a)
      for (std::size_t b = a + 1; b < ts.size(); ++b)
        if (ts[a].domain != ts[b].domain && ts[a].value == ts[b].value)
          ++copies;
  }
  CHECK(copies > 20);
}
