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

// End-to-end acceptance suite. Each test case checks one release criterion
// and prints a single PASS/FAIL line; run it directly or through ctest.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "dsx/corpus.hpp"
#include "dsx/decoding.hpp"
#include "dsx/error.hpp"
#include "dsx/evaluation.hpp"
#include "dsx/harness.hpp"
#include "dsx/membership.hpp"
#include "dsx/model.hpp"
#include "dsx/net_client.hpp"
#include "dsx/net_server.hpp"
#include "dsx/probe.hpp"
#include "dsx/rng.hpp"
#include "dsx/text.hpp"

using namespace dsx;
namespace fs = std::filesystem;

namespace {

// Tracks the criterion verdict alongside the doctest assertions.
struct Verdict {
  const char* label;
  bool ok = true;
  explicit Verdict(const char* l) : label(l) {}
  ~Verdict() {
    std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", label);
    std::fflush(stdout);
  }
};

#define ACCEPT(v, cond)      \
  do {                       \
    const bool acc_ = (cond); \
    CHECK(acc_);             \
    if (!acc_) (v).ok = false; \
  } while (0)

std::vector<DialogueState> all_states(const std::vector<Dialogue>& dialogues) {
  std::vector<DialogueState> out;
  for (const Dialogue& d : dialogues)
    for (const Turn& t : d.turns)
      if (!t.state.empty()) out.push_back(t.state);
  return out;
}

std::vector<std::string> turn_level_state_texts(const Corpus& corpus) {
  std::vector<std::string> out;
  for (const Dialogue& d : corpus.dialogues)
    for (const Turn& t : d.turns) out.push_back(serialize_state(t.state));
  return out;
}

// Deterministic-scoring stub for the pure formula identities.
class DeterministicBot : public ScoringClient {
 public:
  TokenDistribution next_token_distribution(const std::string&) const override {
    return {};
  }
  SequenceScore sequence_logprob(const std::string&,
                                 const std::string& target) const override {
    SequenceScore s;
    s.per_token.assign(text::split_tokens(target).size(), 0.0);
    return s;
  }
  std::string greedy_decode(const std::string&, int) const override {
    return "";
  }
};

std::string file_bytes(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Pairwise AUC of "members score lower".
double auc_lower_is_member(const std::vector<double>& members,
                           const std::vector<double>& non_members) {
  double wins = 0;
  for (double m : members)
    for (double n : non_members) {
      if (m < n)
        wins += 1.0;
      else if (m == n)
        wins += 0.5;
    }
  return wins / (static_cast<double>(members.size()) *
                 static_cast<double>(non_members.size()));
}

}  // namespace

TEST_CASE("criterion 1: canary memorization is count-dominance forced") {
  Verdict v("criterion 1: greedy canary recovery at 50x, suppressed at 1x vs 90x");
  const auto started = std::chrono::steady_clock::now();

  CorpusConfig cfg;
  cfg.n_domains = 3;
  cfg.slots_per_domain = {2, 3};
  cfg.values_per_slot = 12;
  cfg.n_dialogues = 300;
  cfg.turns_per_dialogue = {4, 8};
  cfg.seed = 1001;
  Corpus corpus = generate_corpus(cfg);
  const std::string domain = corpus.schema.domains.front().first;
  const auto& slots = corpus.schema.domains.front().second;
  REQUIRE(slots.size() >= 2);

  // Positive control: unique-prefix canary planted 50 times.
  Canary canary;
  canary.state.add({domain, slots[0], "zqmarker seven"});
  canary.state.add({domain, slots[1], "opal vireo"});
  canary.marker = "zqmarker";
  canary.repetitions = 50;
  plant_canary(corpus, canary);

  // Negative control: same first triplet, canary once vs competitor 90x.
  const std::string shared_value = "bright shared lane";
  Canary competitor;
  competitor.state.add({domain, slots[0], shared_value});
  competitor.state.add({domain, slots[1], "kw9competitor mark"});
  competitor.marker = "kw9competitor";
  competitor.repetitions = 90;
  plant_canary(corpus, competitor);

  Canary weak;
  weak.state.add({domain, slots[0], shared_value});
  weak.state.add({domain, slots[1], "jx2weak mark"});
  weak.marker = "jx2weak";
  weak.repetitions = 1;
  plant_canary(corpus, weak);

  const SurrogateModel model = SurrogateModel::train(
      corpus_to_examples(corpus, TrainingMode::kTurnLevel), 5, 1);

  // Greedy from the unique one-triplet prefix recovers the rest exactly.
  const std::string prefix = text::join_text(
      std::string(text::kStateMarker), truncate_prefix(canary.state, 1));
  const std::string decoded = model.greedy_decode(prefix, 48);
  DialogueState recovered;
  bool parsed = true;
  try {
    recovered = parse_state(text::join_text(prefix, decoded));
  } catch (const ParseError&) {
    parsed = false;
  }
  ACCEPT(v, parsed);
  ACCEPT(v, parsed && recovered == canary.state);

  // The weak canary shares its prefix with a 90x competitor and must lose.
  const std::string contested_prefix = text::join_text(
      std::string(text::kStateMarker), truncate_prefix(weak.state, 1));
  const std::string contested = model.greedy_decode(contested_prefix, 48);
  DialogueState contested_state;
  try {
    contested_state = parse_state(text::join_text(contested_prefix, contested));
  } catch (const ParseError&) {
  }
  ACCEPT(v, !(contested_state == weak.state));
  ACCEPT(v, contested_state == competitor.state);

  const auto elapsed = std::chrono::duration_cast<std::chrono::seconds>(
                           std::chrono::steady_clock::now() - started)
                           .count();
  ACCEPT(v, elapsed < 60);
}

TEST_CASE("criterion 2: metric oracle equivalence on a 50-candidate run") {
  Verdict v("criterion 2: SP/VP/#Triplets match the brute-force recount exactly");

  CorpusConfig cfg;
  cfg.n_domains = 2;
  cfg.slots_per_domain = {2, 2};
  cfg.values_per_slot = 6;
  cfg.n_dialogues = 60;
  cfg.turns_per_dialogue = {2, 5};
  cfg.seed = 2002;
  const Corpus corpus = generate_corpus(cfg);
  const SurrogateModel model = SurrogateModel::train(
      corpus_to_examples(corpus, TrainingMode::kTurnLevel), 5, 1);
  const InProcessBot bot(model);

  DecodingConfig dc;
  dc.strategy = Strategy::kTemperature;
  dc.temperature = 1.5;
  dc.max_tokens = 32;
  dc.seed = 5;
  std::vector<ScoredCandidate> cands;
  for (const RawCandidate& r : sample_decode(bot, "Belief State:", dc, 50)) {
    if (r.generated.empty()) continue;
    cands.push_back(make_candidate(r.prefix, r.generated, r.strategy_tag, 0));
  }
  const std::vector<DialogueState> states = all_states(corpus.dialogues);
  const TrainingStateIndex index(states);
  judge_candidates(cands, index);
  const ExtractionReport report = compute_metrics(cands, index);

  // Brute-force recount with naive double loops and no index.
  std::size_t correct = 0, triplet_sum = 0;
  std::set<std::string> values, correct_values;
  for (const ScoredCandidate& c : cands) {
    DialogueState parsed;
    bool ok = true;
    try {
      parsed = parse_state(text::join_text(c.prefix, c.suffix));
    } catch (const ParseError&) {
      ok = false;
    }
    if (!ok) continue;
    for (const Triplet& t : parsed.triplets()) {
      const std::string norm = text::normalize_value(t.value);
      values.insert(norm);
      for (const DialogueState& s : states)
        for (const Triplet& ts : s.triplets())
          if (text::normalize_value(ts.value) == norm)
            correct_values.insert(norm);
    }
    if (parsed.empty()) continue;
    bool member = false;
    for (const DialogueState& s : states)
      if (state_subset(parsed, s)) member = true;
    if (member) {
      ++correct;
      triplet_sum += parsed.size();
    }
  }

  ACCEPT(v, report.overall.n_extracted_states == cands.size());
  ACCEPT(v, report.overall.n_correct_states == correct);
  ACCEPT(v, report.overall.n_extracted_values == values.size());
  ACCEPT(v, report.overall.n_correct_values == correct_values.size());
  if (report.overall.state_precision.has_value())
    ACCEPT(v, *report.overall.state_precision ==
                  static_cast<double>(correct) /
                      static_cast<double>(cands.size()));
  if (correct > 0) {
    ACCEPT(v, report.overall.avg_triplets.has_value());
    ACCEPT(v, *report.overall.avg_triplets ==
                  static_cast<double>(triplet_sum) /
                      static_cast<double>(correct));
  }
}

TEST_CASE("criterion 3: membership formula identities") {
  Verdict v("criterion 3: DC-PPL identity, C-PPL degenerate case, PPL of certainty");

  CorpusConfig cfg;
  cfg.n_domains = 3;
  cfg.slots_per_domain = {2, 3};
  cfg.values_per_slot = 8;
  cfg.n_dialogues = 100;
  cfg.turns_per_dialogue = {2, 6};
  cfg.seed = 3003;
  const Corpus corpus = generate_corpus(cfg);
  const SurrogateModel model = SurrogateModel::train(
      corpus_to_examples(corpus, TrainingMode::kTurnLevel), 5, 1);
  const InProcessBot bot(model);

  std::vector<Triplet> observed;
  for (const DialogueState& s : all_states(corpus.dialogues))
    for (const Triplet& t : s.triplets()) observed.push_back(t);

  Rng rng(33);
  int verified = 0;
  for (int i = 0; i < 1000; ++i) {
    DialogueState s;
    const int want = 1 + static_cast<int>(rng.below(3));
    int guard = 0;
    while (static_cast<int>(s.size()) < want && guard++ < 40) {
      const Triplet& t = observed[rng.below(observed.size())];
      if (!s.contains(t.domain, t.slot)) s.add(t);
    }
    const ScoredCandidate c = make_candidate(
        std::string(text::kStateMarker), serialize_state(s), "t", 0);
    const auto dc = dc_ppl(bot, c);
    if (!dc) continue;
    const double via_forms =
        std::log(c_ppl(bot, c)) /
        std::log(ppl(bot, make_candidate("", c.suffix, "t", 0)));
    if (std::abs(*dc - via_forms) >= 1e-9) {
      ACCEPT(v, false);
    }
    ++verified;
  }
  ACCEPT(v, verified >= 950);

  // C-PPL with an empty prefix degenerates to PPL, exactly.
  const ScoredCandidate plain = make_candidate(
      "", serialize_state(all_states(corpus.dialogues).front()), "t", 0);
  ACCEPT(v, c_ppl(bot, plain) == ppl(bot, plain));

  // PPL of a fully deterministic continuation is exactly 1.
  const DeterministicBot certain;
  const ScoredCandidate sure =
      make_candidate("Belief State:", "Train(day=Friday)", "t", 0);
  ACCEPT(v, ppl(certain, sure) == 1.0);
  ACCEPT(v, c_ppl(certain, sure) == 1.0);
}

TEST_CASE("criterion 4: DC-PPL separates members better than PPL") {
  Verdict v("criterion 4: member/non-member AUC ordering DC-PPL > PPL, DC-PPL >= 0.7");

  CorpusConfig cfg;
  cfg.n_domains = 3;
  cfg.slots_per_domain = {2, 3};
  cfg.values_per_slot = 10;
  cfg.n_dialogues = 300;
  cfg.turns_per_dialogue = {8, 10};
  cfg.value_frequency_skew = 1.0;
  cfg.seed = 4004;
  const Corpus corpus = generate_corpus(cfg);
  const SurrogateModel model = SurrogateModel::train(
      corpus_to_examples(corpus, TrainingMode::kTurnLevel), 5, 1);
  const InProcessBot bot(model);

  const std::vector<DialogueState> states = all_states(corpus.dialogues);
  const TrainingStateIndex index(states);

  // Candidate pool drawn the way the extraction pipeline draws it: targeted
  // prefixes from the training states, continued by the bot itself, then
  // split into members and non-members by ground truth.
  std::vector<std::string> prefixes;
  {
    std::unordered_set<std::string> seen;
    for (const DialogueState& s : states)
      for (int l : {1, 2, 3})
        if (s.size() > static_cast<std::size_t>(l)) {
          const std::string p = truncate_prefix(s, l);
          if (seen.insert(p).second) prefixes.push_back(p);
        }
  }
  std::vector<ScoredCandidate> members, non_members;
  {
    DecodingConfig dc;
    dc.strategy = Strategy::kTemperature;
    dc.temperature = 2.0;
    dc.max_tokens = 32;
    std::unordered_set<std::string> member_seen, other_seen;
    for (std::size_t pi = 0; pi < prefixes.size(); ++pi) {
      dc.seed = 1000 + pi;
      const std::string prompt =
          text::join_text(std::string(text::kStateMarker), prefixes[pi]);
      std::vector<RawCandidate> pool = sample_decode(bot, prompt, dc, 6);
      RawCandidate greedy;
      greedy.prefix = prompt;
      greedy.generated = model.greedy_decode(prompt, 32);
      pool.push_back(greedy);
      for (const RawCandidate& r : pool) {
        if (r.generated.empty()) continue;
        const ScoredCandidate c = make_candidate(prompt, r.generated, "t", 0);
        DialogueState parsed;
        try {
          parsed = parse_state(text::join_text(prompt, r.generated));
        } catch (const ParseError&) {
          continue;
        }
        if (parsed.empty()) continue;
        const std::string key = serialize_state(parsed);
        if (index.contains_subset_of(parsed)) {
          if (members.size() < 200 && member_seen.insert(key).second)
            members.push_back(c);
        } else {
          if (non_members.size() < 200 && other_seen.insert(key).second)
            non_members.push_back(c);
        }
      }
      if (members.size() >= 200 && non_members.size() >= 200) break;
    }
  }
  REQUIRE(members.size() == 200);
  REQUIRE(non_members.size() == 200);

  auto scores_for = [&](const std::vector<ScoredCandidate>& set,
                        std::vector<double>& ppl_scores,
                        std::vector<double>& dc_scores) {
    for (const ScoredCandidate& c : set) {
      ppl_scores.push_back(ppl(bot, c));
      const auto dc = dc_ppl(bot, c);
      REQUIRE(dc.has_value());
      dc_scores.push_back(*dc);
    }
  };
  std::vector<double> member_ppl, member_dc, other_ppl, other_dc;
  scores_for(members, member_ppl, member_dc);
  scores_for(non_members, other_ppl, other_dc);

  const double auc_ppl = auc_lower_is_member(member_ppl, other_ppl);
  const double auc_dc = auc_lower_is_member(member_dc, other_dc);
  std::printf("  measured AUC: ppl=%.4f dc_ppl=%.4f (n=200/200)\n", auc_ppl,
              auc_dc);
  ACCEPT(v, auc_dc > auc_ppl);
  // Regression floor established by the pilot run of this suite.
  ACCEPT(v, auc_dc >= 0.7);
}

TEST_CASE("criterion 5: repetition trend across prefix lengths") {
  Verdict v("criterion 5: reps/member fall from l=1 to l=3; dialogue level flattens to 1");
  const auto started = std::chrono::steady_clock::now();

  CorpusConfig cfg;
  cfg.n_domains = 3;
  cfg.slots_per_domain = {3, 4};
  cfg.values_per_slot = 10;
  cfg.n_dialogues = 250;
  cfg.turns_per_dialogue = {10, 10};
  cfg.value_frequency_skew = 1.0;
  cfg.modification_rate = 0.0;
  cfg.seed = 5005;
  const Corpus corpus = generate_corpus(cfg);
  const auto examples = corpus_to_examples(corpus, TrainingMode::kTurnLevel);
  const SurrogateModel model = SurrogateModel::train(examples, 5, 1);
  const InProcessBot bot(model);

  const std::vector<DialogueState> states = all_states(corpus.dialogues);
  const TrainingStateIndex index(states);
  std::vector<std::string> training_texts;
  for (const TrainingExample& ex : examples)
    for (const std::string& s : ex.state_texts) training_texts.push_back(s);

  std::map<int, RepetitionStats> reps;
  for (const int length : {1, 3}) {
    std::vector<std::string> prefixes;
    std::unordered_set<std::string> seen;
    for (const DialogueState& s : states) {
      if (s.size() <= static_cast<std::size_t>(length)) continue;
      const std::string p = truncate_prefix(s, length);
      if (seen.insert(p).second) prefixes.push_back(p);
      if (prefixes.size() >= 400) break;
    }
    std::vector<std::string> member_texts;
    std::unordered_set<std::string> member_seen;
    for (const std::string& p : prefixes) {
      const std::string prompt =
          text::join_text(std::string(text::kStateMarker), p);
      const std::string decoded = model.greedy_decode(prompt, 48);
      DialogueState full;
      try {
        full = parse_state(text::join_text(p, decoded));
      } catch (const ParseError&) {
        continue;
      }
      if (full.empty() || !index.contains_subset_of(full)) continue;
      const std::string txt = serialize_state(full);
      if (member_seen.insert(txt).second) member_texts.push_back(txt);
    }
    REQUIRE(member_texts.size() > 20);
    reps[length] = repetitions_per_member(member_texts, training_texts);
  }
  std::printf("  reps/member: l=1 mean=%.2f (n=%zu), l=3 mean=%.2f (n=%zu)\n",
              reps[1].mean, reps[1].n_members, reps[3].mean,
              reps[3].n_members);
  ACCEPT(v, reps[1].mean > reps[3].mean);

  // Dialogue-level view of the same corpus: every turn-1 triplet appears in
  // exactly one delta span per dialogue.
  for (const Dialogue& d : corpus.dialogues) {
    const TrainingExample ex = to_dialogue_level(d);
    for (const Triplet& t : d.turns.front().state.triplets()) {
      int occurrences = 0;
      for (const std::string& span : ex.state_texts) {
        if (span.empty()) continue;
        const DialogueState ds = parse_state(span);
        const std::string* val = ds.value_of(t.domain, t.slot);
        if (val != nullptr && *val == t.value) ++occurrences;
      }
      if (occurrences != 1) {
        ACCEPT(v, false);
        break;
      }
    }
  }

  const auto elapsed = std::chrono::duration_cast<std::chrono::seconds>(
                           std::chrono::steady_clock::now() - started)
                           .count();
  ACCEPT(v, elapsed < 300);
}

TEST_CASE("criterion 6: schema-guided decoding beats temperature sampling") {
  Verdict v("criterion 6: schema guidance parses 100% and extracts strictly more");

  CorpusConfig cfg;
  cfg.n_domains = 3;
  cfg.slots_per_domain = {2, 3};
  cfg.values_per_slot = 8;
  cfg.n_dialogues = 150;
  cfg.turns_per_dialogue = {3, 7};
  cfg.seed = 6006;
  const Corpus corpus = generate_corpus(cfg);
  const SurrogateModel model = SurrogateModel::train(
      corpus_to_examples(corpus, TrainingMode::kTurnLevel), 5, 1);
  const InProcessBot bot(model);
  const TrainingStateIndex index(all_states(corpus.dialogues));

  const int budget = 400;
  DecodingConfig guided;
  guided.strategy = Strategy::kSchemaGuided;
  guided.max_tokens = 32;
  guided.seed = 61;
  int guided_parse = 0;
  std::unordered_set<std::string> guided_correct;
  for (const RawCandidate& r : schema_guided_samples(
           bot, "Belief State:", corpus.schema, guided, budget)) {
    DialogueState s;
    try {
      s = parse_state(r.generated);
      ++guided_parse;
    } catch (const ParseError&) {
      continue;
    }
    if (!s.empty() && index.contains_subset_of(s))
      guided_correct.insert(serialize_state(s));
  }

  DecodingConfig temp;
  temp.strategy = Strategy::kTemperature;
  temp.temperature = 2.0;
  temp.max_tokens = 32;
  temp.seed = 61;
  std::unordered_set<std::string> temp_correct;
  for (const RawCandidate& r :
       sample_decode(bot, "Belief State:", temp, budget)) {
    if (r.generated.empty()) continue;
    DialogueState s;
    try {
      s = parse_state(r.generated);
    } catch (const ParseError&) {
      continue;
    }
    if (!s.empty() && index.contains_subset_of(s))
      temp_correct.insert(serialize_state(s));
  }

  std::printf("  parse rate %d/%d; judged-correct states: guided=%zu temp2=%zu\n",
              guided_parse, budget, guided_correct.size(), temp_correct.size());
  ACCEPT(v, guided_parse == budget);
  ACCEPT(v, guided_correct.size() > temp_correct.size());
}

TEST_CASE("criterion 7: model-against-model probe recovers the schema") {
  Verdict v("criterion 7: probe reaches full recall at baseline-or-better precision");

  CorpusConfig cfg;
  cfg.n_domains = 3;
  cfg.slots_per_domain = {2, 2};
  cfg.values_per_slot = 6;
  cfg.n_dialogues = 150;
  cfg.turns_per_dialogue = {2, 5};
  cfg.value_frequency_skew = 0.7;
  cfg.seed = 7007;
  const Corpus corpus = generate_corpus(cfg);
  const SurrogateModel model = SurrogateModel::train(
      corpus_to_examples(corpus, TrainingMode::kTurnLevel), 5, 1);
  const InProcessBot bot(model);

  // The count-based surrogate saturates into smoothing noise at the LLM
  // exploration temperature of 5; its diverse-but-readable regime sits near
  // 1.5, which is what both the probe and the mining baseline get.
  ProbeConfig pc;
  pc.rounds = 6;
  pc.questions_per_round = 30;
  pc.high_temperature = 1.5;
  pc.low_temperature = 0.5;
  pc.max_state_tokens = 24;
  pc.seed = 71;
  const ScriptedQuestionSource source;
  const ProbeRun run = run_probe(bot, pc, source);
  const ProbeScore probe_score = schema_prf(run, corpus.schema);

  // Unfiltered temperature-mining baseline: 10,000 samples at the same
  // exploration temperature.
  DecodingConfig mine;
  mine.strategy = Strategy::kTemperature;
  mine.temperature = 1.5;
  mine.max_tokens = 24;
  mine.seed = 72;
  std::vector<std::string> mined;
  for (const RawCandidate& r :
       sample_decode(bot, "Belief State:", mine, 10000))
    mined.push_back(r.generated);
  const MentionCounts mentions = extract_mentions(mined);
  Schema mined_schema;
  for (const auto& [domain, count] : mentions.domains)
    mined_schema.domains.emplace_back(domain, std::vector<std::string>{});
  for (const auto& [key, count] : mentions.slots)
    for (auto& [domain, slots] : mined_schema.domains)
      if (domain == key.first) slots.push_back(key.second);
  ProbeRun mined_run;
  mined_run.state.validated = mined_schema;
  const ProbeScore mined_score = schema_prf(mined_run, corpus.schema);

  std::printf(
      "  probe: domain P/R %.2f/%.2f slot P/R %.2f/%.2f with %d queries\n",
      probe_score.domain_precision, probe_score.domain_recall,
      probe_score.slot_precision, probe_score.slot_recall,
      run.state.questions_asked);
  std::printf(
      "  mining baseline: domain P %.2f slot P %.2f with 10000 queries\n",
      mined_score.domain_precision, mined_score.slot_precision);

  ACCEPT(v, probe_score.domain_recall == 1.0);
  ACCEPT(v, probe_score.slot_recall == 1.0);
  ACCEPT(v, probe_score.domain_precision >= mined_score.domain_precision);
  ACCEPT(v, probe_score.slot_precision >= mined_score.slot_precision);
  ACCEPT(v, run.state.questions_asked < 10000);
}

TEST_CASE("criterion 8: one-to-many contexts cap gold-value rank-1 at 1/k") {
  Verdict v("criterion 8: gold value rank-1 = 25% +- 3pp, gold slot rank-1 = 100%");

  // Engineered corpus: 40 contexts, each with k=4 exactly equally frequent
  // continuation values.
  std::vector<TrainingExample> examples;
  std::vector<DialogueState> states;
  const int contexts = 40, k = 4, repeats = 3;
  for (int i = 0; i < contexts; ++i) {
    for (int j = 0; j < k; ++j) {
      DialogueState s;
      s.add({"Venue", "anchor", "ctx" + std::to_string(i)});
      s.add({"Venue", "choice",
             "val" + std::to_string(i) + "x" + std::to_string(j)});
      states.push_back(s);
      for (int r = 0; r < repeats; ++r) {
        TrainingExample ex;
        ex.segments.push_back({"u", false});
        ex.segments.push_back(
            {"Belief State: " + serialize_state(s) + " [EOS_STATE]", true});
        examples.push_back(ex);
      }
    }
  }
  const SurrogateModel model = SurrogateModel::train(examples, 5, 1);
  const InProcessBot bot(model);
  Schema schema;
  schema.domains.emplace_back("Venue",
                              std::vector<std::string>{"anchor", "choice"});

  const GoldRankReport report = gold_rank_analysis(bot, states, {1}, schema);
  const RankStats& slot_stats = report.per_length.at(1)[0];
  const RankStats& value_stats = report.per_length.at(1)[1];
  std::printf("  slot rank1 %.1f%%, value rank1 %.1f%% over %zu states\n",
              slot_stats.rank1_pct, value_stats.rank1_pct, value_stats.n);
  ACCEPT(v, slot_stats.rank1_pct == 100.0);
  ACCEPT(v, std::abs(value_stats.rank1_pct - 25.0) <= 3.0);
  ACCEPT(v, value_stats.n == static_cast<std::size_t>(contexts * k));
}

TEST_CASE("criterion 9: decoding equivalences") {
  Verdict v("criterion 9: beam B=1 equals greedy; identity transform is exact");

  CorpusConfig cfg;
  cfg.n_domains = 3;
  cfg.slots_per_domain = {2, 3};
  cfg.values_per_slot = 8;
  cfg.n_dialogues = 120;
  cfg.turns_per_dialogue = {2, 6};
  cfg.seed = 9009;
  const Corpus corpus = generate_corpus(cfg);
  const SurrogateModel model = SurrogateModel::train(
      corpus_to_examples(corpus, TrainingMode::kTurnLevel), 5, 1);
  const InProcessBot bot(model);

  // 100 random prompts: the bare marker plus truncated training states.
  std::vector<std::string> prompts = {std::string(text::kStateMarker)};
  Rng rng(91);
  const std::vector<DialogueState> states = all_states(corpus.dialogues);
  while (prompts.size() < 100) {
    const DialogueState& s = states[rng.below(states.size())];
    if (s.size() < 2) continue;
    const int l = 1 + static_cast<int>(rng.below(s.size() - 1));
    prompts.push_back(text::join_text(std::string(text::kStateMarker),
                                      truncate_prefix(s, l)));
  }
  DecodingConfig beam;
  beam.strategy = Strategy::kBeamSearch;
  beam.beam_size = 1;
  beam.max_tokens = 32;
  for (const std::string& prompt : prompts) {
    const auto beams = beam_decode(bot, prompt, beam);
    REQUIRE(beams.size() == 1);
    if (beams[0].generated != model.greedy_decode(prompt, 32)) {
      ACCEPT(v, false);
      break;
    }
  }

  // Identity transform to 1e-12 on real distributions.
  DecodingConfig identity;
  identity.strategy = Strategy::kVanilla;
  for (int trial = 0; trial < 50; ++trial) {
    const std::string& prompt = prompts[rng.below(prompts.size())];
    const TokenDistribution dist = bot.next_token_distribution(prompt);
    const TokenDistribution out = transform_distribution(dist, identity, {});
    REQUIRE(out.entries.size() == dist.entries.size());
    for (std::size_t i = 0; i < dist.entries.size(); ++i) {
      if (out.entries[i].id != dist.entries[i].id ||
          std::abs(out.entries[i].prob - dist.entries[i].prob) >= 1e-12) {
        ACCEPT(v, false);
        break;
      }
    }
  }
}

TEST_CASE("criterion 10: black-box boundary over the wire") {
  Verdict v("criterion 10: wire equals in-process to 1e-12; internals rejected");

  CorpusConfig cfg;
  cfg.n_domains = 2;
  cfg.slots_per_domain = {2, 2};
  cfg.values_per_slot = 6;
  cfg.n_dialogues = 40;
  cfg.turns_per_dialogue = {2, 4};
  cfg.seed = 1010;
  const Corpus corpus = generate_corpus(cfg);
  const SurrogateModel model = SurrogateModel::train(
      corpus_to_examples(corpus, TrainingMode::kTurnLevel), 5, 1);
  const InProcessBot local(model);
  const BlackboxServer server(model, 0);
  const RemoteBot remote("127.0.0.1", server.port());

  Rng rng(101);
  const std::vector<DialogueState> states = all_states(corpus.dialogues);
  for (int i = 0; i < 100; ++i) {
    const DialogueState& s = states[rng.below(states.size())];
    const std::string ctx = text::join_text(std::string(text::kStateMarker),
                                            serialize_state(s));
    const TokenDistribution a = local.next_token_distribution(ctx);
    const TokenDistribution b = remote.next_token_distribution(ctx);
    REQUIRE(a.entries.size() == b.entries.size());
    for (std::size_t e = 0; e < a.entries.size(); ++e) {
      if (a.entries[e].id != b.entries[e].id ||
          std::abs(a.entries[e].prob - b.entries[e].prob) >= 1e-12) {
        ACCEPT(v, false);
        break;
      }
    }
  }

  // A request for model internals is refused with a structured error.
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  REQUIRE(fd >= 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(server.port()));
  ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
  REQUIRE(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0);
  const std::string req = "{\"op\":\"weights\"}\n";
  REQUIRE(::send(fd, req.data(), req.size(), 0) ==
          static_cast<ssize_t>(req.size()));
  std::string response;
  char chunk[1024];
  while (response.find('\n') == std::string::npos) {
    const ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
    if (n <= 0) break;
    response.append(chunk, static_cast<std::size_t>(n));
  }
  ::close(fd);
  ACCEPT(v, response.find("UNSUPPORTED") != std::string::npos);
  ACCEPT(v, response.find("\"ok\":false") != std::string::npos);
}

TEST_CASE("criterion 11: end-to-end determinism") {
  Verdict v("criterion 11: identical seeds give byte-identical candidates and reports");

  auto config_for = [](const std::string& dir) {
    ExperimentConfig cfg;
    cfg.corpus.n_domains = 2;
    cfg.corpus.slots_per_domain = {2, 2};
    cfg.corpus.values_per_slot = 6;
    cfg.corpus.n_dialogues = 60;
    cfg.corpus.turns_per_dialogue = {2, 5};
    cfg.corpus.seed = 1111;
    cfg.sample_budget = 150;
    cfg.top_n = 50;
    cfg.output_dir = dir;
    DecodingConfig vanilla;
    vanilla.strategy = Strategy::kVanilla;
    vanilla.max_tokens = 24;
    cfg.decoding.push_back(vanilla);
    DecodingConfig schema;
    schema.strategy = Strategy::kSchemaGuided;
    schema.max_tokens = 24;
    cfg.decoding.push_back(schema);
    return cfg;
  };

  const fs::path dir1 = fs::temp_directory_path() / "dsx_accept_run_a";
  const fs::path dir2 = fs::temp_directory_path() / "dsx_accept_run_b";
  fs::remove_all(dir1);
  fs::remove_all(dir2);
  run_untargeted(config_for(dir1.string()));
  run_untargeted(config_for(dir2.string()));

  ACCEPT(v, file_bytes(dir1 / "candidates.jsonl") ==
                file_bytes(dir2 / "candidates.jsonl"));
  ACCEPT(v, file_bytes(dir1 / "scored.jsonl") ==
                file_bytes(dir2 / "scored.jsonl"));
  ACCEPT(v, file_bytes(dir1 / "report.json") ==
                file_bytes(dir2 / "report.json"));
  ACCEPT(v, file_bytes(dir1 / "report.txt") == file_bytes(dir2 / "report.txt"));
  ACCEPT(v, !file_bytes(dir1 / "candidates.jsonl").empty());
  fs::remove_all(dir1);
  fs::remove_all(dir2);
}
