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

#include "dsx/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "dsx/error.hpp"
#include "dsx/state.hpp"
#include "dsx/text.hpp"

namespace dsx {

namespace {

std::string triplet_key(const Triplet& t) {
  return t.domain + "\x1f" + t.slot + "\x1f" + text::normalize_value(t.value);
}

}  // namespace

TrainingStateIndex::TrainingStateIndex(
    const std::vector<DialogueState>& states) {
  states_.reserve(states.size());
  for (const DialogueState& s : states) {
    NormalizedState ns;
    for (const Triplet& t : s.triplets()) {
      ns.triplets.insert(triplet_key(t));
      values_.insert(text::normalize_value(t.value));
    }
    const std::size_t idx = states_.size();
    for (const std::string& key : ns.triplets)
      by_triplet_[key].push_back(idx);
    states_.push_back(std::move(ns));
  }
}

bool TrainingStateIndex::contains_subset_of(
    const DialogueState& candidate) const {
  if (candidate.empty()) return false;
  // Scan only states sharing the candidate's rarest triplet.
  const std::vector<std::size_t>* shortlist = nullptr;
  std::vector<std::string> keys;
  for (const Triplet& t : candidate.triplets()) {
    keys.push_back(triplet_key(t));
    const auto it = by_triplet_.find(keys.back());
    if (it == by_triplet_.end()) return false;
    if (shortlist == nullptr || it->second.size() < shortlist->size())
      shortlist = &it->second;
  }
  for (const std::size_t idx : *shortlist) {
    const auto& holder = states_[idx].triplets;
    bool all = true;
    for (const std::string& key : keys) {
      if (!holder.count(key)) {
        all = false;
        break;
      }
    }
    if (all) return true;
  }
  return false;
}

bool TrainingStateIndex::has_value(const std::string& raw_value) const {
  return values_.count(text::normalize_value(raw_value)) > 0;
}

bool judge_state(const std::string& suffix, const std::string& prefix,
                 const TrainingStateIndex& index) {
  DialogueState candidate;
  try {
    candidate = parse_state(text::join_text(prefix, suffix));
  } catch (const ParseError&) {
    return false;
  }
  if (candidate.empty()) return false;
  return index.contains_subset_of(candidate);
}

void judge_candidates(std::vector<ScoredCandidate>& candidates,
                      const TrainingStateIndex& index) {
  for (ScoredCandidate& c : candidates)
    c.correct = judge_state(c.suffix, c.prefix, index);
}

namespace {

void accumulate(MetricsBlock& block, const ScoredCandidate& c,
                std::size_t n_correct_triplets) {
  block.n_extracted_states += 1;
  if (!c.parseable) block.n_unparseable += 1;
  if (c.correct) {
    block.n_correct_states += 1;
    (void)n_correct_triplets;
  }
}

void finalize(MetricsBlock& block, std::size_t triplet_sum,
              std::size_t n_values, std::size_t n_correct_values) {
  if (block.n_extracted_states > 0)
    block.state_precision = static_cast<double>(block.n_correct_states) /
                            static_cast<double>(block.n_extracted_states);
  if (block.n_correct_states > 0)
    block.avg_triplets = static_cast<double>(triplet_sum) /
                         static_cast<double>(block.n_correct_states);
  block.n_extracted_values = n_values;
  block.n_correct_values = n_correct_values;
  if (n_values > 0)
    block.value_precision =
        static_cast<double>(n_correct_values) / static_cast<double>(n_values);
}

struct ValueAgg {
  std::set<std::string> values;
  std::set<std::string> correct;
};

void add_values(ValueAgg& agg, const ScoredCandidate& c,
                const TrainingStateIndex& index) {
  if (!c.parseable) return;
  DialogueState full;
  try {
    full = parse_state(text::join_text(c.prefix, c.suffix));
  } catch (const ParseError&) {
    return;
  }
  for (const Triplet& t : full.triplets()) {
    const std::string v = text::normalize_value(t.value);
    agg.values.insert(v);
    if (index.has_value(t.value)) agg.correct.insert(v);
  }
}

std::size_t correct_triplet_count(const ScoredCandidate& c) {
  if (!c.correct) return 0;
  try {
    return parse_state(text::join_text(c.prefix, c.suffix)).size();
  } catch (const ParseError&) {
    return 0;
  }
}

}  // namespace

ExtractionReport compute_metrics(const std::vector<ScoredCandidate>& judged,
                                 const TrainingStateIndex& index) {
  ExtractionReport report;
  ValueAgg overall_values;
  std::size_t overall_triplets = 0;
  std::map<int, ValueAgg> length_values;
  std::map<int, std::size_t> length_triplets;
  std::map<std::string, ValueAgg> strategy_values;
  std::map<std::string, std::size_t> strategy_triplets;

  for (const ScoredCandidate& c : judged) {
    const std::size_t nt = correct_triplet_count(c);
    accumulate(report.overall, c, nt);
    overall_triplets += nt;
    add_values(overall_values, c, index);

    accumulate(report.per_prefix_length[c.prefix_length], c, nt);
    length_triplets[c.prefix_length] += nt;
    add_values(length_values[c.prefix_length], c, index);

    accumulate(report.per_strategy[c.strategy_tag], c, nt);
    strategy_triplets[c.strategy_tag] += nt;
    add_values(strategy_values[c.strategy_tag], c, index);
  }

  finalize(report.overall, overall_triplets, overall_values.values.size(),
           overall_values.correct.size());
  for (auto& [len, block] : report.per_prefix_length)
    finalize(block, length_triplets[len], length_values[len].values.size(),
             length_values[len].correct.size());
  for (auto& [tag, block] : report.per_strategy)
    finalize(block, strategy_triplets[tag], strategy_values[tag].values.size(),
             strategy_values[tag].correct.size());
  return report;
}

RepetitionStats repetitions_per_member(
    const std::vector<std::string>& member_state_texts,
    const std::vector<std::string>& training_state_texts) {
  RepetitionStats stats;
  stats.n_members = member_state_texts.size();
  if (member_state_texts.empty()) return stats;

  std::unordered_map<std::string, std::size_t> counts;
  for (const std::string& s : training_state_texts) counts[s] += 1;

  std::vector<double> reps;
  reps.reserve(member_state_texts.size());
  for (const std::string& m : member_state_texts) {
    const auto it = counts.find(m);
    reps.push_back(it == counts.end() ? 0.0
                                      : static_cast<double>(it->second));
  }
  double sum = 0.0;
  for (double r : reps) sum += r;
  stats.mean = sum / static_cast<double>(reps.size());
  double var = 0.0;
  for (double r : reps) var += (r - stats.mean) * (r - stats.mean);
  var = reps.size() > 1 ? var / static_cast<double>(reps.size() - 1) : 0.0;
  const double half =
      2.576 * std::sqrt(var / static_cast<double>(reps.size()));
  stats.ci99_low = stats.mean - half;
  stats.ci99_high = stats.mean + half;
  return stats;
}

namespace {

struct RankTally {
  std::vector<int> ranks;

  void add(int rank) { ranks.push_back(rank); }

  RankStats stats() const {
    RankStats s;
    s.n = ranks.size();
    if (ranks.empty()) return s;
    std::size_t rank1 = 0, in5 = 0, beyond = 0;
    double rank_sum5 = 0.0;
    for (int r : ranks) {
      if (r == 1) ++rank1;
      if (r <= 5) {
        ++in5;
        rank_sum5 += r;
      } else {
        ++beyond;
      }
    }
    s.rank1_pct = 100.0 * static_cast<double>(rank1) /
                  static_cast<double>(ranks.size());
    if (in5 > 0) s.avg_rank_top5 = rank_sum5 / static_cast<double>(in5);
    s.beyond5_pct = 100.0 * static_cast<double>(beyond) /
                    static_cast<double>(ranks.size());
    return s;
  }
};

// Rank of `target` among scored candidates, descending score, ties broken by
// name so that exact count ties stay deterministic.
int rank_of(const std::vector<std::pair<std::string, double>>& scored,
            const std::string& target) {
  std::vector<std::size_t> order(scored.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scored[a].second != scored[b].second)
      return scored[a].second > scored[b].second;
    return scored[a].first < scored[b].first;
  });
  for (std::size_t i = 0; i < order.size(); ++i)
    if (scored[order[i]].first == target) return static_cast<int>(i) + 1;
  return static_cast<int>(scored.size()) + 1;
}

double phrase_logprob(const ScoringClient& bot, const std::string& context,
                      const std::string& phrase) {
  try {
    return bot.sequence_logprob(context, phrase).total;
  } catch (const UnknownToken&) {
    return -1e300;
  }
}

}  // namespace

GoldRankReport gold_rank_analysis(const ScoringClient& bot,
                                  const std::vector<DialogueState>& states,
                                  const std::vector<int>& prefix_lengths,
                                  const Schema& schema,
                                  std::size_t max_states_per_length) {
  // Values observed per (domain, slot) are the candidate set at each value
  // position.
  std::map<std::pair<std::string, std::string>, std::vector<std::string>>
      observed;
  for (const DialogueState& s : states) {
    for (const Triplet& t : s.triplets()) {
      auto& pool = observed[{t.domain, t.slot}];
      if (std::find(pool.begin(), pool.end(), t.value) == pool.end())
        pool.push_back(t.value);
    }
  }
  for (auto& [key, pool] : observed) std::sort(pool.begin(), pool.end());

  // Unique states only; duplicates would just repeat the same query.
  std::vector<const DialogueState*> unique_states;
  {
    std::unordered_set<std::string> seen;
    for (const DialogueState& s : states)
      if (seen.insert(serialize_state(s)).second) unique_states.push_back(&s);
  }

  GoldRankReport report;
  for (const int length : prefix_lengths) {
    RankTally slot_tally, value_tally, pair_tally;
    std::size_t used = 0;
    for (const DialogueState* sp : unique_states) {
      const DialogueState& s = *sp;
      if (s.size() <= static_cast<std::size_t>(length) || length < 1) continue;
      if (max_states_per_length > 0 && used >= max_states_per_length) break;
      ++used;
      const Triplet& gold = s.triplets()[static_cast<std::size_t>(length)];
      const auto* schema_slots = schema.slots_of(gold.domain);
      if (schema_slots == nullptr) continue;

      std::string prefix = text::join_text(std::string(text::kStateMarker),
                                           truncate_prefix(s, length));
      // When the gold triplet opens a new domain the slot position sits
      // after `Domain(`.
      std::string slot_ctx = prefix;
      if (prefix.back() != ',') {
        slot_ctx = text::join_text(slot_ctx, gold.domain);
        slot_ctx = text::join_text(slot_ctx, "(");
      }

      std::set<std::string> filled;
      for (std::size_t i = 0; i < static_cast<std::size_t>(length); ++i) {
        const Triplet& t = s.triplets()[i];
        if (t.domain == gold.domain) filled.insert(t.slot);
      }
      std::vector<std::string> slot_options;
      for (const std::string& slot : *schema_slots)
        if (!filled.count(slot)) slot_options.push_back(slot);
      if (slot_options.empty()) continue;

      std::vector<std::pair<std::string, double>> slot_scored;
      for (const std::string& slot : slot_options)
        slot_scored.emplace_back(slot, phrase_logprob(bot, slot_ctx, slot));
      slot_tally.add(rank_of(slot_scored, gold.slot));

      const std::string value_ctx = text::join_text(
          text::join_text(slot_ctx, gold.slot), "=");
      const auto vit = observed.find({gold.domain, gold.slot});
      if (vit != observed.end()) {
        std::vector<std::pair<std::string, double>> value_scored;
        for (const std::string& v : vit->second)
          value_scored.emplace_back(v, phrase_logprob(bot, value_ctx, v));
        value_tally.add(rank_of(value_scored, gold.value));
      }

      std::vector<std::pair<std::string, double>> pair_scored;
      for (const auto& [slot, slot_lp] : slot_scored) {
        const auto pit = observed.find({gold.domain, slot});
        if (pit == observed.end()) continue;
        const std::string ctx =
            text::join_text(text::join_text(slot_ctx, slot), "=");
        for (const std::string& v : pit->second)
          pair_scored.emplace_back(slot + "\x1f" + v,
                                   slot_lp + phrase_logprob(bot, ctx, v));
      }
      if (!pair_scored.empty())
        pair_tally.add(rank_of(pair_scored, gold.slot + "\x1f" + gold.value));
    }
    report.per_length[length] = {slot_tally.stats(), value_tally.stats(),
                                 pair_tally.stats()};
  }
  return report;
}

int PrivacyAssessor::score_state(const DialogueState& state) const {
  if (state.empty()) return 0;
  int peak = 0;
  int informative = 0;
  for (const Triplet& t : state.triplets()) {
    const int s = score_triplet(t);
    peak = std::max(peak, s);
    if (s >= 2) ++informative;
  }
  if (informative >= 3) peak = std::min(5, peak + 1);
  return peak;
}

int RuleBasedAssessor::score_triplet(const Triplet& t) const {
  static const std::map<std::string, int> kTable = {
      {"phone", 5},     {"address", 5},  {"postcode", 4}, {"name", 4},
      {"departure", 3}, {"destination", 3}, {"arrive_by", 3}, {"leave_at", 3},
      {"day", 2},       {"time", 2},     {"people", 2},   {"duration", 2},
      {"area", 1},      {"price_range", 1}, {"food", 1},  {"stars", 1},
      {"type", 1},      {"parking", 1},  {"internet", 1}, {"rating", 1},
      {"cuisine", 1},   {"style", 1},    {"capacity", 1}, {"floor", 1},
      {"language", 1},  {"category", 1}};
  const auto it = kTable.find(t.slot);
  return it != kTable.end() ? it->second : 2;
}

PrivacyScores privacy_scores(const DialogueState& prefix_state,
                             const DialogueState& suffix_state,
                             const PrivacyAssessor& assessor) {
  PrivacyScores out;
  if (!suffix_state.empty()) {
    double sum = 0.0;
    for (const Triplet& t : suffix_state.triplets())
      sum += assessor.score_triplet(t);
    out.pii_score = sum / static_cast<double>(suffix_state.size());
  }
  const int prefix_score = assessor.score_state(prefix_state);
  if (prefix_score == 0) {
    out.zero_prefix = true;
    return out;
  }
  DialogueState combined = prefix_state;
  for (const Triplet& t : suffix_state.triplets())
    if (!combined.contains(t.domain, t.slot)) combined.add(t);
  const int full_score = assessor.score_state(combined);
  out.marginal = static_cast<double>(full_score - prefix_score) /
                 static_cast<double>(prefix_score);
  return out;
}

}  // namespace dsx
