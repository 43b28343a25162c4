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

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dsx/blackbox.hpp"
#include "dsx/dialogue.hpp"
#include "dsx/membership.hpp"

namespace dsx {

// Immutable index over the ground-truth training states, supporting the
// subset judgement and value-membership lookups.
class TrainingStateIndex {
 public:
  explicit TrainingStateIndex(const std::vector<DialogueState>& states);

  // True when candidate's triplets all occur inside one training state.
  bool contains_subset_of(const DialogueState& candidate) const;
  bool has_value(const std::string& raw_value) const;
  std::size_t size() const { return states_.size(); }

 private:
  struct NormalizedState {
    std::set<std::string> triplets;  // normalized triplet keys
  };
  std::vector<NormalizedState> states_;
  std::map<std::string, std::vector<std::size_t>> by_triplet_;
  std::set<std::string> values_;
};

// Parses prefix + suffix and checks the subset relation against the training
// states; unparseable candidates judge false.
bool judge_state(const std::string& suffix, const std::string& prefix,
                 const TrainingStateIndex& index);

void judge_candidates(std::vector<ScoredCandidate>& candidates,
                      const TrainingStateIndex& index);

struct MetricsBlock {
  std::size_t n_extracted_states = 0;
  std::size_t n_correct_states = 0;
  std::optional<double> state_precision;
  std::optional<double> avg_triplets;  // over correct states
  std::size_t n_extracted_values = 0;
  std::size_t n_correct_values = 0;
  std::optional<double> value_precision;
  std::size_t n_unparseable = 0;
};

struct ExtractionReport {
  MetricsBlock overall;
  std::map<int, MetricsBlock> per_prefix_length;
  std::map<std::string, MetricsBlock> per_strategy;
};

// Exact formula application over judged, deduplicated candidates. Empty
// denominators stay null rather than silently becoming zero.
ExtractionReport compute_metrics(const std::vector<ScoredCandidate>& judged,
                                 const TrainingStateIndex& index);

struct RepetitionStats {
  double mean = 0.0;
  double ci99_low = 0.0;
  double ci99_high = 0.0;
  std::size_t n_members = 0;
};

// How often each successfully extracted state occurs verbatim among the
// serialized training state spans; mean with a normal-approximation 99% CI.
RepetitionStats repetitions_per_member(
    const std::vector<std::string>& member_state_texts,
    const std::vector<std::string>& training_state_texts);

struct RankStats {
  double rank1_pct = 0.0;
  std::optional<double> avg_rank_top5;
  double beyond5_pct = 0.0;
  std::size_t n = 0;
};

struct GoldRankReport {
  // prefix length -> {slot, value, pair} statistics
  std::map<int, std::array<RankStats, 3>> per_length;
};

// Ranks the gold slot/value/pair of each truncated training state among the
// same-position candidates by decoding probability (whole-phrase scoring for
// multi-token values).
GoldRankReport gold_rank_analysis(const ScoringClient& bot,
                                  const std::vector<DialogueState>& states,
                                  const std::vector<int>& prefix_lengths,
                                  const Schema& schema,
                                  std::size_t max_states_per_length = 0);

// Privacy sensitivity scorer over states; must be monotone under state
// extension. The default is the rule-based table below; a live assessor can
// implement the same interface.
class PrivacyAssessor {
 public:
  virtual ~PrivacyAssessor() = default;
  virtual int score_triplet(const Triplet& t) const = 0;
  // Overall state score: max over triplets, bumped by one (capped at 5) when
  // three or more triplets of score >= 2 co-occur.
  virtual int score_state(const DialogueState& state) const;
};

// Slot-category table: identifier-like slots (phone, address, name, ...)
// score 4-5, itinerary slots 3, scheduling slots 2, preferences 1.
class RuleBasedAssessor : public PrivacyAssessor {
 public:
  int score_triplet(const Triplet& t) const override;
};

struct PrivacyScores {
  double pii_score = 0.0;  // mean per-triplet score of the suffix
  std::optional<double> marginal;  // (S(prefix+suffix) - S(prefix)) / S(prefix)
  bool zero_prefix = false;
};

PrivacyScores privacy_scores(const DialogueState& prefix_state,
                             const DialogueState& suffix_state,
                             const PrivacyAssessor& assessor);

}  // namespace dsx
