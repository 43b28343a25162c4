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
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "dsx/blackbox.hpp"
#include "dsx/dialogue.hpp"

namespace dsx {

// Domain and (domain, slot) mention multisets pulled out of decoded state
// text, with counts.
struct MentionCounts {
  std::map<std::string, int> domains;
  std::map<std::pair<std::string, std::string>, int> slots;
  // Last value text observed per (domain, slot); feeds verification
  // questions.
  std::map<std::pair<std::string, std::string>, std::string> value_hints;
};

// Lenient extraction of domains and slots from possibly malformed state
// strings (unbalanced tails tolerated, bad regions skipped).
MentionCounts extract_mentions(const std::vector<std::string>& state_texts);

// Where probing questions come from. The default is a scripted simulator; an
// adapter backed by a live assistant can be slotted in with the same
// signature.
class QuestionSource {
 public:
  virtual ~QuestionSource() = default;
  virtual std::vector<std::string> questions(const Schema& known, int n,
                                             std::uint64_t seed) const = 0;
  virtual std::string verification_question(const std::string& domain,
                                            const std::string& slot,
                                            const std::string& value_hint,
                                            std::uint64_t seed) const = 0;
};

// Deterministic template-based simulator. Emits a mix of in-schema
// paraphrase probes, cross-domain probes over two known domains, and random
// out-of-schema task queries.
class ScriptedQuestionSource : public QuestionSource {
 public:
  std::vector<std::string> questions(const Schema& known, int n,
                                     std::uint64_t seed) const override;
  std::string verification_question(const std::string& domain,
                                    const std::string& slot,
                                    const std::string& value_hint,
                                    std::uint64_t seed) const override;
};

struct ProbeConfig {
  double high_temperature = 5.0;
  double low_temperature = 0.5;
  int rounds = 3;
  int questions_per_round = 20;
  int min_consistency_count = 1;
  int verifications_per_mention = 1;
  int max_state_tokens = 48;
  std::uint64_t seed = 1;

  void validate() const;
};

struct PendingMention {
  std::string domain;
  std::string slot;  // empty for a domain-level mention
  int high_count = 0;
  int low_count = 0;
  std::string value_hint;
};

struct ProbeState {
  Schema validated;
  std::vector<PendingMention> pending;
  int questions_asked = 0;
  std::vector<std::pair<std::string, std::string>> transcript;
};

struct ProbeRun {
  ProbeState state;
  // (questions_asked, validated schema) snapshot after each filter pass.
  std::vector<std::pair<int, Schema>> history;
};

// One exploration pass: asks questions, decodes the bot's state at the high
// temperature, and accumulates mentions into pending.
void probe_round(const ScoringClient& bot, ProbeState& state,
                 const ProbeConfig& config, const QuestionSource& source,
                 int round_index);

// Verification pass: re-asks about pending mentions, decodes at the low
// temperature, and promotes mentions seen consistently in both regimes.
// Everything not promoted is dropped.
void consistency_filter(const ScoringClient& bot, ProbeState& state,
                        const ProbeConfig& config,
                        const QuestionSource& source, int round_index);

ProbeRun run_probe(const ScoringClient& bot, const ProbeConfig& config,
                   const QuestionSource& source);

struct ProbeScore {
  double domain_precision = 1.0;
  double domain_recall = 0.0;
  double slot_precision = 1.0;
  double slot_recall = 0.0;
  int questions_to_convergence = 0;
};

// Lab-side accuracy/cost accounting against the gold schema. Empty extracted
// sets report precision 1 by convention. Convergence is the smallest
// questions_asked after which the validated schema never changed.
ProbeScore schema_prf(const ProbeRun& run, const Schema& gold);

}  // namespace dsx
