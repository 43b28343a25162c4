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
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dsx/blackbox.hpp"
#include "dsx/corpus.hpp"
#include "dsx/dialogue.hpp"
#include "dsx/tokenizer.hpp"

namespace dsx {

struct DstScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t n_turns = 0;
};

// Count-based conditional language model: interpolated Witten-Bell n-grams
// whose counts are accumulated only at target-span positions (states,
// actions, responses), with full-sequence contexts. Immutable after
// training; every query is a pure function of (model, input).
class SurrogateModel {
 public:
  SurrogateModel() = default;  // empty shell until train() or load()

  static SurrogateModel train(const std::vector<TrainingExample>& examples,
                              int order, std::uint64_t seed);

  // Interpolated distribution over the generable (target-span) vocabulary.
  // Backs off order by order for unseen contexts, down to a smoothed
  // unigram; the empty context is allowed.
  TokenDistribution next_token_distribution(
      std::span<const TokenId> context) const;

  // Probability of one next token under the same interpolation.
  double token_prob(std::span<const TokenId> context, TokenId token) const;

  // Per-token log-probabilities of `target` continued from `context`.
  // Throws UnknownToken for ids outside the vocabulary or tokens the model
  // can never emit.
  SequenceScore sequence_logprob(std::span<const TokenId> context,
                                 std::span<const TokenId> target) const;

  // Argmax continuation (ties to the lowest token id) until a terminator or
  // max_tokens; returns the continuation text only.
  std::string greedy_decode(const std::string& prompt, int max_tokens) const;

  // Dialogue state tracking quality: greedy-decodes the state for every turn
  // of every dialogue given its history and micro-averages triplet
  // precision/recall/F1 against the gold states.
  DstScores dst_eval(const std::vector<Dialogue>& dialogues) const;

  const Tokenizer& tokenizer() const { return tokenizer_; }
  int order() const { return order_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<TokenId>& target_vocab() const { return target_vocab_; }
  bool generable(TokenId id) const;

  void save(const std::string& path) const;
  static SurrogateModel load(const std::string& path);

 private:
  struct Followers {
    std::vector<std::pair<TokenId, std::uint32_t>> counts;  // sorted by id
    std::uint64_t total = 0;
    std::uint32_t count_of(TokenId id) const;
  };
  struct ContextHash {
    std::size_t operator()(const std::vector<TokenId>& v) const;
  };
  using CountTable =
      std::unordered_map<std::vector<TokenId>, Followers, ContextHash>;

  int order_ = 5;
  std::uint64_t seed_ = 0;
  Tokenizer tokenizer_;
  std::vector<TokenId> target_vocab_;          // sorted
  std::vector<char> in_target_vocab_;          // indexed by token id
  std::vector<CountTable> tables_;             // tables_[k-1]: order k
};

// In-process realization of the black-box contract.
class InProcessBot : public ScoringClient {
 public:
  explicit InProcessBot(const SurrogateModel& model) : model_(&model) {}

  TokenDistribution next_token_distribution(
      const std::string& context) const override;
  SequenceScore sequence_logprob(const std::string& context,
                                 const std::string& target) const override;
  std::string greedy_decode(const std::string& prompt,
                            int max_tokens) const override;

 private:
  const SurrogateModel* model_;
};

}  // namespace dsx
