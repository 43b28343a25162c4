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

namespace dsx {

using TokenId = std::uint32_t;

struct TokenProb {
  TokenId id = 0;
  std::string token;
  double prob = 0.0;
};

// Next-token distribution, descending by probability with ties broken by
// ascending token id. Probabilities are strictly positive and sum to 1.
struct TokenDistribution {
  std::vector<TokenProb> entries;
};

struct SequenceScore {
  double total = 0.0;                // sum of per_token
  std::vector<double> per_token;     // natural-log probabilities
};

// Score-based black-box access to a victim bot. These three operations are
// the entire attack surface: attacker-side modules must depend on nothing
// else, whether the bot runs in process or behind the wire protocol.
class ScoringClient {
 public:
  virtual ~ScoringClient() = default;

  virtual TokenDistribution next_token_distribution(
      const std::string& context) const = 0;

  // Per-token log-probabilities of `target` continued from `context`.
  // Throws UnknownToken when the target contains a token the bot can never
  // emit.
  virtual SequenceScore sequence_logprob(const std::string& context,
                                         const std::string& target) const = 0;

  // Argmax continuation until an end-of-state/end-of-sequence token or
  // `max_tokens`; returns only the continuation text.
  virtual std::string greedy_decode(const std::string& prompt,
                                    int max_tokens) const = 0;
};

}  // namespace dsx
