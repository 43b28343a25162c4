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
#include <vector>

#include "dsx/blackbox.hpp"
#include "dsx/dialogue.hpp"

namespace dsx {

enum class Strategy {
  kVanilla,
  kTemperature,
  kDecayingTemperature,
  kBeamSearch,
  kGroupBeamSearch,
  kBeamSampling,
  kSchemaGuided,
};

std::string strategy_name(Strategy s);
Strategy strategy_from_name(const std::string& name);

struct DecayConfig {
  double start = 5.0;
  double step = 2.0;
  double floor = 1.0;
};

// Per-position temperature under the decaying schedule:
// max(floor, start - step * position).
double decayed_temperature(const DecayConfig& decay, int position);

struct DecodingConfig {
  Strategy strategy = Strategy::kVanilla;
  double temperature = 1.0;
  DecayConfig decay;
  int beam_size = 50;
  int n_groups = 1;
  double diversity_penalty = 1.0;
  int top_k = 0;             // 0 = off
  double nucleus_eta = 0.0;  // 0 = off
  double typical_phi = 0.0;  // 0 = off
  double repetition_penalty = 1.0;
  int max_tokens = 64;
  std::uint64_t seed = 1;

  void validate() const;  // throws ConfigError
  std::string tag() const;
};

struct RawCandidate {
  std::string prefix;
  std::string generated;
  std::string strategy_tag;
  std::uint64_t seed = 0;
  std::size_t sample_index = 0;
  bool terminated = false;  // ended on a terminator rather than max_tokens
};

// Applies, in order: repetition penalty on already-generated tokens,
// temperature flattening, then at most one truncation filter (top-k /
// nucleus / typical), renormalizing after each step. Entries come back
// sorted by descending probability.
TokenDistribution transform_distribution(const TokenDistribution& dist,
                                         const DecodingConfig& config,
                                         std::span<const TokenId> generated);

// Ancestral sampling for the vanilla / temperature / decaying-temperature
// strategies. Each sample draws from its own stream derived from
// (config.seed, sample index), so parallel and serial runs agree.
std::vector<RawCandidate> sample_decode(const ScoringClient& bot,
                                        const std::string& prompt,
                                        const DecodingConfig& config,
                                        int n_samples);

// Beam search and its group/sampling variants; returns up to beam_size
// finished hypotheses ranked by total sequence log-probability.
std::vector<RawCandidate> beam_decode(const ScoringClient& bot,
                                      const std::string& prompt,
                                      const DecodingConfig& config);

// Grammar-constrained sampling: domains and slots are drawn from the schema
// (phrase-scored and renormalized), values are sampled freely, and the
// structural tokens come from the grammar itself. The output always parses.
RawCandidate schema_guided_decode(const ScoringClient& bot,
                                  const std::string& prompt,
                                  const Schema& schema,
                                  const DecodingConfig& config,
                                  std::uint64_t sample_seed);

std::vector<RawCandidate> schema_guided_samples(const ScoringClient& bot,
                                                const std::string& prompt,
                                                const Schema& schema,
                                                const DecodingConfig& config,
                                                int n_samples);

}  // namespace dsx
