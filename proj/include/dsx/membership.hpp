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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dsx/blackbox.hpp"

namespace dsx {

inline constexpr const char* kMetricNone = "none";
inline constexpr const char* kMetricPpl = "ppl";
inline constexpr const char* kMetricPplZlib = "ppl_zlib";
inline constexpr const char* kMetricCPpl = "c_ppl";
inline constexpr const char* kMetricDcPpl = "dc_ppl";

const std::vector<std::string>& known_metrics();

// One extraction with its conditioning prefix and every membership score.
// All metrics are oriented so that lower means more member-like.
struct ScoredCandidate {
  std::string prefix;   // conditioning text, marker included
  std::string suffix;   // generated state text
  std::string strategy_tag;
  int prefix_length = 0;  // triplets in a targeted prefix; 0 when untargeted
  bool parseable = false;
  std::string canonical_suffix;  // parse/serialize normalization, else raw
  bool degenerate = false;       // suffix deterministic standalone (DC-PPL)
  bool correct = false;          // filled in by judging
  std::map<std::string, double> scores;
  std::map<std::string, int> ranks;
};

// Builds a candidate record from raw decode output, normalizing the suffix
// for deduplication.
ScoredCandidate make_candidate(const std::string& prefix,
                               const std::string& suffix,
                               const std::string& strategy_tag,
                               int prefix_length);

// exp of the mean negative log-probability of prefix+suffix as one sequence.
double ppl(const ScoringClient& bot, const ScoredCandidate& c);

// ln(PPL) scaled by the DEFLATE-compressed byte length of the sequence text;
// penalizes low-entropy repetitive strings that compress well.
double ppl_compression(const ScoringClient& bot, const ScoredCandidate& c);

// Perplexity of the suffix alone, conditioned on the prefix.
double c_ppl(const ScoringClient& bot, const ScoredCandidate& c);

// Conditional-to-standalone log-probability ratio of the suffix; < 1 means
// the prefix makes the suffix more predictable. Returns nullopt when the
// standalone suffix is fully deterministic (degenerate denominator).
std::optional<double> dc_ppl(const ScoringClient& bot,
                             const ScoredCandidate& c);

// Exact byte length of the text under the pinned DEFLATE parameters.
std::size_t compressed_length(const std::string& tokens);

// Fills every metric in `metrics` for every candidate, flagging DC-PPL
// degenerates instead of scoring them.
void score_candidates(const ScoringClient& bot,
                      std::vector<ScoredCandidate>& candidates,
                      const std::vector<std::string>& metrics);

// Deduplicates on the canonical suffix, sorts ascending by the metric (or
// preserves input order for "none"), breaks ties by suffix text, and keeps
// the top n. Candidates without the requested score are dropped.
std::vector<ScoredCandidate> rank_and_select(
    const std::vector<ScoredCandidate>& candidates, const std::string& metric,
    std::size_t top_n);

}  // namespace dsx
