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

#include "dsx/membership.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include <zlib.h>

#include "dsx/error.hpp"
#include "dsx/state.hpp"
#include "dsx/text.hpp"

namespace dsx {

namespace {

// Pinned so scores are identical across runs and platforms.
constexpr int kCompressionLevel = 9;

std::string full_sequence(const ScoredCandidate& c) {
  return text::join_text(c.prefix, c.suffix);
}

}  // namespace

const std::vector<std::string>& known_metrics() {
  static const std::vector<std::string> metrics = {
      kMetricNone, kMetricPpl, kMetricPplZlib, kMetricCPpl, kMetricDcPpl};
  return metrics;
}

ScoredCandidate make_candidate(const std::string& prefix,
                               const std::string& suffix,
                               const std::string& strategy_tag,
                               int prefix_length) {
  ScoredCandidate c;
  c.prefix = prefix;
  c.suffix = suffix;
  c.strategy_tag = strategy_tag;
  c.prefix_length = prefix_length;
  try {
    c.canonical_suffix = serialize_state(parse_state(suffix));
    c.parseable = true;
  } catch (const ParseError&) {
    c.canonical_suffix = suffix;
    c.parseable = false;
  }
  return c;
}

double ppl(const ScoringClient& bot, const ScoredCandidate& c) {
  const SequenceScore s = bot.sequence_logprob("", full_sequence(c));
  return std::exp(-s.total / static_cast<double>(s.per_token.size()));
}

std::size_t compressed_length(const std::string& txt) {
  uLongf bound = compressBound(static_cast<uLong>(txt.size()));
  std::vector<Bytef> buf(bound);
  const int rc = compress2(buf.data(), &bound,
                           reinterpret_cast<const Bytef*>(txt.data()),
                           static_cast<uLong>(txt.size()), kCompressionLevel);
  if (rc != Z_OK) throw IoError("deflate failed");
  return static_cast<std::size_t>(bound);
}

double ppl_compression(const ScoringClient& bot, const ScoredCandidate& c) {
  const std::string txt = full_sequence(c);
  return std::log(ppl(bot, c)) /
         static_cast<double>(compressed_length(txt));
}

double c_ppl(const ScoringClient& bot, const ScoredCandidate& c) {
  const SequenceScore s = bot.sequence_logprob(c.prefix, c.suffix);
  return std::exp(-s.total / static_cast<double>(s.per_token.size()));
}

std::optional<double> dc_ppl(const ScoringClient& bot,
                             const ScoredCandidate& c) {
  const double conditioned = bot.sequence_logprob(c.prefix, c.suffix).total;
  const double standalone = bot.sequence_logprob("", c.suffix).total;
  if (standalone == 0.0) return std::nullopt;
  return conditioned / standalone;
}

void score_candidates(const ScoringClient& bot,
                      std::vector<ScoredCandidate>& candidates,
                      const std::vector<std::string>& metrics) {
  for (const std::string& metric : metrics) {
    if (std::find(known_metrics().begin(), known_metrics().end(), metric) ==
        known_metrics().end())
      throw UnknownMetric("unknown membership metric: " + metric);
  }
  for (ScoredCandidate& c : candidates) {
    for (const std::string& metric : metrics) {
      if (metric == kMetricNone) continue;
      if (metric == kMetricPpl) {
        c.scores[metric] = ppl(bot, c);
      } else if (metric == kMetricPplZlib) {
        c.scores[metric] = ppl_compression(bot, c);
      } else if (metric == kMetricCPpl) {
        c.scores[metric] = c_ppl(bot, c);
      } else if (metric == kMetricDcPpl) {
        if (const auto v = dc_ppl(bot, c)) {
          c.scores[metric] = *v;
        } else {
          c.degenerate = true;
        }
      }
    }
  }
}

std::vector<ScoredCandidate> rank_and_select(
    const std::vector<ScoredCandidate>& candidates, const std::string& metric,
    std::size_t top_n) {
  if (top_n < 1) throw ConfigError("top_n must be >= 1");
  if (std::find(known_metrics().begin(), known_metrics().end(), metric) ==
      known_metrics().end())
    throw UnknownMetric("unknown membership metric: " + metric);

  std::vector<ScoredCandidate> pool;
  std::unordered_set<std::string> seen;
  for (const ScoredCandidate& c : candidates) {
    if (!seen.insert(c.canonical_suffix).second) continue;
    pool.push_back(c);
  }
  if (metric != kMetricNone) {
    std::vector<ScoredCandidate> scored;
    for (ScoredCandidate& c : pool) {
      if (c.scores.count(metric)) scored.push_back(std::move(c));
    }
    pool = std::move(scored);
    std::sort(pool.begin(), pool.end(),
              [&](const ScoredCandidate& a, const ScoredCandidate& b) {
                const double sa = a.scores.at(metric);
                const double sb = b.scores.at(metric);
                if (sa != sb) return sa < sb;  // lower = more member-like
                return a.suffix < b.suffix;
              });
  }
  if (pool.size() > top_n) pool.resize(top_n);
  for (std::size_t i = 0; i < pool.size(); ++i)
    pool[i].ranks[metric] = static_cast<int>(i) + 1;
  return pool;
}

}  // namespace dsx
