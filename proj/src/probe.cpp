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

#include "dsx/probe.hpp"

#include <algorithm>
#include <regex>
#include <set>

#include "dsx/decoding.hpp"
#include "dsx/error.hpp"
#include "dsx/rng.hpp"
#include "dsx/text.hpp"

namespace dsx {

namespace {

std::string normalize_slot_name(std::string slot) {
  slot = text::to_lower(slot);
  std::replace(slot.begin(), slot.end(), ' ', '_');
  return slot;
}

std::string slot_words(std::string_view slot) {
  std::string out(slot);
  std::replace(out.begin(), out.end(), '_', ' ');
  return out;
}

}  // namespace

MentionCounts extract_mentions(const std::vector<std::string>& state_texts) {
  static const std::regex domain_re(R"(([A-Z][A-Za-z]*)\s*\()");
  static const std::regex slot_re(R"(([a-z][a-z_]*)\s*=\s*([^,)=(]*))");
  MentionCounts out;
  for (const std::string& txt : state_texts) {
    // Positions of each domain opener; slots attach to the nearest opener on
    // their left. Slots before any opener are skipped.
    std::vector<std::pair<std::size_t, std::string>> openers;
    for (auto it = std::sregex_iterator(txt.begin(), txt.end(), domain_re);
         it != std::sregex_iterator(); ++it) {
      openers.emplace_back(static_cast<std::size_t>(it->position(0)),
                           (*it)[1].str());
      out.domains[(*it)[1].str()] += 1;
    }
    for (auto it = std::sregex_iterator(txt.begin(), txt.end(), slot_re);
         it != std::sregex_iterator(); ++it) {
      const auto pos = static_cast<std::size_t>(it->position(0));
      const std::string* domain = nullptr;
      for (const auto& [opos, name] : openers) {
        if (opos < pos) domain = &name;
      }
      if (domain == nullptr) continue;
      const std::string slot = normalize_slot_name((*it)[1].str());
      out.slots[{*domain, slot}] += 1;
      const std::string value = text::trim((*it)[2].str());
      if (!value.empty()) out.value_hints[{*domain, slot}] = value;
    }
  }
  return out;
}

std::vector<std::string> ScriptedQuestionSource::questions(
    const Schema& known, int n, std::uint64_t seed) const {
  static constexpr const char* kRandomPool[] = {
      "hello i need some help planning my day",
      "can you find me something nice to do",
      "please book me something cheap for tonight",
      "i am new in town what services do you offer ?",
      "help me organize a small trip",
      "i would like to make a reservation somewhere",
      "what can you help me with today ?",
      "find me a good place for this weekend",
  };
  Rng rng(derive_seed(seed, 0x9e57, 0));
  std::vector<std::string> out;
  int i = 0;
  while (static_cast<int>(out.size()) < n) {
    const int kind = i++ % 3;
    if (kind == 0 && !known.domains.empty()) {
      // In-schema paraphrase probing adjacent slots of a known domain.
      const auto& [domain, slots] = known.domains[rng.below(known.domains.size())];
      const std::string dw = text::to_lower(domain);
      if (slots.empty() || rng.bernoulli(0.5)) {
        out.push_back("i am looking for a " + dw +
                      " what options do you have ?");
      } else {
        const std::string sw = slot_words(slots[rng.below(slots.size())]);
        out.push_back("for the " + dw + " does the " + sw +
                      " matter ? i am flexible");
      }
    } else if (kind == 1 && known.domains.size() >= 2) {
      // Cross-domain probing combining two known domains.
      const std::size_t a = rng.below(known.domains.size());
      std::size_t b = rng.below(known.domains.size());
      if (b == a) b = (b + 1) % known.domains.size();
      out.push_back("can i get a " + text::to_lower(known.domains[a].first) +
                    " near the " + text::to_lower(known.domains[b].first) +
                    " please ?");
    } else {
      // Random out-of-schema task queries.
      out.push_back(kRandomPool[rng.below(std::size(kRandomPool))]);
    }
  }
  return out;
}

std::string ScriptedQuestionSource::verification_question(
    const std::string& domain, const std::string& slot,
    const std::string& value_hint, std::uint64_t seed) const {
  Rng rng(derive_seed(seed, 0x9e58, 0));
  const std::string dw = text::to_lower(domain);
  if (slot.empty())
    return "i am looking for a " + dw + " what options do you have ?";
  const std::string sw = slot_words(slot);
  if (!value_hint.empty() && rng.bernoulli(0.75))
    return "i want the " + sw + " to be " + value_hint;
  return "please find a " + dw + " where the " + sw + " is whatever works";
}

void ProbeConfig::validate() const {
  if (high_temperature <= low_temperature)
    throw ConfigError("high_temperature must exceed low_temperature");
  if (low_temperature <= 0) throw ConfigError("temperatures must be positive");
  if (rounds < 0 || questions_per_round < 1 || min_consistency_count < 1 ||
      verifications_per_mention < 1)
    throw ConfigError("invalid probe configuration");
}

namespace {

std::string decode_state_at(const ScoringClient& bot,
                            const std::string& question, double temperature,
                            int max_tokens, std::uint64_t seed) {
  DecodingConfig cfg;
  cfg.strategy = Strategy::kTemperature;
  cfg.temperature = temperature;
  cfg.max_tokens = max_tokens;
  cfg.seed = seed;
  const std::string prompt =
      text::join_text(question, std::string(text::kStateMarker));
  return sample_decode(bot, prompt, cfg, 1).front().generated;
}

PendingMention* find_pending(ProbeState& state, const std::string& domain,
                             const std::string& slot) {
  for (PendingMention& m : state.pending)
    if (m.domain == domain && m.slot == slot) return &m;
  return nullptr;
}

bool is_validated(const ProbeState& state, const std::string& domain,
                  const std::string& slot) {
  const auto* slots = state.validated.slots_of(domain);
  if (slots == nullptr) return false;
  if (slot.empty()) return true;
  return std::find(slots->begin(), slots->end(), slot) != slots->end();
}

void record_mentions(ProbeState& state, const MentionCounts& mentions,
                     bool high_regime) {
  auto bump = [&](const std::string& domain, const std::string& slot,
                  int count, const std::string& hint) {
    if (is_validated(state, domain, slot)) return;
    PendingMention* m = find_pending(state, domain, slot);
    if (m == nullptr) {
      state.pending.push_back({domain, slot, 0, 0, ""});
      m = &state.pending.back();
    }
    (high_regime ? m->high_count : m->low_count) += count;
    if (!hint.empty()) m->value_hint = hint;
  };
  for (const auto& [domain, count] : mentions.domains)
    bump(domain, "", count, "");
  for (const auto& [key, count] : mentions.slots) {
    const auto hint_it = mentions.value_hints.find(key);
    bump(key.first, key.second, count,
         hint_it == mentions.value_hints.end() ? "" : hint_it->second);
  }
}

}  // namespace

void probe_round(const ScoringClient& bot, ProbeState& state,
                 const ProbeConfig& config, const QuestionSource& source,
                 int round_index) {
  config.validate();
  const auto questions = source.questions(
      state.validated, config.questions_per_round,
      derive_seed(config.seed, 0x40, static_cast<std::uint64_t>(round_index)));
  for (std::size_t q = 0; q < questions.size(); ++q) {
    const std::string decoded = decode_state_at(
        bot, questions[q], config.high_temperature, config.max_state_tokens,
        derive_seed(config.seed, 0x41,
                    static_cast<std::uint64_t>(round_index) * 1000 + q));
    state.questions_asked += 1;
    state.transcript.emplace_back(questions[q], decoded);
    record_mentions(state, extract_mentions({decoded}), /*high_regime=*/true);
  }
}

void consistency_filter(const ScoringClient& bot, ProbeState& state,
                        const ProbeConfig& config,
                        const QuestionSource& source, int round_index) {
  config.validate();
  if (state.pending.empty()) return;
  // Verification: turn each pending mention back into a question and decode
  // with the confident low-temperature regime.
  for (std::size_t i = 0; i < state.pending.size(); ++i) {
    PendingMention& m = state.pending[i];
    if (m.high_count < config.min_consistency_count) continue;
    for (int v = 0; v < config.verifications_per_mention; ++v) {
      const std::uint64_t qseed =
          derive_seed(config.seed, 0x42,
                      (static_cast<std::uint64_t>(round_index) << 32) ^
                          (i * 97 + static_cast<std::uint64_t>(v)));
      const std::string question =
          source.verification_question(m.domain, m.slot, m.value_hint, qseed);
      const std::string decoded =
          decode_state_at(bot, question, config.low_temperature,
                          config.max_state_tokens, qseed ^ 0x1);
      state.questions_asked += 1;
      state.transcript.emplace_back(question, decoded);
      const MentionCounts seen = extract_mentions({decoded});
      if (m.slot.empty()) {
        const auto it = seen.domains.find(m.domain);
        if (it != seen.domains.end()) m.low_count += it->second;
      } else {
        const auto it = seen.slots.find({m.domain, m.slot});
        if (it != seen.slots.end()) m.low_count += it->second;
      }
    }
  }
  // Promote mentions seen consistently in both regimes; drop the rest.
  auto slots_entry = [&](const std::string& d) -> std::vector<std::string>& {
    for (auto& [name, slots] : state.validated.domains)
      if (name == d) return slots;
    state.validated.domains.emplace_back(d, std::vector<std::string>{});
    return state.validated.domains.back().second;
  };
  for (const PendingMention& m : state.pending) {
    if (m.high_count < config.min_consistency_count ||
        m.low_count < config.min_consistency_count)
      continue;
    std::vector<std::string>& slots = slots_entry(m.domain);
    if (!m.slot.empty() &&
        std::find(slots.begin(), slots.end(), m.slot) == slots.end())
      slots.push_back(m.slot);
  }
  state.pending.clear();
}

ProbeRun run_probe(const ScoringClient& bot, const ProbeConfig& config,
                   const QuestionSource& source) {
  config.validate();
  ProbeRun run;
  for (int r = 0; r < config.rounds; ++r) {
    probe_round(bot, run.state, config, source, r);
    consistency_filter(bot, run.state, config, source, r);
    run.history.emplace_back(run.state.questions_asked, run.state.validated);
  }
  return run;
}

namespace {

std::set<std::string> domain_set(const Schema& s) {
  std::set<std::string> out;
  for (const auto& [d, slots] : s.domains) out.insert(d);
  return out;
}

std::set<std::pair<std::string, std::string>> slot_set(const Schema& s) {
  std::set<std::pair<std::string, std::string>> out;
  for (const auto& [d, slots] : s.domains)
    for (const std::string& slot : slots) out.emplace(d, slot);
  return out;
}

template <typename Set>
std::pair<double, double> precision_recall(const Set& extracted,
                                           const Set& gold) {
  std::size_t hit = 0;
  for (const auto& e : extracted)
    if (gold.count(e)) ++hit;
  const double precision =
      extracted.empty() ? 1.0
                        : static_cast<double>(hit) /
                              static_cast<double>(extracted.size());
  const double recall = gold.empty()
                            ? 1.0
                            : static_cast<double>(hit) /
                                  static_cast<double>(gold.size());
  return {precision, recall};
}

}  // namespace

ProbeScore schema_prf(const ProbeRun& run, const Schema& gold) {
  ProbeScore score;
  const auto [dp, dr] =
      precision_recall(domain_set(run.state.validated), domain_set(gold));
  const auto [sp, sr] =
      precision_recall(slot_set(run.state.validated), slot_set(gold));
  score.domain_precision = dp;
  score.domain_recall = dr;
  score.slot_precision = sp;
  score.slot_recall = sr;
  // Earliest snapshot whose schema persisted to the end of the run.
  score.questions_to_convergence =
      run.history.empty() ? 0 : run.history.back().first;
  if (!run.history.empty()) {
    const Schema& final_schema = run.history.back().second;
    for (const auto& [asked, schema] : run.history) {
      if (schema == final_schema) {
        score.questions_to_convergence = asked;
        break;
      }
    }
  }
  return score;
}

}  // namespace dsx
