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

#include "dsx/decoding.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_set>

#include "dsx/error.hpp"
#include "dsx/rng.hpp"
#include "dsx/state.hpp"
#include "dsx/text.hpp"

namespace dsx {

std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::kVanilla: return "vanilla";
    case Strategy::kTemperature: return "temperature";
    case Strategy::kDecayingTemperature: return "decaying_temperature";
    case Strategy::kBeamSearch: return "beam_search";
    case Strategy::kGroupBeamSearch: return "group_beam_search";
    case Strategy::kBeamSampling: return "beam_sampling";
    case Strategy::kSchemaGuided: return "schema_guided";
  }
  return "unknown";
}

Strategy strategy_from_name(const std::string& name) {
  for (Strategy s : {Strategy::kVanilla, Strategy::kTemperature,
                     Strategy::kDecayingTemperature, Strategy::kBeamSearch,
                     Strategy::kGroupBeamSearch, Strategy::kBeamSampling,
                     Strategy::kSchemaGuided}) {
    if (strategy_name(s) == name) return s;
  }
  throw ConfigError("unknown decoding strategy: " + name);
}

void DecodingConfig::validate() const {
  if (temperature <= 0) throw ConfigError("temperature must be positive");
  if (max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
  if (repetition_penalty < 1.0)
    throw ConfigError("repetition_penalty must be >= 1");
  const int filters = (top_k > 0 ? 1 : 0) + (nucleus_eta > 0 ? 1 : 0) +
                      (typical_phi > 0 ? 1 : 0);
  if (filters > 1)
    throw ConfigError("at most one truncation filter may be active");
  if (nucleus_eta < 0 || nucleus_eta > 1)
    throw ConfigError("nucleus_eta must lie in (0, 1]");
  if (typical_phi < 0 || typical_phi > 1)
    throw ConfigError("typical_phi must lie in (0, 1]");
  const bool sampling = strategy == Strategy::kVanilla ||
                        strategy == Strategy::kTemperature ||
                        strategy == Strategy::kDecayingTemperature ||
                        strategy == Strategy::kSchemaGuided;
  if (!sampling && filters > 0)
    throw ConfigError("truncation filters compose with sampling strategies only");
  if (strategy == Strategy::kVanilla && temperature != 1.0)
    throw ConfigError("vanilla sampling is fixed at temperature 1");
  if ((strategy == Strategy::kBeamSearch ||
       strategy == Strategy::kGroupBeamSearch) &&
      temperature != 1.0)
    throw ConfigError("temperature applies to beam_sampling only among beam modes");
  if (strategy == Strategy::kBeamSearch ||
      strategy == Strategy::kGroupBeamSearch ||
      strategy == Strategy::kBeamSampling) {
    if (beam_size < 1) throw ConfigError("beam_size must be >= 1");
  }
  if (strategy == Strategy::kGroupBeamSearch) {
    if (n_groups < 1 || beam_size % n_groups != 0)
      throw ConfigError("beam_size must be divisible by n_groups");
  }
  if (strategy == Strategy::kDecayingTemperature) {
    if (decay.start <= 0 || decay.floor <= 0 || decay.step < 0)
      throw ConfigError("decaying temperature needs positive start and floor");
  }
}

std::string DecodingConfig::tag() const {
  std::ostringstream os;
  os << strategy_name(strategy);
  switch (strategy) {
    case Strategy::kTemperature:
      os << "(t=" << temperature << ")";
      break;
    case Strategy::kDecayingTemperature:
      os << "(start=" << decay.start << ",step=" << decay.step
         << ",floor=" << decay.floor << ")";
      break;
    case Strategy::kBeamSearch:
      os << "(B=" << beam_size << ")";
      break;
    case Strategy::kGroupBeamSearch:
      os << "(B=" << beam_size << ",groups=" << n_groups
         << ",penalty=" << diversity_penalty << ")";
      break;
    case Strategy::kBeamSampling:
      os << "(B=" << beam_size << ",t=" << temperature << ")";
      break;
    default:
      break;
  }
  if (top_k > 0) os << "+topk" << top_k;
  if (nucleus_eta > 0) os << "+nucleus" << nucleus_eta;
  if (typical_phi > 0) os << "+typical" << typical_phi;
  if (repetition_penalty != 1.0) os << "+rep" << repetition_penalty;
  return os.str();
}

namespace {

void renormalize(std::vector<TokenProb>& entries) {
  double total = 0.0;
  for (const TokenProb& e : entries) total += e.prob;
  for (TokenProb& e : entries) e.prob /= total;
}

void sort_desc(std::vector<TokenProb>& entries) {
  std::sort(entries.begin(), entries.end(),
            [](const TokenProb& a, const TokenProb& b) {
              if (a.prob != b.prob) return a.prob > b.prob;
              return a.id < b.id;
            });
}

// Token index drawn from a normalized, sorted distribution.
std::size_t draw(const TokenDistribution& dist, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < dist.entries.size(); ++i) {
    acc += dist.entries[i].prob;
    if (u < acc) return i;
  }
  return dist.entries.size() - 1;
}

bool is_terminator_token(const std::string& tok) {
  return tok == text::kEosState || tok == text::kEos;
}

}  // namespace

TokenDistribution transform_distribution(const TokenDistribution& dist,
                                         const DecodingConfig& config,
                                         std::span<const TokenId> generated) {
  config.validate();
  std::vector<TokenProb> entries = dist.entries;
  if (entries.empty()) throw EmptySupport("empty input distribution");

  // Work in the log domain throughout; exponentiation is shifted by the
  // maximum score so small probabilities survive extreme temperatures.
  std::vector<double> score(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i)
    score[i] = std::log(entries[i].prob);

  if (config.repetition_penalty != 1.0 && !generated.empty()) {
    const std::unordered_set<TokenId> seen(generated.begin(), generated.end());
    for (std::size_t i = 0; i < entries.size(); ++i)
      if (seen.count(entries[i].id))
        score[i] *= config.repetition_penalty;  // log-probs are <= 0
  }
  if (config.temperature != 1.0) {
    for (double& s : score) s /= config.temperature;
  }
  const double peak = *std::max_element(score.begin(), score.end());
  double total = 0.0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    entries[i].prob = std::exp(score[i] - peak);
    total += entries[i].prob;
  }
  for (TokenProb& e : entries) e.prob /= total;
  entries.erase(std::remove_if(entries.begin(), entries.end(),
                               [](const TokenProb& e) { return e.prob <= 0; }),
                entries.end());
  sort_desc(entries);

  if (config.top_k > 0) {
    if (entries.size() > static_cast<std::size_t>(config.top_k))
      entries.resize(static_cast<std::size_t>(config.top_k));
    renormalize(entries);
  } else if (config.nucleus_eta > 0) {
    double acc = 0.0;
    std::size_t keep = entries.size();
    for (std::size_t i = 0; i < entries.size(); ++i) {
      acc += entries[i].prob;
      if (acc >= config.nucleus_eta) {
        keep = i + 1;
        break;
      }
    }
    entries.resize(keep);
    renormalize(entries);
  } else if (config.typical_phi > 0) {
    double entropy = 0.0;
    for (const TokenProb& e : entries) entropy -= e.prob * std::log(e.prob);
    std::vector<std::size_t> order(entries.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double da = std::abs(-std::log(entries[a].prob) - entropy);
      const double db = std::abs(-std::log(entries[b].prob) - entropy);
      if (da != db) return da < db;
      return entries[a].id < entries[b].id;
    });
    double acc = 0.0;
    std::vector<TokenProb> kept;
    bool has_argmax = false;
    for (std::size_t i : order) {
      kept.push_back(entries[i]);
      if (i == 0) has_argmax = true;
      acc += entries[i].prob;
      if (acc >= config.typical_phi) break;
    }
    // The transform contract keeps the argmax token available.
    if (!has_argmax) kept.push_back(entries.front());
    entries = std::move(kept);
    sort_desc(entries);
    renormalize(entries);
  }

  if (entries.empty()) throw EmptySupport("filtering removed all mass");
  return TokenDistribution{std::move(entries)};
}

double decayed_temperature(const DecayConfig& d, int position) {
  return std::max(d.floor, d.start - d.step * static_cast<double>(position));
}

std::vector<RawCandidate> sample_decode(const ScoringClient& bot,
                                        const std::string& prompt,
                                        const DecodingConfig& config,
                                        int n_samples) {
  config.validate();
  if (config.strategy != Strategy::kVanilla &&
      config.strategy != Strategy::kTemperature &&
      config.strategy != Strategy::kDecayingTemperature)
    throw ConfigError("sample_decode handles the sampling strategies only");

  std::vector<RawCandidate> out;
  out.reserve(static_cast<std::size_t>(n_samples));
  for (int s = 0; s < n_samples; ++s) {
    Rng rng(derive_seed(config.seed, 0x5a, static_cast<std::uint64_t>(s)));
    std::string context = prompt;
    std::vector<std::string> generated;
    std::vector<TokenId> generated_ids;
    bool terminated = false;
    for (int step = 0; step < config.max_tokens; ++step) {
      DecodingConfig step_cfg = config;
      if (config.strategy == Strategy::kDecayingTemperature)
        step_cfg.temperature = decayed_temperature(config.decay, step);
      const TokenDistribution dist = transform_distribution(
          bot.next_token_distribution(context), step_cfg, generated_ids);
      const TokenProb& pick = dist.entries[draw(dist, rng)];
      if (is_terminator_token(pick.token)) {
        terminated = true;
        break;
      }
      generated.push_back(pick.token);
      generated_ids.push_back(pick.id);
      context = text::join_text(context, pick.token);
    }
    RawCandidate cand;
    cand.prefix = prompt;
    cand.generated = text::join_tokens(generated);
    cand.strategy_tag = config.tag();
    cand.seed = config.seed;
    cand.sample_index = static_cast<std::size_t>(s);
    cand.terminated = terminated;
    out.push_back(std::move(cand));
  }
  return out;
}

namespace {

struct Hypothesis {
  std::vector<std::string> tokens;
  std::vector<TokenId> ids;
  double score = 0.0;
  bool done = false;       // saw a terminator
  bool truncated = false;  // hit the token budget
};

bool hypothesis_before(const Hypothesis& a, const Hypothesis& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.ids < b.ids;
}

}  // namespace

std::vector<RawCandidate> beam_decode(const ScoringClient& bot,
                                      const std::string& prompt,
                                      const DecodingConfig& config) {
  config.validate();
  const bool grouped = config.strategy == Strategy::kGroupBeamSearch;
  const bool stochastic = config.strategy == Strategy::kBeamSampling;
  if (!grouped && !stochastic && config.strategy != Strategy::kBeamSearch)
    throw ConfigError("beam_decode handles the beam strategies only");

  const int n_groups = grouped ? config.n_groups : 1;
  const int group_width = config.beam_size / n_groups;
  Rng rng(derive_seed(config.seed, 0xbe, 0));

  std::vector<std::vector<Hypothesis>> groups(
      static_cast<std::size_t>(n_groups), {Hypothesis{}});
  std::vector<Hypothesis> finished;

  for (int step = 0; step < config.max_tokens; ++step) {
    bool any_live = false;
    std::vector<std::string> chosen_this_step;  // across earlier groups
    for (auto& group : groups) {
      struct Successor {
        std::size_t hyp;
        TokenProb tok;
        double score;       // with diversity penalty, used for selection
        double raw_score;   // pure sequence log-probability
      };
      std::vector<Successor> pool;
      std::vector<Hypothesis> kept;
      for (std::size_t h = 0; h < group.size(); ++h) {
        Hypothesis& hyp = group[h];
        if (hyp.done || hyp.truncated) {
          kept.push_back(hyp);
          continue;
        }
        any_live = true;
        std::string context = prompt;
        for (const std::string& tok : hyp.tokens)
          context = text::join_text(context, tok);
        TokenDistribution dist = bot.next_token_distribution(context);
        if (stochastic) {
          DecodingConfig step_cfg = config;
          dist = transform_distribution(dist, step_cfg, hyp.ids);
        }
        for (const TokenProb& e : dist.entries) {
          const double raw = hyp.score + std::log(e.prob);
          double selection = raw;
          if (grouped && config.diversity_penalty > 0) {
            const auto repeats = static_cast<double>(
                std::count(chosen_this_step.begin(), chosen_this_step.end(),
                           e.token));
            selection -= config.diversity_penalty * repeats;
          }
          pool.push_back({h, e, selection, raw});
        }
      }
      const std::size_t want =
          std::min(static_cast<std::size_t>(group_width), pool.size());
      std::vector<Successor> selected;
      if (stochastic) {
        // Multinomial draws without replacement over the candidate pool.
        std::vector<Successor> remaining = pool;
        for (std::size_t pick = 0; pick < want; ++pick) {
          double peak = remaining.front().score;
          for (const Successor& s : remaining) peak = std::max(peak, s.score);
          std::vector<double> weights;
          weights.reserve(remaining.size());
          for (const Successor& s : remaining)
            weights.push_back(std::exp(s.score - peak));
          const std::size_t idx = rng.weighted(weights);
          selected.push_back(remaining[idx]);
          remaining.erase(remaining.begin() +
                          static_cast<std::ptrdiff_t>(idx));
        }
      } else {
        std::sort(pool.begin(), pool.end(),
                  [](const Successor& a, const Successor& b) {
                    if (a.score != b.score) return a.score > b.score;
                    if (a.hyp != b.hyp) return a.hyp < b.hyp;
                    return a.tok.id < b.tok.id;
                  });
        selected.assign(pool.begin(),
                        pool.begin() + static_cast<std::ptrdiff_t>(want));
      }
      std::vector<Hypothesis> next = std::move(kept);
      for (const Successor& s : selected) {
        Hypothesis hyp = group[s.hyp];
        hyp.score = s.raw_score;
        if (is_terminator_token(s.tok.token)) {
          hyp.done = true;
        } else {
          hyp.tokens.push_back(s.tok.token);
          hyp.ids.push_back(s.tok.id);
        }
        chosen_this_step.push_back(s.tok.token);
        next.push_back(std::move(hyp));
      }
      // Keep at most group_width hypotheses (finished ones included).
      std::sort(next.begin(), next.end(), hypothesis_before);
      if (next.size() > static_cast<std::size_t>(group_width))
        next.resize(static_cast<std::size_t>(group_width));
      group = std::move(next);
    }
    if (!any_live) break;
    if (step + 1 == config.max_tokens) {
      for (auto& group : groups)
        for (Hypothesis& hyp : group)
          if (!hyp.done) hyp.truncated = true;
    }
  }

  for (const auto& group : groups)
    for (const Hypothesis& hyp : group) finished.push_back(hyp);
  std::sort(finished.begin(), finished.end(), hypothesis_before);
  if (finished.size() > static_cast<std::size_t>(config.beam_size))
    finished.resize(static_cast<std::size_t>(config.beam_size));

  std::vector<RawCandidate> out;
  for (std::size_t i = 0; i < finished.size(); ++i) {
    RawCandidate cand;
    cand.prefix = prompt;
    cand.generated = text::join_tokens(finished[i].tokens);
    cand.strategy_tag = config.tag();
    cand.seed = config.seed;
    cand.sample_index = i;
    cand.terminated = finished[i].done;
    out.push_back(std::move(cand));
  }
  return out;
}

namespace {

// Grammar position while emitting a belief state left to right.
enum class SlotPos { kDomain, kSlot, kValue };

struct GrammarState {
  SlotPos pos = SlotPos::kDomain;
  std::string current_domain;
  std::set<std::string> used_domains;
  std::set<std::string> filled_slots;  // of current_domain
  bool any_group_closed = false;
};

// Reconstructs the grammar position from a prompt that may carry a partial
// state (targeted prefixes end with `,` or `) `).
GrammarState scan_prompt(const std::string& prompt, const Schema& schema) {
  GrammarState st;
  std::vector<std::string> toks = text::split_tokens(prompt);
  // Only the portion after the last marker can be state text.
  std::size_t begin = 0;
  for (std::size_t i = 0; i < toks.size(); ++i)
    if (toks[i] == text::kStateMarker) begin = i + 1;
  bool open = false;
  enum { kExpectDomain, kExpectSlot, kExpectValue } expect = kExpectDomain;
  for (std::size_t i = begin; i < toks.size(); ++i) {
    const std::string& tok = toks[i];
    if (tok == "(") {
      open = true;
      expect = kExpectSlot;
    } else if (tok == ")") {
      open = false;
      st.used_domains.insert(st.current_domain);
      st.any_group_closed = true;
      expect = kExpectDomain;
    } else if (tok == ",") {
      if (open) expect = kExpectSlot;
    } else if (tok == "=") {
      expect = kExpectValue;
    } else if (expect == kExpectDomain && is_valid_domain(tok)) {
      st.current_domain = tok;
      st.filled_slots.clear();
    } else if (expect == kExpectSlot && open && is_valid_slot(tok)) {
      st.filled_slots.insert(tok);
    }
  }
  st.pos = open ? SlotPos::kSlot : SlotPos::kDomain;
  if (open && !schema.has_domain(st.current_domain)) {
    // A prefix opened a domain the schema does not know; constrain slots to
    // nothing so the group is closed immediately.
    st.filled_slots.clear();
  }
  return st;
}

double phrase_prob(const ScoringClient& bot, const std::string& context,
                   const std::string& phrase) {
  try {
    return std::exp(bot.sequence_logprob(context, phrase).total);
  } catch (const UnknownToken&) {
    return 0.0;
  }
}

// Samples one option from temperature-adjusted phrase probabilities.
std::size_t pick_option(const std::vector<double>& probs, double temperature,
                        Rng& rng) {
  std::vector<double> w(probs.size());
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    w[i] = probs[i] > 0 ? std::pow(probs[i], 1.0 / temperature) : 0.0;
    total += w[i];
  }
  if (total <= 0) {
    // Degenerate scores; fall back to the uniform choice.
    return rng.below(w.size());
  }
  return rng.weighted(w);
}

}  // namespace

RawCandidate schema_guided_decode(const ScoringClient& bot,
                                  const std::string& prompt,
                                  const Schema& schema,
                                  const DecodingConfig& config,
                                  std::uint64_t sample_seed) {
  config.validate();
  if (schema.empty()) throw SchemaEmpty("schema-guided decoding needs a schema");

  Rng rng(sample_seed);
  GrammarState st = scan_prompt(prompt, schema);
  std::string context = prompt;
  std::vector<std::string> generated;
  std::vector<TokenId> generated_ids;
  bool terminated = false;

  auto emit = [&](const std::string& tok, TokenId id = 0) {
    generated.push_back(tok);
    generated_ids.push_back(id);
    context = text::join_text(context, tok);
  };

  int value_tokens_in_run = 0;
  while (static_cast<int>(generated.size()) < config.max_tokens) {
    if (st.pos == SlotPos::kDomain) {
      std::vector<std::string> options;
      for (const auto& [domain, slots] : schema.domains)
        if (!st.used_domains.count(domain)) options.push_back(domain);
      const bool offer_end = st.any_group_closed;
      std::vector<double> probs;
      for (const std::string& d : options)
        probs.push_back(phrase_prob(bot, context, d));
      if (offer_end)
        probs.push_back(phrase_prob(bot, context, std::string(text::kEosState)));
      if (options.empty() && !offer_end) break;
      const std::size_t pick = pick_option(probs, config.temperature, rng);
      if (offer_end && pick == options.size()) {
        terminated = true;
        break;
      }
      if (options.empty()) {
        terminated = true;
        break;
      }
      st.current_domain = options[pick];
      st.filled_slots.clear();
      emit(st.current_domain);
      emit("(");
      st.pos = SlotPos::kSlot;
    } else if (st.pos == SlotPos::kSlot) {
      std::vector<std::string> options;
      if (const auto* slots = schema.slots_of(st.current_domain))
        for (const std::string& s : *slots)
          if (!st.filled_slots.count(s)) options.push_back(s);
      if (options.empty()) {
        // Resumed prefix whose domain has no free slot left; the open group
        // still needs one pair after `(` or `,` to stay well formed.
        const char last = context.empty() ? '\0' : context.back();
        if (last == '(' || last == ',') {
          emit("overflow");
          emit("=");
          emit(std::string(text::kUnk));
        }
        emit(")");
        st.used_domains.insert(st.current_domain);
        st.any_group_closed = true;
        st.pos = SlotPos::kDomain;
        continue;
      }
      std::vector<double> probs;
      for (const std::string& s : options)
        probs.push_back(phrase_prob(bot, context, s));
      const std::size_t pick = pick_option(probs, config.temperature, rng);
      st.filled_slots.insert(options[pick]);
      emit(options[pick]);
      emit("=");
      st.pos = SlotPos::kValue;
      value_tokens_in_run = 0;
    } else {
      // Value position: free sampling, with the grammar masking whatever
      // would break the state format at this point.
      constexpr int kMaxValueTokens = 8;
      const bool allow_boundary = value_tokens_in_run > 0;
      bool more_slots = false;
      if (const auto* slots = schema.slots_of(st.current_domain))
        more_slots = st.filled_slots.size() < slots->size();
      TokenDistribution dist = transform_distribution(
          bot.next_token_distribution(context), config, generated_ids);
      std::vector<TokenProb> masked;
      for (const TokenProb& e : dist.entries) {
        if (e.token == "(" || e.token == "=" || e.token == text::kEos ||
            e.token == text::kEosState || e.token == text::kStateMarker)
          continue;
        const bool boundary = e.token == ")" || e.token == ",";
        if (boundary && !allow_boundary) continue;
        if (e.token == "," && !more_slots) continue;
        if (value_tokens_in_run >= kMaxValueTokens && !boundary) continue;
        masked.push_back(e);
      }
      if (masked.empty()) {
        // Nothing legal to sample (can only happen at the token budget's
        // edge); close the group grammatically.
        if (!allow_boundary) emit(std::string(text::kUnk));
        emit(")");
        st.used_domains.insert(st.current_domain);
        st.any_group_closed = true;
        st.pos = SlotPos::kDomain;
        continue;
      }
      double total = 0.0;
      for (const TokenProb& e : masked) total += e.prob;
      for (TokenProb& e : masked) e.prob /= total;
      const TokenDistribution choice{std::move(masked)};
      const TokenProb& pick = choice.entries[draw(choice, rng)];
      if (pick.token == ")") {
        emit(")", pick.id);
        st.used_domains.insert(st.current_domain);
        st.any_group_closed = true;
        st.pos = SlotPos::kDomain;
      } else if (pick.token == ",") {
        emit(",", pick.id);
        st.pos = SlotPos::kSlot;
      } else {
        emit(pick.token, pick.id);
        ++value_tokens_in_run;
      }
    }
  }

  // Budget exhaustion can leave a group open; close it so the output parses.
  if (st.pos == SlotPos::kValue && value_tokens_in_run == 0)
    emit(std::string(text::kUnk));
  if (st.pos == SlotPos::kSlot) {
    if (!generated.empty() && generated.back() == ",") {
      // Drop the trailing comma we emitted and close.
      generated.pop_back();
      generated_ids.pop_back();
    } else {
      // The group has no completed pair yet; give it one so it parses.
      std::string slot = "overflow";
      if (const auto* slots = schema.slots_of(st.current_domain))
        for (const std::string& s : *slots)
          if (!st.filled_slots.count(s)) {
            slot = s;
            break;
          }
      emit(slot);
      emit("=");
      emit(std::string(text::kUnk));
    }
    emit(")");
  } else if (st.pos == SlotPos::kValue) {
    emit(")");
  }

  RawCandidate cand;
  cand.prefix = prompt;
  cand.generated = text::join_tokens(generated);
  cand.strategy_tag = config.tag();
  cand.seed = sample_seed;
  cand.terminated = terminated;
  return cand;
}

std::vector<RawCandidate> schema_guided_samples(const ScoringClient& bot,
                                                const std::string& prompt,
                                                const Schema& schema,
                                                const DecodingConfig& config,
                                                int n_samples) {
  std::vector<RawCandidate> out;
  out.reserve(static_cast<std::size_t>(n_samples));
  for (int s = 0; s < n_samples; ++s) {
    RawCandidate cand = schema_guided_decode(
        bot, prompt, schema, config,
        derive_seed(config.seed, 0x5c9, static_cast<std::uint64_t>(s)));
    cand.sample_index = static_cast<std::size_t>(s);
    out.push_back(std::move(cand));
  }
  return out;
}

}  // namespace dsx
