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

#include "dsx/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "dsx/error.hpp"
#include "dsx/rng.hpp"
#include "dsx/text.hpp"

namespace dsx {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

constexpr std::size_t kDstTrainCap = 50;    // dialogues scored in-train
constexpr std::size_t kDstHoldoutCap = 100; // dialogues scored held-out

}  // namespace

std::string DefenseSpec::name() const {
  std::string out = dialogue_level ? "dialogue_level" : "turn_level";
  if (replace_rate > 0 || remove_rate > 0) {
    out += "+counterfactual(replace=" + std::to_string(replace_rate) +
           ",remove=" + std::to_string(remove_rate) + ")";
  }
  return out;
}

void ExperimentConfig::validate() const {
  corpus.validate();
  if (sample_budget < 1) throw ConfigError("sample_budget must be >= 1");
  if (samples_per_prefix < 1)
    throw ConfigError("samples_per_prefix must be >= 1");
  if (top_n < 1) throw ConfigError("top_n must be >= 1");
  if (model_order < 1) throw ConfigError("model_order must be >= 1");
  if (holdout_fraction < 0 || holdout_fraction >= 1)
    throw ConfigError("holdout_fraction must lie in [0, 1)");
  if (attack_mode == AttackMode::kTargeted && prefix_lengths.empty())
    throw ConfigError("targeted attacks need prefix lengths");
  for (const DecodingConfig& d : decoding) d.validate();
  for (const std::string& m : metrics)
    if (std::find(known_metrics().begin(), known_metrics().end(), m) ==
        known_metrics().end())
      throw UnknownMetric("unknown metric in config: " + m);
}

std::vector<DecodingConfig> ExperimentConfig::default_sweep(
    std::uint64_t seed) {
  std::vector<DecodingConfig> sweep;
  DecodingConfig vanilla;
  vanilla.strategy = Strategy::kVanilla;
  sweep.push_back(vanilla);

  DecodingConfig temp;
  temp.strategy = Strategy::kTemperature;
  temp.temperature = 2.0;
  sweep.push_back(temp);

  DecodingConfig decay;
  decay.strategy = Strategy::kDecayingTemperature;
  decay.decay = {5.0, 2.0, 1.0};
  sweep.push_back(decay);

  DecodingConfig beam;
  beam.strategy = Strategy::kBeamSearch;
  beam.beam_size = 50;
  sweep.push_back(beam);

  DecodingConfig group;
  group.strategy = Strategy::kGroupBeamSearch;
  group.beam_size = 50;
  group.n_groups = 50;
  group.diversity_penalty = 1.0;
  sweep.push_back(group);

  DecodingConfig beam_sampling;
  beam_sampling.strategy = Strategy::kBeamSampling;
  beam_sampling.beam_size = 5;
  beam_sampling.temperature = 2.0;
  sweep.push_back(beam_sampling);

  DecodingConfig schema;
  schema.strategy = Strategy::kSchemaGuided;
  sweep.push_back(schema);

  for (std::size_t i = 0; i < sweep.size(); ++i)
    sweep[i].seed = derive_seed(seed, 0xdec0de, i);
  return sweep;
}

namespace {

json decoding_to_json(const DecodingConfig& d) {
  json j;
  j["strategy"] = strategy_name(d.strategy);
  j["temperature"] = d.temperature;
  j["decay"] = {d.decay.start, d.decay.step, d.decay.floor};
  j["beam_size"] = d.beam_size;
  j["n_groups"] = d.n_groups;
  j["diversity_penalty"] = d.diversity_penalty;
  j["top_k"] = d.top_k;
  j["nucleus_eta"] = d.nucleus_eta;
  j["typical_phi"] = d.typical_phi;
  j["repetition_penalty"] = d.repetition_penalty;
  j["max_tokens"] = d.max_tokens;
  j["seed"] = d.seed;
  return j;
}

DecodingConfig decoding_from_json(const json& j) {
  DecodingConfig d;
  d.strategy = strategy_from_name(j.at("strategy").get<std::string>());
  d.temperature = j.value("temperature", d.temperature);
  if (j.contains("decay"))
    d.decay = {j["decay"][0].get<double>(), j["decay"][1].get<double>(),
               j["decay"][2].get<double>()};
  d.beam_size = j.value("beam_size", d.beam_size);
  d.n_groups = j.value("n_groups", d.n_groups);
  d.diversity_penalty = j.value("diversity_penalty", d.diversity_penalty);
  d.top_k = j.value("top_k", d.top_k);
  d.nucleus_eta = j.value("nucleus_eta", d.nucleus_eta);
  d.typical_phi = j.value("typical_phi", d.typical_phi);
  d.repetition_penalty = j.value("repetition_penalty", d.repetition_penalty);
  d.max_tokens = j.value("max_tokens", d.max_tokens);
  d.seed = j.value("seed", d.seed);
  return d;
}

}  // namespace

std::string experiment_config_to_json(const ExperimentConfig& c) {
  json j;
  j["corpus"] = json::parse(corpus_config_to_json(c.corpus));
  j["training_mode"] = c.training_mode == TrainingMode::kTurnLevel
                           ? "turn_level"
                           : "dialogue_level";
  j["attack_mode"] =
      c.attack_mode == AttackMode::kUntargeted ? "untargeted" : "targeted";
  j["prefix_lengths"] = c.prefix_lengths;
  json sweep = json::array();
  for (const DecodingConfig& d : c.decoding) sweep.push_back(decoding_to_json(d));
  j["decoding"] = sweep;
  j["metrics"] = c.metrics;
  j["sample_budget"] = c.sample_budget;
  j["samples_per_prefix"] = c.samples_per_prefix;
  j["top_n"] = c.top_n;
  j["model_order"] = c.model_order;
  j["holdout_fraction"] = c.holdout_fraction;
  j["gold_rank_max_states"] = c.gold_rank_max_states;
  json defenses = json::array();
  for (const DefenseSpec& d : c.defenses) {
    json dj;
    dj["dialogue_level"] = d.dialogue_level;
    dj["replace_rate"] = d.replace_rate;
    dj["remove_rate"] = d.remove_rate;
    defenses.push_back(dj);
  }
  j["defenses"] = defenses;
  j["train_seed"] = c.train_seed;
  j["attack_seed"] = c.attack_seed;
  j["output_dir"] = c.output_dir;
  return j.dump(2) + "\n";
}

ExperimentConfig experiment_config_from_json(const std::string& txt) {
  const json j = json::parse(txt);
  ExperimentConfig c;
  if (j.contains("corpus")) c.corpus = corpus_config_from_json(j["corpus"].dump());
  if (j.value("training_mode", "turn_level") == std::string("dialogue_level"))
    c.training_mode = TrainingMode::kDialogueLevel;
  if (j.value("attack_mode", "untargeted") == std::string("targeted"))
    c.attack_mode = AttackMode::kTargeted;
  if (j.contains("prefix_lengths"))
    c.prefix_lengths = j["prefix_lengths"].get<std::vector<int>>();
  if (j.contains("decoding"))
    for (const auto& dj : j["decoding"]) c.decoding.push_back(decoding_from_json(dj));
  if (j.contains("metrics"))
    c.metrics = j["metrics"].get<std::vector<std::string>>();
  c.sample_budget = j.value("sample_budget", c.sample_budget);
  c.samples_per_prefix = j.value("samples_per_prefix", c.samples_per_prefix);
  c.top_n = j.value("top_n", c.top_n);
  c.model_order = j.value("model_order", c.model_order);
  c.holdout_fraction = j.value("holdout_fraction", c.holdout_fraction);
  c.gold_rank_max_states =
      j.value("gold_rank_max_states", c.gold_rank_max_states);
  if (j.contains("defenses")) {
    for (const auto& dj : j["defenses"]) {
      DefenseSpec d;
      d.dialogue_level = dj.value("dialogue_level", false);
      d.replace_rate = dj.value("replace_rate", 0.0);
      d.remove_rate = dj.value("remove_rate", 0.0);
      c.defenses.push_back(d);
    }
  }
  c.train_seed = j.value("train_seed", c.train_seed);
  c.attack_seed = j.value("attack_seed", c.attack_seed);
  c.output_dir = j.value("output_dir", c.output_dir);
  c.validate();
  return c;
}

std::string resolve_output_dir(const std::string& dir) {
  fs::path p(dir);
  if (p.is_absolute()) return dir;
  if (const char* root = std::getenv("DSX_OUTPUT_ROOT"))
    return (fs::path(root) / p).string();
  return dir;
}

ExperimentSetup prepare_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentSetup setup;
  setup.corpus = generate_corpus(config.corpus);
  const std::size_t n = setup.corpus.dialogues.size();
  const auto holdout =
      static_cast<std::size_t>(static_cast<double>(n) * config.holdout_fraction);
  const std::size_t cut = n - holdout;
  setup.train_dialogues.assign(setup.corpus.dialogues.begin(),
                               setup.corpus.dialogues.begin() +
                                   static_cast<std::ptrdiff_t>(cut));
  setup.holdout_dialogues.assign(setup.corpus.dialogues.begin() +
                                     static_cast<std::ptrdiff_t>(cut),
                                 setup.corpus.dialogues.end());
  Corpus train_view;
  train_view.schema = setup.corpus.schema;
  train_view.config = setup.corpus.config;
  train_view.dialogues = setup.train_dialogues;
  setup.examples = corpus_to_examples(train_view, config.training_mode);
  setup.model = SurrogateModel::train(setup.examples, config.model_order,
                                      config.train_seed);
  return setup;
}

namespace {

std::string marker_prompt() { return std::string(text::kStateMarker); }

std::vector<DecodingConfig> sweep_of(const ExperimentConfig& config) {
  return config.decoding.empty()
             ? ExperimentConfig::default_sweep(config.attack_seed)
             : config.decoding;
}

std::vector<std::string> metrics_of(const ExperimentConfig& config) {
  return config.metrics.empty() ? known_metrics() : config.metrics;
}

bool is_sampling_strategy(Strategy s) {
  return s == Strategy::kVanilla || s == Strategy::kTemperature ||
         s == Strategy::kDecayingTemperature;
}

bool is_beam_strategy(Strategy s) {
  return s == Strategy::kBeamSearch || s == Strategy::kGroupBeamSearch ||
         s == Strategy::kBeamSampling;
}

}  // namespace

std::vector<RawCandidate> generate_untargeted_candidates(
    const ScoringClient& bot, const Schema& schema,
    const ExperimentConfig& config) {
  std::vector<RawCandidate> out;
  const auto sweep = sweep_of(config);
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    DecodingConfig d = sweep[i];
    d.seed = derive_seed(config.attack_seed, 0xa77ac4, i);
    std::vector<RawCandidate> got;
    if (is_sampling_strategy(d.strategy)) {
      got = sample_decode(bot, marker_prompt(), d, config.sample_budget);
    } else if (is_beam_strategy(d.strategy)) {
      got = beam_decode(bot, marker_prompt(), d);
    } else {
      got = schema_guided_samples(bot, marker_prompt(), schema, d,
                                  config.sample_budget);
    }
    out.insert(out.end(), std::make_move_iterator(got.begin()),
               std::make_move_iterator(got.end()));
  }
  return out;
}

std::vector<RawCandidate> generate_targeted_candidates(
    const ScoringClient& bot, const Schema& schema,
    const std::vector<DialogueState>& training_states,
    const ExperimentConfig& config,
    std::map<int, std::size_t>* prefix_counts) {
  std::vector<RawCandidate> out;
  const auto sweep = sweep_of(config);
  for (const int length : config.prefix_lengths) {
    // Deduplicated prefixes, in corpus order.
    std::vector<std::string> prefixes;
    std::unordered_set<std::string> seen;
    for (const DialogueState& s : training_states) {
      if (s.size() <= static_cast<std::size_t>(length)) continue;
      const std::string p = truncate_prefix(s, static_cast<std::size_t>(length));
      if (seen.insert(p).second) prefixes.push_back(p);
    }
    if (prefix_counts) (*prefix_counts)[length] = prefixes.size();
    for (std::size_t i = 0; i < sweep.size(); ++i) {
      for (std::size_t pi = 0; pi < prefixes.size(); ++pi) {
        DecodingConfig d = sweep[i];
        d.seed = derive_seed(config.attack_seed,
                             0x7a6 + static_cast<std::uint64_t>(length),
                             i * 1000003 + pi);
        const std::string prompt = text::join_text(marker_prompt(), prefixes[pi]);
        std::vector<RawCandidate> got;
        if (is_sampling_strategy(d.strategy)) {
          got = sample_decode(bot, prompt, d, config.samples_per_prefix);
        } else if (is_beam_strategy(d.strategy)) {
          got = beam_decode(bot, prompt, d);
          if (got.size() > static_cast<std::size_t>(config.samples_per_prefix))
            got.resize(static_cast<std::size_t>(config.samples_per_prefix));
        } else {
          got = schema_guided_samples(bot, prompt, schema, d,
                                      config.samples_per_prefix);
        }
        for (RawCandidate& c : got) {
          // Record the prefix length through the strategy-neutral channel.
          c.sample_index = pi * 100 + c.sample_index;
          out.push_back(std::move(c));
        }
      }
    }
  }
  return out;
}

namespace {

// Raw candidates -> scored records, dropping empty generations (counted per
// strategy) and collapsing exact duplicates so each unique pair is scored
// once.
std::vector<ScoredCandidate> to_scored(
    const std::vector<RawCandidate>& raw,
    const std::map<std::string, int>& prefix_length_of,
    std::map<std::string, std::size_t>& empty_counts,
    std::map<std::string, std::size_t>& sample_counts) {
  std::vector<ScoredCandidate> out;
  std::unordered_set<std::string> seen;
  for (const RawCandidate& r : raw) {
    sample_counts[r.strategy_tag] += 1;
    if (r.generated.empty()) {
      empty_counts[r.strategy_tag] += 1;
      continue;
    }
    const std::string key = r.strategy_tag + "\x1f" + r.prefix + "\x1f" + r.generated;
    if (!seen.insert(key).second) continue;
    int plen = 0;
    const auto it = prefix_length_of.find(r.prefix);
    if (it != prefix_length_of.end()) plen = it->second;
    out.push_back(make_candidate(r.prefix, r.generated, r.strategy_tag, plen));
  }
  return out;
}

std::string canonical_full_state(const ScoredCandidate& c) {
  try {
    return serialize_state(parse_state(text::join_text(c.prefix, c.suffix)));
  } catch (const ParseError&) {
    return c.prefix + "\x1f" + c.suffix;
  }
}

}  // namespace

RunReport evaluate_candidates(const ScoringClient& bot,
                              const ExperimentSetup& setup,
                              const ExperimentConfig& config,
                              std::vector<ScoredCandidate>& scored,
                              const std::string& mode) {
  RunReport report;
  report.mode = mode;
  const auto metrics = metrics_of(config);
  score_candidates(bot, scored, metrics);

  std::vector<DialogueState> train_states;
  for (const Dialogue& d : setup.train_dialogues)
    for (const Turn& t : d.turns) train_states.push_back(t.state);
  const TrainingStateIndex index(train_states);
  judge_candidates(scored, index);

  // Group candidates by strategy tag, preserving order.
  std::map<std::string, std::vector<ScoredCandidate>> by_strategy;
  for (const ScoredCandidate& c : scored) by_strategy[c.strategy_tag].push_back(c);

  std::vector<std::string> training_texts;
  for (const TrainingExample& ex : setup.examples)
    for (const std::string& s : ex.state_texts) training_texts.push_back(s);

  const RuleBasedAssessor assessor;
  for (auto& [tag, cands] : by_strategy) {
    for (const std::string& metric : metrics) {
      const auto selected = rank_and_select(cands, metric, config.top_n);
      report.grid[tag][metric] = compute_metrics(selected, index).overall;
    }
    // Per-length extraction blocks over every deduplicated full state.
    std::map<int, std::vector<ScoredCandidate>> by_length;
    {
      std::unordered_set<std::string> seen;
      for (const ScoredCandidate& c : cands)
        if (seen.insert(canonical_full_state(c)).second)
          by_length[c.prefix_length].push_back(c);
    }
    for (auto& [length, lc] : by_length)
      report.per_length[tag][length] = compute_metrics(lc, index).overall;
    // Privacy analysis over the strategy's deduplicated parseable states.
    PrivacySummary priv;
    double marginal_sum = 0.0;
    std::size_t marginal_n = 0;
    {
      std::unordered_set<std::string> seen;
      for (const ScoredCandidate& c : cands) {
        if (!seen.insert(canonical_full_state(c)).second) continue;
        DialogueState full;
        try {
          full = parse_state(text::join_text(c.prefix, c.suffix));
        } catch (const ParseError&) {
          continue;
        }
        if (full.empty()) continue;
        DialogueState prefix_state, suffix_state;
        for (std::size_t i = 0; i < full.size(); ++i) {
          const Triplet& t = full.triplets()[i];
          if (i < static_cast<std::size_t>(c.prefix_length))
            prefix_state.add(t);
          else
            suffix_state.add(t);
        }
        const PrivacyScores ps = privacy_scores(prefix_state, suffix_state, assessor);
        priv.mean_pii += ps.pii_score;
        priv.n_scored += 1;
        if (ps.zero_prefix) {
          priv.n_zero_prefix += 1;
        } else if (ps.marginal) {
          marginal_sum += *ps.marginal;
          marginal_n += 1;
        }
      }
    }
    if (priv.n_scored > 0) priv.mean_pii /= static_cast<double>(priv.n_scored);
    if (marginal_n > 0) priv.mean_marginal = marginal_sum / static_cast<double>(marginal_n);
    report.privacy[tag] = priv;
  }

  // Repetition analysis per prefix length over correct members from every
  // strategy.
  std::map<int, std::vector<std::string>> members_by_length;
  {
    std::map<int, std::unordered_set<std::string>> seen;
    for (const ScoredCandidate& c : scored) {
      if (!c.correct) continue;
      const std::string member = canonical_full_state(c);
      if (seen[c.prefix_length].insert(member).second)
        members_by_length[c.prefix_length].push_back(member);
    }
  }
  for (const auto& [length, members] : members_by_length)
    report.repetitions[length] = repetitions_per_member(members, training_texts);

  if (mode == "targeted") {
    std::vector<DialogueState> unique_states;
    std::unordered_set<std::string> seen;
    for (const DialogueState& s : train_states)
      if (seen.insert(serialize_state(s)).second) unique_states.push_back(s);
    report.gold_ranks =
        gold_rank_analysis(bot, unique_states, config.prefix_lengths,
                           setup.corpus.schema, config.gold_rank_max_states);
  }

  std::vector<Dialogue> train_sample = setup.train_dialogues;
  if (train_sample.size() > kDstTrainCap) train_sample.resize(kDstTrainCap);
  report.dst_train = setup.model.dst_eval(train_sample);
  std::vector<Dialogue> holdout_sample = setup.holdout_dialogues;
  if (holdout_sample.size() > kDstHoldoutCap)
    holdout_sample.resize(kDstHoldoutCap);
  report.dst_holdout = setup.model.dst_eval(holdout_sample);
  return report;
}

namespace {

void write_manifest(const std::string& dir, const ExperimentConfig& config,
                    const std::string& config_text) {
  json j;
  j["format_version"] = 1;
  j["tool"] = "dsx";
  j["config_file"] = "config.json";
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(fnv1a(config_text)));
  j["config_hash"] = hash;
  j["corpus_seed"] = config.corpus.seed;
  j["train_seed"] = config.train_seed;
  j["attack_seed"] = config.attack_seed;
  j["created_at_unix"] = static_cast<std::int64_t>(std::time(nullptr));
  std::ofstream f(fs::path(dir) / "manifest.json");
  f << j.dump(2) << "\n";
}

RunArtifact artifact_paths(const std::string& dir) {
  RunArtifact a;
  a.dir = dir;
  a.manifest_path = (fs::path(dir) / "manifest.json").string();
  a.config_path = (fs::path(dir) / "config.json").string();
  a.candidates_path = (fs::path(dir) / "candidates.jsonl").string();
  a.scored_path = (fs::path(dir) / "scored.jsonl").string();
  a.report_path = (fs::path(dir) / "report.json").string();
  return a;
}

RunArtifact run_attack(const ExperimentConfig& config, bool targeted) {
  ExperimentSetup setup = prepare_experiment(config);
  const InProcessBot bot(setup.model);

  std::map<int, std::size_t> prefix_counts;
  std::map<std::string, int> prefix_length_of;
  std::vector<RawCandidate> raw;
  if (targeted) {
    std::vector<DialogueState> train_states;
    for (const Dialogue& d : setup.train_dialogues)
      for (const Turn& t : d.turns) train_states.push_back(t.state);
    raw = generate_targeted_candidates(bot, setup.corpus.schema, train_states,
                                       config, &prefix_counts);
    for (const RawCandidate& c : raw) {
      // Prefix length is recoverable from the prompt text.
      if (!prefix_length_of.count(c.prefix)) {
        int triplets = 0;
        for (char ch : c.prefix)
          if (ch == '=') ++triplets;
        prefix_length_of[c.prefix] = triplets;
      }
    }
  } else {
    raw = generate_untargeted_candidates(bot, setup.corpus.schema, config);
  }

  const std::string dir = resolve_output_dir(config.output_dir);
  fs::create_directories(dir);
  const RunArtifact artifact = artifact_paths(dir);
  write_candidates_file(artifact.candidates_path, raw, config.prefix_lengths);

  std::map<std::string, std::size_t> empty_counts, sample_counts;
  std::vector<ScoredCandidate> scored =
      to_scored(raw, prefix_length_of, empty_counts, sample_counts);
  RunReport report = evaluate_candidates(bot, setup, config, scored,
                                         targeted ? "targeted" : "untargeted");
  report.empty_generations = empty_counts;
  report.samples_generated = sample_counts;
  report.prefix_counts = prefix_counts;

  write_scored_file(artifact.scored_path, scored);
  {
    const std::string config_text = experiment_config_to_json(config);
    std::ofstream f(artifact.config_path);
    f << config_text;
    write_manifest(dir, config, config_text);
  }
  {
    std::ofstream f(artifact.report_path);
    f << run_report_to_json(report);
  }
  emit_report(dir);
  return artifact;
}

}  // namespace

RunArtifact run_untargeted(const ExperimentConfig& config) {
  return run_attack(config, /*targeted=*/false);
}

RunArtifact run_targeted(const ExperimentConfig& config) {
  return run_attack(config, /*targeted=*/true);
}

DefenseComparison run_defense_comparison(const ExperimentConfig& config) {
  config.validate();
  DefenseComparison comparison;

  ExperimentConfig base = config;
  base.training_mode = TrainingMode::kTurnLevel;
  base.attack_mode = AttackMode::kUntargeted;
  base.defenses.clear();
  base.output_dir =
      (fs::path(config.output_dir) / "baseline").string();
  comparison.baseline = run_untargeted(base);

  std::vector<DefenseSpec> defenses = config.defenses;
  if (defenses.empty()) {
    DefenseSpec d;
    d.dialogue_level = true;
    defenses.push_back(d);
  }

  for (const DefenseSpec& spec : defenses) {
    ExperimentConfig defended = base;
    defended.output_dir = (fs::path(config.output_dir) / spec.name()).string();

    // Same corpus and seeds; only the training view changes.
    ExperimentSetup setup;
    setup.corpus = generate_corpus(config.corpus);
    if (spec.replace_rate > 0 || spec.remove_rate > 0)
      setup.corpus = counterfactual_augment(
          setup.corpus, spec.replace_rate, spec.remove_rate,
          derive_seed(config.train_seed, 0xa06, 0));
    const std::size_t n = setup.corpus.dialogues.size();
    const auto holdout = static_cast<std::size_t>(
        static_cast<double>(n) * config.holdout_fraction);
    const std::size_t cut = n - holdout;
    setup.train_dialogues.assign(setup.corpus.dialogues.begin(),
                                 setup.corpus.dialogues.begin() +
                                     static_cast<std::ptrdiff_t>(cut));
    setup.holdout_dialogues.assign(setup.corpus.dialogues.begin() +
                                       static_cast<std::ptrdiff_t>(cut),
                                   setup.corpus.dialogues.end());
    Corpus train_view;
    train_view.schema = setup.corpus.schema;
    train_view.config = setup.corpus.config;
    train_view.dialogues = setup.train_dialogues;
    setup.examples = corpus_to_examples(
        train_view, spec.dialogue_level ? TrainingMode::kDialogueLevel
                                        : TrainingMode::kTurnLevel);
    setup.model = SurrogateModel::train(setup.examples, config.model_order,
                                        config.train_seed);

    const InProcessBot bot(setup.model);
    std::vector<RawCandidate> raw =
        generate_untargeted_candidates(bot, setup.corpus.schema, defended);

    const std::string dir = resolve_output_dir(defended.output_dir);
    fs::create_directories(dir);
    const RunArtifact artifact = artifact_paths(dir);
    write_candidates_file(artifact.candidates_path, raw, {});

    std::map<std::string, std::size_t> empty_counts, sample_counts;
    std::vector<ScoredCandidate> scored =
        to_scored(raw, {}, empty_counts, sample_counts);
    RunReport report =
        evaluate_candidates(bot, setup, defended, scored, "untargeted");
    report.empty_generations = empty_counts;
    report.samples_generated = sample_counts;
    write_scored_file(artifact.scored_path, scored);
    {
      const std::string config_text = experiment_config_to_json(defended);
      std::ofstream f(artifact.config_path);
      f << config_text;
      write_manifest(dir, defended, config_text);
    }
    {
      std::ofstream f(artifact.report_path);
      f << run_report_to_json(report);
    }
    emit_report(dir);
    comparison.defended.push_back({spec.name(), std::move(report), dir});
  }

  // Delta summary next to the per-run artifacts.
  const std::string root = resolve_output_dir(config.output_dir);
  fs::create_directories(root);
  comparison.report_path = (fs::path(root) / "defense_report.json").string();
  {
    std::ifstream f(comparison.baseline.report_path);
    std::stringstream ss;
    ss << f.rdbuf();
    const RunReport base_report = run_report_from_json(ss.str());
    json j;
    j["baseline"] = json::parse(run_report_to_json(base_report));
    json defended = json::array();
    for (const DefenseOutcome& d : comparison.defended) {
      json dj;
      dj["name"] = d.name;
      dj["report"] = json::parse(run_report_to_json(d.report));
      defended.push_back(dj);
    }
    j["defended"] = defended;
    std::ofstream out(comparison.report_path);
    out << j.dump(2) << "\n";
  }
  return comparison;
}

}  // namespace dsx
