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

#include "dsx/corpus.hpp"
#include "dsx/decoding.hpp"
#include "dsx/evaluation.hpp"
#include "dsx/membership.hpp"
#include "dsx/model.hpp"
#include "dsx/probe.hpp"

namespace dsx {

enum class AttackMode { kUntargeted, kTargeted };

struct DefenseSpec {
  bool dialogue_level = false;
  double replace_rate = 0.0;
  double remove_rate = 0.0;

  std::string name() const;
};

struct ExperimentConfig {
  CorpusConfig corpus;
  TrainingMode training_mode = TrainingMode::kTurnLevel;
  AttackMode attack_mode = AttackMode::kUntargeted;
  std::vector<int> prefix_lengths = {1, 2, 3};
  std::vector<DecodingConfig> decoding;
  std::vector<std::string> metrics;  // defaults to every known metric
  int sample_budget = 2000;          // paper-scale override: 10000
  int samples_per_prefix = 1;
  std::size_t top_n = 100;
  int model_order = 5;
  double holdout_fraction = 0.1;
  std::size_t gold_rank_max_states = 300;
  std::vector<DefenseSpec> defenses;  // for defense comparisons
  std::uint64_t train_seed = 7;
  std::uint64_t attack_seed = 11;
  std::string output_dir = "run";

  void validate() const;
  // Decoding sweep used when none is configured: the strawman strategies at
  // their reference hyperparameters plus schema-guided sampling.
  static std::vector<DecodingConfig> default_sweep(std::uint64_t seed);
};

std::string experiment_config_to_json(const ExperimentConfig& c);
ExperimentConfig experiment_config_from_json(const std::string& text);

// Resolves a run directory against the DSX_OUTPUT_ROOT environment variable
// when the configured path is relative.
std::string resolve_output_dir(const std::string& dir);

struct RunArtifact {
  std::string dir;
  std::string manifest_path;
  std::string config_path;
  std::string candidates_path;
  std::string scored_path;
  std::string report_path;
};

struct PrivacySummary {
  double mean_pii = 0.0;
  std::optional<double> mean_marginal;
  std::size_t n_scored = 0;
  std::size_t n_zero_prefix = 0;  // excluded from the marginal aggregate
};

// Everything a run measures; serialized as report.json and rendered to text
// and CSV by emit_report.
struct RunReport {
  std::string mode;
  // strategy tag -> metric -> judged results over the top-n selection
  std::map<std::string, std::map<std::string, MetricsBlock>> grid;
  // strategy tag -> prefix length -> results over all deduped candidates
  std::map<std::string, std::map<int, MetricsBlock>> per_length;
  std::map<std::string, std::size_t> empty_generations;  // per strategy
  std::map<std::string, std::size_t> samples_generated;  // per strategy
  std::map<int, RepetitionStats> repetitions;  // per prefix length
  std::map<int, std::size_t> prefix_counts;    // deduped prefixes per length
  GoldRankReport gold_ranks;
  std::map<std::string, PrivacySummary> privacy;  // per strategy
  DstScores dst_train;
  DstScores dst_holdout;
};

struct ExperimentSetup {
  Corpus corpus;
  std::vector<Dialogue> train_dialogues;
  std::vector<Dialogue> holdout_dialogues;
  std::vector<TrainingExample> examples;
  SurrogateModel model;
};

// Deterministic corpus + split + trained model for a config.
ExperimentSetup prepare_experiment(const ExperimentConfig& config);

// Full untargeted pipeline: sample from the bare state marker per decoding
// config, dedup, score, rank, judge, and persist the artifact.
RunArtifact run_untargeted(const ExperimentConfig& config);

// Full targeted pipeline over deduplicated training-state prefixes with a
// per-length breakdown.
RunArtifact run_targeted(const ExperimentConfig& config);

// Trains the baseline and each defended variant on the same corpus and
// seeds, runs the identical untargeted attack, and reports deltas plus DST
// utility side by side.
struct DefenseOutcome {
  std::string name;
  RunReport report;
  std::string artifact_dir;
};
struct DefenseComparison {
  RunArtifact baseline;
  std::vector<DefenseOutcome> defended;
  std::string report_path;
};
DefenseComparison run_defense_comparison(const ExperimentConfig& config);

// In-memory pipeline pieces, shared by the runs above, the CLI stages, and
// the tests.
std::vector<RawCandidate> generate_untargeted_candidates(
    const ScoringClient& bot, const Schema& schema,
    const ExperimentConfig& config);
std::vector<RawCandidate> generate_targeted_candidates(
    const ScoringClient& bot, const Schema& schema,
    const std::vector<DialogueState>& training_states,
    const ExperimentConfig& config, std::map<int, std::size_t>* prefix_counts);
RunReport evaluate_candidates(const ScoringClient& bot,
                              const ExperimentSetup& setup,
                              const ExperimentConfig& config,
                              std::vector<ScoredCandidate>& scored,
                              const std::string& mode);

// Renders report.json of an existing run into report.txt and per-figure CSV
// files; byte-identical on repeated invocations.
void emit_report(const std::string& run_dir);

// (De)serialization used by emit_report and the CLI stages.
std::string run_report_to_json(const RunReport& report);
RunReport run_report_from_json(const std::string& text);
void write_candidates_file(const std::string& path,
                           const std::vector<RawCandidate>& candidates,
                           const std::vector<int>& prefix_lengths);
std::vector<ScoredCandidate> read_candidates_file(const std::string& path);
void write_scored_file(const std::string& path,
                       const std::vector<ScoredCandidate>& scored);
std::vector<ScoredCandidate> read_scored_file(const std::string& path);

}  // namespace dsx
