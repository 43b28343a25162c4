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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dsx/error.hpp"
#include "dsx/harness.hpp"
#include "dsx/net_client.hpp"
#include "dsx/net_server.hpp"

namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw dsx::IoError("cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

dsx::ExperimentConfig load_experiment_config(const std::string& path) {
  if (path.empty()) return dsx::ExperimentConfig{};
  return dsx::experiment_config_from_json(slurp(path));
}

// Either a local model file or a remote endpoint; both satisfy the scoring
// contract.
struct BotHandle {
  std::unique_ptr<dsx::SurrogateModel> model;
  std::unique_ptr<dsx::ScoringClient> client;

  const dsx::ScoringClient& bot() const { return *client; }
};

BotHandle open_bot(const std::string& model_path,
                   const std::string& endpoint) {
  BotHandle handle;
  if (!endpoint.empty()) {
    const auto colon = endpoint.rfind(':');
    if (colon == std::string::npos)
      throw dsx::ConfigError("endpoint must look like host:port");
    handle.client = std::make_unique<dsx::RemoteBot>(
        endpoint.substr(0, colon), std::stoi(endpoint.substr(colon + 1)));
    return handle;
  }
  if (model_path.empty())
    throw dsx::ConfigError("provide --model or --endpoint");
  handle.model = std::make_unique<dsx::SurrogateModel>(
      dsx::SurrogateModel::load(model_path));
  handle.client = std::make_unique<dsx::InProcessBot>(*handle.model);
  return handle;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dsx: a desk-scale lab for studying training-data leakage in "
               "task-oriented dialogue bots"};
  app.require_subcommand(1);

  // gen-corpus
  auto* gen = app.add_subcommand("gen-corpus", "generate a synthetic corpus");
  std::string gen_out = "corpus";
  std::string gen_config_path;
  dsx::CorpusConfig corpus_cfg;
  gen->add_option("--out", gen_out, "output directory");
  gen->add_option("--config", gen_config_path, "corpus config JSON file");
  gen->add_option("--seed", corpus_cfg.seed, "generation seed");
  gen->add_option("--n-dialogues", corpus_cfg.n_dialogues, "dialogue count");
  gen->add_option("--n-domains", corpus_cfg.n_domains, "domain count");
  gen->add_option("--values-per-slot", corpus_cfg.values_per_slot,
                  "values per slot");
  gen->add_option("--skew", corpus_cfg.value_frequency_skew, "Zipf exponent");

  // train
  auto* train = app.add_subcommand("train", "train the surrogate bot");
  std::string train_corpus = "corpus";
  std::string train_mode = "turn_level";
  std::string train_out = "model.dsx";
  int train_order = 5;
  std::uint64_t train_seed = 7;
  double replace_rate = 0.0, remove_rate = 0.0;
  std::uint64_t augment_seed = 13;
  train->add_option("--corpus", train_corpus, "corpus directory");
  train->add_option("--mode", train_mode, "turn_level | dialogue_level");
  train->add_option("--order", train_order, "n-gram order");
  train->add_option("--seed", train_seed, "training seed");
  train->add_option("--out", train_out, "model file");
  train->add_option("--replace-rate", replace_rate,
                    "counterfactual value replacement rate");
  train->add_option("--remove-rate", remove_rate,
                    "counterfactual value removal rate");
  train->add_option("--augment-seed", augment_seed, "augmentation seed");

  // serve
  auto* serve = app.add_subcommand("serve", "serve the black-box scoring API");
  std::string serve_model;
  int serve_port = 7171;
  serve->add_option("--model", serve_model, "model file")->required();
  serve->add_option("--port", serve_port, "TCP port (loopback)");

  // attack
  auto* attack = app.add_subcommand(
      "attack", "run the untargeted or targeted extraction pipeline");
  std::string attack_config_path;
  std::string attack_out;
  std::string attack_mode;
  attack->add_option("--config", attack_config_path,
                     "experiment config JSON file");
  attack->add_option("--out", attack_out, "run directory override");
  attack->add_option("--mode", attack_mode, "untargeted | targeted override");

  // probe-schema
  auto* probe = app.add_subcommand("probe-schema",
                                   "black-box service-scope discovery");
  std::string probe_model, probe_endpoint, probe_out = "probe";
  std::string probe_gold;
  dsx::ProbeConfig probe_cfg;
  probe->add_option("--model", probe_model, "model file");
  probe->add_option("--endpoint", probe_endpoint, "host:port of a served bot");
  probe->add_option("--out", probe_out, "output directory");
  probe->add_option("--rounds", probe_cfg.rounds, "probe rounds");
  probe->add_option("--questions-per-round", probe_cfg.questions_per_round,
                    "questions per round");
  probe->add_option("--high-temperature", probe_cfg.high_temperature,
                    "exploration temperature");
  probe->add_option("--low-temperature", probe_cfg.low_temperature,
                    "verification temperature");
  probe->add_option("--seed", probe_cfg.seed, "probe seed");
  probe->add_option("--gold", probe_gold,
                    "gold schema JSON for accuracy scoring");

  // rank
  auto* rank = app.add_subcommand("rank", "score and rank stored candidates");
  std::string rank_candidates, rank_model, rank_endpoint;
  std::string rank_metric = dsx::kMetricDcPpl;
  std::string rank_out = "ranked.jsonl";
  std::size_t rank_top = 100;
  rank->add_option("--candidates", rank_candidates, "candidates.jsonl file")
      ->required();
  rank->add_option("--model", rank_model, "model file");
  rank->add_option("--endpoint", rank_endpoint, "host:port of a served bot");
  rank->add_option("--metric", rank_metric, "membership metric");
  rank->add_option("--top", rank_top, "selection size");
  rank->add_option("--out", rank_out, "output scored JSONL");

  // evaluate
  auto* eval = app.add_subcommand("evaluate",
                                  "judge scored candidates against a corpus");
  std::string eval_scored, eval_corpus = "corpus", eval_out = "eval";
  std::string eval_mode = "turn_level";
  eval->add_option("--scored", eval_scored, "scored.jsonl file")->required();
  eval->add_option("--corpus", eval_corpus, "corpus directory");
  eval->add_option("--mode", eval_mode,
                   "training view for repetition counts");
  eval->add_option("--out", eval_out, "output directory");

  // defend
  auto* defend = app.add_subcommand(
      "defend", "paired baseline/defended training and attack comparison");
  std::string defend_config_path, defend_out;
  defend->add_option("--config", defend_config_path, "experiment config JSON");
  defend->add_option("--out", defend_out, "run directory override");

  // report
  auto* report = app.add_subcommand("report",
                                    "re-render report files for a run");
  std::string report_dir;
  report->add_option("--run", report_dir, "run directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      dsx::CorpusConfig cfg = corpus_cfg;
      if (!gen_config_path.empty())
        cfg = dsx::corpus_config_from_json(slurp(gen_config_path));
      cfg.validate();
      const dsx::Corpus corpus = dsx::generate_corpus(cfg);
      dsx::save_corpus(corpus, dsx::resolve_output_dir(gen_out));
      std::cout << "wrote " << corpus.dialogues.size() << " dialogues under "
                << dsx::resolve_output_dir(gen_out) << "\n";
    } else if (*train) {
      dsx::Corpus corpus = dsx::load_corpus(train_corpus);
      if (replace_rate > 0 || remove_rate > 0)
        corpus = dsx::counterfactual_augment(corpus, replace_rate, remove_rate,
                                             augment_seed);
      const auto mode = train_mode == "dialogue_level"
                            ? dsx::TrainingMode::kDialogueLevel
                            : dsx::TrainingMode::kTurnLevel;
      const auto examples = dsx::corpus_to_examples(corpus, mode);
      const auto model =
          dsx::SurrogateModel::train(examples, train_order, train_seed);
      model.save(train_out);
      std::cout << "trained on " << examples.size() << " examples; vocab "
                << model.tokenizer().size() << "; wrote " << train_out << "\n";
    } else if (*serve) {
      const auto model = dsx::SurrogateModel::load(serve_model);
      std::cout << "serving scoring API on 127.0.0.1:" << serve_port << "\n";
      dsx::serve_blackbox_forever(model, serve_port);
    } else if (*attack) {
      dsx::ExperimentConfig cfg = load_experiment_config(attack_config_path);
      if (!attack_out.empty()) cfg.output_dir = attack_out;
      if (attack_mode == "targeted")
        cfg.attack_mode = dsx::AttackMode::kTargeted;
      else if (attack_mode == "untargeted")
        cfg.attack_mode = dsx::AttackMode::kUntargeted;
      const dsx::RunArtifact artifact =
          cfg.attack_mode == dsx::AttackMode::kTargeted
              ? dsx::run_targeted(cfg)
              : dsx::run_untargeted(cfg);
      std::cout << "run artifact: " << artifact.dir << "\n";
    } else if (*probe) {
      const BotHandle handle = open_bot(probe_model, probe_endpoint);
      const dsx::ScriptedQuestionSource source;
      const dsx::ProbeRun run = dsx::run_probe(handle.bot(), probe_cfg, source);
      const std::string dir = dsx::resolve_output_dir(probe_out);
      fs::create_directories(dir);
      {
        std::ofstream f(fs::path(dir) / "schema.json");
        f << dsx::schema_to_json(run.state.validated);
      }
      {
        std::ofstream f(fs::path(dir) / "transcript.jsonl");
        for (const auto& [q, a] : run.state.transcript) {
          nlohmann::json j;
          j["question"] = q;
          j["state"] = a;
          f << j.dump() << "\n";
        }
      }
      std::cout << "validated " << run.state.validated.domains.size()
                << " domains / " << run.state.validated.slot_count()
                << " slots with " << run.state.questions_asked
                << " bot queries\n";
      if (!probe_gold.empty()) {
        const dsx::Schema gold = dsx::schema_from_json(slurp(probe_gold));
        const dsx::ProbeScore score = dsx::schema_prf(run, gold);
        std::cout << "domain P/R " << score.domain_precision << "/"
                  << score.domain_recall << "; slot P/R "
                  << score.slot_precision << "/" << score.slot_recall
                  << "; convergence at " << score.questions_to_convergence
                  << " questions\n";
      }
    } else if (*rank) {
      const BotHandle handle = open_bot(rank_model, rank_endpoint);
      auto candidates = dsx::read_candidates_file(rank_candidates);
      dsx::score_candidates(handle.bot(), candidates, dsx::known_metrics());
      const auto selected =
          dsx::rank_and_select(candidates, rank_metric, rank_top);
      dsx::write_scored_file(rank_out, selected);
      std::cout << "kept " << selected.size() << " of " << candidates.size()
                << " candidates by " << rank_metric << " into " << rank_out
                << "\n";
    } else if (*eval) {
      const dsx::Corpus corpus = dsx::load_corpus(eval_corpus);
      auto scored = dsx::read_scored_file(eval_scored);
      std::vector<dsx::DialogueState> states;
      for (const dsx::Dialogue& d : corpus.dialogues)
        for (const dsx::Turn& t : d.turns) states.push_back(t.state);
      const dsx::TrainingStateIndex index(states);
      dsx::judge_candidates(scored, index);
      const dsx::ExtractionReport metrics = dsx::compute_metrics(scored, index);
      const std::string dir = dsx::resolve_output_dir(eval_out);
      fs::create_directories(dir);
      {
        nlohmann::json j;
        j["n_extracted_states"] = metrics.overall.n_extracted_states;
        j["n_correct_states"] = metrics.overall.n_correct_states;
        j["state_precision"] = metrics.overall.state_precision
                                   ? nlohmann::json(*metrics.overall.state_precision)
                                   : nlohmann::json();
        j["avg_triplets"] = metrics.overall.avg_triplets
                                ? nlohmann::json(*metrics.overall.avg_triplets)
                                : nlohmann::json();
        j["n_extracted_values"] = metrics.overall.n_extracted_values;
        j["value_precision"] = metrics.overall.value_precision
                                   ? nlohmann::json(*metrics.overall.value_precision)
                                   : nlohmann::json();
        std::ofstream f(fs::path(dir) / "metrics.json");
        f << j.dump(2) << "\n";
      }
      dsx::write_scored_file((fs::path(dir) / "judged.jsonl").string(), scored);
      std::cout << "judged " << scored.size() << " candidates; report under "
                << dir << "\n";
    } else if (*defend) {
      dsx::ExperimentConfig cfg = load_experiment_config(defend_config_path);
      if (!defend_out.empty()) cfg.output_dir = defend_out;
      const dsx::DefenseComparison comparison =
          dsx::run_defense_comparison(cfg);
      std::cout << "defense comparison written to " << comparison.report_path
                << "\n";
    } else if (*report) {
      dsx::emit_report(report_dir);
      std::cout << "re-rendered reports under " << report_dir << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
