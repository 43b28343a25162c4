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

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dsx/error.hpp"
#include "dsx/harness.hpp"

namespace dsx {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json metrics_block_to_json(const MetricsBlock& b) {
  json j;
  j["n_extracted_states"] = b.n_extracted_states;
  j["n_correct_states"] = b.n_correct_states;
  j["state_precision"] = b.state_precision ? json(*b.state_precision) : json();
  j["avg_triplets"] = b.avg_triplets ? json(*b.avg_triplets) : json();
  j["n_extracted_values"] = b.n_extracted_values;
  j["n_correct_values"] = b.n_correct_values;
  j["value_precision"] = b.value_precision ? json(*b.value_precision) : json();
  j["n_unparseable"] = b.n_unparseable;
  return j;
}

MetricsBlock metrics_block_from_json(const json& j) {
  MetricsBlock b;
  b.n_extracted_states = j.at("n_extracted_states").get<std::size_t>();
  b.n_correct_states = j.at("n_correct_states").get<std::size_t>();
  if (!j.at("state_precision").is_null())
    b.state_precision = j.at("state_precision").get<double>();
  if (!j.at("avg_triplets").is_null())
    b.avg_triplets = j.at("avg_triplets").get<double>();
  b.n_extracted_values = j.at("n_extracted_values").get<std::size_t>();
  b.n_correct_values = j.at("n_correct_values").get<std::size_t>();
  if (!j.at("value_precision").is_null())
    b.value_precision = j.at("value_precision").get<double>();
  b.n_unparseable = j.at("n_unparseable").get<std::size_t>();
  return b;
}

json repetition_to_json(const RepetitionStats& r) {
  json j;
  j["mean"] = r.mean;
  j["ci99_low"] = r.ci99_low;
  j["ci99_high"] = r.ci99_high;
  j["n_members"] = r.n_members;
  return j;
}

RepetitionStats repetition_from_json(const json& j) {
  RepetitionStats r;
  r.mean = j.at("mean").get<double>();
  r.ci99_low = j.at("ci99_low").get<double>();
  r.ci99_high = j.at("ci99_high").get<double>();
  r.n_members = j.at("n_members").get<std::size_t>();
  return r;
}

json rank_stats_to_json(const RankStats& r) {
  json j;
  j["rank1_pct"] = r.rank1_pct;
  j["avg_rank_top5"] = r.avg_rank_top5 ? json(*r.avg_rank_top5) : json();
  j["beyond5_pct"] = r.beyond5_pct;
  j["n"] = r.n;
  return j;
}

RankStats rank_stats_from_json(const json& j) {
  RankStats r;
  r.rank1_pct = j.at("rank1_pct").get<double>();
  if (!j.at("avg_rank_top5").is_null())
    r.avg_rank_top5 = j.at("avg_rank_top5").get<double>();
  r.beyond5_pct = j.at("beyond5_pct").get<double>();
  r.n = j.at("n").get<std::size_t>();
  return r;
}

json dst_to_json(const DstScores& d) {
  json j;
  j["precision"] = d.precision;
  j["recall"] = d.recall;
  j["f1"] = d.f1;
  j["n_turns"] = d.n_turns;
  return j;
}

DstScores dst_from_json(const json& j) {
  DstScores d;
  d.precision = j.at("precision").get<double>();
  d.recall = j.at("recall").get<double>();
  d.f1 = j.at("f1").get<double>();
  d.n_turns = j.at("n_turns").get<std::size_t>();
  return d;
}

constexpr std::array<const char*, 3> kRankKinds = {"slot", "value", "pair"};

}  // namespace

std::string run_report_to_json(const RunReport& report) {
  json j;
  j["mode"] = report.mode;
  for (const auto& [tag, row] : report.grid)
    for (const auto& [metric, block] : row)
      j["grid"][tag][metric] = metrics_block_to_json(block);
  for (const auto& [tag, row] : report.per_length)
    for (const auto& [length, block] : row)
      j["per_length"][tag][std::to_string(length)] =
          metrics_block_to_json(block);
  j["empty_generations"] = report.empty_generations;
  j["samples_generated"] = report.samples_generated;
  for (const auto& [length, stats] : report.repetitions)
    j["repetitions"][std::to_string(length)] = repetition_to_json(stats);
  for (const auto& [length, count] : report.prefix_counts)
    j["prefix_counts"][std::to_string(length)] = count;
  {
    std::size_t total_prefixes = 0;
    for (const auto& [length, count] : report.prefix_counts)
      total_prefixes += count;
    if (!report.prefix_counts.empty() && total_prefixes == 0)
      j["empty_prefix_set"] = true;
  }
  for (const auto& [length, stats] : report.gold_ranks.per_length) {
    json g;
    for (std::size_t k = 0; k < kRankKinds.size(); ++k)
      g[kRankKinds[k]] = rank_stats_to_json(stats[k]);
    j["gold_ranks"][std::to_string(length)] = g;
  }
  for (const auto& [tag, p] : report.privacy) {
    json pj;
    pj["mean_pii"] = p.mean_pii;
    pj["mean_marginal"] = p.mean_marginal ? json(*p.mean_marginal) : json();
    pj["n_scored"] = p.n_scored;
    pj["n_zero_prefix"] = p.n_zero_prefix;
    j["privacy"][tag] = pj;
  }
  j["dst_train"] = dst_to_json(report.dst_train);
  j["dst_holdout"] = dst_to_json(report.dst_holdout);
  return j.dump(2) + "\n";
}

RunReport run_report_from_json(const std::string& txt) {
  const json j = json::parse(txt);
  RunReport report;
  report.mode = j.value("mode", "");
  if (j.contains("grid"))
    for (const auto& [tag, row] : j["grid"].items())
      for (const auto& [metric, block] : row.items())
        report.grid[tag][metric] = metrics_block_from_json(block);
  if (j.contains("per_length"))
    for (const auto& [tag, row] : j["per_length"].items())
      for (const auto& [length, block] : row.items())
        report.per_length[tag][std::stoi(length)] =
            metrics_block_from_json(block);
  if (j.contains("empty_generations"))
    report.empty_generations =
        j["empty_generations"].get<std::map<std::string, std::size_t>>();
  if (j.contains("samples_generated"))
    report.samples_generated =
        j["samples_generated"].get<std::map<std::string, std::size_t>>();
  if (j.contains("repetitions"))
    for (const auto& [length, stats] : j["repetitions"].items())
      report.repetitions[std::stoi(length)] = repetition_from_json(stats);
  if (j.contains("prefix_counts"))
    for (const auto& [length, count] : j["prefix_counts"].items())
      report.prefix_counts[std::stoi(length)] = count.get<std::size_t>();
  if (j.contains("gold_ranks"))
    for (const auto& [length, g] : j["gold_ranks"].items()) {
      std::array<RankStats, 3> stats;
      for (std::size_t k = 0; k < kRankKinds.size(); ++k)
        stats[k] = rank_stats_from_json(g.at(kRankKinds[k]));
      report.gold_ranks.per_length[std::stoi(length)] = stats;
    }
  if (j.contains("privacy"))
    for (const auto& [tag, pj] : j["privacy"].items()) {
      PrivacySummary p;
      p.mean_pii = pj.at("mean_pii").get<double>();
      if (!pj.at("mean_marginal").is_null())
        p.mean_marginal = pj.at("mean_marginal").get<double>();
      p.n_scored = pj.at("n_scored").get<std::size_t>();
      p.n_zero_prefix = pj.at("n_zero_prefix").get<std::size_t>();
      report.privacy[tag] = p;
    }
  if (j.contains("dst_train")) report.dst_train = dst_from_json(j["dst_train"]);
  if (j.contains("dst_holdout"))
    report.dst_holdout = dst_from_json(j["dst_holdout"]);
  return report;
}

void write_candidates_file(const std::string& path,
                           const std::vector<RawCandidate>& candidates,
                           const std::vector<int>& prefix_lengths) {
  (void)prefix_lengths;
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path);
  for (const RawCandidate& c : candidates) {
    json j;
    j["prefix"] = c.prefix;
    j["generated"] = c.generated;
    j["strategy"] = c.strategy_tag;
    j["seed"] = c.seed;
    j["sample_index"] = c.sample_index;
    j["terminated"] = c.terminated;
    f << j.dump() << "\n";
  }
}

std::vector<ScoredCandidate> read_candidates_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read " + path);
  std::vector<ScoredCandidate> out;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    const std::string prefix = j.at("prefix").get<std::string>();
    int plen = 0;
    for (char ch : prefix)
      if (ch == '=') ++plen;
    out.push_back(make_candidate(prefix, j.at("generated").get<std::string>(),
                                 j.at("strategy").get<std::string>(), plen));
  }
  return out;
}

void write_scored_file(const std::string& path,
                       const std::vector<ScoredCandidate>& scored) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path);
  for (const ScoredCandidate& c : scored) {
    json j;
    j["prefix"] = c.prefix;
    j["suffix"] = c.suffix;
    j["strategy"] = c.strategy_tag;
    j["prefix_length"] = c.prefix_length;
    j["parseable"] = c.parseable;
    j["canonical_suffix"] = c.canonical_suffix;
    j["degenerate"] = c.degenerate;
    j["correct"] = c.correct;
    j["scores"] = c.scores;
    f << j.dump() << "\n";
  }
}

std::vector<ScoredCandidate> read_scored_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read " + path);
  std::vector<ScoredCandidate> out;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    ScoredCandidate c;
    c.prefix = j.at("prefix").get<std::string>();
    c.suffix = j.at("suffix").get<std::string>();
    c.strategy_tag = j.at("strategy").get<std::string>();
    c.prefix_length = j.at("prefix_length").get<int>();
    c.parseable = j.at("parseable").get<bool>();
    c.canonical_suffix = j.at("canonical_suffix").get<std::string>();
    c.degenerate = j.at("degenerate").get<bool>();
    c.correct = j.at("correct").get<bool>();
    c.scores = j.at("scores").get<std::map<std::string, double>>();
    out.push_back(std::move(c));
  }
  return out;
}

namespace {

std::string fmt(double v, int precision = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

std::string fmt_opt_pct(const std::optional<double>& v) {
  return v ? fmt(*v * 100.0) : std::string("n/a");
}

std::string fmt_opt(const std::optional<double>& v, int precision = 2) {
  return v ? fmt(*v, precision) : std::string("n/a");
}

void pad(std::string& s, std::size_t width) {
  while (s.size() < width) s.push_back(' ');
}

// Aligned-column text table.
std::string render_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& row : rows) {
    if (widths.size() < row.size()) widths.resize(row.size(), 0);
    for (std::size_t i = 0; i < row.size(); ++i)
      widths[i] = std::max(widths[i], row[i].size());
  }
  std::string out;
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::string cell = row[i];
      pad(cell, widths[i] + 2);
      line += cell;
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

void render_text_report(const RunReport& report, std::ostream& os) {
  os << "mode: " << report.mode << "\n\n";
  os << "model utility (dialogue state tracking)\n";
  os << render_table(
      {{"split", "precision", "recall", "f1", "turns"},
       {"train", fmt(report.dst_train.precision), fmt(report.dst_train.recall),
        fmt(report.dst_train.f1), std::to_string(report.dst_train.n_turns)},
       {"holdout", fmt(report.dst_holdout.precision),
        fmt(report.dst_holdout.recall), fmt(report.dst_holdout.f1),
        std::to_string(report.dst_holdout.n_turns)}});
  os << "\n";

  if (!report.grid.empty()) {
    os << "membership-ranked extraction (top-n per metric; SP% / VP%)\n";
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header = {"strategy"};
    for (const std::string& m : known_metrics()) header.push_back(m);
    rows.push_back(header);
    for (const auto& [tag, row] : report.grid) {
      std::vector<std::string> cells = {tag};
      for (const std::string& m : known_metrics()) {
        const auto it = row.find(m);
        if (it == row.end()) {
          cells.push_back("not computed");
        } else {
          cells.push_back(fmt_opt_pct(it->second.state_precision) + "/" +
                          fmt_opt_pct(it->second.value_precision));
        }
      }
      rows.push_back(cells);
    }
    os << render_table(rows) << "\n";
  }

  if (!report.per_length.empty()) {
    os << "extraction by prefix length (all deduplicated candidates)\n";
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"strategy", "len", "#states", "#correct", "SP%",
                    "#triplets", "#values", "VP%", "unparseable"});
    for (const auto& [tag, row] : report.per_length) {
      for (const auto& [length, b] : row) {
        rows.push_back({tag, std::to_string(length),
                        std::to_string(b.n_extracted_states),
                        std::to_string(b.n_correct_states),
                        fmt_opt_pct(b.state_precision), fmt_opt(b.avg_triplets),
                        std::to_string(b.n_extracted_values),
                        fmt_opt_pct(b.value_precision),
                        std::to_string(b.n_unparseable)});
      }
    }
    os << render_table(rows) << "\n";
  }

  if (!report.prefix_counts.empty()) {
    os << "deduplicated prefixes per length\n";
    std::vector<std::vector<std::string>> rows = {{"len", "prefixes"}};
    for (const auto& [length, count] : report.prefix_counts)
      rows.push_back({std::to_string(length), std::to_string(count)});
    os << render_table(rows) << "\n";
  }

  if (!report.empty_generations.empty()) {
    os << "empty-state generations per strategy\n";
    std::vector<std::vector<std::string>> rows = {
        {"strategy", "empty", "sampled"}};
    for (const auto& [tag, n] : report.empty_generations) {
      const auto it = report.samples_generated.find(tag);
      rows.push_back({tag, std::to_string(n),
                      it == report.samples_generated.end()
                          ? std::string("n/a")
                          : std::to_string(it->second)});
    }
    os << render_table(rows) << "\n";
  }

  if (!report.repetitions.empty()) {
    os << "repetitions per member (99% CI)\n";
    std::vector<std::vector<std::string>> rows = {
        {"len", "mean", "ci_low", "ci_high", "members"}};
    for (const auto& [length, r] : report.repetitions)
      rows.push_back({std::to_string(length), fmt(r.mean), fmt(r.ci99_low),
                      fmt(r.ci99_high), std::to_string(r.n_members)});
    os << render_table(rows) << "\n";
  }

  if (!report.gold_ranks.per_length.empty()) {
    os << "gold answer decoding ranks\n";
    std::vector<std::vector<std::string>> rows = {
        {"len", "kind", "rank1%", "avg_rank<=5", ">5%", "n"}};
    for (const auto& [length, stats] : report.gold_ranks.per_length)
      for (std::size_t k = 0; k < kRankKinds.size(); ++k)
        rows.push_back({std::to_string(length), kRankKinds[k],
                        fmt(stats[k].rank1_pct),
                        fmt_opt(stats[k].avg_rank_top5),
                        fmt(stats[k].beyond5_pct),
                        std::to_string(stats[k].n)});
    os << render_table(rows) << "\n";
  }

  if (!report.privacy.empty()) {
    os << "privacy scores per strategy\n";
    std::vector<std::vector<std::string>> rows = {
        {"strategy", "mean_pii", "mean_marginal", "scored", "zero_prefix"}};
    for (const auto& [tag, p] : report.privacy)
      rows.push_back({tag, fmt(p.mean_pii), fmt_opt(p.mean_marginal),
                      std::to_string(p.n_scored),
                      std::to_string(p.n_zero_prefix)});
    os << render_table(rows) << "\n";
  }
}

}  // namespace

void emit_report(const std::string& run_dir) {
  const fs::path dir(run_dir);
  std::ifstream f(dir / "report.json");
  if (!f) throw IoError("no report.json under " + run_dir);
  std::stringstream ss;
  ss << f.rdbuf();
  const RunReport report = run_report_from_json(ss.str());

  {
    std::ofstream out(dir / "report.txt");
    render_text_report(report, out);
  }
  {
    std::ofstream out(dir / "table_grid.csv");
    out << "strategy,metric,n_extracted,n_correct,state_precision,avg_triplets,"
           "n_values,n_correct_values,value_precision,n_unparseable\n";
    for (const auto& [tag, row] : report.grid)
      for (const auto& [metric, b] : row) {
        out << tag << "," << metric << "," << b.n_extracted_states << ","
            << b.n_correct_states << "," << fmt_opt(b.state_precision, 6)
            << "," << fmt_opt(b.avg_triplets, 6) << "," << b.n_extracted_values
            << "," << b.n_correct_values << "," << fmt_opt(b.value_precision, 6)
            << "," << b.n_unparseable << "\n";
      }
  }
  {
    std::ofstream out(dir / "fig5_per_length.csv");
    out << "strategy,prefix_length,n_extracted,n_correct,state_precision,"
           "n_values,value_precision\n";
    for (const auto& [tag, row] : report.per_length)
      for (const auto& [length, b] : row)
        out << tag << "," << length << "," << b.n_extracted_states << ","
            << b.n_correct_states << "," << fmt_opt(b.state_precision, 6) << ","
            << b.n_extracted_values << "," << fmt_opt(b.value_precision, 6)
            << "\n";
  }
  {
    std::ofstream out(dir / "fig6_repetitions.csv");
    out << "prefix_length,mean,ci99_low,ci99_high,n_members\n";
    for (const auto& [length, r] : report.repetitions)
      out << length << "," << fmt(r.mean, 6) << "," << fmt(r.ci99_low, 6)
          << "," << fmt(r.ci99_high, 6) << "," << r.n_members << "\n";
  }
  {
    std::ofstream out(dir / "fig7_gold_rank.csv");
    out << "prefix_length,kind,rank1_pct,avg_rank_top5,beyond5_pct,n\n";
    for (const auto& [length, stats] : report.gold_ranks.per_length)
      for (std::size_t k = 0; k < kRankKinds.size(); ++k)
        out << length << "," << kRankKinds[k] << ","
            << fmt(stats[k].rank1_pct, 6) << ","
            << fmt_opt(stats[k].avg_rank_top5, 6) << ","
            << fmt(stats[k].beyond5_pct, 6) << "," << stats[k].n << "\n";
  }
  if (fs::exists(dir / "scored.jsonl")) {
    const auto scored = read_scored_file((dir / "scored.jsonl").string());
    std::ofstream out(dir / "fig9_scores.csv");
    out << "strategy,metric,score,member\n";
    for (const ScoredCandidate& c : scored)
      for (const auto& [metric, score] : c.scores)
        out << c.strategy_tag << "," << metric << "," << fmt(score, 9) << ","
            << (c.correct ? 1 : 0) << "\n";
  }
}

}  // namespace dsx
