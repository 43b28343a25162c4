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

#include "dsx/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

#include "dsx/error.hpp"
#include "dsx/text.hpp"

namespace dsx {

namespace {

constexpr char kMagic[8] = {'D', 'S', 'X', 'M', 'O', 'D', 'E', 'L'};
constexpr std::uint32_t kFormatVersion = 1;

std::span<const TokenId> tail(std::span<const TokenId> seq, std::size_t n) {
  return seq.subspan(seq.size() - std::min(seq.size(), n));
}

}  // namespace

std::uint32_t SurrogateModel::Followers::count_of(TokenId id) const {
  const auto it = std::lower_bound(
      counts.begin(), counts.end(), id,
      [](const auto& a, TokenId b) { return a.first < b; });
  return it != counts.end() && it->first == id ? it->second : 0;
}

std::size_t SurrogateModel::ContextHash::operator()(
    const std::vector<TokenId>& v) const {
  std::size_t h = 0xcbf29ce484222325ull;
  for (TokenId id : v) {
    h ^= id;
    h *= 0x100000001b3ull;
  }
  return h;
}

SurrogateModel SurrogateModel::train(
    const std::vector<TrainingExample>& examples, int order,
    std::uint64_t seed) {
  if (examples.empty()) throw ConfigError("cannot train on an empty corpus");
  if (order < 1) throw ConfigError("model order must be >= 1");

  SurrogateModel m;
  m.order_ = order;
  m.seed_ = seed;

  // Vocabulary in first-appearance order over the serialized corpus.
  for (const TrainingExample& ex : examples)
    for (const auto& seg : ex.segments) m.tokenizer_.add_text(seg.text);

  // Mutable counting maps; flattened to sorted vectors afterwards.
  std::vector<std::unordered_map<std::vector<TokenId>,
                                 std::unordered_map<TokenId, std::uint32_t>,
                                 ContextHash>>
      acc(static_cast<std::size_t>(order));
  std::vector<char> in_target(m.tokenizer_.size(), 0);

  std::vector<TokenId> ids;
  std::vector<char> mask;
  for (const TrainingExample& ex : examples) {
    ids.clear();
    mask.clear();
    for (const auto& seg : ex.segments) {
      const auto seg_ids = m.tokenizer_.encode(seg.text);
      ids.insert(ids.end(), seg_ids.begin(), seg_ids.end());
      mask.insert(mask.end(), seg_ids.size(), seg.target ? 1 : 0);
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (!mask[i]) continue;
      if (ids[i] >= in_target.size()) in_target.resize(ids[i] + 1, 0);
      in_target[ids[i]] = 1;
      for (int k = 1; k <= order; ++k) {
        const std::size_t ctx_len = static_cast<std::size_t>(k - 1);
        if (ctx_len > i) break;  // no full-length context this close to start
        std::vector<TokenId> ctx(ids.begin() + (i - ctx_len),
                                 ids.begin() + i);
        acc[static_cast<std::size_t>(k - 1)][std::move(ctx)][ids[i]] += 1;
      }
    }
  }

  m.in_target_vocab_ = std::move(in_target);
  m.in_target_vocab_.resize(m.tokenizer_.size(), 0);
  for (TokenId id = 0; id < m.in_target_vocab_.size(); ++id)
    if (m.in_target_vocab_[id]) m.target_vocab_.push_back(id);

  m.tables_.resize(static_cast<std::size_t>(order));
  for (int k = 1; k <= order; ++k) {
    auto& table = m.tables_[static_cast<std::size_t>(k - 1)];
    for (auto& [ctx, followers] : acc[static_cast<std::size_t>(k - 1)]) {
      Followers f;
      f.counts.assign(followers.begin(), followers.end());
      std::sort(f.counts.begin(), f.counts.end());
      for (const auto& [id, c] : f.counts) f.total += c;
      table.emplace(ctx, std::move(f));
    }
  }
  return m;
}

bool SurrogateModel::generable(TokenId id) const {
  return id < in_target_vocab_.size() && in_target_vocab_[id] != 0;
}

TokenDistribution SurrogateModel::next_token_distribution(
    std::span<const TokenId> context) const {
  const std::size_t v = target_vocab_.size();
  std::vector<double> p(v, 1.0 / static_cast<double>(v));
  std::vector<TokenId> ctx;
  for (int k = 1; k <= order_; ++k) {
    const std::size_t ctx_len = static_cast<std::size_t>(k - 1);
    if (ctx_len > context.size()) break;
    const auto window = tail(context, ctx_len);
    ctx.assign(window.begin(), window.end());
    const auto& table = tables_[static_cast<std::size_t>(k - 1)];
    const auto it = table.find(ctx);
    if (it == table.end() || it->second.total == 0) continue;
    const Followers& f = it->second;
    const double types = static_cast<double>(f.counts.size());
    const double denom = static_cast<double>(f.total) + types;
    // Witten-Bell blend: observed counts interpolated with the lower order.
    for (std::size_t i = 0; i < v; ++i)
      p[i] = (f.count_of(target_vocab_[i]) + types * p[i]) / denom;
  }
  TokenDistribution dist;
  dist.entries.reserve(v);
  for (std::size_t i = 0; i < v; ++i)
    dist.entries.push_back(
        {target_vocab_[i], tokenizer_.token(target_vocab_[i]), p[i]});
  std::sort(dist.entries.begin(), dist.entries.end(),
            [](const TokenProb& a, const TokenProb& b) {
              if (a.prob != b.prob) return a.prob > b.prob;
              return a.id < b.id;
            });
  return dist;
}

double SurrogateModel::token_prob(std::span<const TokenId> context,
                                  TokenId token) const {
  if (!generable(token)) return 0.0;
  double p = 1.0 / static_cast<double>(target_vocab_.size());
  std::vector<TokenId> ctx;
  for (int k = 1; k <= order_; ++k) {
    const std::size_t ctx_len = static_cast<std::size_t>(k - 1);
    if (ctx_len > context.size()) break;
    const auto window = tail(context, ctx_len);
    ctx.assign(window.begin(), window.end());
    const auto& table = tables_[static_cast<std::size_t>(k - 1)];
    const auto it = table.find(ctx);
    if (it == table.end() || it->second.total == 0) continue;
    const Followers& f = it->second;
    const double types = static_cast<double>(f.counts.size());
    const double denom = static_cast<double>(f.total) + types;
    p = (f.count_of(token) + types * p) / denom;
  }
  return p;
}

SequenceScore SurrogateModel::sequence_logprob(
    std::span<const TokenId> context, std::span<const TokenId> target) const {
  if (target.empty()) throw ConfigError("sequence_logprob on empty target");
  SequenceScore s;
  std::vector<TokenId> full(context.begin(), context.end());
  for (TokenId id : target) {
    if (id >= tokenizer_.size())
      throw UnknownToken("token id " + std::to_string(id) +
                         " outside vocabulary");
    if (!generable(id))
      throw UnknownToken("token '" + tokenizer_.token(id) +
                         "' is never generated by this model");
    const double p = token_prob(full, id);
    s.per_token.push_back(std::log(p));
    full.push_back(id);
  }
  for (double lp : s.per_token) s.total += lp;
  return s;
}

std::string SurrogateModel::greedy_decode(const std::string& prompt,
                                          int max_tokens) const {
  if (max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
  std::vector<TokenId> ids = tokenizer_.encode(prompt);
  std::vector<TokenId> continuation;
  for (int i = 0; i < max_tokens; ++i) {
    const TokenDistribution dist = next_token_distribution(ids);
    const TokenId next = dist.entries.front().id;
    if (tokenizer_.is_terminator(next)) break;
    continuation.push_back(next);
    ids.push_back(next);
  }
  return tokenizer_.decode(continuation);
}

namespace {

std::string normalized_triplet_key(const Triplet& t) {
  return t.domain + "\x1f" + t.slot + "\x1f" + text::normalize_value(t.value);
}

}  // namespace

DstScores SurrogateModel::dst_eval(
    const std::vector<Dialogue>& dialogues) const {
  std::size_t tp = 0, fp = 0, fn = 0, n_turns = 0;
  for (const Dialogue& d : dialogues) {
    for (std::size_t t = 0; t < d.turns.size(); ++t) {
      ++n_turns;
      const std::string prompt = text::join_text(
          history_text(d, t), std::string(text::kStateMarker));
      const std::string decoded = greedy_decode(prompt, 128);
      DialogueState predicted;
      try {
        predicted = parse_state(decoded);
      } catch (const ParseError&) {
        // Unparseable prediction counts as no prediction at all.
      }
      std::vector<std::string> gold;
      for (const Triplet& tr : d.turns[t].state.triplets())
        gold.push_back(normalized_triplet_key(tr));
      for (const Triplet& tr : predicted.triplets()) {
        const std::string key = normalized_triplet_key(tr);
        const auto it = std::find(gold.begin(), gold.end(), key);
        if (it != gold.end()) {
          ++tp;
          gold.erase(it);
        } else {
          ++fp;
        }
      }
      fn += gold.size();
    }
  }
  DstScores s;
  s.n_turns = n_turns;
  s.precision = tp + fp == 0 ? 0.0
                             : static_cast<double>(tp) /
                                   static_cast<double>(tp + fp);
  s.recall = tp + fn == 0 ? 0.0
                          : static_cast<double>(tp) /
                                static_cast<double>(tp + fn);
  s.f1 = s.precision + s.recall == 0.0
             ? 0.0
             : 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

namespace {

void write_u32(std::ostream& os, std::uint32_t v) {
  unsigned char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(buf), 4);
}

void write_u64(std::ostream& os, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint32_t read_u32(std::istream& is) {
  unsigned char buf[4];
  is.read(reinterpret_cast<char*>(buf), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
  return v;
}

std::uint64_t read_u64(std::istream& is) {
  unsigned char buf[8];
  is.read(reinterpret_cast<char*>(buf), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

void write_str(std::ostream& os, const std::string& s) {
  write_u32(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_str(std::istream& is) {
  const std::uint32_t n = read_u32(is);
  std::string s(n, '\0');
  is.read(s.data(), n);
  return s;
}

}  // namespace

void SurrogateModel::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write model file " + path);
  os.write(kMagic, sizeof(kMagic));
  write_u32(os, kFormatVersion);
  write_u32(os, static_cast<std::uint32_t>(order_));
  write_u64(os, seed_);
  write_u32(os, static_cast<std::uint32_t>(tokenizer_.size()));
  for (const std::string& tok : tokenizer_.tokens()) write_str(os, tok);
  write_u32(os, static_cast<std::uint32_t>(target_vocab_.size()));
  for (TokenId id : target_vocab_) write_u32(os, id);
  for (const CountTable& table : tables_) {
    // Sorted context order keeps the file byte-stable across runs.
    std::map<std::vector<TokenId>, const Followers*> sorted;
    for (const auto& [ctx, f] : table) sorted.emplace(ctx, &f);
    write_u64(os, sorted.size());
    for (const auto& [ctx, f] : sorted) {
      write_u32(os, static_cast<std::uint32_t>(ctx.size()));
      for (TokenId id : ctx) write_u32(os, id);
      write_u32(os, static_cast<std::uint32_t>(f->counts.size()));
      for (const auto& [id, c] : f->counts) {
        write_u32(os, id);
        write_u32(os, c);
      }
    }
  }
  if (!os) throw IoError("failed while writing model file " + path);
}

SurrogateModel SurrogateModel::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read model file " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0)
    throw IoError(path + " is not a model file");
  const std::uint32_t version = read_u32(is);
  if (version != kFormatVersion)
    throw IoError("unsupported model format version " +
                  std::to_string(version));
  SurrogateModel m;
  m.order_ = static_cast<int>(read_u32(is));
  m.seed_ = read_u64(is);
  const std::uint32_t vocab = read_u32(is);
  for (std::uint32_t i = 0; i < vocab; ++i) {
    const std::string tok = read_str(is);
    m.tokenizer_.add_text(tok);  // markers/structurals already registered
  }
  m.in_target_vocab_.assign(m.tokenizer_.size(), 0);
  const std::uint32_t n_target = read_u32(is);
  for (std::uint32_t i = 0; i < n_target; ++i) {
    const TokenId id = read_u32(is);
    m.target_vocab_.push_back(id);
    m.in_target_vocab_[id] = 1;
  }
  m.tables_.resize(static_cast<std::size_t>(m.order_));
  for (int k = 0; k < m.order_; ++k) {
    const std::uint64_t n_ctx = read_u64(is);
    for (std::uint64_t c = 0; c < n_ctx; ++c) {
      const std::uint32_t len = read_u32(is);
      std::vector<TokenId> ctx(len);
      for (std::uint32_t i = 0; i < len; ++i) ctx[i] = read_u32(is);
      Followers f;
      const std::uint32_t n_follow = read_u32(is);
      f.counts.resize(n_follow);
      for (std::uint32_t i = 0; i < n_follow; ++i) {
        f.counts[i].first = read_u32(is);
        f.counts[i].second = read_u32(is);
        f.total += f.counts[i].second;
      }
      m.tables_[static_cast<std::size_t>(k)].emplace(std::move(ctx),
                                                     std::move(f));
    }
  }
  if (!is) throw IoError("truncated model file " + path);
  return m;
}

TokenDistribution InProcessBot::next_token_distribution(
    const std::string& context) const {
  return model_->next_token_distribution(model_->tokenizer().encode(context));
}

SequenceScore InProcessBot::sequence_logprob(const std::string& context,
                                             const std::string& target) const {
  const auto ctx = model_->tokenizer().encode(context);
  const auto tgt = model_->tokenizer().encode(target);
  return model_->sequence_logprob(ctx, tgt);
}

std::string InProcessBot::greedy_decode(const std::string& prompt,
                                        int max_tokens) const {
  return model_->greedy_decode(prompt, max_tokens);
}

}  // namespace dsx
