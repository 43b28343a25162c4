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

#include "dsx/tokenizer.hpp"

#include "dsx/error.hpp"
#include "dsx/text.hpp"

namespace dsx {

Tokenizer::Tokenizer() {
  // Fixed ids: 0..3 markers, 4..7 structural characters.
  add_token(std::string(text::kUnk));
  add_token(std::string(text::kStateMarker));
  add_token(std::string(text::kEosState));
  add_token(std::string(text::kEos));
  add_token("(");
  add_token(")");
  add_token(",");
  add_token("=");
}

TokenId Tokenizer::add_token(const std::string& token) {
  const auto it = ids_.find(token);
  if (it != ids_.end()) return it->second;
  const TokenId id = static_cast<TokenId>(tokens_.size());
  tokens_.push_back(token);
  ids_.emplace(token, id);
  return id;
}

void Tokenizer::add_text(const std::string& text) {
  for (const std::string& tok : text::split_tokens(text)) add_token(tok);
}

std::vector<TokenId> Tokenizer::encode(const std::string& text) const {
  std::vector<TokenId> out;
  for (const std::string& tok : text::split_tokens(text)) {
    const auto it = ids_.find(tok);
    out.push_back(it == ids_.end() ? unk_id() : it->second);
  }
  return out;
}

std::string Tokenizer::decode(std::span<const TokenId> ids) const {
  std::vector<std::string> toks;
  toks.reserve(ids.size());
  for (TokenId id : ids) toks.push_back(token(id));
  return text::join_tokens(toks);
}

const std::string& Tokenizer::token(TokenId id) const {
  if (id >= tokens_.size())
    throw UnknownToken("token id " + std::to_string(id) +
                       " outside vocabulary of " +
                       std::to_string(tokens_.size()));
  return tokens_[id];
}

bool Tokenizer::known(const std::string& token) const {
  return ids_.count(token) > 0;
}

TokenId Tokenizer::id_of(const std::string& token) const {
  const auto it = ids_.find(token);
  return it == ids_.end() ? unk_id() : it->second;
}

}  // namespace dsx
