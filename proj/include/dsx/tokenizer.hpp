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

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dsx/blackbox.hpp"

namespace dsx {

// Word-level vocabulary over the surface token split. Structural characters
// and the markers are single tokens with fixed ids; everything else is added
// in first-appearance order, so the mapping is deterministic for a given
// training corpus. Unknown words map to [UNK].
class Tokenizer {
 public:
  Tokenizer();

  // Adds every token of `text` to the vocabulary (no-op for known tokens).
  void add_text(const std::string& text);

  std::vector<TokenId> encode(const std::string& text) const;
  std::string decode(std::span<const TokenId> ids) const;

  const std::string& token(TokenId id) const;
  bool known(const std::string& token) const;
  TokenId id_of(const std::string& token) const;  // unk_id() if absent
  std::size_t size() const { return tokens_.size(); }

  TokenId unk_id() const { return 0; }
  TokenId marker_id() const { return 1; }
  TokenId eos_state_id() const { return 2; }
  TokenId eos_id() const { return 3; }
  bool is_terminator(TokenId id) const {
    return id == eos_state_id() || id == eos_id();
  }

  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  TokenId add_token(const std::string& token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
};

}  // namespace dsx
