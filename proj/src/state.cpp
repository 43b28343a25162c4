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

#include "dsx/state.hpp"

#include <cctype>
#include <stdexcept>

#include "dsx/text.hpp"

namespace dsx {

namespace {

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
bool is_alpha(char c) { return is_upper(c) || is_lower(c); }

}  // namespace

bool is_valid_domain(std::string_view s) {
  if (s.empty() || !is_upper(s[0])) return false;
  for (char c : s.substr(1))
    if (!is_alpha(c)) return false;
  return true;
}

bool is_valid_slot(std::string_view s) {
  if (s.empty() || !is_lower(s[0])) return false;
  for (char c : s.substr(1))
    if (!is_lower(c) && c != '_') return false;
  return true;
}

bool is_valid_value(std::string_view s) {
  if (text::trim(s).empty()) return false;
  for (char c : s)
    if (text::is_structural(c)) return false;
  return true;
}

void DialogueState::add(Triplet t) {
  if (!is_valid_domain(t.domain)) throw std::invalid_argument("bad domain: " + t.domain);
  if (!is_valid_slot(t.slot)) throw std::invalid_argument("bad slot: " + t.slot);
  if (!is_valid_value(t.value)) throw std::invalid_argument("bad value: " + t.value);
  if (contains(t.domain, t.slot))
    throw std::invalid_argument("duplicate slot " + t.domain + "." + t.slot);
  t.value = text::trim(t.value);
  // Keep domain groups contiguous: insert after the last triplet of the same
  // domain, or append a new group.
  std::size_t pos = triplets_.size();
  for (std::size_t i = triplets_.size(); i > 0; --i) {
    if (triplets_[i - 1].domain == t.domain) {
      pos = i;
      break;
    }
  }
  if (pos == triplets_.size()) {
    triplets_.push_back(std::move(t));
  } else {
    triplets_.insert(triplets_.begin() + static_cast<std::ptrdiff_t>(pos),
                     std::move(t));
  }
}

bool DialogueState::set_value(std::string_view domain, std::string_view slot,
                              std::string_view value) {
  for (Triplet& t : triplets_) {
    if (t.domain == domain && t.slot == slot) {
      if (!is_valid_value(value)) throw std::invalid_argument("bad value");
      t.value = text::trim(value);
      return true;
    }
  }
  return false;
}

bool DialogueState::remove(std::string_view domain, std::string_view slot) {
  for (std::size_t i = 0; i < triplets_.size(); ++i) {
    if (triplets_[i].domain == domain && triplets_[i].slot == slot) {
      triplets_.erase(triplets_.begin() + static_cast<std::ptrdiff_t>(i));
      return true;
    }
  }
  return false;
}

bool DialogueState::contains(std::string_view domain,
                             std::string_view slot) const {
  return value_of(domain, slot) != nullptr;
}

const std::string* DialogueState::value_of(std::string_view domain,
                                           std::string_view slot) const {
  for (const Triplet& t : triplets_)
    if (t.domain == domain && t.slot == slot) return &t.value;
  return nullptr;
}

std::string serialize_state(const DialogueState& state) {
  std::string out;
  const auto& ts = state.triplets();
  std::size_t i = 0;
  while (i < ts.size()) {
    if (!out.empty()) out.push_back(' ');
    out += ts[i].domain;
    out.push_back('(');
    const std::string& domain = ts[i].domain;
    bool first = true;
    while (i < ts.size() && ts[i].domain == domain) {
      if (!first) out.push_back(',');
      first = false;
      out += ts[i].slot;
      out.push_back('=');
      out += ts[i].value;
      ++i;
    }
    out.push_back(')');
  }
  return out;
}

namespace {

class StateParser {
 public:
  explicit StateParser(std::string_view text) : text_(text) {}

  DialogueState parse() {
    skip_ws();
    if (remaining().substr(0, text::kStateMarker.size()) ==
        text::kStateMarker) {
      pos_ += text::kStateMarker.size();
      skip_ws();
    }
    DialogueState state;
    while (pos_ < text_.size()) {
      parse_group(state);
      skip_ws();
    }
    return state;
  }

 private:
  std::string_view remaining() const { return text_.substr(pos_); }

  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  [[noreturn]] void fail(const std::string& what, std::size_t at) {
    throw ParseError(what + " at byte " + std::to_string(at), at);
  }

  std::string parse_identifier(bool domain) {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !text::is_structural(text_[pos_]) &&
           !std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    std::string id(text_.substr(start, pos_ - start));
    if (domain ? !is_valid_domain(id) : !is_valid_slot(id))
      fail(domain ? "illegal domain identifier" : "illegal slot identifier",
           start);
    return id;
  }

  void parse_group(DialogueState& state) {
    const std::string domain = parse_identifier(/*domain=*/true);
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != '(')
      fail("expected '(' after domain", pos_);
    ++pos_;
    while (true) {
      skip_ws();
      const std::size_t slot_at = pos_;
      const std::string slot = parse_identifier(/*domain=*/false);
      skip_ws();
      if (pos_ >= text_.size() || text_[pos_] != '=')
        fail("expected '=' after slot", pos_);
      ++pos_;
      const std::size_t value_at = pos_;
      std::string value;
      while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != ')') {
        if (text_[pos_] == '(' || text_[pos_] == '=')
          fail("reserved character in value", pos_);
        value.push_back(text_[pos_]);
        ++pos_;
      }
      value = text::trim(value);
      if (value.empty()) fail("empty value", value_at);
      if (state.contains(domain, slot))
        fail("duplicate slot " + domain + "." + slot, slot_at);
      state.add({domain, slot, value});
      if (pos_ >= text_.size()) fail("unclosed group", pos_);
      if (text_[pos_] == ')') {
        ++pos_;
        return;
      }
      ++pos_;  // consume ','
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::string normalized(const Triplet& t) {
  return t.domain + "\x1f" + t.slot + "\x1f" + text::normalize_value(t.value);
}

}  // namespace

DialogueState parse_state(std::string_view txt) {
  return StateParser(txt).parse();
}

bool state_subset(const DialogueState& candidate,
                  const DialogueState& reference) {
  for (const Triplet& c : candidate.triplets()) {
    bool found = false;
    for (const Triplet& r : reference.triplets()) {
      if (normalized(c) == normalized(r)) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

std::string truncate_prefix(const DialogueState& state,
                            std::size_t n_triplets) {
  if (n_triplets < 1 || n_triplets >= state.size())
    throw PrefixTooLong("prefix length " + std::to_string(n_triplets) +
                        " leaves no suffix in a state of " +
                        std::to_string(state.size()) + " triplets");
  const std::string full = serialize_state(state);
  // Walk the serialized string to the end of the n-th value, then keep the
  // delimiter that follows (`,` mid-group, `) ` at a group boundary).
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n_triplets; ++i) {
    pos = full.find('=', pos);
    pos = full.find_first_of(",)", pos);
    if (i + 1 == n_triplets) {
      pos += 1;  // include the delimiter after the n-th value
      if (full[pos - 1] == ')') pos += 1;  // and the space after `)`
    } else {
      pos += full[pos] == ')' ? 2 : 1;
    }
  }
  return full.substr(0, pos);
}

}  // namespace dsx
