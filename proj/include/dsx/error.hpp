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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dsx {

// Malformed belief-state text. `offset` is the byte position of the first
// offending character in the input.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string message, std::size_t offset)
      : std::runtime_error(std::move(message)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class PrefixTooLong : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MarkerCollision : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownToken : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownMetric : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptySupport : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchemaEmpty : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Wire-protocol failure on the client side. Transport errors are safe to
// retry; protocol errors (bad request, unsupported op) are not.
class TransportError : public std::runtime_error {
 public:
  TransportError(std::string message, bool retriable)
      : std::runtime_error(std::move(message)), retriable_(retriable) {}
  bool retriable() const { return retriable_; }

 private:
  bool retriable_;
};

}  // namespace dsx
