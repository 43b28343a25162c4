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

#include <mutex>
#include <string>

#include "dsx/blackbox.hpp"

namespace dsx {

// Client side of the newline-delimited JSON scoring protocol. Satisfies the
// same contract as in-process access, so attack code runs unmodified against
// a remote bot. Thread-safe; one request in flight per client.
class RemoteBot : public ScoringClient {
 public:
  RemoteBot(const std::string& host, int port);
  ~RemoteBot() override;

  RemoteBot(const RemoteBot&) = delete;
  RemoteBot& operator=(const RemoteBot&) = delete;

  TokenDistribution next_token_distribution(
      const std::string& context) const override;
  SequenceScore sequence_logprob(const std::string& context,
                                 const std::string& target) const override;
  std::string greedy_decode(const std::string& prompt,
                            int max_tokens) const override;

 private:
  std::string request(const std::string& line) const;

  int fd_ = -1;
  mutable std::mutex mutex_;
  mutable std::string read_buffer_;
};

}  // namespace dsx
