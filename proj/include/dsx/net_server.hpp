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

#include <atomic>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "dsx/model.hpp"

namespace dsx {

// Serves the three black-box scoring operations over a newline-delimited
// JSON protocol on a loopback TCP socket. Anything beyond those three
// requests is rejected, which is the whole point of the boundary. The model
// is immutable, so connections are handled concurrently.
class BlackboxServer {
 public:
  // port 0 binds an ephemeral port; read it back with port().
  BlackboxServer(const SurrogateModel& model, int port);
  ~BlackboxServer();

  BlackboxServer(const BlackboxServer&) = delete;
  BlackboxServer& operator=(const BlackboxServer&) = delete;

  int port() const { return port_; }
  void stop();

 private:
  void accept_loop();
  void serve_connection(int fd);
  std::string handle_line(const std::string& line) const;

  const SurrogateModel* model_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::atomic<bool> running_{false};
  std::thread accept_thread_;
  std::mutex workers_mutex_;
  std::vector<std::thread> workers_;
};

// Blocks serving until the process is interrupted; used by the CLI.
void serve_blackbox_forever(const SurrogateModel& model, int port);

}  // namespace dsx
