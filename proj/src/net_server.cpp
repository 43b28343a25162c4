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

#include "dsx/net_server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <csignal>
#include <cstring>

#include <json.hpp>

#include "dsx/error.hpp"

namespace dsx {

using nlohmann::json;

namespace {

std::string error_response(const std::string& code,
                           const std::string& message) {
  json j;
  j["ok"] = false;
  j["code"] = code;
  j["message"] = message;
  return j.dump();
}

}  // namespace

BlackboxServer::BlackboxServer(const SurrogateModel& model, int port)
    : model_(&model) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw IoError("socket() failed");
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
    ::close(listen_fd_);
    throw IoError("bind() failed on port " + std::to_string(port));
  }
  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  if (::listen(listen_fd_, 16) < 0) {
    ::close(listen_fd_);
    throw IoError("listen() failed");
  }
  running_ = true;
  accept_thread_ = std::thread([this] { accept_loop(); });
}

BlackboxServer::~BlackboxServer() { stop(); }

void BlackboxServer::stop() {
  if (!running_.exchange(false)) return;
  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  if (accept_thread_.joinable()) accept_thread_.join();
  std::lock_guard<std::mutex> lock(workers_mutex_);
  for (std::thread& t : workers_)
    if (t.joinable()) t.join();
  workers_.clear();
}

void BlackboxServer::accept_loop() {
  while (running_) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (!running_) break;
      continue;
    }
    std::lock_guard<std::mutex> lock(workers_mutex_);
    workers_.emplace_back([this, fd] { serve_connection(fd); });
  }
}

void BlackboxServer::serve_connection(int fd) {
  std::string buffer;
  char chunk[4096];
  while (true) {
    const ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t pos;
    while ((pos = buffer.find('\n')) != std::string::npos) {
      const std::string line = buffer.substr(0, pos);
      buffer.erase(0, pos + 1);
      const std::string response = handle_line(line) + "\n";
      std::size_t sent = 0;
      while (sent < response.size()) {
        const ssize_t w =
            ::send(fd, response.data() + sent, response.size() - sent, 0);
        if (w <= 0) {
          ::close(fd);
          return;
        }
        sent += static_cast<std::size_t>(w);
      }
    }
  }
  ::close(fd);
}

std::string BlackboxServer::handle_line(const std::string& line) const {
  json req;
  try {
    req = json::parse(line);
  } catch (const json::exception&) {
    return error_response("BAD_REQUEST", "request is not valid JSON");
  }
  try {
    const std::string op = req.value("op", "");
    if (op == "dist") {
      const auto context = req.at("context").get<std::string>();
      const TokenDistribution dist = model_->next_token_distribution(
          model_->tokenizer().encode(context));
      json entries = json::array();
      for (const TokenProb& e : dist.entries)
        entries.push_back(json::array({e.id, e.token, e.prob}));
      json resp;
      resp["ok"] = true;
      resp["entries"] = entries;
      return resp.dump();
    }
    if (op == "score") {
      const auto context = req.at("context").get<std::string>();
      const auto target = req.at("target").get<std::string>();
      const SequenceScore s = model_->sequence_logprob(
          model_->tokenizer().encode(context),
          model_->tokenizer().encode(target));
      json resp;
      resp["ok"] = true;
      resp["total"] = s.total;
      resp["per_token"] = s.per_token;
      return resp.dump();
    }
    if (op == "greedy") {
      const auto prompt = req.at("prompt").get<std::string>();
      const int max_tokens = req.value("max_tokens", 64);
      json resp;
      resp["ok"] = true;
      resp["text"] = model_->greedy_decode(prompt, max_tokens);
      return resp.dump();
    }
    // Everything else, weights and hidden state included, stays behind the
    // boundary.
    return error_response("UNSUPPORTED",
                          "op '" + op + "' is not part of the scoring API");
  } catch (const UnknownToken& e) {
    return error_response("UNKNOWN_TOKEN", e.what());
  } catch (const json::exception& e) {
    return error_response("BAD_REQUEST", e.what());
  } catch (const std::exception& e) {
    return error_response("INTERNAL", e.what());
  }
}

void serve_blackbox_forever(const SurrogateModel& model, int port) {
  BlackboxServer server(model, port);
  // Park the main thread; the server runs until the process is killed.
  while (true) std::this_thread::sleep_for(std::chrono::seconds(3600));
}

}  // namespace dsx
