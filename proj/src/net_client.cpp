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

#include "dsx/net_client.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>

#include <json.hpp>

#include "dsx/error.hpp"

namespace dsx {

using nlohmann::json;

RemoteBot::RemoteBot(const std::string& host, int port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw TransportError("socket() failed", /*retriable=*/true);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd_);
    throw TransportError("bad host address: " + host, /*retriable=*/false);
  }
  if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
    ::close(fd_);
    throw TransportError(
        "cannot connect to " + host + ":" + std::to_string(port),
        /*retriable=*/true);
  }
}

RemoteBot::~RemoteBot() {
  if (fd_ >= 0) ::close(fd_);
}

std::string RemoteBot::request(const std::string& line) const {
  std::lock_guard<std::mutex> lock(mutex_);
  const std::string out = line + "\n";
  std::size_t sent = 0;
  while (sent < out.size()) {
    const ssize_t w = ::send(fd_, out.data() + sent, out.size() - sent, 0);
    if (w <= 0)
      throw TransportError("connection lost while sending", /*retriable=*/true);
    sent += static_cast<std::size_t>(w);
  }
  char chunk[4096];
  while (true) {
    const std::size_t pos = read_buffer_.find('\n');
    if (pos != std::string::npos) {
      const std::string response = read_buffer_.substr(0, pos);
      read_buffer_.erase(0, pos + 1);
      return response;
    }
    const ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
    if (n <= 0)
      throw TransportError("connection lost while receiving",
                           /*retriable=*/true);
    read_buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

namespace {

json parse_response(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception&) {
    throw TransportError("malformed response from server", /*retriable=*/true);
  }
  if (!j.value("ok", false)) {
    const std::string code = j.value("code", "INTERNAL");
    const std::string message = j.value("message", "");
    if (code == "UNKNOWN_TOKEN") throw UnknownToken(message);
    throw TransportError(code + ": " + message, /*retriable=*/false);
  }
  return j;
}

}  // namespace

TokenDistribution RemoteBot::next_token_distribution(
    const std::string& context) const {
  json req;
  req["op"] = "dist";
  req["context"] = context;
  const json resp = parse_response(request(req.dump()));
  TokenDistribution dist;
  for (const auto& e : resp.at("entries"))
    dist.entries.push_back({e.at(0).get<TokenId>(),
                            e.at(1).get<std::string>(),
                            e.at(2).get<double>()});
  return dist;
}

SequenceScore RemoteBot::sequence_logprob(const std::string& context,
                                          const std::string& target) const {
  json req;
  req["op"] = "score";
  req["context"] = context;
  req["target"] = target;
  const json resp = parse_response(request(req.dump()));
  SequenceScore s;
  s.total = resp.at("total").get<double>();
  s.per_token = resp.at("per_token").get<std::vector<double>>();
  return s;
}

std::string RemoteBot::greedy_decode(const std::string& prompt,
                                     int max_tokens) const {
  json req;
  req["op"] = "greedy";
  req["prompt"] = prompt;
  req["max_tokens"] = max_tokens;
  const json resp = parse_response(request(req.dump()));
  return resp.at("text").get<std::string>();
}

}  // namespace dsx
