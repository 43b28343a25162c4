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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <string>
#include <thread>
#include <vector>

#include "dsx/corpus.hpp"
#include "dsx/error.hpp"
#include "dsx/model.hpp"
#include "dsx/net_client.hpp"
#include "dsx/net_server.hpp"
#include "dsx/rng.hpp"
#include "dsx/text.hpp"

using namespace dsx;

namespace {

struct ServerFixture {
  Corpus corpus;
  SurrogateModel model;

  ServerFixture() {
    CorpusConfig cfg;
    cfg.n_domains = 2;
    cfg.slots_per_domain = {2, 2};
    cfg.values_per_slot = 5;
    cfg.n_dialogues = 25;
    cfg.turns_per_dialogue = {2, 4};
    cfg.seed = 55;
    corpus = generate_corpus(cfg);
    model = SurrogateModel::train(
        corpus_to_examples(corpus, TrainingMode::kTurnLevel), 5, 1);
  }
};

// Raw one-shot request against the NDJSON endpoint.
std::string raw_request(int port, const std::string& line) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  REQUIRE(fd >= 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
  REQUIRE(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0);
  const std::string out = line + "\n";
  REQUIRE(::send(fd, out.data(), out.size(), 0) ==
          static_cast<ssize_t>(out.size()));
  std::string response;
  char chunk[4096];
  while (response.find('\n') == std::string::npos) {
    const ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
    if (n <= 0) break;
    response.append(chunk, static_cast<std::size_t>(n));
  }
  ::close(fd);
  return response;
}

}  // namespace

TEST_CASE("wire and in-process scoring agree exactly") {
  const ServerFixture fx;
  const BlackboxServer server(fx.model, 0);
  const RemoteBot remote("127.0.0.1", server.port());
  const InProcessBot local(fx.model);

  // Random contexts assembled from corpus states and plain words.
  std::vector<std::string> pool = {"Belief State:", ""};
  for (const Dialogue& d : fx.corpus.dialogues) {
    pool.push_back(
        text::join_text("Belief State:", serialize_state(d.turns.back().state)));
    pool.push_back(d.turns.front().user_utterance);
  }
  Rng rng(2);
  int checked = 0;
  for (int i = 0; i < 100; ++i) {
    const std::string& ctx = pool[rng.below(pool.size())];
    const TokenDistribution a = local.next_token_distribution(ctx);
    const TokenDistribution b = remote.next_token_distribution(ctx);
    REQUIRE(a.entries.size() == b.entries.size());
    for (std::size_t k = 0; k < a.entries.size(); ++k) {
      CHECK(a.entries[k].id == b.entries[k].id);
      CHECK(a.entries[k].token == b.entries[k].token);
      CHECK(a.entries[k].prob == doctest::Approx(b.entries[k].prob).epsilon(1e-12));
    }
    ++checked;
  }
  CHECK(checked == 100);

  // Sequence scoring and greedy decoding line up as well.
  const std::string state =
      serialize_state(fx.corpus.dialogues.front().turns.back().state);
  const SequenceScore sa = local.sequence_logprob("Belief State:", state);
  const SequenceScore sb = remote.sequence_logprob("Belief State:", state);
  REQUIRE(sa.per_token.size() == sb.per_token.size());
  CHECK(sa.total == doctest::Approx(sb.total).epsilon(1e-12));
  for (std::size_t i = 0; i < sa.per_token.size(); ++i)
    CHECK(sa.per_token[i] == doctest::Approx(sb.per_token[i]).epsilon(1e-12));

  CHECK(local.greedy_decode("Belief State:", 32) ==
        remote.greedy_decode("Belief State:", 32));
}

TEST_CASE("internals access is rejected at the boundary") {
  const ServerFixture fx;
  const BlackboxServer server(fx.model, 0);
  const std::string resp =
      raw_request(server.port(), R"({"op":"weights"})");
  CHECK(resp.find("\"ok\":false") != std::string::npos);
  CHECK(resp.find("UNSUPPORTED") != std::string::npos);

  const std::string hidden =
      raw_request(server.port(), R"({"op":"attention_matrices"})");
  CHECK(hidden.find("UNSUPPORTED") != std::string::npos);
}

TEST_CASE("malformed requests get structured errors") {
  const ServerFixture fx;
  const BlackboxServer server(fx.model, 0);
  const std::string bad = raw_request(server.port(), "this is not json");
  CHECK(bad.find("\"ok\":false") != std::string::npos);
  CHECK(bad.find("BAD_REQUEST") != std::string::npos);

  // Missing required field.
  const std::string missing = raw_request(server.port(), R"({"op":"dist"})");
  CHECK(missing.find("\"ok\":false") != std::string::npos);
}

TEST_CASE("unknown target tokens map to UnknownToken on the client") {
  const ServerFixture fx;
  const BlackboxServer server(fx.model, 0);
  const RemoteBot remote("127.0.0.1", server.port());
  CHECK_THROWS_AS(remote.sequence_logprob("", "zzzneverseenzzz"),
                  UnknownToken);
}

TEST_CASE("concurrent clients receive consistent answers") {
  const ServerFixture fx;
  const BlackboxServer server(fx.model, 0);
  const InProcessBot local(fx.model);
  const std::string expected = local.greedy_decode("Belief State:", 24);

  std::vector<std::thread> threads;
  std::vector<std::string> results(8);
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&, i] {
      const RemoteBot remote("127.0.0.1", server.port());
      results[static_cast<std::size_t>(i)] =
          remote.greedy_decode("Belief State:", 24);
    });
  }
  for (std::thread& t : threads) t.join();
  for (const std::string& r : results) CHECK(r == expected);
}

TEST_CASE("transport failures surface as retriable errors") {
  int dead_port;
  {
    const ServerFixture fx;
    const BlackboxServer server(fx.model, 0);
    dead_port = server.port();
  }  // server gone
  try {
    const RemoteBot remote("127.0.0.1", dead_port);
    remote.greedy_decode("Belief State:", 8);
    FAIL("expected TransportError");
  } catch (const TransportError& e) {
    CHECK(e.retriable());
  }
}
