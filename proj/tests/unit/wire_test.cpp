#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <json.hpp>
#include <thread>

#include "parablock/decoder.hpp"
#include "parablock/error.hpp"
#include "parablock/wire.hpp"
#include "support.hpp"

namespace parablock {
namespace {

using json = nlohmann::json;
using namespace std::chrono_literals;

const std::vector<std::string> kCorpus = {"the cat sat on the mat .", "the dog sat on the log .",
                                          "a cat saw a dog ."};

// Runs serve() on the far end of a socket pair for the lifetime of the fixture.
class LiveServer {
 public:
  explicit LiveServer(std::size_t top_k = kDefaultTopK)
      : lm_(testing::train(kCorpus, 2, 1.0)), ngram_(*lm_) {
    auto [client, server] = make_channel_pair();
    server_end_ = std::move(server);
    client_end_ = std::move(client);
    ServeOptions opts;
    opts.top_k = top_k;
    thread_ = std::thread([this, opts] { serve(ngram_, &embedder_, *server_end_, opts); });
  }
  ~LiveServer() {
    if (client_) client_.reset();
    if (client_end_) client_end_->close();
    thread_.join();
  }

  WireClient& client() {
    if (!client_) client_ = std::make_shared<WireClient>(std::move(client_end_), 5s);
    return *client_;
  }
  std::shared_ptr<WireClient> shared() {
    client();
    return client_;
  }
  NGramLM& local() { return ngram_; }
  const HashEmbedding& embedder() const { return embedder_; }

 private:
  std::shared_ptr<const NGramLM> lm_;
  NGramLM ngram_;
  HashEmbedding embedder_;
  std::unique_ptr<FdChannel> server_end_;
  std::unique_ptr<FdChannel> client_end_;
  std::shared_ptr<WireClient> client_;
  std::thread thread_;
};

TEST(Wire, HandshakeAdvertisesVocabAndTopK) {
  LiveServer server(8);
  auto& c = server.client();
  EXPECT_EQ(c.top_k(), 8u);
  EXPECT_TRUE(c.vocabulary().contains("</s>"));
  EXPECT_TRUE(c.vocabulary().contains("cat"));
  EXPECT_EQ(c.vocabulary().size(), server.local().vocabulary().size());
}

TEST(Wire, EmptyPrefixGivesTopKNonincreasing) {
  LiveServer server(8);
  auto& c = server.client();
  const auto source = tokenize("the cat");
  const std::vector<TokenId> prefix = {c.vocabulary().bos()};
  const auto dist = c.next(source, prefix);
  EXPECT_FALSE(dist.dense());
  ASSERT_EQ(dist.entries.size(), 8u);
  for (std::size_t i = 1; i < dist.entries.size(); ++i) {
    EXPECT_LE(dist.entries[i].logprob, dist.entries[i - 1].logprob);
  }
  for (const auto& e : dist.entries) EXPECT_TRUE(std::isfinite(e.logprob));
}

TEST(Wire, MatchesLocalBackend) {
  LiveServer server;
  auto& c = server.client();
  const auto& remote_vocab = c.vocabulary();
  const auto& local_vocab = server.local().vocabulary();
  const auto source = tokenize("the dog");
  const std::vector<std::vector<std::string>> prefixes = {{}, {"the"}, {"the", "cat"}, {"a", "dog", "sat"}};
  for (const auto& words : prefixes) {
    std::vector<TokenId> remote_prefix = {remote_vocab.bos()};
    std::vector<TokenId> local_prefix = {local_vocab.bos()};
    for (const auto& w : words) {
      remote_prefix.push_back(remote_vocab.lookup(w));
      local_prefix.push_back(local_vocab.lookup(w));
    }
    const auto remote = c.next(source, remote_prefix);
    const auto local = server.local().next_distribution(source, local_prefix);
    std::map<std::string, double> expected;
    for (const auto& e : local.entries) expected[local_vocab.surface(e.id)] = e.logprob;
    for (const auto& e : remote.entries) {
      EXPECT_NEAR(e.logprob, expected.at(remote_vocab.surface(e.id)), 1e-12);
    }
  }
}

TEST(Wire, EmbedRoundTrip) {
  LiveServer server;
  auto& c = server.client();
  const std::vector<std::string> tokens = {"cat", "Dog"};
  const auto vecs = c.embed(tokens);
  ASSERT_EQ(vecs.size(), 2u);
  EXPECT_EQ(vecs, server.embedder().embed(tokens));
  RemoteEmbeddingProvider provider(server.shared(), 256);
  EXPECT_EQ(provider.embed(tokens), vecs);
}

TEST(Wire, RemoteBeamDecodeMatchesLocal) {
  LiveServer server(kDefaultTopK);
  RemoteLanguageModel remote(server.shared());
  DecodeParams params;
  params.blocking = BlockingMode::kOff;
  params.max_length = 8;
  const auto source = tokenize("the cat sat");
  const auto a = decode(remote, source, TokenMask(), params);
  const auto b = decode(server.local(), source, TokenMask(), params);
  ASSERT_FALSE(a.empty());
  const auto words = [](const Hypothesis& h, const Vocabulary& v) {
    std::vector<std::string> out;
    for (TokenId id : h.tokens) out.push_back(v.surface(id));
    return out;
  };
  EXPECT_EQ(words(a[0], remote.vocabulary()), words(b[0], server.local().vocabulary()));
  EXPECT_NEAR(a[0].cum_logprob, b[0].cum_logprob, 1e-9);
}

TEST(Wire, ServerAnswersMalformedRecordsAndStaysUp) {
  LiveServer server;
  auto [client, srv] = make_channel_pair();
  NGramLM& lm = server.local();
  std::thread t([&, s = srv.get()] { serve(lm, nullptr, *s); });
  client->write_line("this is not json");
  auto reply = json::parse(client->read_line(2s));
  EXPECT_EQ(reply["type"], "error");
  client->write_line(R"({"type":"hello","version":7})");
  reply = json::parse(client->read_line(2s));
  EXPECT_EQ(reply["type"], "error");
  client->write_line(R"({"type":"embed","id":3,"tokens":["a"]})");
  reply = json::parse(client->read_line(2s));
  EXPECT_EQ(reply["type"], "error");
  EXPECT_EQ(reply["id"], 3);
  client->write_line(R"({"type":"next","id":4,"source":["the"],"prefix":["nonexistent-word"]})");
  reply = json::parse(client->read_line(2s));
  EXPECT_EQ(reply["id"], 4);
  client->write_line(R"({"type":"hello","version":1})");
  reply = json::parse(client->read_line(2s));
  EXPECT_EQ(reply["type"], "ack");
  client->close();
  t.join();
}

// A scripted peer: answers the handshake, then hands each request to `reply`.
// Returning an empty string closes the stream without answering.
class FakeServer {
 public:
  using Reply = std::function<std::string(const json& request)>;

  FakeServer(json ack, Reply reply) {
    auto [client, server] = make_channel_pair();
    client_end_ = std::move(client);
    server_end_ = std::move(server);
    thread_ = std::thread([this, ack = std::move(ack), reply = std::move(reply)] {
      std::string line;
      while (server_end_->try_read_line(line)) {
        const auto request = json::parse(line);
        if (request["type"] == "hello") {
          server_end_->write_line(ack.dump());
          continue;
        }
        const auto out = reply(request);
        if (out.empty()) break;
        if (out != "-") server_end_->write_line(out);
      }
      server_end_->close();
    });
  }
  ~FakeServer() {
    if (client_end_) client_end_->close();
    thread_.join();
  }
  std::unique_ptr<LineChannel> take() { return std::move(client_end_); }

 private:
  std::unique_ptr<FdChannel> client_end_;
  std::unique_ptr<FdChannel> server_end_;
  std::thread thread_;
};

json small_ack(int top_k = 4) {
  return json{{"type", "ack"}, {"version", 1}, {"top_k", top_k}, {"vocab", {"<s>", "</s>", "<unk>", "a", "b"}}};
}

std::string dist(const json& req, json tokens, json logprobs) {
  return json{{"type", "dist"}, {"id", req["id"]}, {"tokens", tokens}, {"logprobs", logprobs}}.dump();
}

NextTokenDistribution ask(WireClient& c) {
  const auto source = tokenize("a b");
  const std::vector<TokenId> prefix = {c.vocabulary().bos()};
  return c.next(source, prefix);
}

template <typename E>
void expect_error(const std::function<void()>& fn, const std::string& fragment) {
  try {
    fn();
    ADD_FAILURE() << "no exception, expected '" << fragment << "'";
  } catch (const E& e) {
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

TEST(WireFaults, WellFormedFakeAccepted) {
  FakeServer fake(small_ack(), [](const json& r) { return dist(r, {"a", "</s>"}, {-0.1, -2.4}); });
  WireClient c(fake.take(), 2s);
  const auto d = ask(c);
  ASSERT_EQ(d.entries.size(), 2u);
  EXPECT_EQ(c.vocabulary().surface(d.entries[0].id), "a");
}

TEST(WireFaults, PrefixOmitsBos) {
  json seen;
  FakeServer fake(small_ack(), [&](const json& r) {
    seen = r;
    return dist(r, {"</s>"}, {0.0});
  });
  WireClient c(fake.take(), 2s);
  const auto source = tokenize("a b");
  const std::vector<TokenId> prefix = {c.vocabulary().bos(), c.vocabulary().lookup("a")};
  c.next(source, prefix);
  EXPECT_EQ(seen["prefix"], json::array({"a"}));
  EXPECT_EQ(seen["source"], json::array({"a", "b"}));
}

TEST(WireFaults, NonFiniteLogprob) {
  FakeServer fake(small_ack(), [](const json& r) { return dist(r, {"a"}, {nullptr}); });
  WireClient c(fake.take(), 2s);
  expect_error<ProtocolError>([&] { ask(c); }, "non-finite");
}

TEST(WireFaults, NanLiteralIsMalformed) {
  FakeServer fake(small_ack(), [](const json& r) {
    return R"({"type":"dist","id":)" + r["id"].dump() + R"(,"tokens":["a"],"logprobs":[NaN]})";
  });
  WireClient c(fake.take(), 2s);
  EXPECT_THROW(ask(c), ProtocolError);
}

TEST(WireFaults, TruncatedArrays) {
  FakeServer fake(small_ack(), [](const json& r) { return dist(r, {"a", "b"}, {-0.5}); });
  WireClient c(fake.take(), 2s);
  expect_error<ProtocolError>([&] { ask(c); }, "length mismatch");
}

TEST(WireFaults, UnknownToken) {
  FakeServer fake(small_ack(), [](const json& r) { return dist(r, {"zebra"}, {-0.5}); });
  WireClient c(fake.take(), 2s);
  expect_error<ProtocolError>([&] { ask(c); }, "not in advertised vocab");
}

TEST(WireFaults, IncreasingLogprobs) {
  FakeServer fake(small_ack(), [](const json& r) { return dist(r, {"a", "b"}, {-2.0, -0.5}); });
  WireClient c(fake.take(), 2s);
  EXPECT_THROW(ask(c), ProtocolError);
}

TEST(WireFaults, LongerThanTopK) {
  FakeServer fake(small_ack(1), [](const json& r) { return dist(r, {"a", "b"}, {-0.5, -1.0}); });
  WireClient c(fake.take(), 2s);
  expect_error<ProtocolError>([&] { ask(c); }, "top_k");
}

TEST(WireFaults, WrongId) {
  FakeServer fake(small_ack(), [](const json& r) {
    json bad = r;
    bad["id"] = r["id"].get<int>() + 100;
    return dist(bad, {"a"}, {-0.5});
  });
  WireClient c(fake.take(), 2s);
  expect_error<ProtocolError>([&] { ask(c); }, "id");
}

TEST(WireFaults, ErrorRecord) {
  FakeServer fake(small_ack(), [](const json& r) {
    return json{{"type", "error"}, {"id", r["id"]}, {"message", "model exploded"}}.dump();
  });
  WireClient c(fake.take(), 2s);
  expect_error<BackendError>([&] { ask(c); }, "model exploded");
}

TEST(WireFaults, ClosedMidRequest) {
  FakeServer fake(small_ack(), [](const json&) { return std::string(); });
  WireClient c(fake.take(), 2s);
  EXPECT_THROW(ask(c), TransportError);
  // The connection is unusable afterwards.
  EXPECT_THROW(ask(c), TransportError);
}

TEST(WireFaults, Timeout) {
  FakeServer fake(small_ack(), [](const json&) { return std::string("-"); });
  WireClient c(fake.take(), 100ms);
  const auto t0 = std::chrono::steady_clock::now();
  expect_error<TransportError>([&] { ask(c); }, "timed out");
  EXPECT_LT(std::chrono::steady_clock::now() - t0, 2s);
}

TEST(WireFaults, HandshakeVersionMismatch) {
  auto ack = small_ack();
  ack["version"] = 2;
  FakeServer fake(ack, [](const json&) { return std::string(); });
  expect_error<ProtocolError>([&] { WireClient c(fake.take(), 2s); }, "version");
}

TEST(WireFaults, HandshakeWithoutEos) {
  auto ack = small_ack();
  ack["vocab"] = {"<s>", "a"};
  FakeServer fake(ack, [](const json&) { return std::string(); });
  expect_error<ProtocolError>([&] { WireClient c(fake.take(), 2s); }, "</s>");
}

TEST(WireFaults, EmbedDimensionMismatch) {
  FakeServer fake(small_ack(), [](const json& r) {
    return json{{"type", "vecs"}, {"id", r["id"]}, {"dim", 3}, {"vectors", {{1.0, 0.0}}}}.dump();
  });
  WireClient c(fake.take(), 2s);
  const std::vector<std::string> tokens = {"a"};
  EXPECT_THROW(c.embed(tokens), ProtocolError);
}

TEST(WireFaults, EngineAbortsFailedDecodesAndContinues) {
  // Answers a handful of requests, then hangs up.
  int answered = 0;
  FakeServer fake(small_ack(), [&](const json& r) {
    if (++answered > 3) return std::string();
    return dist(r, {"b", "a", "</s>"}, {-0.2, -1.0, -3.0});
  });
  RemoteLanguageModel lm(std::make_shared<WireClient>(fake.take(), 2s));
  DecodeParams params;
  params.num_dictionaries = 3;
  params.max_length = 6;
  GenerationResult result;
  ASSERT_NO_THROW(result = generate_candidates(lm, tokenize("a b a b"), params, 1));
  EXPECT_EQ(result.decodes, 3u);
  EXPECT_GE(result.failed_decodes, 1u);
  EXPECT_FALSE(result.errors.empty());
}

TEST(Endpoint, RejectsUnknownScheme) {
  EXPECT_THROW(open_endpoint("carrier-pigeon:home"), ConfigError);
  EXPECT_THROW(open_endpoint("tcp:nohostport"), ConfigError);
}

TEST(Endpoint, ExecTalksToChildProcess) {
  auto channel = open_endpoint("exec:printf '%s\\n' '{\"type\":\"ack\",\"version\":1,\"top_k\":2,\"vocab\":[\"</s>\",\"x\"]}'; cat >/dev/null");
  WireClient c(std::move(channel), 5s);
  EXPECT_EQ(c.top_k(), 2u);
  EXPECT_TRUE(c.vocabulary().contains("x"));
}

}  // namespace
}  // namespace parablock
