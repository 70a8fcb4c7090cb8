#pragma once

// Newline-delimited JSON protocol for remote language-model and embedding
// backends. One record per line, UTF-8:
//
//   {"type":"hello","version":1}
//     -> {"type":"ack","version":1,"top_k":K,"vocab":[...]}
//   {"type":"next","id":N,"source":[...],"prefix":[...]}
//     -> {"type":"dist","id":N,"tokens":[...],"logprobs":[...]}
//   {"type":"embed","id":N,"tokens":[...]}
//     -> {"type":"vecs","id":N,"dim":d,"vectors":[[...],...]}
//   any request -> {"type":"error","id":N,"message":"..."}
//
// The prefix on the wire omits the implicit BOS. The advertised vocabulary
// must contain "</s>".

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <utility>

#include "parablock/embedding.hpp"
#include "parablock/language_model.hpp"

namespace parablock {

inline constexpr int kWireVersion = 1;
inline constexpr std::size_t kDefaultTopK = 64;

// A bidirectional line-oriented byte stream.
class LineChannel {
 public:
  virtual ~LineChannel() = default;
  virtual void write_line(std::string_view line) = 0;
  // Throws TransportError on end of stream or timeout.
  virtual std::string read_line(std::chrono::milliseconds timeout) = 0;
  // Returns false on clean end of stream. Blocks indefinitely.
  virtual bool try_read_line(std::string& line) = 0;
};

// Channel over a pair of POSIX file descriptors (pipe ends or a socket).
class FdChannel : public LineChannel {
 public:
  FdChannel(int read_fd, int write_fd, bool owns);
  ~FdChannel() override;
  FdChannel(const FdChannel&) = delete;
  FdChannel& operator=(const FdChannel&) = delete;

  void write_line(std::string_view line) override;
  std::string read_line(std::chrono::milliseconds timeout) override;
  bool try_read_line(std::string& line) override;

  // Closes both directions; the peer sees end of stream.
  void close();

 private:
  // -1 on timeout, 0 on EOF, >0 bytes appended to buffer_.
  long fill(int timeout_ms);
  bool take_line(std::string& line);

  int read_fd_;
  int write_fd_;
  bool owns_;
  std::string buffer_;
};

// Two connected in-process channels (socketpair).
std::pair<std::unique_ptr<FdChannel>, std::unique_ptr<FdChannel>> make_channel_pair();

// Opens "tcp:HOST:PORT" or "exec:SHELL COMMAND" (a child process speaking
// the protocol on its stdin/stdout).
std::unique_ptr<LineChannel> open_endpoint(const std::string& endpoint);

// Client side of the protocol: owns the connection, performs the handshake,
// serializes requests (one in flight per connection).
class WireClient {
 public:
  explicit WireClient(std::unique_ptr<LineChannel> channel,
                      std::chrono::milliseconds timeout = std::chrono::seconds(30));

  const Vocabulary& vocabulary() const { return vocab_; }
  std::size_t top_k() const { return top_k_; }

  NextTokenDistribution next(const SourceSequence& source, std::span<const TokenId> prefix);
  std::vector<Embedding> embed(std::span<const std::string> tokens);

 private:
  std::string roundtrip(const std::string& request, std::uint64_t id);

  std::unique_ptr<LineChannel> channel_;
  std::chrono::milliseconds timeout_;
  Vocabulary vocab_;
  std::size_t top_k_ = 0;
  std::uint64_t next_id_ = 1;
  bool broken_ = false;
  std::mutex mutex_;
};

class RemoteLanguageModel final : public LanguageModel {
 public:
  explicit RemoteLanguageModel(std::shared_ptr<WireClient> client) : client_(std::move(client)) {}

  NextTokenDistribution next_distribution(const SourceSequence& source,
                                          std::span<const TokenId> prefix) override {
    return client_->next(source, prefix);
  }
  const Vocabulary& vocabulary() const override { return client_->vocabulary(); }

 private:
  std::shared_ptr<WireClient> client_;
};

class RemoteEmbeddingProvider final : public EmbeddingProvider {
 public:
  RemoteEmbeddingProvider(std::shared_ptr<WireClient> client, std::size_t dimension)
      : client_(std::move(client)), dimension_(dimension) {}

  std::vector<Embedding> embed(std::span<const std::string> tokens) const override {
    return client_->embed(tokens);
  }
  std::size_t dimension() const override { return dimension_; }

 private:
  std::shared_ptr<WireClient> client_;
  std::size_t dimension_;
};

struct ServeOptions {
  std::size_t top_k = kDefaultTopK;
};

// Answers protocol records on `channel` until end of stream, using an
// in-process backend. Malformed records get an error record; the
// connection stays open. `embedder` may be null (embed requests then fail).
void serve(LanguageModel& lm, const EmbeddingProvider* embedder, LineChannel& channel,
           const ServeOptions& options = {});

}  // namespace parablock
