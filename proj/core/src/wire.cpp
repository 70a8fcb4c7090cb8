#include "parablock/wire.hpp"

#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <json.hpp>

#include "parablock/error.hpp"

namespace parablock {

using json = nlohmann::json;

namespace {

std::string errno_message(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

}  // namespace

FdChannel::FdChannel(int read_fd, int write_fd, bool owns)
    : read_fd_(read_fd), write_fd_(write_fd), owns_(owns) {}

FdChannel::~FdChannel() { close(); }

void FdChannel::close() {
  if (owns_) {
    if (read_fd_ >= 0) ::close(read_fd_);
    if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
  }
  read_fd_ = -1;
  write_fd_ = -1;
}

void FdChannel::write_line(std::string_view line) {
  if (write_fd_ < 0) throw TransportError("channel closed");
  std::string data(line);
  data.push_back('\n');
  std::size_t written = 0;
  while (written < data.size()) {
    const ssize_t n = ::send(write_fd_, data.data() + written, data.size() - written, MSG_NOSIGNAL);
    if (n < 0 && errno == ENOTSOCK) {
      const ssize_t m = ::write(write_fd_, data.data() + written, data.size() - written);
      if (m < 0) {
        if (errno == EINTR) continue;
        throw TransportError(errno_message("write failed"));
      }
      written += static_cast<std::size_t>(m);
      continue;
    }
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError(errno_message("send failed"));
    }
    written += static_cast<std::size_t>(n);
  }
}

long FdChannel::fill(int timeout_ms) {
  if (read_fd_ < 0) return 0;
  pollfd pfd{read_fd_, POLLIN, 0};
  for (;;) {
    const int ready = ::poll(&pfd, 1, timeout_ms);
    if (ready < 0 && errno == EINTR) continue;
    if (ready < 0) throw TransportError(errno_message("poll failed"));
    if (ready == 0) return -1;
    break;
  }
  char chunk[4096];
  for (;;) {
    const ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    if (n < 0) {
      if (errno == ECONNRESET) return 0;
      throw TransportError(errno_message("read failed"));
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
    return n;
  }
}

bool FdChannel::take_line(std::string& line) {
  const auto nl = buffer_.find('\n');
  if (nl == std::string::npos) return false;
  line.assign(buffer_, 0, nl);
  buffer_.erase(0, nl + 1);
  return true;
}

std::string FdChannel::read_line(std::chrono::milliseconds timeout) {
  std::string line;
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (!take_line(line)) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw TransportError("timed out waiting for response");
    const long n = fill(static_cast<int>(std::min<long long>(left.count(), 1 << 30)));
    if (n == 0) throw TransportError("stream closed by peer");
    if (n < 0) throw TransportError("timed out waiting for response");
  }
  return line;
}

bool FdChannel::try_read_line(std::string& line) {
  while (!take_line(line)) {
    if (fill(-1) == 0) {
      if (buffer_.empty()) return false;
      line = std::move(buffer_);
      buffer_.clear();
      return true;
    }
  }
  return true;
}

std::pair<std::unique_ptr<FdChannel>, std::unique_ptr<FdChannel>> make_channel_pair() {
  int fds[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0) {
    throw TransportError(errno_message("socketpair failed"));
  }
  return {std::make_unique<FdChannel>(fds[0], fds[0], true),
          std::make_unique<FdChannel>(fds[1], fds[1], true)};
}

namespace {

class ChildChannel final : public FdChannel {
 public:
  ChildChannel(int read_fd, int write_fd, pid_t pid) : FdChannel(read_fd, write_fd, true), pid_(pid) {}
  ~ChildChannel() override {
    close();
    int status = 0;
    // Give the child a moment to exit on EOF before terminating it.
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(pid_, &status, WNOHANG) == pid_) return;
      ::usleep(10000);
    }
    ::kill(pid_, SIGTERM);
    ::waitpid(pid_, &status, 0);
  }

 private:
  pid_t pid_;
};

std::unique_ptr<LineChannel> spawn(const std::string& command) {
  int to_child[2];
  int from_child[2];
  if (::pipe(to_child) != 0) throw TransportError(errno_message("pipe failed"));
  if (::pipe(from_child) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw TransportError(errno_message("pipe failed"));
  }
  const pid_t pid = ::fork();
  if (pid < 0) throw TransportError(errno_message("fork failed"));
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::close(to_child[0]);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(from_child[1]);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  return std::make_unique<ChildChannel>(from_child[0], to_child[1], pid);
}

std::unique_ptr<LineChannel> connect_tcp(const std::string& host, const std::string& port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (const int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0) {
    throw TransportError("cannot resolve " + host + ": " + ::gai_strerror(rc));
  }
  int fd = -1;
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw TransportError("cannot connect to " + host + ":" + port);
  return std::make_unique<FdChannel>(fd, fd, true);
}

}  // namespace

std::unique_ptr<LineChannel> open_endpoint(const std::string& endpoint) {
  if (endpoint.rfind("exec:", 0) == 0) return spawn(endpoint.substr(5));
  if (endpoint.rfind("tcp:", 0) == 0) {
    const std::string rest = endpoint.substr(4);
    const auto colon = rest.rfind(':');
    if (colon == std::string::npos) throw ConfigError("tcp endpoint needs HOST:PORT");
    return connect_tcp(rest.substr(0, colon), rest.substr(colon + 1));
  }
  throw ConfigError("unknown endpoint '" + endpoint + "' (expected tcp:HOST:PORT or exec:COMMAND)");
}

// ---------------------------------------------------------------------------
// Client

namespace {

json parse_record(const std::string& line) {
  json record = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (record.is_discarded() || !record.is_object()) {
    throw ProtocolError("malformed record: not a JSON object");
  }
  if (!record.contains("type") || !record["type"].is_string()) {
    throw ProtocolError("malformed record: missing type");
  }
  return record;
}

void check_error_record(const json& record) {
  if (record["type"] == "error") {
    throw BackendError("remote error: " + record.value("message", std::string("(no message)")));
  }
}

}  // namespace

WireClient::WireClient(std::unique_ptr<LineChannel> channel, std::chrono::milliseconds timeout)
    : channel_(std::move(channel)), timeout_(timeout) {
  channel_->write_line(json{{"type", "hello"}, {"version", kWireVersion}}.dump());
  const json ack = parse_record(channel_->read_line(timeout_));
  check_error_record(ack);
  if (ack["type"] != "ack") throw ProtocolError("expected ack record");
  if (!ack.contains("version") || !ack["version"].is_number_integer() ||
      ack["version"].get<int>() != kWireVersion) {
    throw ProtocolError("protocol version mismatch");
  }
  if (!ack.contains("top_k") || !ack["top_k"].is_number_unsigned() || ack["top_k"].get<std::size_t>() == 0) {
    throw ProtocolError("ack needs a positive top_k");
  }
  if (!ack.contains("vocab") || !ack["vocab"].is_array()) throw ProtocolError("ack needs a vocab array");
  top_k_ = ack["top_k"].get<std::size_t>();
  std::vector<std::string> surfaces;
  bool has_eos = false;
  for (const auto& v : ack["vocab"]) {
    if (!v.is_string()) throw ProtocolError("vocab entries must be strings");
    surfaces.push_back(v.get<std::string>());
    has_eos = has_eos || surfaces.back() == kEosSurface;
  }
  if (!has_eos) throw ProtocolError("advertised vocab lacks </s>");
  vocab_ = Vocabulary::from_list(surfaces);
}

std::string WireClient::roundtrip(const std::string& request, std::uint64_t id) {
  if (broken_) throw TransportError("connection previously failed");
  try {
    channel_->write_line(request);
    (void)id;
    return channel_->read_line(timeout_);
  } catch (const TransportError&) {
    // A timed-out or half-read response would desynchronize the stream.
    broken_ = true;
    throw;
  }
}

NextTokenDistribution WireClient::next(const SourceSequence& source, std::span<const TokenId> prefix) {
  std::lock_guard lock(mutex_);
  const std::uint64_t id = next_id_++;
  json request{{"type", "next"}, {"id", id}};
  json src = json::array();
  for (const auto& t : source) src.push_back(t.surface);
  json pre = json::array();
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (i == 0 && prefix[i] == vocab_.bos()) continue;
    pre.push_back(vocab_.surface(prefix[i]));
  }
  request["source"] = std::move(src);
  request["prefix"] = std::move(pre);

  const json response = parse_record(roundtrip(request.dump(), id));
  check_error_record(response);
  if (response["type"] != "dist") throw ProtocolError("expected dist record");
  if (!response.contains("id") || !response["id"].is_number_unsigned() ||
      response["id"].get<std::uint64_t>() != id) {
    throw ProtocolError("response id does not echo request");
  }
  if (!response.contains("tokens") || !response.contains("logprobs") ||
      !response["tokens"].is_array() || !response["logprobs"].is_array()) {
    throw ProtocolError("dist record needs tokens and logprobs arrays");
  }
  const auto& tokens = response["tokens"];
  const auto& logprobs = response["logprobs"];
  if (tokens.size() != logprobs.size()) throw ProtocolError("length mismatch between tokens and logprobs");
  if (tokens.size() > top_k_) throw ProtocolError("dist record longer than advertised top_k");

  NextTokenDistribution dist;
  dist.coverage = NextTokenDistribution::Coverage::kSparse;
  dist.top_k = top_k_;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!tokens[i].is_string()) throw ProtocolError("token entries must be strings");
    // JSON has no NaN/inf literals; nlohmann reads them as null.
    if (!logprobs[i].is_number()) throw ProtocolError("non-finite logprob");
    const auto surface = tokens[i].get<std::string>();
    if (!vocab_.contains(surface)) throw ProtocolError("token '" + surface + "' not in advertised vocab");
    dist.entries.push_back({vocab_.lookup(surface), logprobs[i].get<double>()});
  }
  dist.validate();
  return dist;
}

std::vector<Embedding> WireClient::embed(std::span<const std::string> tokens) {
  std::lock_guard lock(mutex_);
  const std::uint64_t id = next_id_++;
  json request{{"type", "embed"}, {"id", id}, {"tokens", json::array()}};
  for (const auto& t : tokens) request["tokens"].push_back(t);

  const json response = parse_record(roundtrip(request.dump(), id));
  check_error_record(response);
  if (response["type"] != "vecs") throw ProtocolError("expected vecs record");
  if (!response.contains("id") || !response["id"].is_number_unsigned() ||
      response["id"].get<std::uint64_t>() != id) {
    throw ProtocolError("response id does not echo request");
  }
  if (!response.contains("dim") || !response["dim"].is_number_unsigned() ||
      !response.contains("vectors") || !response["vectors"].is_array()) {
    throw ProtocolError("vecs record needs dim and vectors");
  }
  const auto dim = response["dim"].get<std::size_t>();
  const auto& vectors = response["vectors"];
  if (vectors.size() != tokens.size()) throw ProtocolError("length mismatch between tokens and vectors");
  std::vector<Embedding> out;
  out.reserve(vectors.size());
  for (const auto& v : vectors) {
    if (!v.is_array() || v.size() != dim) throw ProtocolError("vector length does not match dim");
    Embedding e;
    e.reserve(dim);
    for (const auto& x : v) {
      if (!x.is_number()) throw ProtocolError("non-finite vector component");
      e.push_back(x.get<double>());
    }
    out.push_back(std::move(e));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Server

namespace {

json error_record(const json& id, const std::string& message) {
  return json{{"type", "error"}, {"id", id.is_number_unsigned() ? id : json(0)}, {"message", message}};
}

std::vector<std::string> string_array(const json& record, const char* field) {
  if (!record.contains(field) || !record[field].is_array()) {
    throw UsageError(std::string("missing array field '") + field + "'");
  }
  std::vector<std::string> out;
  for (const auto& v : record[field]) {
    if (!v.is_string()) throw UsageError(std::string("field '") + field + "' must hold strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

json answer(LanguageModel& lm, const EmbeddingProvider* embedder, const ServeOptions& options,
            const json& record) {
  const std::string type = record["type"].get<std::string>();
  const json id = record.contains("id") ? record["id"] : json(0);
  const Vocabulary& vocab = lm.vocabulary();

  if (type == "hello") {
    if (record.value("version", -1) != kWireVersion) return error_record(id, "unsupported version");
    json v = json::array();
    for (const auto& s : vocab.surfaces()) v.push_back(s);
    return json{{"type", "ack"}, {"version", kWireVersion}, {"top_k", options.top_k}, {"vocab", v}};
  }
  if (type == "next") {
    SourceSequence source;
    for (auto& s : string_array(record, "source")) {
      Token t;
      t.norm = normalize(s);
      t.surface = std::move(s);
      t.space_before = !source.empty();
      source.push_back(std::move(t));
    }
    vocab.assign(source);
    std::vector<TokenId> prefix{vocab.bos()};
    for (const auto& s : string_array(record, "prefix")) prefix.push_back(vocab.lookup(s));

    auto dist = lm.next_distribution(source, prefix);
    auto entries = std::move(dist.entries);
    std::stable_sort(entries.begin(), entries.end(), [](const ScoredToken& a, const ScoredToken& b) {
      return a.logprob > b.logprob || (a.logprob == b.logprob && a.id < b.id);
    });
    json tokens = json::array();
    json logprobs = json::array();
    for (const auto& e : entries) {
      if (tokens.size() == options.top_k || !std::isfinite(e.logprob)) break;
      tokens.push_back(vocab.surface(e.id));
      logprobs.push_back(e.logprob);
    }
    return json{{"type", "dist"}, {"id", id}, {"tokens", tokens}, {"logprobs", logprobs}};
  }
  if (type == "embed") {
    if (!embedder) return error_record(id, "embeddings not available");
    const auto tokens = string_array(record, "tokens");
    json vectors = json::array();
    for (const auto& v : embedder->embed(tokens)) vectors.push_back(v);
    return json{{"type", "vecs"}, {"id", id}, {"dim", embedder->dimension()}, {"vectors", vectors}};
  }
  return error_record(id, "unknown record type '" + type + "'");
}

}  // namespace

void serve(LanguageModel& lm, const EmbeddingProvider* embedder, LineChannel& channel,
           const ServeOptions& options) {
  std::string line;
  while (channel.try_read_line(line)) {
    if (line.empty()) continue;
    json reply;
    json record = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (record.is_discarded() || !record.is_object() || !record.contains("type") ||
        !record["type"].is_string()) {
      reply = error_record(json(0), "malformed record");
    } else {
      try {
        reply = answer(lm, embedder, options, record);
      } catch (const std::exception& e) {
        reply = error_record(record.contains("id") ? record["id"] : json(0), e.what());
      }
    }
    channel.write_line(reply.dump());
  }
}

}  // namespace parablock
