#include "parablock/ngram_lm.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "parablock/error.hpp"

namespace parablock {

namespace {

constexpr std::string_view kHeader = "parablock-ngram 1";

}  // namespace

std::size_t NGramLM::KeyHash::operator()(const std::vector<TokenId>& key) const noexcept {
  std::size_t h = 0xcbf29ce484222325ULL;
  for (TokenId id : key) {
    h ^= id;
    h *= 0x100000001b3ULL;
  }
  return h;
}

NGramLM::NGramLM(Vocabulary vocab, int order, double k)
    : vocab_(std::move(vocab)), order_(order), k_(k) {
  if (order < 1) throw ConfigError("n-gram order must be >= 1");
  if (!(k > 0.0)) throw ConfigError("smoothing constant k must be > 0");
  finalize();
}

void NGramLM::finalize() {
  predictable_.clear();
  for (TokenId id = 0; id < vocab_.size(); ++id) {
    if (id != vocab_.bos() && id != vocab_.unk()) predictable_.push_back(id);
  }
}

std::vector<TokenId> NGramLM::context_of(std::span<const TokenId> prefix) const {
  const std::size_t width = static_cast<std::size_t>(order_ - 1);
  std::vector<TokenId> ctx(width, vocab_.bos());
  const std::size_t take = std::min(width, prefix.size());
  std::copy(prefix.end() - static_cast<std::ptrdiff_t>(take), prefix.end(),
            ctx.end() - static_cast<std::ptrdiff_t>(take));
  return ctx;
}

void NGramLM::add_sentence(std::span<const TokenId> ids) {
  std::vector<TokenId> history{vocab_.bos()};
  for (std::size_t i = 0; i <= ids.size(); ++i) {
    const TokenId word = i < ids.size() ? ids[i] : vocab_.eos();
    auto& stats = contexts_[context_of(history)];
    ++stats.total;
    ++stats.successors[word];
    history.push_back(word);
  }
}

double NGramLM::probability(std::span<const TokenId> context, TokenId word) const {
  const double denom_extra = k_ * static_cast<double>(predictable_.size());
  auto it = contexts_.find(context_of(context));
  if (it == contexts_.end()) return k_ / denom_extra;
  const auto& stats = it->second;
  auto w = stats.successors.find(word);
  const double c = w == stats.successors.end() ? 0.0 : static_cast<double>(w->second);
  return (c + k_) / (static_cast<double>(stats.total) + denom_extra);
}

NextTokenDistribution NGramLM::next_distribution(const SourceSequence& /*source*/,
                                                 std::span<const TokenId> prefix) {
  return distribution(prefix);
}

NextTokenDistribution NGramLM::distribution(std::span<const TokenId> prefix) const {
  NextTokenDistribution dist;
  dist.coverage = NextTokenDistribution::Coverage::kDense;
  dist.entries.reserve(predictable_.size());

  const double v = static_cast<double>(predictable_.size());
  auto it = contexts_.find(context_of(prefix));
  const ContextStats* stats = it == contexts_.end() ? nullptr : &it->second;
  const double denom = (stats ? static_cast<double>(stats->total) : 0.0) + k_ * v;
  const double base = std::log(k_ / denom);
  for (TokenId id : predictable_) dist.entries.push_back({id, base});
  if (stats) {
    // predictable_ is every id except BOS/UNK in increasing order.
    for (auto& entry : dist.entries) {
      auto w = stats->successors.find(entry.id);
      if (w != stats->successors.end()) {
        entry.logprob = std::log((static_cast<double>(w->second) + k_) / denom);
      }
    }
  }
  return dist;
}

std::uint64_t NGramLM::count(std::span<const TokenId> ngram) const {
  if (ngram.empty() || ngram.size() > static_cast<std::size_t>(order_)) return 0;
  auto it = contexts_.find(context_of(ngram.first(ngram.size() - 1)));
  if (it == contexts_.end()) return 0;
  // Only full-width contexts are stored; a shorter span is treated as
  // BOS-padded history.
  auto w = it->second.successors.find(ngram.back());
  return w == it->second.successors.end() ? 0 : w->second;
}

std::uint64_t NGramLM::context_count(std::span<const TokenId> context) const {
  auto it = contexts_.find(context_of(context));
  return it == contexts_.end() ? 0 : it->second.total;
}

void NGramLM::save(std::ostream& out) const {
  out << kHeader << '\n';
  std::ostringstream k;
  k.precision(17);
  k << k_;
  out << "order " << order_ << '\n' << "k " << k.str() << '\n';
  out << "vocab " << vocab_.size() << '\n';
  for (const auto& s : vocab_.surfaces()) out << s << '\n';

  std::vector<const std::pair<const std::vector<TokenId>, ContextStats>*> sorted;
  for (const auto& kv : contexts_) sorted.push_back(&kv);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->first < b->first; });
  std::size_t lines = 0;
  for (auto* kv : sorted) lines += kv->second.successors.size();
  out << "ngrams " << lines << '\n';
  for (auto* kv : sorted) {
    std::vector<std::pair<TokenId, std::uint64_t>> succ(kv->second.successors.begin(),
                                                         kv->second.successors.end());
    std::sort(succ.begin(), succ.end());
    for (const auto& [word, c] : succ) {
      for (std::size_t i = 0; i < kv->first.size(); ++i) out << (i ? " " : "") << kv->first[i];
      out << '\t' << word << '\t' << c << '\n';
    }
  }
}

bool NGramLM::looks_serialized(std::istream& in) {
  const auto pos = in.tellg();
  std::string line;
  const bool ok = static_cast<bool>(std::getline(in, line)) && line == kHeader;
  in.clear();
  in.seekg(pos);
  return ok;
}

NGramLM NGramLM::load(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  const auto next = [&]() -> std::string& {
    if (!std::getline(in, line)) throw FormatError("truncated n-gram model", lineno + 1);
    ++lineno;
    return line;
  };
  if (next() != kHeader) throw FormatError("not a parablock n-gram model", lineno);

  int order = 0;
  double k = 0.0;
  std::size_t vocab_size = 0;
  std::string tag;
  {
    std::istringstream s(next());
    if (!(s >> tag >> order) || tag != "order") throw FormatError("expected order", lineno);
  }
  {
    std::istringstream s(next());
    if (!(s >> tag >> k) || tag != "k") throw FormatError("expected k", lineno);
  }
  {
    std::istringstream s(next());
    if (!(s >> tag >> vocab_size) || tag != "vocab") throw FormatError("expected vocab", lineno);
  }
  std::vector<std::string> surfaces;
  surfaces.reserve(vocab_size);
  for (std::size_t i = 0; i < vocab_size; ++i) surfaces.push_back(next());

  NGramLM lm(Vocabulary::from_list(surfaces), order, k);
  std::size_t lines = 0;
  {
    std::istringstream s(next());
    if (!(s >> tag >> lines) || tag != "ngrams") throw FormatError("expected ngrams", lineno);
  }
  for (std::size_t i = 0; i < lines; ++i) {
    std::istringstream s(next());
    std::string ctx_field, word_field, count_field;
    if (!std::getline(s, ctx_field, '\t') || !std::getline(s, word_field, '\t') ||
        !std::getline(s, count_field)) {
      throw FormatError("malformed n-gram row", lineno);
    }
    std::vector<TokenId> ctx;
    std::istringstream cs(ctx_field);
    TokenId id = 0;
    while (cs >> id) ctx.push_back(id);
    if (ctx.size() != static_cast<std::size_t>(order - 1)) {
      throw FormatError("context width does not match order", lineno);
    }
    const auto word = static_cast<TokenId>(std::stoul(word_field));
    const auto c = static_cast<std::uint64_t>(std::stoull(count_field));
    if (word >= lm.vocab_.size()) throw FormatError("token id out of range", lineno);
    auto& stats = lm.contexts_[ctx];
    stats.total += c;
    stats.successors[word] += c;
  }
  return lm;
}

NGramLM train_ngram(std::span<const std::string> corpus, int order, double k,
                    std::span<const std::string> extra_vocabulary) {
  if (corpus.empty()) throw ConfigError("cannot train an n-gram model on an empty corpus");
  std::vector<SourceSequence> sentences;
  sentences.reserve(corpus.size());
  Vocabulary vocab;
  for (const auto& line : corpus) {
    sentences.push_back(tokenize(line));
    vocab.add_all(sentences.back());
  }
  for (const auto& s : extra_vocabulary) vocab.add(s);

  NGramLM lm(std::move(vocab), order, k);
  std::vector<TokenId> ids;
  for (auto& sentence : sentences) {
    ids.clear();
    for (const auto& t : sentence) ids.push_back(lm.vocab_.lookup(t.surface));
    lm.add_sentence(ids);
  }
  return lm;
}

CopyEchoLM::CopyEchoLM(std::shared_ptr<const NGramLM> background, double lambda)
    : background_(std::move(background)), lambda_(lambda) {
  if (!background_) throw ConfigError("copy-echo backend needs a background model");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("copy weight must lie in [0, 1]");
}

CopyEchoLM make_copy_echo(std::shared_ptr<const NGramLM> background, double lambda) {
  return CopyEchoLM(std::move(background), lambda);
}

TokenId CopyEchoLM::pointed(const SourceSequence& source, std::span<const TokenId> prefix) const {
  const Vocabulary& vocab = background_->vocabulary();
  std::vector<TokenId> ids;
  ids.reserve(source.size());
  for (const auto& t : source) {
    const TokenId id = vocab.lookup(t.surface);
    if (id != vocab.unk()) ids.push_back(id);
  }
  std::size_t pointer = 0;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (i == 0 && prefix[i] == vocab.bos()) continue;
    if (pointer < ids.size() && prefix[i] == ids[pointer]) ++pointer;
  }
  return pointer < ids.size() ? ids[pointer] : vocab.eos();
}

NextTokenDistribution CopyEchoLM::next_distribution(const SourceSequence& source,
                                                    std::span<const TokenId> prefix) {
  auto dist = background_->distribution(prefix);
  if (lambda_ == 0.0) return dist;
  const TokenId target = pointed(source, prefix);
  for (auto& e : dist.entries) {
    const double p = (1.0 - lambda_) * std::exp(e.logprob) + (e.id == target ? lambda_ : 0.0);
    e.logprob = std::log(p);
  }
  return dist;
}

}  // namespace parablock
