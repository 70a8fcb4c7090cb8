#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "parablock/language_model.hpp"

namespace parablock {

// Add-k smoothed n-gram model:
//   P(w | ctx) = (count(ctx w) + k) / (count(ctx) + k V)
// where V counts every vocabulary entry except BOS and UNK (EOS included)
// and count(ctx) is the number of times ctx was followed by anything.
// Histories are left-padded with n-1 BOS tokens. Immutable once built.
class NGramLM final : public LanguageModel {
 public:
  NGramLM(Vocabulary vocab, int order, double k);

  NextTokenDistribution next_distribution(const SourceSequence& source,
                                          std::span<const TokenId> prefix) override;
  const Vocabulary& vocabulary() const override { return vocab_; }
  // Same as next_distribution; the source is ignored.
  NextTokenDistribution distribution(std::span<const TokenId> prefix) const;

  // Raw counts, mainly for tests. `ngram` excludes padding conventions: pass
  // exactly the ids as stored (BOS padding included where applicable).
  std::uint64_t count(std::span<const TokenId> ngram) const;
  std::uint64_t context_count(std::span<const TokenId> context) const;

  double probability(std::span<const TokenId> context, TokenId word) const;

  int order() const { return order_; }
  double smoothing() const { return k_; }
  // Number of predictable types V.
  std::size_t predictable_size() const { return predictable_.size(); }
  const std::vector<TokenId>& predictable() const { return predictable_; }

  void save(std::ostream& out) const;
  static NGramLM load(std::istream& in);
  // True if the stream starts with the serialized-model header.
  static bool looks_serialized(std::istream& in);

 private:
  friend NGramLM train_ngram(std::span<const std::string>, int, double,
                             std::span<const std::string>);

  struct KeyHash {
    std::size_t operator()(const std::vector<TokenId>& key) const noexcept;
  };
  struct ContextStats {
    std::uint64_t total = 0;
    std::unordered_map<TokenId, std::uint64_t> successors;
  };

  std::vector<TokenId> context_of(std::span<const TokenId> prefix) const;
  void add_sentence(std::span<const TokenId> ids);
  void finalize();

  Vocabulary vocab_;
  int order_;
  double k_;
  std::vector<TokenId> predictable_;
  std::unordered_map<std::vector<TokenId>, ContextStats, KeyHash> contexts_;
};

// Counts n-grams over tokenized sentences. Every surface seen is added to
// the vocabulary, as are any `extra_vocabulary` tokens (the per-run union
// with decode-time sources).
NGramLM train_ngram(std::span<const std::string> corpus, int order, double k,
                    std::span<const std::string> extra_vocabulary = {});

// Copy-biased backend:
//   P(t) = lambda [t = next unconsumed source token] + (1 - lambda) P_bg(t)
// The pointer starts at the first source token and advances each time the
// emitted token equals the pointed one; once the source is consumed the
// pointer targets EOS. The pointer is replayed from the prefix, so the
// backend holds no mutable state.
class CopyEchoLM final : public LanguageModel {
 public:
  // Throws ConfigError unless 0 <= lambda <= 1.
  CopyEchoLM(std::shared_ptr<const NGramLM> background, double lambda);

  NextTokenDistribution next_distribution(const SourceSequence& source,
                                          std::span<const TokenId> prefix) override;
  const Vocabulary& vocabulary() const override { return background_->vocabulary(); }

  double lambda() const { return lambda_; }
  // Id the copy mass currently points at, given source and prefix.
  TokenId pointed(const SourceSequence& source, std::span<const TokenId> prefix) const;

 private:
  std::shared_ptr<const NGramLM> background_;
  double lambda_;
};

CopyEchoLM make_copy_echo(std::shared_ptr<const NGramLM> background, double lambda);

}  // namespace parablock
