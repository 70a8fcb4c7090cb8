#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "parablock/token.hpp"

namespace parablock {

struct ScoredToken {
  TokenId id;
  double logprob;
};

// Next-token log-probabilities returned by a backend. Dense distributions
// list every predictable token of the backend's vocabulary in id order;
// sparse ones list the top K in nonincreasing log-probability order.
struct NextTokenDistribution {
  enum class Coverage { kDense, kSparse };

  std::vector<ScoredToken> entries;
  Coverage coverage = Coverage::kDense;
  std::size_t top_k = 0;  // recorded for sparse coverage

  bool dense() const { return coverage == Coverage::kDense; }
  // Sum of exp(logprob) over all entries.
  double total_probability() const;
  // Throws ProtocolError if a logprob is NaN or +inf, or sparse ordering is
  // violated.
  void validate() const;
};

// Any next-token model. Conditioned on the whole source as well as the
// prefix so that seq2seq and decoder-only models share one contract.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;

  // `prefix` starts with vocabulary().bos().
  virtual NextTokenDistribution next_distribution(const SourceSequence& source,
                                                  std::span<const TokenId> prefix) = 0;

  virtual const Vocabulary& vocabulary() const = 0;
};

}  // namespace parablock
