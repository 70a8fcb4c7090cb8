#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "parablock/block_dictionary.hpp"
#include "parablock/candidate.hpp"
#include "parablock/language_model.hpp"
#include "parablock/random.hpp"

namespace parablock {

enum class DecodeMode { kGreedy, kBeam, kTopK, kTopP };
enum class BlockingMode { kDynamic, kStatic, kOff };

struct DecodeParams {
  int beam_width = 4;
  int keep_per_dictionary = 2;
  int num_dictionaries = 10;
  double p = 0.5;
  int max_length = 64;
  DecodeMode mode = DecodeMode::kBeam;
  int top_k = 10;      // kTopK
  double top_p = 0.9;  // kTopP
  BlockingMode blocking = BlockingMode::kDynamic;
  // Rank finished beams by cum_logprob / length instead of cum_logprob.
  bool length_normalize = true;

  // Throws ConfigError on out-of-range values.
  void validate() const;
};

// One entry of a hypothesis' audit trail: the mask that was in force when
// the token after `after` was chosen.
struct AuditStep {
  TokenId after = 0;
  std::shared_ptr<const std::vector<TokenId>> blocked;  // sorted ids
  bool fallback = false;  // every candidate was masked; EOS was forced
};

struct Hypothesis {
  std::vector<TokenId> tokens;  // tokens[0] is BOS
  double cum_logprob = 0.0;
  bool finished = false;        // EOS emitted
  std::vector<AuditStep> audit; // audit[j] governs tokens[j + 1]

  // Tokens after BOS (EOS included when present).
  std::size_t length() const { return tokens.size() - 1; }
};

// Lookup structures over a backend vocabulary.
class VocabIndex {
 public:
  explicit VocabIndex(const Vocabulary& vocab);

  const Vocabulary& vocabulary() const { return *vocab_; }
  const std::string& norm(TokenId id) const { return norms_.at(id); }
  // Ids whose surface normalizes to `key`.
  std::span<const TokenId> with_norm(const std::string& key) const;
  // Ids of the given surface forms that exist in the vocabulary. Never
  // contains EOS.
  std::vector<TokenId> ids_of(const std::set<std::string>& forms) const;

 private:
  const Vocabulary* vocab_;
  std::vector<std::string> norms_;
  std::unordered_map<std::string, std::vector<TokenId>> by_norm_;
};

// Which ids are masked at each step, as a function of the previous token.
class TokenMask {
 public:
  // No blocking.
  TokenMask();
  // Dynamic Blocking with an active dictionary.
  TokenMask(const VocabIndex& index, const ActiveBlockDictionary& active);
  // The same forms at every step (Static Blocking).
  TokenMask(const VocabIndex& index, const std::set<std::string>& forms);

  const std::shared_ptr<const std::vector<TokenId>>& blocked_after(TokenId last) const;
  bool empty() const { return triggers_.empty() && always_->empty(); }

 private:
  std::unordered_map<TokenId, std::shared_ptr<const std::vector<TokenId>>> triggers_;
  std::shared_ptr<const std::vector<TokenId>> always_;
};

// Zeroes the probability of `blocked` ids (sorted) and renormalizes the
// survivors. Entries with zero probability are dropped. Returns an empty
// vector if nothing survives.
std::vector<ScoredToken> mask_and_renormalize(const NextTokenDistribution& dist,
                                              std::span<const TokenId> blocked);

// Extends one hypothesis by one token: queries the backend, applies the mask
// derived from the last token, renormalizes, then extends per mode (argmax
// for greedy, every survivor for beam, one sample for top-k/top-p). If the
// mask removes every candidate, EOS is emitted with log-probability 0.
std::vector<Hypothesis> step(LanguageModel& lm, const SourceSequence& source, const Hypothesis& hyp,
                             const TokenMask& mask, const DecodeParams& params, Rng* rng = nullptr);

// cum_logprob / length (or the raw sum when length normalization is off).
double score(const Hypothesis& hyp, bool length_normalize = true);

// Orders by score descending, then token ids ascending.
bool ranks_before(const Hypothesis& a, const Hypothesis& b, bool length_normalize = true);

// Runs a full decode; returns at most beam_width hypotheses sorted by
// ranks_before (greedy returns one; sampling modes return beam_width draws).
std::vector<Hypothesis> decode(LanguageModel& lm, const SourceSequence& source, const TokenMask& mask,
                               const DecodeParams& params, Rng* rng = nullptr);

struct BlockingResources {
  const WordSet* closed_class = nullptr;       // null: nothing excluded
  const MorphologyProvider* morph = nullptr;   // null: identity
};

struct GenerationResult {
  std::vector<Candidate> candidates;
  std::size_t decodes = 0;
  std::size_t failed_decodes = 0;
  std::vector<std::string> errors;

  // Nothing survived deduplication and source filtering.
  bool no_paraphrase() const { return candidates.empty(); }
};

// Builds the block dictionary once, samples num_dictionaries active
// sub-dictionaries (dictionary d uses a stream forked from `seed` by d),
// decodes each, keeps the top keep_per_dictionary beams, pools them in
// (dictionary, rank) order, and removes duplicates and copies of the
// source. A backend failure abandons that decode only.
GenerationResult generate_candidates(LanguageModel& lm, const SourceSequence& source,
                                     const DecodeParams& params, std::uint64_t seed,
                                     const BlockingResources& resources = {});

}  // namespace parablock
