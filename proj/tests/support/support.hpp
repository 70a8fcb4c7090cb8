#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "parablock/block_dictionary.hpp"
#include "parablock/decoder.hpp"
#include "parablock/language_model.hpp"
#include "parablock/ngram_lm.hpp"
#include "parablock/random.hpp"

namespace parablock::testing {

std::string data_path(const std::string& name);
std::string fixture_path(const std::string& name);

// "w0" .. "w{n-1}".
std::vector<std::string> synthetic_words(std::size_t n);

// Space-joined sentence of 1..max_len words drawn uniformly from `words`.
std::string random_sentence(Rng& rng, const std::vector<std::string>& words, std::size_t max_len);

// Blocked surface forms after `last`, straight from the dictionary
// definition: the union of expansions of active entries whose trigger is the
// normalized form of `last`.
std::set<std::string> blocked_forms_after(const ActiveBlockDictionary& active, const std::string& last);

struct Violation {
  std::size_t position;
  std::string trigger;
  std::string emitted;
};

// Every adjacent pair (G_j, G_{j+1}) of the hypothesis, checked against the
// active dictionary. BOS is never a trigger; EOS never counts as emitted.
std::vector<Violation> blocking_violations(const Hypothesis& hyp, const Vocabulary& vocab,
                                           const ActiveBlockDictionary& active);

// Recomputes the blocked ids recorded in the audit trail and checks the
// chosen token is not among them (fallback steps excepted).
bool audit_consistent(const Hypothesis& hyp);

struct ScoredSequence {
  std::vector<TokenId> tokens;  // BOS first
  double logprob = 0.0;
  double score = 0.0;
};

// Enumerates every token sequence of length <= max_length (terminated by EOS
// or by reaching max_length) under per-step masking by `blocked_after`,
// renormalizing with a plain sum of probabilities. Sorted by score
// descending (length-normalized or not), then token ids.
using BlockedAfter = std::function<std::set<std::string>(const std::string& last_surface)>;
std::vector<ScoredSequence> enumerate_sequences(LanguageModel& lm, const SourceSequence& source,
                                                const BlockedAfter& blocked_after, int max_length,
                                                bool length_normalize);

// Token-level n-gram model over `corpus`.
std::shared_ptr<const NGramLM> train(const std::vector<std::string>& corpus, int order, double k,
                                     const std::vector<std::string>& extra = {});

std::vector<std::string> surfaces_of(const SourceSequence& seq);

}  // namespace parablock::testing

namespace parablock::testing {

struct CommandResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs the parablock CLI with `args` through /bin/sh, feeding `input` on
// stdin. Arguments are single-quoted.
CommandResult run_cli(const std::vector<std::string>& args, const std::string& input = "");

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace parablock::testing
