#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "parablock/morphology.hpp"
#include "parablock/token.hpp"

namespace parablock {

using WordSet = std::unordered_set<std::string>;

// Built-in English function words: pronouns, determiners, conjunctions,
// prepositions, auxiliaries and modals.
const WordSet& default_closed_class_words();

// One normalized word per line; blank lines and lines starting with '#'
// are skipped. Throws IoError if the file cannot be read.
WordSet load_word_list(const std::string& path);

struct BlockEntry {
  std::string trigger;  // normalized key of S_i
  std::string blocked;  // normalized key of S_{i+1}

  friend bool operator==(const BlockEntry&, const BlockEntry&) = default;
};

// Maps each source word to its immediate successor. A trigger that occurs
// several times keeps one entry per distinct successor.
class BlockDictionary {
 public:
  const std::vector<BlockEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  // Surface forms masked when `blocked_key` is blocked: its inflections and
  // their capitalized and upper-case variants.
  const std::set<std::string>& expansion(const std::string& blocked_key) const;

 private:
  friend BlockDictionary build_dictionary(const SourceSequence&, const WordSet&,
                                          const MorphologyProvider&);
  std::vector<BlockEntry> entries_;
  std::map<std::string, std::set<std::string>> expansions_;
};

// Entries come from adjacent word-initial pairs (S_i, S_{i+1}); pairs whose
// successor is closed-class or EOS are dropped. Exact duplicate pairs are
// kept once.
BlockDictionary build_dictionary(const SourceSequence& source, const WordSet& closed_class,
                                 const MorphologyProvider& morph);

// A Bernoulli(p) subset of a dictionary's entries, used for one decode.
class ActiveBlockDictionary {
 public:
  ActiveBlockDictionary(std::shared_ptr<const BlockDictionary> parent, std::vector<bool> included,
                        double p, std::uint64_t seed);

  const BlockDictionary& parent() const { return *parent_; }
  const std::vector<bool>& included() const { return included_; }
  std::vector<BlockEntry> entries() const;
  std::size_t size() const;
  double p() const { return p_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::shared_ptr<const BlockDictionary> parent_;
  std::vector<bool> included_;
  double p_;
  std::uint64_t seed_;
};

// Entry i is included iff u_i < p, with u_i drawn in entry order from a
// generator seeded with `seed`. Sharing the seed across different p values
// therefore yields nested subsets. Throws ConfigError unless 0 <= p <= 1.
ActiveBlockDictionary sample_active(std::shared_ptr<const BlockDictionary> dict, double p,
                                    std::uint64_t seed);

// Same rule with caller-supplied uniforms (one per entry).
ActiveBlockDictionary sample_active(std::shared_ptr<const BlockDictionary> dict, double p,
                                    std::span<const double> uniforms);

// Every entry active (p = 1).
ActiveBlockDictionary full_active(std::shared_ptr<const BlockDictionary> dict);

// Forms to mask at the step after `last_generated`: the union of the
// expansions of all active entries triggered by it. Empty unless the token
// is word-initial.
std::set<std::string> triggered_block_set(const ActiveBlockDictionary& active,
                                          const Token& last_generated);

// Static Blocking ablation: every open-class source word (and its forms) is
// masked at every step.
std::set<std::string> static_block_set(const SourceSequence& source, const WordSet& closed_class,
                                       const MorphologyProvider& morph);

// Inflections of `key` plus capitalized and upper-case variants of each.
std::set<std::string> expand_forms(const std::string& key, const MorphologyProvider& morph);

}  // namespace parablock
