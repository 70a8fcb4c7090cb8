#include "parablock/block_dictionary.hpp"

#include <fstream>

#include "parablock/error.hpp"
#include "parablock/random.hpp"
#include "parablock/utf8.hpp"

namespace parablock {

const WordSet& default_closed_class_words() {
  static const WordSet kWords = {
      // pronouns
      "i", "me", "my", "mine", "myself", "you", "your", "yours", "yourself", "yourselves", "he",
      "him", "his", "himself", "she", "her", "hers", "herself", "it", "its", "itself", "we", "us",
      "our", "ours", "ourselves", "they", "them", "their", "theirs", "themselves", "who", "whom",
      "whose", "which", "what", "that", "this", "these", "those", "someone", "somebody",
      "something", "anyone", "anybody", "anything", "everyone", "everybody", "everything",
      "nobody", "nothing",
      // determiners and quantifiers
      "a", "an", "the", "some", "any", "no", "every", "each", "either", "neither", "all", "both",
      "few", "many", "much", "more", "most", "several", "such", "another", "other",
      // conjunctions
      "and", "or", "but", "nor", "so", "yet", "for", "because", "although", "though", "while",
      "whereas", "if", "unless", "until", "since", "when", "whenever", "where", "wherever",
      "whether", "than", "as", "once",
      // prepositions
      "about", "above", "across", "after", "against", "along", "among", "around", "at",
      "before", "behind", "below", "beneath", "beside", "besides", "between", "beyond", "by",
      "despite", "down", "during", "except", "from", "in", "inside", "into", "near",
      "of", "off", "on", "onto", "out", "outside", "over", "past", "per", "through",
      "throughout", "till", "to", "toward", "towards", "under", "underneath", "up",
      "upon", "via", "with", "within", "without",
      // auxiliaries and modals
      "am", "is", "are", "was", "were", "be", "been", "being", "do", "does", "did", "have", "has",
      "had", "can", "could", "will", "would", "shall", "should", "may", "might", "must",
      // particles
      "not", "n't", "to", "there",
  };
  return kWords;
}

WordSet load_word_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read word list '" + path + "'");
  WordSet words;
  std::string line;
  while (std::getline(in, line)) {
    const std::string word = collapse_whitespace(line);
    if (word.empty() || word[0] == '#') continue;
    words.insert(normalize(word));
  }
  return words;
}

const std::set<std::string>& BlockDictionary::expansion(const std::string& blocked_key) const {
  static const std::set<std::string> kEmpty;
  auto it = expansions_.find(blocked_key);
  return it == expansions_.end() ? kEmpty : it->second;
}

std::set<std::string> expand_forms(const std::string& key, const MorphologyProvider& morph) {
  std::set<std::string> forms;
  for (const auto& f : morph.inflections(key)) {
    forms.insert(f);
    forms.insert(utf8::capitalize(f));
    forms.insert(utf8::to_upper(f));
  }
  forms.insert(key);
  forms.erase(std::string(kEosSurface));
  return forms;
}

BlockDictionary build_dictionary(const SourceSequence& source, const WordSet& closed_class,
                                 const MorphologyProvider& morph) {
  BlockDictionary dict;
  for (std::size_t i = 0; i + 1 < source.size(); ++i) {
    const Token& cur = source[i];
    const Token& succ = source[i + 1];
    if (!cur.word_initial || !succ.word_initial) continue;
    const std::string trigger = normalize(cur);
    const std::string blocked = normalize(succ);
    if (blocked == kEosSurface || closed_class.contains(blocked)) continue;
    BlockEntry entry{trigger, blocked};
    bool seen = false;
    for (const auto& e : dict.entries_) seen = seen || e == entry;
    if (seen) continue;
    dict.entries_.push_back(entry);
    if (!dict.expansions_.contains(blocked)) dict.expansions_[blocked] = expand_forms(blocked, morph);
  }
  return dict;
}

ActiveBlockDictionary::ActiveBlockDictionary(std::shared_ptr<const BlockDictionary> parent,
                                             std::vector<bool> included, double p,
                                             std::uint64_t seed)
    : parent_(std::move(parent)), included_(std::move(included)), p_(p), seed_(seed) {
  if (!parent_) throw UsageError("active dictionary needs a parent");
  if (included_.size() != parent_->size()) throw UsageError("inclusion mask size mismatch");
}

std::vector<BlockEntry> ActiveBlockDictionary::entries() const {
  std::vector<BlockEntry> out;
  for (std::size_t i = 0; i < included_.size(); ++i) {
    if (included_[i]) out.push_back(parent_->entries()[i]);
  }
  return out;
}

std::size_t ActiveBlockDictionary::size() const {
  std::size_t n = 0;
  for (bool b : included_) n += b ? 1 : 0;
  return n;
}

namespace {

void check_p(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("sampling probability p must lie in [0, 1]");
}

}  // namespace

ActiveBlockDictionary sample_active(std::shared_ptr<const BlockDictionary> dict, double p,
                                    std::span<const double> uniforms) {
  check_p(p);
  if (!dict) throw UsageError("null dictionary");
  if (uniforms.size() != dict->size()) throw UsageError("need one uniform per entry");
  std::vector<bool> included(dict->size());
  for (std::size_t i = 0; i < included.size(); ++i) included[i] = uniforms[i] < p;
  return ActiveBlockDictionary(std::move(dict), std::move(included), p, 0);
}

ActiveBlockDictionary sample_active(std::shared_ptr<const BlockDictionary> dict, double p,
                                    std::uint64_t seed) {
  check_p(p);
  if (!dict) throw UsageError("null dictionary");
  Rng rng(seed);
  std::vector<bool> included(dict->size());
  for (std::size_t i = 0; i < included.size(); ++i) included[i] = rng.uniform() < p;
  return ActiveBlockDictionary(std::move(dict), std::move(included), p, seed);
}

ActiveBlockDictionary full_active(std::shared_ptr<const BlockDictionary> dict) {
  std::vector<bool> included(dict ? dict->size() : 0, true);
  return ActiveBlockDictionary(std::move(dict), std::move(included), 1.0, 0);
}

std::set<std::string> triggered_block_set(const ActiveBlockDictionary& active,
                                          const Token& last_generated) {
  std::set<std::string> out;
  if (!last_generated.word_initial) return out;
  const std::string key = normalize(last_generated);
  const auto& entries = active.parent().entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!active.included()[i] || entries[i].trigger != key) continue;
    const auto& forms = active.parent().expansion(entries[i].blocked);
    out.insert(forms.begin(), forms.end());
  }
  return out;
}

std::set<std::string> static_block_set(const SourceSequence& source, const WordSet& closed_class,
                                       const MorphologyProvider& morph) {
  std::set<std::string> out;
  for (const auto& t : source) {
    if (!t.word_initial) continue;
    const std::string key = normalize(t);
    if (key == kEosSurface || closed_class.contains(key)) continue;
    const auto forms = expand_forms(key, morph);
    out.insert(forms.begin(), forms.end());
  }
  return out;
}

}  // namespace parablock
