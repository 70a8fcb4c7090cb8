#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace parablock {

using TokenId = std::uint32_t;

inline constexpr std::string_view kBosSurface = "<s>";
inline constexpr std::string_view kEosSurface = "</s>";
inline constexpr std::string_view kUnkSurface = "<unk>";

struct Token {
  std::string surface;
  TokenId id = 0;
  // True iff this piece begins a word. Blocking only looks at these.
  bool word_initial = true;
  // True iff whitespace separated this piece from the previous one in the
  // original text. Drives detokenization.
  bool space_before = false;
  // Case-folded form used as a dictionary key.
  std::string norm;
};

using SourceSequence = std::vector<Token>;

// Splits on whitespace, then breaks every whitespace-delimited word into
// alphanumeric runs and single punctuation characters. Apostrophes and
// hyphens flanked by word characters stay inside the word ("don't",
// "well-known"). Ids are left as 0; assign them with Vocabulary::assign.
SourceSequence tokenize(std::string_view text);

// Case-folded key of a surface form.
std::string normalize(std::string_view surface);
inline std::string normalize(const Token& token) { return normalize(token.surface); }

// Inverse of tokenize up to whitespace normalization: runs of whitespace
// become one space, leading/trailing whitespace is dropped.
std::string detokenize(std::span<const Token> tokens);

// Joins bare surface strings (no spacing information): one space between
// tokens, except that closing punctuation attaches to the left and opening
// punctuation to the right. Used for decoder output.
std::string render(std::span<const std::string> surfaces);

// render() over an id sequence. BOS and EOS are skipped.
class Vocabulary;
std::string detokenize(std::span<const TokenId> ids, const Vocabulary& vocab);

// Collapse whitespace runs to one space and trim. The normal form that
// detokenize(tokenize(x)) reproduces.
std::string collapse_whitespace(std::string_view text);

// Bidirectional surface <-> id map. BOS, EOS and UNK always exist.
class Vocabulary {
 public:
  Vocabulary();

  // Builds a vocabulary from an ordered list of surfaces (e.g. the list a
  // remote backend advertises). Special surfaces found in the list keep their
  // position; missing ones are appended.
  static Vocabulary from_list(std::span<const std::string> surfaces);

  TokenId add(std::string_view surface);
  // UNK for unknown surfaces.
  TokenId lookup(std::string_view surface) const;
  bool contains(std::string_view surface) const;
  const std::string& surface(TokenId id) const { return surfaces_.at(id); }
  std::size_t size() const { return surfaces_.size(); }

  TokenId bos() const { return bos_; }
  TokenId eos() const { return eos_; }
  TokenId unk() const { return unk_; }
  bool is_special(TokenId id) const { return id == bos_ || id == eos_ || id == unk_; }

  void add_all(std::span<const Token> tokens);
  // Fills Token::id from this vocabulary (UNK for out-of-vocabulary).
  void assign(std::span<Token> tokens) const;

  const std::vector<std::string>& surfaces() const { return surfaces_; }

 private:
  std::vector<std::string> surfaces_;
  std::unordered_map<std::string, TokenId> index_;
  TokenId bos_ = 0;
  TokenId eos_ = 0;
  TokenId unk_ = 0;
};

}  // namespace parablock
