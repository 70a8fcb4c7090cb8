#include "parablock/token.hpp"

#include "parablock/utf8.hpp"

namespace parablock {

namespace {

bool is_joiner(char32_t cp) { return cp == '\'' || cp == '-' || cp == 0x2019; }

bool is_word_char(char32_t cp) { return !utf8::is_space(cp) && !utf8::is_punctuation(cp); }

struct CodePoint {
  char32_t cp;
  std::size_t begin;
  std::size_t end;
};

std::vector<CodePoint> code_points(std::string_view text) {
  std::vector<CodePoint> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t begin = pos;
    // Invalid bytes are kept as opaque word characters.
    const char32_t cp = utf8::decode(text, pos).value_or(0xFFFD);
    out.push_back({cp, begin, pos});
  }
  return out;
}

// Punctuation that attaches to the preceding token when rendering id
// sequences, and punctuation that attaches to the following one.
bool attaches_left(std::string_view s) {
  static constexpr std::string_view kClosers[] = {".", ",", "!", "?", ";", ":", ")", "]",
                                                  "}", "%", "'s", "n't", "”", "»"};
  for (auto c : kClosers) {
    if (s == c) return true;
  }
  return false;
}

bool attaches_right(std::string_view s) {
  static constexpr std::string_view kOpeners[] = {"(", "[", "{", "¿", "¡", "“",
                                                  "«"};
  for (auto o : kOpeners) {
    if (s == o) return true;
  }
  return false;
}

}  // namespace

std::string normalize(std::string_view surface) { return utf8::fold_case(surface); }

SourceSequence tokenize(std::string_view text) {
  SourceSequence tokens;
  const auto cps = code_points(text);
  bool pending_space = false;
  std::size_t run_begin = 0;
  bool in_run = false;

  const auto emit = [&](std::size_t begin, std::size_t end) {
    Token t;
    t.surface = std::string(text.substr(begin, end - begin));
    t.norm = normalize(t.surface);
    t.word_initial = true;
    t.space_before = pending_space && !tokens.empty();
    pending_space = false;
    tokens.push_back(std::move(t));
  };

  for (std::size_t i = 0; i < cps.size(); ++i) {
    const char32_t cp = cps[i].cp;
    if (utf8::is_space(cp)) {
      if (in_run) emit(run_begin, cps[i].begin);
      in_run = false;
      pending_space = true;
      continue;
    }
    if (utf8::is_punctuation(cp)) {
      const bool inner_joiner = is_joiner(cp) && in_run && i + 1 < cps.size() &&
                                is_word_char(cps[i + 1].cp);
      if (inner_joiner) continue;
      if (in_run) emit(run_begin, cps[i].begin);
      in_run = false;
      emit(cps[i].begin, cps[i].end);
      continue;
    }
    if (!in_run) {
      in_run = true;
      run_begin = cps[i].begin;
    }
  }
  if (in_run) emit(run_begin, text.size());
  return tokens;
}

std::string detokenize(std::span<const Token> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0 && tokens[i].space_before) out.push_back(' ');
    out += tokens[i].surface;
  }
  return out;
}

std::string render(std::span<const std::string> surfaces) {
  std::string out;
  bool glue_next = false;
  bool first = true;
  for (const auto& s : surfaces) {
    if (!first && !glue_next && !attaches_left(s)) out.push_back(' ');
    out += s;
    glue_next = attaches_right(s);
    first = false;
  }
  return out;
}

std::string detokenize(std::span<const TokenId> ids, const Vocabulary& vocab) {
  std::vector<std::string> surfaces;
  surfaces.reserve(ids.size());
  for (TokenId id : ids) {
    if (id == vocab.bos() || id == vocab.eos()) continue;
    surfaces.push_back(vocab.surface(id));
  }
  return render(surfaces);
}

std::string collapse_whitespace(std::string_view text) {
  std::string out;
  bool pending = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t begin = pos;
    const auto cp = utf8::decode(text, pos);
    if (cp && utf8::is_space(*cp)) {
      pending = !out.empty();
      continue;
    }
    if (pending) out.push_back(' ');
    pending = false;
    out.append(text.substr(begin, pos - begin));
  }
  return out;
}

Vocabulary::Vocabulary() {
  bos_ = add(kBosSurface);
  eos_ = add(kEosSurface);
  unk_ = add(kUnkSurface);
}

Vocabulary Vocabulary::from_list(std::span<const std::string> surfaces) {
  Vocabulary v;
  v.surfaces_.clear();
  v.index_.clear();
  for (const auto& s : surfaces) v.add(s);
  v.bos_ = v.add(kBosSurface);
  v.eos_ = v.add(kEosSurface);
  v.unk_ = v.add(kUnkSurface);
  return v;
}

TokenId Vocabulary::add(std::string_view surface) {
  auto [it, inserted] = index_.try_emplace(std::string(surface), static_cast<TokenId>(surfaces_.size()));
  if (inserted) surfaces_.emplace_back(surface);
  return it->second;
}

TokenId Vocabulary::lookup(std::string_view surface) const {
  auto it = index_.find(std::string(surface));
  return it == index_.end() ? unk_ : it->second;
}

bool Vocabulary::contains(std::string_view surface) const {
  return index_.find(std::string(surface)) != index_.end();
}

void Vocabulary::add_all(std::span<const Token> tokens) {
  for (const auto& t : tokens) add(t.surface);
}

void Vocabulary::assign(std::span<Token> tokens) const {
  for (auto& t : tokens) t.id = lookup(t.surface);
}

}  // namespace parablock
