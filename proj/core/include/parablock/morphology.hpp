#pragma once

#include <set>
#include <string>
#include <string_view>

namespace parablock {

// Enumerates the surface forms that should be blocked together with a
// word. The result always contains the key itself.
class MorphologyProvider {
 public:
  virtual ~MorphologyProvider() = default;
  virtual std::set<std::string> inflections(std::string_view key) const = 0;
};

class IdentityMorphology final : public MorphologyProvider {
 public:
  std::set<std::string> inflections(std::string_view key) const override {
    return {std::string(key)};
  }
};

// Rule-based English inflector: -s/-es plural and third person, -ed past,
// -ing gerund (with e-dropping, y->i and short-word consonant doubling),
// plus tables of irregular verbs and nouns. Any form of an irregular verb
// expands to the whole paradigm ("gave" -> give, gives, gave, giving,
// given). Keys that are not plain ASCII lowercase words pass through.
class EnglishInflector final : public MorphologyProvider {
 public:
  std::set<std::string> inflections(std::string_view key) const override;
};

}  // namespace parablock
