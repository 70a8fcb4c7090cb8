#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace parablock {

using Embedding = std::vector<double>;

// Maps token keys to unit-norm vectors of a fixed dimension. Contextual
// providers may look at the whole list; static ones embed each key alone.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::vector<Embedding> embed(std::span<const std::string> tokens) const = 0;
  virtual std::size_t dimension() const = 0;
};

// Deterministic pseudo-random unit vector per case-folded key, derived from a
// seeded hash. Identical keys match exactly; distinct keys are nearly
// orthogonal when the dimension is large.
class HashEmbedding final : public EmbeddingProvider {
 public:
  explicit HashEmbedding(std::size_t dimension = 256, std::uint64_t seed = 0x5eed);

  std::vector<Embedding> embed(std::span<const std::string> tokens) const override;
  std::size_t dimension() const override { return dimension_; }

  Embedding embed_key(const std::string& key) const;

 private:
  std::size_t dimension_;
  std::uint64_t seed_;
};

}  // namespace parablock
