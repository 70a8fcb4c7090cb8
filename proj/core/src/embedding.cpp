#include "parablock/embedding.hpp"

#include <cmath>
#include <numbers>

#include "parablock/random.hpp"
#include "parablock/token.hpp"

namespace parablock {

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

HashEmbedding::HashEmbedding(std::size_t dimension, std::uint64_t seed)
    : dimension_(dimension == 0 ? 1 : dimension), seed_(seed) {}

Embedding HashEmbedding::embed_key(const std::string& key) const {
  Rng rng(fnv1a(normalize(key)) ^ seed_);
  Embedding v(dimension_);
  double norm2 = 0.0;
  for (std::size_t i = 0; i < dimension_; i += 2) {
    // Box-Muller; 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - rng.uniform();
    const double u2 = rng.uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    v[i] = r * std::cos(2.0 * std::numbers::pi * u2);
    if (i + 1 < dimension_) v[i + 1] = r * std::sin(2.0 * std::numbers::pi * u2);
  }
  for (double x : v) norm2 += x * x;
  const double inv = norm2 > 0.0 ? 1.0 / std::sqrt(norm2) : 0.0;
  for (double& x : v) x *= inv;
  return v;
}

std::vector<Embedding> HashEmbedding::embed(std::span<const std::string> tokens) const {
  std::vector<Embedding> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(embed_key(t));
  return out;
}

}  // namespace parablock
