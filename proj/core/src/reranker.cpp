#include "parablock/reranker.hpp"

#include <algorithm>
#include <cmath>

#include "parablock/error.hpp"
#include "parablock/metrics.hpp"

namespace parablock {

namespace {

double cosine(const Embedding& a, const Embedding& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / std::sqrt(na * nb);
}

// Sum over `from` of idf * best cosine against `to`, divided by total idf.
double greedy_match(std::span<const std::string> from, const std::vector<Embedding>& from_vecs,
                    const std::vector<Embedding>& to_vecs, const IdfTable& idf) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < from.size(); ++i) {
    double best = -1.0;
    for (const auto& v : to_vecs) best = std::max(best, cosine(from_vecs[i], v));
    const double w = idf.weight(from[i]);
    num += w * best;
    den += w;
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace

double semantic_similarity(std::span<const std::string> candidate,
                           std::span<const std::string> reference, const IdfTable& idf,
                           const EmbeddingProvider& embedder) {
  if (candidate.empty() || reference.empty()) {
    throw ScoringError("semantic similarity needs nonempty candidate and reference");
  }
  const auto cand_vecs = embedder.embed(candidate);
  const auto ref_vecs = embedder.embed(reference);
  if (cand_vecs.size() != candidate.size() || ref_vecs.size() != reference.size()) {
    throw ScoringError("embedding provider returned the wrong number of vectors");
  }
  const double recall = greedy_match(reference, ref_vecs, cand_vecs, idf);
  const double precision = greedy_match(candidate, cand_vecs, ref_vecs, idf);
  if (precision + recall <= 0.0) return 0.0;
  return std::clamp(2.0 * precision * recall / (precision + recall), 0.0, 1.0);
}

double surface_dissimilarity(std::span<const std::string> candidate,
                             std::span<const std::string> source) {
  const TokenList cand(candidate.begin(), candidate.end());
  const TokenList src(source.begin(), source.end());
  return 1.0 - self_bleu(cand, src) / 100.0;
}

double rank_score(double semantic_sim, double dissimilarity) {
  if (semantic_sim + dissimilarity <= 0.0) return 0.0;
  return 2.0 * semantic_sim * dissimilarity / (semantic_sim + dissimilarity);
}

std::vector<Candidate> rank(std::vector<Candidate> pool, std::span<const std::string> source,
                            const IdfTable& idf, const EmbeddingProvider& embedder) {
  for (auto& c : pool) {
    if (c.tokens.empty() || source.empty()) {
      c.semantic_sim = 0.0;
      c.self_bleu = 0.0;
      c.rank_score = 0.0;
      continue;
    }
    c.semantic_sim = semantic_similarity(c.tokens, source, idf, embedder);
    const double dissim = surface_dissimilarity(c.tokens, source);
    c.self_bleu = 100.0 * (1.0 - dissim);
    c.rank_score = rank_score(c.semantic_sim, dissim);
  }
  std::sort(pool.begin(), pool.end(), [](const Candidate& a, const Candidate& b) {
    if (a.rank_score != b.rank_score) return a.rank_score > b.rank_score;
    if (a.model_score != b.model_score) return a.model_score > b.model_score;
    return a.text < b.text;
  });
  return pool;
}

}  // namespace parablock
