#pragma once

#include <span>
#include <string>
#include <vector>

#include "parablock/candidate.hpp"
#include "parablock/embedding.hpp"
#include "parablock/idf.hpp"

namespace parablock {

// IDF-weighted greedy-matching similarity. Recall matches every reference
// token to its most similar candidate token, precision the other way round;
// the result is their F1, clamped to [0, 1]. Throws ScoringError if either
// side is empty.
double semantic_similarity(std::span<const std::string> candidate,
                           std::span<const std::string> reference, const IdfTable& idf,
                           const EmbeddingProvider& embedder);

// 1 - selfBLEU / 100.
double surface_dissimilarity(std::span<const std::string> candidate,
                             std::span<const std::string> source);

// Harmonic mean of similarity and dissimilarity; 0 when both are 0.
double rank_score(double semantic_sim, double dissimilarity);

// Fills semantic_sim, self_bleu and rank_score against the source and sorts
// by rank_score descending, then model_score descending, then text.
std::vector<Candidate> rank(std::vector<Candidate> pool, std::span<const std::string> source,
                            const IdfTable& idf, const EmbeddingProvider& embedder);

}  // namespace parablock
