#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "parablock/token.hpp"

namespace parablock {

// A finished decode offered as a paraphrase.
struct Candidate {
  std::string text;
  std::vector<std::string> tokens;  // surfaces, BOS/EOS stripped
  double model_score = 0.0;         // length-normalized log-probability
  double semantic_sim = 0.0;        // [0, 1]
  double self_bleu = 0.0;           // [0, 100]
  double rank_score = 0.0;          // [0, 1]
  std::size_t dictionary = 0;       // which sampled dictionary produced it
  std::size_t beam_rank = 0;
};

}  // namespace parablock
