#include "parablock/language_model.hpp"

#include <cmath>
#include <string>

#include "parablock/error.hpp"

namespace parablock {

double NextTokenDistribution::total_probability() const {
  double total = 0.0;
  for (const auto& e : entries) total += std::exp(e.logprob);
  return total;
}

void NextTokenDistribution::validate() const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const double lp = entries[i].logprob;
    if (std::isnan(lp) || (lp > 0.0 && std::isinf(lp))) {
      throw ProtocolError("non-finite logprob at entry " + std::to_string(i));
    }
    if (!dense() && !std::isfinite(lp)) {
      throw ProtocolError("non-finite logprob at entry " + std::to_string(i));
    }
    if (!dense() && i > 0 && lp > entries[i - 1].logprob) {
      throw ProtocolError("sparse logprobs not in nonincreasing order at entry " +
                          std::to_string(i));
    }
  }
  if (!dense() && top_k != 0 && entries.size() > top_k) {
    throw ProtocolError("sparse distribution longer than top_k");
  }
}

}  // namespace parablock
