#include "parablock/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <map>

#include "parablock/error.hpp"

namespace parablock {

namespace {

using NGramCounts = std::map<std::span<const std::string>, std::size_t,
                             decltype([](std::span<const std::string> a, std::span<const std::string> b) {
                               return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
                             })>;

NGramCounts count_ngrams(const TokenList& tokens, int n) {
  NGramCounts counts;
  const auto width = static_cast<std::size_t>(n);
  for (std::size_t i = 0; i + width <= tokens.size(); ++i) {
    ++counts[std::span<const std::string>(tokens).subspan(i, width)];
  }
  return counts;
}

std::size_t ngram_total(const TokenList& tokens, int n) {
  const auto width = static_cast<std::size_t>(n);
  return tokens.size() >= width ? tokens.size() - width + 1 : 0;
}

// Matches clipped by the maximum count of each n-gram in any reference.
std::size_t clipped_matches(const TokenList& candidate, std::span<const TokenList> references, int n) {
  const NGramCounts cand = count_ngrams(candidate, n);
  NGramCounts max_ref;
  for (const auto& ref : references) {
    for (const auto& [gram, c] : count_ngrams(ref, n)) {
      auto& slot = max_ref[gram];
      slot = std::max(slot, c);
    }
  }
  std::size_t matches = 0;
  for (const auto& [gram, c] : cand) {
    auto it = max_ref.find(gram);
    if (it != max_ref.end()) matches += std::min(c, it->second);
  }
  return matches;
}

std::size_t closest_ref_length(std::size_t cand_len, std::span<const TokenList> references) {
  std::size_t best = references.front().size();
  for (const auto& ref : references) {
    const auto diff = [&](std::size_t r) { return r > cand_len ? r - cand_len : cand_len - r; };
    if (diff(ref.size()) < diff(best) || (diff(ref.size()) == diff(best) && ref.size() < best)) {
      best = ref.size();
    }
  }
  return best;
}

double brevity_penalty(double c, double r) {
  if (c <= 0.0) return 0.0;
  return c > r ? 1.0 : std::exp(1.0 - r / c);
}

}  // namespace

double corpus_bleu(std::span<const TokenList> candidates,
                   std::span<const std::vector<TokenList>> references, int max_n) {
  if (candidates.size() != references.size()) throw UsageError("candidate/reference count mismatch");
  if (candidates.empty()) throw UsageError("corpus BLEU needs at least one sentence");
  if (max_n < 1) throw UsageError("max_n must be >= 1");

  std::vector<double> matches(static_cast<std::size_t>(max_n), 0.0);
  std::vector<double> totals(static_cast<std::size_t>(max_n), 0.0);
  double cand_len = 0.0;
  double ref_len = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (references[i].empty()) throw UsageError("every candidate needs at least one reference");
    cand_len += static_cast<double>(candidates[i].size());
    ref_len += static_cast<double>(closest_ref_length(candidates[i].size(), references[i]));
    for (int n = 1; n <= max_n; ++n) {
      matches[n - 1] += static_cast<double>(clipped_matches(candidates[i], references[i], n));
      totals[n - 1] += static_cast<double>(ngram_total(candidates[i], n));
    }
  }
  double log_sum = 0.0;
  int orders = 0;
  for (int n = 0; n < max_n; ++n) {
    if (totals[n] == 0.0) continue;
    if (matches[n] == 0.0) return 0.0;
    log_sum += std::log(matches[n] / totals[n]);
    ++orders;
  }
  if (orders == 0) return 0.0;
  return 100.0 * brevity_penalty(cand_len, ref_len) * std::exp(log_sum / orders);
}

double sentence_bleu(const TokenList& candidate, std::span<const TokenList> references,
                     BleuSmoothing smoothing, int max_n) {
  if (references.empty()) throw UsageError("sentence BLEU needs at least one reference");
  if (smoothing == BleuSmoothing::kNone) {
    const std::vector<TokenList> refs(references.begin(), references.end());
    return corpus_bleu(std::span<const TokenList>(&candidate, 1),
                       std::span<const std::vector<TokenList>>(&refs, 1), max_n);
  }
  if (candidate.empty()) return 0.0;
  double log_sum = 0.0;
  for (int n = 1; n <= max_n; ++n) {
    const auto m = static_cast<double>(clipped_matches(candidate, references, n));
    const auto t = static_cast<double>(ngram_total(candidate, n));
    double precision = 0.0;
    if (m > 0.0) {
      precision = m / t;
    } else if (n >= 2) {
      precision = 1.0 / (t + 1.0);
    } else {
      return 0.0;
    }
    log_sum += std::log(precision);
  }
  const double r = static_cast<double>(closest_ref_length(candidate.size(), references));
  return 100.0 * brevity_penalty(static_cast<double>(candidate.size()), r) * std::exp(log_sum / max_n);
}

double self_bleu(const TokenList& candidate, const TokenList& source) {
  return sentence_bleu(candidate, std::span<const TokenList>(&source, 1));
}

double ibleu(const TokenList& candidate, std::span<const TokenList> references,
             const TokenList& source, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw UsageError("iBLEU alpha must lie in [0, 1]");
  return alpha * sentence_bleu(candidate, references) - (1.0 - alpha) * self_bleu(candidate, source);
}

double mean_ibleu(std::span<const TokenList> candidates,
                  std::span<const std::vector<TokenList>> references,
                  std::span<const TokenList> sources, double alpha) {
  if (candidates.size() != references.size() || candidates.size() != sources.size()) {
    throw UsageError("candidate/reference/source count mismatch");
  }
  if (candidates.empty()) throw UsageError("iBLEU needs at least one sentence");
  double sum = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    sum += ibleu(candidates[i], references[i], sources[i], alpha);
  }
  return sum / static_cast<double>(candidates.size());
}

namespace {

double f_or_recall(double overlap, double cand_total, double ref_total, RougeMode mode) {
  if (overlap == 0.0) return 0.0;
  const double recall = overlap / ref_total;
  if (mode == RougeMode::kRecall) return 100.0 * recall;
  const double precision = overlap / cand_total;
  return 100.0 * 2.0 * precision * recall / (precision + recall);
}

}  // namespace

double rouge_n(const TokenList& candidate, const TokenList& reference, int n, RougeMode mode) {
  if (n < 1) throw UsageError("ROUGE-N needs n >= 1");
  const auto cand_total = ngram_total(candidate, n);
  const auto ref_total = ngram_total(reference, n);
  if (cand_total == 0 && ref_total == 0) return candidate == reference && !candidate.empty() ? 100.0 : 0.0;
  if (cand_total == 0 || ref_total == 0) return 0.0;
  const NGramCounts cand = count_ngrams(candidate, n);
  const NGramCounts ref = count_ngrams(reference, n);
  std::size_t overlap = 0;
  for (const auto& [gram, c] : cand) {
    auto it = ref.find(gram);
    if (it != ref.end()) overlap += std::min(c, it->second);
  }
  return f_or_recall(static_cast<double>(overlap), static_cast<double>(cand_total),
                     static_cast<double>(ref_total), mode);
}

double rouge_l(const TokenList& candidate, const TokenList& reference, RougeMode mode) {
  if (candidate.empty() || reference.empty()) return 0.0;
  std::vector<std::size_t> prev(reference.size() + 1, 0);
  std::vector<std::size_t> cur(reference.size() + 1, 0);
  for (std::size_t i = 1; i <= candidate.size(); ++i) {
    for (std::size_t j = 1; j <= reference.size(); ++j) {
      cur[j] = candidate[i - 1] == reference[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return f_or_recall(static_cast<double>(prev[reference.size()]), static_cast<double>(candidate.size()),
                     static_cast<double>(reference.size()), mode);
}

double bs_sb(double semantic_sim, double self_bleu_score) {
  constexpr double kSlack = 1e-9;
  if (!(semantic_sim >= -kSlack && semantic_sim <= 1.0 + kSlack)) {
    throw UsageError("semantic similarity must lie in [0, 1]");
  }
  if (!(self_bleu_score >= -kSlack && self_bleu_score <= 100.0 + kSlack)) {
    throw UsageError("self-BLEU must lie in [0, 100]");
  }
  const double sim = std::clamp(semantic_sim, 0.0, 1.0);
  const double dissim = 1.0 - std::clamp(self_bleu_score, 0.0, 100.0) / 100.0;
  if (sim + dissim == 0.0) return 0.0;
  return 2.0 * sim * dissim / (sim + dissim);
}

OracleSelection oracle_select(std::span<const std::vector<TokenList>> candidate_sets,
                              std::span<const std::vector<TokenList>> references,
                              const SentenceScorer& sentence_scorer,
                              const CorpusScorer& corpus_scorer) {
  if (candidate_sets.size() != references.size()) throw UsageError("set/reference count mismatch");
  OracleSelection out;
  for (std::size_t i = 0; i < candidate_sets.size(); ++i) {
    const auto& set = candidate_sets[i];
    if (set.empty()) throw UsageError("empty candidate set at example " + std::to_string(i));
    std::size_t best = 0;
    double best_score = sentence_scorer(set[0], references[i]);
    for (std::size_t j = 1; j < set.size(); ++j) {
      const double s = sentence_scorer(set[j], references[i]);
      if (s > best_score) {
        best = j;
        best_score = s;
      }
    }
    out.chosen.push_back(best);
    out.selected.push_back(set[best]);
  }
  out.corpus_score = corpus_scorer(out.selected, references);
  return out;
}

OracleSelection oracle_select(std::span<const std::vector<TokenList>> candidate_sets,
                              std::span<const std::vector<TokenList>> references) {
  return oracle_select(
      candidate_sets, references,
      [](const TokenList& c, std::span<const TokenList> refs) { return sentence_bleu(c, refs); },
      [](std::span<const TokenList> c, std::span<const std::vector<TokenList>> r) {
        return corpus_bleu(c, r);
      });
}

std::string MetricReport::to_json() const {
  nlohmann::ordered_json j;
  j["bleu"] = bleu;
  j["ibleu"] = ibleu;
  j["rouge1"] = rouge1;
  j["rouge2"] = rouge2;
  j["rougeL"] = rougeL;
  j["self_bleu"] = self_bleu;
  j["bs_sb"] = bs_sb;
  return j.dump();
}

}  // namespace parablock
