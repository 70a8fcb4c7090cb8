#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace parablock {

using TokenList = std::vector<std::string>;

enum class BleuSmoothing {
  kNone,
  // For n >= 2, a zero match count becomes (0 + 1) / (total + 1).
  kAddOneOnZero,
};

// Corpus BLEU in [0, 100]: clipped n-gram precisions summed over the corpus,
// geometric mean over orders 1..max_n, times the brevity penalty computed
// from total candidate length and summed closest reference lengths (ties go
// to the shorter reference). Orders for which the candidates contain no
// n-grams at all are left out of the mean. Throws UsageError on size
// mismatch or an empty corpus.
double corpus_bleu(std::span<const TokenList> candidates,
                   std::span<const std::vector<TokenList>> references, int max_n = 4);

double sentence_bleu(const TokenList& candidate, std::span<const TokenList> references,
                     BleuSmoothing smoothing = BleuSmoothing::kAddOneOnZero, int max_n = 4);

// Smoothed sentence BLEU against the source as the only reference.
double self_bleu(const TokenList& candidate, const TokenList& source);

// alpha * BLEU(candidate, references) - (1 - alpha) * selfBLEU(candidate, source)
double ibleu(const TokenList& candidate, std::span<const TokenList> references,
             const TokenList& source, double alpha);

// Mean of sentence-level iBLEU over a corpus.
double mean_ibleu(std::span<const TokenList> candidates,
                  std::span<const std::vector<TokenList>> references,
                  std::span<const TokenList> sources, double alpha);

enum class RougeMode { kF1, kRecall };

// N-gram overlap (multiset) F1 or recall in [0, 100]. When neither side has
// an n-gram of order n, the score is 100 for identical inputs and 0
// otherwise.
double rouge_n(const TokenList& candidate, const TokenList& reference, int n,
               RougeMode mode = RougeMode::kF1);

// Longest-common-subsequence F1 or recall in [0, 100].
double rouge_l(const TokenList& candidate, const TokenList& reference,
               RougeMode mode = RougeMode::kF1);

// Harmonic mean of semantic similarity and (1 - selfBLEU / 100).
double bs_sb(double semantic_sim, double self_bleu);

using SentenceScorer = std::function<double(const TokenList&, std::span<const TokenList>)>;
using CorpusScorer =
    std::function<double(std::span<const TokenList>, std::span<const std::vector<TokenList>>)>;

struct OracleSelection {
  std::vector<std::size_t> chosen;  // index into each candidate set
  std::vector<TokenList> selected;
  double corpus_score = 0.0;
};

// Per example, keeps the candidate with the best sentence-level score against
// the references (first one on ties), then scores the selections at corpus
// level.
OracleSelection oracle_select(std::span<const std::vector<TokenList>> candidate_sets,
                              std::span<const std::vector<TokenList>> references,
                              const SentenceScorer& sentence_scorer,
                              const CorpusScorer& corpus_scorer);

// Sentence BLEU scorer and corpus BLEU aggregator, the default protocol.
OracleSelection oracle_select(std::span<const std::vector<TokenList>> candidate_sets,
                              std::span<const std::vector<TokenList>> references);

struct MetricReport {
  double bleu = 0.0;
  double ibleu = 0.0;
  double rouge1 = 0.0;
  double rouge2 = 0.0;
  double rougeL = 0.0;
  double self_bleu = 0.0;
  double bs_sb = 0.0;

  // Single-line JSON with the fields above.
  std::string to_json() const;
};

}  // namespace parablock
