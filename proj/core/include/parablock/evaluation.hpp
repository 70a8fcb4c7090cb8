#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "parablock/embedding.hpp"
#include "parablock/idf.hpp"
#include "parablock/metrics.hpp"

namespace parablock {

// One row of an evaluation file:
//   source<TAB>candidate1|candidate2|...<TAB>reference1|reference2|...
struct EvalRow {
  std::string source;
  std::vector<std::string> candidates;
  std::vector<std::string> references;
};

// Throws FormatError (wrong column count, empty field) or EncodingError,
// both carrying the 1-based line number. Blank lines are skipped.
std::vector<EvalRow> read_eval_rows(std::istream& in);
std::vector<EvalRow> read_eval_file(const std::filesystem::path& path);

struct EvalOptions {
  double ibleu_alpha = 0.9;
  bool oracle = false;  // pick the best candidate per row by sentence BLEU
  RougeMode rouge_mode = RougeMode::kF1;
  const IdfTable* idf = nullptr;                // null: uniform weights
  const EmbeddingProvider* embedder = nullptr;  // null: hash embeddings
};

// bleu is corpus BLEU of the selected candidates (the first of each row
// unless oracle is set); self_bleu is the mean sentence self-BLEU against
// the sources; ibleu = alpha * bleu - (1 - alpha) * self_bleu; ROUGE
// scores are per-row maxima over references, averaged; bs_sb is the mean
// per-row BS-SB with similarity measured against the source.
MetricReport evaluate(const std::vector<EvalRow>& rows, const EvalOptions& options = {});

}  // namespace parablock
