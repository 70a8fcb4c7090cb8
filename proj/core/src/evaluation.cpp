#include "parablock/evaluation.hpp"

#include <algorithm>
#include <fstream>
#include <istream>

#include "parablock/error.hpp"
#include "parablock/reranker.hpp"
#include "parablock/token.hpp"
#include "parablock/utf8.hpp"

namespace parablock {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

TokenList surfaces(const std::string& text) {
  TokenList out;
  for (auto& t : tokenize(text)) out.push_back(std::move(t.surface));
  return out;
}

}  // namespace

std::vector<EvalRow> read_eval_rows(std::istream& in) {
  std::vector<EvalRow> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (collapse_whitespace(line).empty()) continue;
    if (!utf8::is_valid(line)) throw EncodingError("invalid UTF-8", lineno);
    const auto cols = split(line, '\t');
    if (cols.size() != 3) {
      throw FormatError("expected 3 tab-separated columns, found " + std::to_string(cols.size()), lineno);
    }
    EvalRow row{collapse_whitespace(cols[0]), {}, {}};
    if (row.source.empty()) throw FormatError("empty source", lineno);
    for (int c = 1; c <= 2; ++c) {
      auto& target = c == 1 ? row.candidates : row.references;
      for (const auto& field : split(cols[static_cast<std::size_t>(c)], '|')) {
        const std::string text = collapse_whitespace(field);
        if (text.empty()) throw FormatError(c == 1 ? "empty candidate" : "empty reference", lineno);
        target.push_back(text);
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<EvalRow> read_eval_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_eval_rows(in);
}

MetricReport evaluate(const std::vector<EvalRow>& rows, const EvalOptions& options) {
  if (rows.empty()) throw UsageError("evaluation needs at least one row");
  if (!(options.ibleu_alpha >= 0.0 && options.ibleu_alpha <= 1.0)) {
    throw UsageError("iBLEU alpha must lie in [0, 1]");
  }
  static const IdfTable kUniform;
  const HashEmbedding fallback;
  const IdfTable& idf = options.idf ? *options.idf : kUniform;
  const EmbeddingProvider& embedder = options.embedder ? *options.embedder : fallback;

  std::vector<TokenList> sources;
  std::vector<std::vector<TokenList>> candidate_sets;
  std::vector<std::vector<TokenList>> references;
  for (const auto& row : rows) {
    sources.push_back(surfaces(row.source));
    auto& set = candidate_sets.emplace_back();
    for (const auto& c : row.candidates) set.push_back(surfaces(c));
    auto& refs = references.emplace_back();
    for (const auto& r : row.references) refs.push_back(surfaces(r));
  }

  std::vector<TokenList> selected;
  MetricReport report;
  if (options.oracle) {
    OracleSelection sel = oracle_select(candidate_sets, references);
    selected = std::move(sel.selected);
    report.bleu = sel.corpus_score;
  } else {
    for (const auto& set : candidate_sets) selected.push_back(set.front());
    report.bleu = corpus_bleu(selected, references);
  }

  const auto n = static_cast<double>(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const TokenList& cand = selected[i];
    const double sb = self_bleu(cand, sources[i]);
    report.self_bleu += sb;
    double r1 = 0.0, r2 = 0.0, rl = 0.0;
    for (const auto& ref : references[i]) {
      r1 = std::max(r1, rouge_n(cand, ref, 1, options.rouge_mode));
      r2 = std::max(r2, rouge_n(cand, ref, 2, options.rouge_mode));
      rl = std::max(rl, rouge_l(cand, ref, options.rouge_mode));
    }
    report.rouge1 += r1;
    report.rouge2 += r2;
    report.rougeL += rl;
    const double sim = semantic_similarity(cand, sources[i], idf, embedder);
    report.bs_sb += bs_sb(sim, sb);
  }
  report.self_bleu /= n;
  report.rouge1 /= n;
  report.rouge2 /= n;
  report.rougeL /= n;
  report.bs_sb /= n;
  report.ibleu = options.ibleu_alpha * report.bleu - (1.0 - options.ibleu_alpha) * report.self_bleu;
  return report;
}

}  // namespace parablock
