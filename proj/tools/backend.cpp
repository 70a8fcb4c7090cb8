#include "backend.hpp"

#include <fstream>

#include "parablock/data_pipeline.hpp"
#include "parablock/error.hpp"
#include "parablock/ngram_lm.hpp"

namespace parablock::cli {

namespace {

std::shared_ptr<const NGramLM> load_or_train(const std::string& path, const BackendOptions& options,
                                             std::span<const std::string> extra_vocabulary) {
  if (path.empty()) throw UsageError("backend selector is missing a model or corpus path");
  {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    if (NGramLM::looks_serialized(in)) {
      in.clear();
      in.seekg(0);
      return std::make_shared<const NGramLM>(NGramLM::load(in));
    }
  }
  const auto corpus = read_corpus(path);
  if (corpus.empty()) throw DataError("corpus " + path + " is empty");
  return std::make_shared<const NGramLM>(train_ngram(corpus, options.order, options.smoothing_k, extra_vocabulary));
}

double parse_lambda(const std::string& text) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw UsageError("copyecho weight '" + text + "' is not a number");
  return value;
}

}  // namespace

Backend open_backend(const std::string& selector, const BackendOptions& options,
                     std::span<const std::string> extra_vocabulary) {
  Backend b;
  const auto colon = selector.find(':');
  const std::string kind = selector.substr(0, colon);
  const std::string rest = colon == std::string::npos ? std::string() : selector.substr(colon + 1);
  if (kind == "ngram") {
    b.lm = std::const_pointer_cast<NGramLM>(load_or_train(rest, options, extra_vocabulary));
  } else if (kind == "copyecho") {
    const auto sep = rest.find(':');
    if (sep == std::string::npos) throw UsageError("expected copyecho:LAMBDA:PATH");
    const double lambda = parse_lambda(rest.substr(0, sep));
    try {
      b.lm = std::make_shared<CopyEchoLM>(load_or_train(rest.substr(sep + 1), options, extra_vocabulary), lambda);
    } catch (const ConfigError& e) {
      throw UsageError(e.what());
    }
  } else if (kind == "remote") {
    if (rest.empty()) throw UsageError("expected remote:ENDPOINT");
    b.client = std::make_shared<WireClient>(open_endpoint(rest), options.timeout);
    b.lm = std::make_shared<RemoteLanguageModel>(b.client);
    if (options.remote_embeddings) b.embedder = std::make_shared<RemoteEmbeddingProvider>(b.client, 0);
  } else {
    throw UsageError("unknown backend '" + selector + "' (expected ngram:, copyecho: or remote:)");
  }
  if (!b.embedder) b.embedder = std::make_shared<HashEmbedding>();
  return b;
}

}  // namespace parablock::cli
