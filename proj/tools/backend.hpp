#pragma once

#include <chrono>
#include <memory>
#include <span>
#include <string>

#include "parablock/embedding.hpp"
#include "parablock/error.hpp"
#include "parablock/language_model.hpp"
#include "parablock/wire.hpp"

namespace parablock::cli {

// Input that is well-formed but unusable, such as an empty corpus.
class DataError : public Error {
 public:
  using Error::Error;
};

struct BackendOptions {
  int order = 3;
  double smoothing_k = 1.0;
  std::chrono::milliseconds timeout = std::chrono::seconds(30);
  bool remote_embeddings = false;
};

struct Backend {
  std::shared_ptr<LanguageModel> lm;
  std::shared_ptr<WireClient> client;  // remote backends only
  std::shared_ptr<const EmbeddingProvider> embedder;
};

// Selectors:
//   ngram:PATH           PATH is a saved model or a corpus to train on
//   copyecho:LAMBDA:PATH same, wrapped in the copy mixture
//   remote:ENDPOINT      tcp:HOST:PORT or exec:COMMAND
// Corpus-trained models also get `extra_vocabulary` so that input words are
// predictable. Throws UsageError on a malformed selector.
Backend open_backend(const std::string& selector, const BackendOptions& options,
                     std::span<const std::string> extra_vocabulary = {});

}  // namespace parablock::cli
