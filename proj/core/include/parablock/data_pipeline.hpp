#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "parablock/block_dictionary.hpp"
#include "parablock/decoder.hpp"
#include "parablock/embedding.hpp"
#include "parablock/idf.hpp"
#include "parablock/random.hpp"
#include "parablock/token.hpp"

namespace parablock {

// Streams trimmed, nonempty lines from a UTF-8 text file without holding
// the whole file in memory.
class CorpusReader {
 public:
  // Throws IoError if the file cannot be opened.
  explicit CorpusReader(const std::filesystem::path& path);
  // Reads from a caller-owned stream.
  explicit CorpusReader(std::istream& in);

  // Stores the next sentence in `line`; false at end of input. Throws
  // EncodingError (with the 1-based line number) on invalid UTF-8 and
  // IoError on a read failure.
  bool next(std::string& line);
  std::size_t line_number() const { return lineno_; }

 private:
  std::ifstream file_;
  std::istream* in_;
  std::string path_;
  std::size_t lineno_ = 0;
};

std::vector<std::string> read_corpus(const std::filesystem::path& path);

// Document frequency counted per line, over normalized token keys. Throws
// ConfigError on an empty corpus.
IdfTable compute_idf(CorpusReader& corpus);
IdfTable compute_idf(std::span<const std::string> sentences);

enum class CorruptionMode { kUniformDrop, kStopwordDrop };

using SynonymMap = std::unordered_map<std::string, std::string>;

// TSV word<TAB>synonym, keys normalized. Throws IoError / FormatError.
SynonymMap load_synonyms(const std::filesystem::path& path);

struct CorruptionSpec {
  CorruptionMode mode = CorruptionMode::kUniformDrop;
  double rate = 0.3;  // kUniformDrop
  WordSet stopwords;  // kStopwordDrop, normalized
  std::uint64_t seed = 0;
  // Optional replacement of surviving tokens. With a map present, each
  // surviving token that has an entry is swapped with probability
  // synonym_rate. Replacement breaks the subsequence property of the pairs.
  const SynonymMap* synonyms = nullptr;
  double synonym_rate = 0.0;

  // Throws ConfigError.
  void validate() const;
};

// Deletes tokens (never masks them). A draw that removes everything is
// repeated once; a second empty draw is returned as is. Tokens that follow
// a deleted one get a leading space so the result re-tokenizes into the
// same pieces.
SourceSequence corrupt(const SourceSequence& tokens, const CorruptionSpec& spec, Rng& rng);

enum class PairOrigin { kAdaptation, kSelfSupervision };

struct PseudoPair {
  std::string source_text;
  std::string target_text;
  PairOrigin origin = PairOrigin::kAdaptation;
};

// Appends source<TAB>target records to a file. Each record goes out in a
// single write; if a write fails the file is cut back to the last complete
// record and IoError is thrown.
class PairWriter {
 public:
  explicit PairWriter(const std::filesystem::path& path);
  ~PairWriter();
  PairWriter(const PairWriter&) = delete;
  PairWriter& operator=(const PairWriter&) = delete;

  void write(const PseudoPair& pair);
  void close();
  std::size_t written() const { return written_; }

 private:
  int fd_ = -1;
  std::string path_;
  std::size_t committed_bytes_ = 0;
  std::size_t written_ = 0;
};

// Throws IoError / FormatError (missing tab, empty side) / EncodingError.
std::vector<PseudoPair> read_pairs(const std::filesystem::path& path,
                                   PairOrigin origin = PairOrigin::kAdaptation);

// One (corrupted -> original) pair per sentence. Sentence i uses the stream
// Rng(spec.seed).fork(i). Sentences whose corruption is empty even after
// the re-draw are not written. Returns the number of pairs written.
std::size_t emit_adaptation_pairs(CorpusReader& corpus, const CorruptionSpec& spec,
                                  const std::filesystem::path& out);

struct SelfSupCounts {
  std::size_t written = 0;
  std::size_t skipped = 0;  // no paraphrase found
  std::size_t failed = 0;   // every decode failed in the backend
};

struct SelfSupOptions {
  DecodeParams params;
  std::uint64_t seed = 0;
  BlockingResources resources;
  const IdfTable* idf = nullptr;                // null: uniform weights
  const EmbeddingProvider* embedder = nullptr;  // null: hash embeddings
  std::function<void(const std::string&)> warn;
};

// Per-sentence generation seed, shared by the paraphrase CLI so both
// workflows produce the same candidates for the same line.
std::uint64_t sentence_seed(std::uint64_t seed, std::size_t index);

// Runs generate_candidates + rank on every sentence and writes
// (sentence -> top-ranked candidate).
SelfSupCounts emit_selfsup_pairs(LanguageModel& lm, CorpusReader& corpus, const SelfSupOptions& options,
                                 const std::filesystem::path& out);

}  // namespace parablock
