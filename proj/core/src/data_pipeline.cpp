#include "parablock/data_pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <istream>
#include <map>
#include <set>

#include "parablock/error.hpp"
#include "parablock/reranker.hpp"
#include "parablock/utf8.hpp"

namespace parablock {

namespace {

std::string_view trim(std::string_view s) {
  constexpr std::string_view kWs = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(kWs);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(kWs);
  return s.substr(b, e - b + 1);
}

std::string sentence_text(const SourceSequence& tokens) { return detokenize(tokens); }

}  // namespace

CorpusReader::CorpusReader(const std::filesystem::path& path) : path_(path.string()) {
  file_.open(path, std::ios::binary);
  if (!file_) throw IoError("cannot open " + path_ + ": " + std::strerror(errno));
  in_ = &file_;
}

CorpusReader::CorpusReader(std::istream& in) : in_(&in), path_("<stream>") {}

bool CorpusReader::next(std::string& line) {
  std::string raw;
  while (std::getline(*in_, raw)) {
    ++lineno_;
    if (!utf8::is_valid(raw)) throw EncodingError(path_ + ": invalid UTF-8", lineno_);
    const auto t = trim(raw);
    if (t.empty()) continue;
    line.assign(t);
    return true;
  }
  if (in_->bad()) throw IoError("read error in " + path_);
  return false;
}

std::vector<std::string> read_corpus(const std::filesystem::path& path) {
  CorpusReader reader(path);
  std::vector<std::string> out;
  std::string line;
  while (reader.next(line)) out.push_back(line);
  return out;
}

namespace {

template <typename Next>
IdfTable idf_from(Next&& next) {
  std::map<std::string, std::size_t> df;
  std::size_t documents = 0;
  std::string line;
  while (next(line)) {
    ++documents;
    std::set<std::string> seen;
    for (const auto& t : tokenize(line)) seen.insert(t.norm);
    for (const auto& key : seen) ++df[key];
  }
  if (documents == 0) throw ConfigError("cannot compute IDF weights from an empty corpus");
  return IdfTable::from_document_frequencies(df, documents);
}

}  // namespace

IdfTable compute_idf(CorpusReader& corpus) {
  return idf_from([&](std::string& line) { return corpus.next(line); });
}

IdfTable compute_idf(std::span<const std::string> sentences) {
  std::size_t i = 0;
  return idf_from([&](std::string& line) {
    while (i < sentences.size()) {
      const auto t = trim(sentences[i++]);
      if (!t.empty()) {
        line.assign(t);
        return true;
      }
    }
    return false;
  });
}

SynonymMap load_synonyms(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + ": " + std::strerror(errno));
  SynonymMap out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty()) continue;
    const auto tab = t.find('\t');
    if (tab == std::string_view::npos) throw FormatError("synonym row needs word<TAB>synonym", lineno);
    const auto word = trim(t.substr(0, tab));
    const auto syn = trim(t.substr(tab + 1));
    if (word.empty() || syn.empty()) throw FormatError("empty synonym field", lineno);
    out.emplace(normalize(word), std::string(syn));
  }
  return out;
}

void CorruptionSpec::validate() const {
  if (mode == CorruptionMode::kUniformDrop && !(rate >= 0.0 && rate <= 1.0)) {
    throw ConfigError("corruption rate must lie in [0, 1]");
  }
  if (mode == CorruptionMode::kStopwordDrop && stopwords.empty()) {
    throw ConfigError("stopword corruption needs a nonempty stopword list");
  }
  if (!(synonym_rate >= 0.0 && synonym_rate <= 1.0)) {
    throw ConfigError("synonym rate must lie in [0, 1]");
  }
}

namespace {

SourceSequence drop_once(const SourceSequence& tokens, const CorruptionSpec& spec, Rng& rng) {
  SourceSequence out;
  bool dropped_previous = false;
  for (const auto& t : tokens) {
    bool drop = false;
    if (spec.mode == CorruptionMode::kUniformDrop) {
      drop = rng.uniform() < spec.rate;
    } else {
      drop = spec.stopwords.contains(t.norm);
    }
    if (drop) {
      dropped_previous = true;
      continue;
    }
    Token kept = t;
    if (dropped_previous) kept.space_before = true;
    dropped_previous = false;
    out.push_back(std::move(kept));
  }
  return out;
}

}  // namespace

SourceSequence corrupt(const SourceSequence& tokens, const CorruptionSpec& spec, Rng& rng) {
  spec.validate();
  SourceSequence out = drop_once(tokens, spec, rng);
  if (out.empty() && !tokens.empty()) out = drop_once(tokens, spec, rng);
  if (spec.synonyms != nullptr && spec.synonym_rate > 0.0) {
    for (auto& t : out) {
      auto it = spec.synonyms->find(t.norm);
      if (it == spec.synonyms->end()) continue;
      if (rng.uniform() < spec.synonym_rate) {
        t.surface = it->second;
        t.norm = normalize(t.surface);
      }
    }
  }
  return out;
}

PairWriter::PairWriter(const std::filesystem::path& path) : path_(path.string()) {
  fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd_ < 0) throw IoError("cannot open " + path_ + " for writing: " + std::strerror(errno));
}

PairWriter::~PairWriter() {
  if (fd_ >= 0) ::close(fd_);
}

void PairWriter::write(const PseudoPair& pair) {
  if (fd_ < 0) throw IoError("pair file " + path_ + " is closed");
  for (const auto* side : {&pair.source_text, &pair.target_text}) {
    if (side->find_first_of("\t\n\r") != std::string::npos) {
      throw UsageError("pair text must not contain tabs or newlines");
    }
  }
  const std::string record = pair.source_text + '\t' + pair.target_text + '\n';
  std::size_t done = 0;
  while (done < record.size()) {
    const ssize_t n = ::write(fd_, record.data() + done, record.size() - done);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      const std::string reason = n < 0 ? std::strerror(errno) : "short write";
      [[maybe_unused]] const int rc = ::ftruncate(fd_, static_cast<off_t>(committed_bytes_));
      throw IoError("writing " + path_ + " failed: " + reason);
    }
    done += static_cast<std::size_t>(n);
  }
  committed_bytes_ += record.size();
  ++written_;
}

void PairWriter::close() {
  if (fd_ < 0) return;
  const int rc = ::close(fd_);
  fd_ = -1;
  if (rc != 0) throw IoError("closing " + path_ + " failed: " + std::strerror(errno));
}

std::vector<PseudoPair> read_pairs(const std::filesystem::path& path, PairOrigin origin) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + ": " + std::strerror(errno));
  std::vector<PseudoPair> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (!utf8::is_valid(line)) throw EncodingError(path.string() + ": invalid UTF-8", lineno);
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw FormatError("pair row needs exactly source<TAB>target", lineno);
    }
    PseudoPair p{line.substr(0, tab), line.substr(tab + 1), origin};
    if (p.source_text.empty() || p.target_text.empty()) throw FormatError("empty side in pair row", lineno);
    out.push_back(std::move(p));
  }
  return out;
}

std::size_t emit_adaptation_pairs(CorpusReader& corpus, const CorruptionSpec& spec,
                                  const std::filesystem::path& out) {
  spec.validate();
  PairWriter writer(out);
  const Rng base(spec.seed);
  std::string line;
  std::size_t index = 0;
  while (corpus.next(line)) {
    Rng rng = base.fork(index++);
    const SourceSequence original = tokenize(line);
    const SourceSequence corrupted = corrupt(original, spec, rng);
    if (corrupted.empty()) continue;
    writer.write({sentence_text(corrupted), sentence_text(original), PairOrigin::kAdaptation});
  }
  writer.close();
  return writer.written();
}

std::uint64_t sentence_seed(std::uint64_t seed, std::size_t index) {
  return Rng(seed).fork(index).next();
}

SelfSupCounts emit_selfsup_pairs(LanguageModel& lm, CorpusReader& corpus, const SelfSupOptions& options,
                                 const std::filesystem::path& out) {
  options.params.validate();
  static const IdfTable kUniform;
  const HashEmbedding fallback_embedder;
  const IdfTable& idf = options.idf ? *options.idf : kUniform;
  const EmbeddingProvider& embedder = options.embedder ? *options.embedder : fallback_embedder;

  PairWriter writer(out);
  SelfSupCounts counts;
  std::string line;
  std::size_t index = 0;
  while (corpus.next(line)) {
    const SourceSequence source = tokenize(line);
    const GenerationResult gen =
        generate_candidates(lm, source, options.params, sentence_seed(options.seed, index++), options.resources);
    if (gen.decodes > 0 && gen.failed_decodes == gen.decodes) {
      ++counts.failed;
      if (options.warn) {
        options.warn("line " + std::to_string(corpus.line_number()) + ": backend failed: " +
                     (gen.errors.empty() ? std::string("unknown error") : gen.errors.front()));
      }
      continue;
    }
    if (gen.no_paraphrase()) {
      ++counts.skipped;
      continue;
    }
    std::vector<std::string> surfaces;
    for (const auto& t : source) surfaces.push_back(t.surface);
    const auto ranked = rank(gen.candidates, surfaces, idf, embedder);
    writer.write({sentence_text(source), ranked.front().text, PairOrigin::kSelfSupervision});
  }
  writer.close();
  counts.written = writer.written();
  return counts;
}

}  // namespace parablock
