#include <CLI11.hpp>
#include <signal.h>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "backend.hpp"
#include "parablock/block_dictionary.hpp"
#include "parablock/data_pipeline.hpp"
#include "parablock/decoder.hpp"
#include "parablock/error.hpp"
#include "parablock/evaluation.hpp"
#include "parablock/idf.hpp"
#include "parablock/morphology.hpp"
#include "parablock/ngram_lm.hpp"
#include "parablock/reranker.hpp"
#include "parablock/wire.hpp"

namespace pb = parablock;
using pb::cli::Backend;
using pb::cli::BackendOptions;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNoParaphrase = 2;
constexpr int kExitUsage = 64;
constexpr int kExitData = 65;
constexpr int kExitIo = 66;
constexpr int kExitBackend = 69;

struct ModelFlags {
  std::string backend;
  BackendOptions options;
  double timeout_s = 30.0;
};

struct DecodeFlags {
  pb::DecodeParams params;
  bool no_length_norm = false;
  std::string closed_class;
  std::string morphology = "english";
  std::string idf;
  std::optional<std::uint64_t> seed;
};

void add_model_flags(CLI::App* app, ModelFlags& f) {
  app->add_option("--backend", f.backend, "ngram:PATH | copyecho:LAMBDA:PATH | remote:ENDPOINT")->required();
  app->add_option("--order", f.options.order, "n-gram order when training from a corpus")
      ->check(CLI::Range(1, 10));
  app->add_option("--smoothing-k", f.options.smoothing_k, "add-k constant when training from a corpus")
      ->check(CLI::PositiveNumber);
  app->add_option("--timeout", f.timeout_s, "seconds to wait for a remote backend")
      ->check(CLI::PositiveNumber);
  app->add_flag("--remote-embeddings", f.options.remote_embeddings,
                "score similarity with the remote backend's embeddings");
}

void add_decode_flags(CLI::App* app, DecodeFlags& f, const std::string& mode_flag) {
  static const std::map<std::string, pb::DecodeMode> kModes = {
      {"greedy", pb::DecodeMode::kGreedy},
      {"beam", pb::DecodeMode::kBeam},
      {"topk", pb::DecodeMode::kTopK},
      {"topp", pb::DecodeMode::kTopP}};
  static const std::map<std::string, pb::BlockingMode> kBlocking = {
      {"dynamic", pb::BlockingMode::kDynamic},
      {"static", pb::BlockingMode::kStatic},
      {"off", pb::BlockingMode::kOff}};
  auto& p = f.params;
  app->add_option("--p", p.p, "probability of keeping each block-dictionary entry")
      ->check(CLI::Range(0.0, 1.0));
  app->add_option("--beam-width", p.beam_width, "beams (or samples) per decode")->check(CLI::PositiveNumber);
  app->add_option("--keep", p.keep_per_dictionary, "candidates kept per sampled dictionary")
      ->check(CLI::PositiveNumber);
  app->add_option("--num-dicts", p.num_dictionaries, "sampled dictionaries per sentence")
      ->check(CLI::PositiveNumber);
  app->add_option("--max-length", p.max_length, "maximum generated tokens")->check(CLI::PositiveNumber);
  app->add_option("--blocking", p.blocking, "dynamic | static | off")
      ->transform(CLI::CheckedTransformer(kBlocking, CLI::ignore_case));
  app->add_option(mode_flag, p.mode, "greedy | beam | topk | topp")
      ->transform(CLI::CheckedTransformer(kModes, CLI::ignore_case));
  app->add_option("--top-k", p.top_k, "k for top-k sampling")->check(CLI::PositiveNumber);
  app->add_option("--top-p", p.top_p, "nucleus mass for top-p sampling")->check(CLI::Range(0.0, 1.0));
  app->add_flag("--no-length-norm", f.no_length_norm, "rank beams by total log-probability");
  app->add_option("--closed-class", f.closed_class,
                  "closed-class word list (default: $PARABLOCK_CLOSED_CLASS, else built in)");
  app->add_option("--morphology", f.morphology, "english | none")->check(CLI::IsMember({"english", "none"}));
  app->add_option("--idf", f.idf, "IDF table for re-ranking (default: uniform)");
  app->add_option("--seed", f.seed, "random seed (default: drawn and printed to stderr)");
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed) {
  if (seed) return *seed;
  std::random_device rd;
  const std::uint64_t drawn = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  std::cerr << "parablock: seed " << drawn << " (pass --seed " << drawn << " to reproduce)\n";
  return drawn;
}

pb::WordSet resolve_closed_class(const std::string& flag) {
  if (!flag.empty()) return pb::load_word_list(flag);
  if (const char* env = std::getenv("PARABLOCK_CLOSED_CLASS"); env != nullptr && *env != '\0') {
    return pb::load_word_list(env);
  }
  return pb::default_closed_class_words();
}

pb::IdfTable resolve_idf(const std::string& path) {
  if (path.empty()) return {};
  std::ifstream in(path, std::ios::binary);
  if (!in) throw pb::IoError("cannot open " + path);
  return pb::IdfTable::load(in);
}

// Sentences from a file, or standard input when the path is empty or "-".
std::vector<std::string> read_inputs(const std::string& path) {
  if (!path.empty() && path != "-") return pb::read_corpus(path);
  pb::CorpusReader reader(std::cin);
  std::vector<std::string> out;
  std::string line;
  while (reader.next(line)) out.push_back(line);
  return out;
}

std::vector<std::string> vocabulary_of(const std::vector<std::string>& sentences) {
  std::vector<std::string> words;
  for (const auto& s : sentences) {
    for (auto& t : pb::tokenize(s)) words.push_back(std::move(t.surface));
  }
  return words;
}

// Buffers output and writes it to --out (or stdout) in one go at the end.
class Output {
 public:
  explicit Output(std::string path) : path_(std::move(path)) {}
  std::ostream& stream() { return buf_; }
  void commit() {
    if (path_.empty() || path_ == "-") {
      std::cout << buf_.str() << std::flush;
      if (!std::cout) throw pb::IoError("writing to standard output failed");
      return;
    }
    std::ofstream out(path_, std::ios::binary | std::ios::trunc);
    if (!out) throw pb::IoError("cannot open " + path_ + " for writing");
    out << buf_.str();
    out.flush();
    if (!out) throw pb::IoError("writing " + path_ + " failed");
  }

 private:
  std::string path_;
  std::ostringstream buf_;
};

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

Backend open_backend(ModelFlags& m, const std::vector<std::string>& extra_vocabulary) {
  m.options.timeout = std::chrono::milliseconds(static_cast<long long>(m.timeout_s * 1000.0));
  return pb::cli::open_backend(m.backend, m.options, extra_vocabulary);
}

// --- paraphrase -------------------------------------------------------------

struct ParaphraseArgs {
  ModelFlags model;
  DecodeFlags decode;
  std::string input;
  std::string out;
};

int run_paraphrase(ParaphraseArgs& a) {
  auto& params = a.decode.params;
  params.length_normalize = !a.decode.no_length_norm;
  params.validate();
  const std::uint64_t seed = resolve_seed(a.decode.seed);
  const auto sentences = read_inputs(a.input);
  const pb::WordSet closed = resolve_closed_class(a.decode.closed_class);
  const pb::IdfTable idf = resolve_idf(a.decode.idf);
  const pb::EnglishInflector english;
  const pb::IdentityMorphology identity;
  const pb::BlockingResources resources{
      &closed, a.decode.morphology == "english" ? static_cast<const pb::MorphologyProvider*>(&english) : &identity};

  Backend backend = open_backend(a.model, vocabulary_of(sentences));
  Output out(a.out);
  bool any_empty = false;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const pb::SourceSequence source = pb::tokenize(sentences[i]);
    const pb::GenerationResult gen =
        pb::generate_candidates(*backend.lm, source, params, pb::sentence_seed(seed, i), resources);
    if (gen.decodes > 0 && gen.failed_decodes == gen.decodes) {
      throw pb::BackendError(gen.errors.empty() ? "backend failed" : gen.errors.front());
    }
    for (const auto& e : gen.errors) std::cerr << "parablock: warning: sentence " << i + 1 << ": " << e << '\n';
    if (gen.no_paraphrase()) {
      any_empty = true;
      std::cerr << "parablock: no paraphrase found for sentence " << i + 1 << '\n';
      continue;
    }
    std::vector<std::string> surfaces;
    for (const auto& t : source) surfaces.push_back(t.surface);
    const auto ranked = pb::rank(gen.candidates, surfaces, idf, *backend.embedder);
    const std::string src_text = pb::detokenize(source);
    for (std::size_t r = 0; r < ranked.size(); ++r) {
      out.stream() << src_text << '\t' << r + 1 << '\t' << ranked[r].text << '\t' << fixed6(ranked[r].rank_score)
                   << '\n';
    }
  }
  out.commit();
  return any_empty ? kExitNoParaphrase : kExitOk;
}

// --- evaluate ---------------------------------------------------------------

struct EvaluateArgs {
  std::string input;
  bool oracle = false;
  double alpha = 0.9;
  std::string idf;
  bool rouge_recall = false;
  std::string embeddings;
  double timeout_s = 30.0;
  std::string out;
};

int run_evaluate(EvaluateArgs& a) {
  const auto rows = pb::read_eval_file(a.input);
  if (rows.empty()) throw pb::cli::DataError("evaluation file " + a.input + " has no rows");
  const pb::IdfTable idf = resolve_idf(a.idf);
  std::shared_ptr<pb::WireClient> client;
  std::unique_ptr<pb::EmbeddingProvider> remote;
  if (!a.embeddings.empty()) {
    client = std::make_shared<pb::WireClient>(
        pb::open_endpoint(a.embeddings), std::chrono::milliseconds(static_cast<long long>(a.timeout_s * 1000.0)));
    remote = std::make_unique<pb::RemoteEmbeddingProvider>(client, 0);
  }
  pb::EvalOptions opts;
  opts.ibleu_alpha = a.alpha;
  opts.oracle = a.oracle;
  opts.rouge_mode = a.rouge_recall ? pb::RougeMode::kRecall : pb::RougeMode::kF1;
  opts.idf = &idf;
  opts.embedder = remote.get();
  Output out(a.out);
  out.stream() << pb::evaluate(rows, opts).to_json() << '\n';
  out.commit();
  return kExitOk;
}

// --- corpus-prep ------------------------------------------------------------

struct CorpusPrepArgs {
  std::string corpus;
  std::string out;
};

int run_corpus_prep(CorpusPrepArgs& a) {
  pb::CorpusReader reader(a.corpus);
  pb::IdfTable idf;
  try {
    idf = pb::compute_idf(reader);
  } catch (const pb::ConfigError& e) {
    throw pb::cli::DataError(e.what());
  }
  Output out(a.out);
  idf.save(out.stream());
  out.commit();
  return kExitOk;
}

// --- selfsup-gen ------------------------------------------------------------

struct SelfsupArgs {
  std::string mode;
  std::string corpus;
  std::string out;
  std::string corruption = "uniform";
  double rate = 0.3;
  std::string stopwords;
  std::string synonyms;
  double synonym_rate = 0.0;
  ModelFlags model;
  DecodeFlags decode;
};

int run_selfsup(SelfsupArgs& a) {
  const std::uint64_t seed = resolve_seed(a.decode.seed);
  if (a.mode == "adaptation") {
    pb::CorruptionSpec spec;
    spec.mode = a.corruption == "stopword" ? pb::CorruptionMode::kStopwordDrop : pb::CorruptionMode::kUniformDrop;
    spec.rate = a.rate;
    spec.seed = seed;
    if (spec.mode == pb::CorruptionMode::kStopwordDrop) {
      if (a.stopwords.empty()) throw pb::UsageError("--corruption stopword needs --stopwords");
      spec.stopwords = pb::load_word_list(a.stopwords);
    }
    pb::SynonymMap synonyms;
    if (!a.synonyms.empty()) {
      synonyms = pb::load_synonyms(a.synonyms);
      spec.synonyms = &synonyms;
      spec.synonym_rate = a.synonym_rate;
    }
    spec.validate();
    pb::CorpusReader reader(a.corpus);
    const std::size_t written = pb::emit_adaptation_pairs(reader, spec, a.out);
    std::cout << "written " << written << " skipped 0 failed 0\n";
    return kExitOk;
  }

  if (a.model.backend.empty()) throw pb::UsageError("--mode selfsup needs --backend");
  auto& params = a.decode.params;
  params.length_normalize = !a.decode.no_length_norm;
  params.validate();
  const pb::WordSet closed = resolve_closed_class(a.decode.closed_class);
  const pb::IdfTable idf = resolve_idf(a.decode.idf);
  const pb::EnglishInflector english;
  const pb::IdentityMorphology identity;

  Backend backend = open_backend(a.model, vocabulary_of(pb::read_corpus(a.corpus)));
  pb::SelfSupOptions opts;
  opts.params = params;
  opts.seed = seed;
  opts.resources = {&closed,
                    a.decode.morphology == "english" ? static_cast<const pb::MorphologyProvider*>(&english)
                                                     : &identity};
  opts.idf = &idf;
  opts.embedder = backend.embedder.get();
  opts.warn = [](const std::string& msg) { std::cerr << "parablock: warning: " << msg << '\n'; };
  pb::CorpusReader reader(a.corpus);
  const pb::SelfSupCounts counts = pb::emit_selfsup_pairs(*backend.lm, reader, opts, a.out);
  std::cout << "written " << counts.written << " skipped " << counts.skipped << " failed " << counts.failed
            << '\n';
  return kExitOk;
}

// --- train-lm ---------------------------------------------------------------

struct TrainArgs {
  std::string corpus;
  int order = 3;
  double k = 1.0;
  std::string out;
};

int run_train(TrainArgs& a) {
  const auto corpus = pb::read_corpus(a.corpus);
  if (corpus.empty()) throw pb::cli::DataError("corpus " + a.corpus + " is empty");
  const pb::NGramLM lm = pb::train_ngram(corpus, a.order, a.k);
  Output out(a.out);
  lm.save(out.stream());
  out.commit();
  return kExitOk;
}

// --- serve ------------------------------------------------------------------

struct ServeArgs {
  ModelFlags model;
  std::size_t top_k = pb::kDefaultTopK;
};

int run_serve(ServeArgs& a) {
  if (a.model.backend.rfind("remote:", 0) == 0) throw pb::UsageError("serve needs a local backend");
  Backend backend = open_backend(a.model, {});
  pb::FdChannel channel(0, 1, false);
  pb::serve(*backend.lm, backend.embedder.get(), channel, pb::ServeOptions{a.top_k});
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  // A backend child that exits early must surface as a transport error.
  ::signal(SIGPIPE, SIG_IGN);
  CLI::App app{"Paraphrase generation with Dynamic Blocking, plus evaluation and data tools", "parablock"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "parablock 0.1.0");

  ParaphraseArgs para;
  auto* cmd_para = app.add_subcommand("paraphrase", "Generate ranked paraphrases, one input sentence per line");
  add_model_flags(cmd_para, para.model);
  add_decode_flags(cmd_para, para.decode, "--mode");
  cmd_para->add_option("--input,input", para.input, "input file (default: standard input)");
  cmd_para->add_option("--out", para.out, "output TSV (default: standard output)");

  EvaluateArgs eval;
  auto* cmd_eval = app.add_subcommand("evaluate", "Score source<TAB>candidates<TAB>references rows");
  cmd_eval->add_option("--input,input", eval.input, "evaluation TSV")->required();
  cmd_eval->add_flag("--oracle", eval.oracle, "pick the best candidate per row by sentence BLEU");
  cmd_eval->add_option("--ibleu-alpha", eval.alpha, "iBLEU weight on BLEU")->check(CLI::Range(0.0, 1.0));
  cmd_eval->add_option("--idf", eval.idf, "IDF table for the similarity score");
  cmd_eval->add_flag("--rouge-recall", eval.rouge_recall, "report ROUGE recall instead of F1");
  cmd_eval->add_option("--embeddings", eval.embeddings, "remote embedding endpoint (default: hash embeddings)");
  cmd_eval->add_option("--timeout", eval.timeout_s, "seconds to wait for the embedding endpoint")
      ->check(CLI::PositiveNumber);
  cmd_eval->add_option("--out", eval.out, "output JSON (default: standard output)");

  CorpusPrepArgs prep;
  auto* cmd_prep = app.add_subcommand("corpus-prep", "Compute an IDF table from a corpus");
  cmd_prep->add_option("--corpus,corpus", prep.corpus, "one sentence per line")->required();
  cmd_prep->add_option("--out", prep.out, "output TSV (default: standard output)");

  SelfsupArgs self;
  auto* cmd_self = app.add_subcommand("selfsup-gen", "Write adaptation or self-supervision training pairs");
  cmd_self->add_option("--mode", self.mode, "adaptation | selfsup")
      ->required()
      ->check(CLI::IsMember({"adaptation", "selfsup"}));
  cmd_self->add_option("--corpus,corpus", self.corpus, "one sentence per line")->required();
  cmd_self->add_option("--out", self.out, "output pair TSV")->required();
  cmd_self->add_option("--corruption", self.corruption, "uniform | stopword")
      ->check(CLI::IsMember({"uniform", "stopword"}));
  cmd_self->add_option("--rate", self.rate, "uniform deletion rate")->check(CLI::Range(0.0, 1.0));
  cmd_self->add_option("--stopwords", self.stopwords, "stopword list for --corruption stopword");
  cmd_self->add_option("--synonyms", self.synonyms, "word<TAB>synonym file");
  cmd_self->add_option("--synonym-rate", self.synonym_rate, "replacement probability")
      ->check(CLI::Range(0.0, 1.0));
  cmd_self->add_option("--backend", self.model.backend, "backend for --mode selfsup");
  cmd_self->add_option("--order", self.model.options.order)->check(CLI::Range(1, 10));
  cmd_self->add_option("--smoothing-k", self.model.options.smoothing_k)->check(CLI::PositiveNumber);
  cmd_self->add_option("--timeout", self.model.timeout_s)->check(CLI::PositiveNumber);
  cmd_self->add_flag("--remote-embeddings", self.model.options.remote_embeddings);
  add_decode_flags(cmd_self, self.decode, "--decode-mode");

  TrainArgs train;
  auto* cmd_train = app.add_subcommand("train-lm", "Train and save an n-gram model");
  cmd_train->add_option("--corpus,corpus", train.corpus, "one sentence per line")->required();
  cmd_train->add_option("--order", train.order, "n-gram order")->check(CLI::Range(1, 10));
  cmd_train->add_option("--smoothing-k", train.k, "add-k constant")->check(CLI::PositiveNumber);
  cmd_train->add_option("--out", train.out, "model file (default: standard output)");

  ServeArgs serve;
  auto* cmd_serve = app.add_subcommand("serve", "Answer the backend wire protocol on stdin/stdout");
  add_model_flags(cmd_serve, serve.model);
  cmd_serve->add_option("--top-k", serve.top_k, "entries per response")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*cmd_para) return run_paraphrase(para);
    if (*cmd_eval) return run_evaluate(eval);
    if (*cmd_prep) return run_corpus_prep(prep);
    if (*cmd_self) return run_selfsup(self);
    if (*cmd_train) return run_train(train);
    if (*cmd_serve) return run_serve(serve);
  } catch (const pb::UsageError& e) {
    std::cerr << "parablock: " << e.what() << "\nRun with --help for usage.\n";
    return kExitUsage;
  } catch (const pb::ConfigError& e) {
    std::cerr << "parablock: " << e.what() << "\nRun with --help for usage.\n";
    return kExitUsage;
  } catch (const pb::FormatError& e) {
    std::cerr << "parablock: " << e.what() << '\n';
    return kExitData;
  } catch (const pb::EncodingError& e) {
    std::cerr << "parablock: " << e.what() << '\n';
    return kExitData;
  } catch (const pb::ScoringError& e) {
    std::cerr << "parablock: " << e.what() << '\n';
    return kExitData;
  } catch (const pb::cli::DataError& e) {
    std::cerr << "parablock: " << e.what() << '\n';
    return kExitData;
  } catch (const pb::IoError& e) {
    std::cerr << "parablock: " << e.what() << '\n';
    return kExitIo;
  } catch (const pb::BackendError& e) {
    std::cerr << "parablock: backend failure: " << e.what() << '\n';
    return kExitBackend;
  }
  return kExitUsage;
}
