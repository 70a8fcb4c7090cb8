#include <benchmark/benchmark.h>

#include <memory>
#include <string>
#include <vector>

#include "parablock/block_dictionary.hpp"
#include "parablock/data_pipeline.hpp"
#include "parablock/decoder.hpp"
#include "parablock/metrics.hpp"
#include "parablock/morphology.hpp"
#include "parablock/ngram_lm.hpp"
#include "parablock/reranker.hpp"

namespace pb = parablock;

namespace {

const std::vector<std::string>& corpus() {
  static const auto lines = pb::read_corpus(PARABLOCK_BENCH_CORPUS);
  return lines;
}

std::shared_ptr<const pb::NGramLM> model(int order) {
  return std::make_shared<const pb::NGramLM>(pb::train_ngram(corpus(), order, 1.0));
}

void BM_NGramDistribution(benchmark::State& state) {
  auto lm = model(static_cast<int>(state.range(0)));
  const auto src = pb::tokenize(corpus()[0]);
  std::vector<pb::TokenId> prefix{lm->vocabulary().bos()};
  for (const auto& t : src) prefix.push_back(lm->vocabulary().lookup(t.surface));
  for (auto _ : state) benchmark::DoNotOptimize(lm->distribution(prefix));
}
BENCHMARK(BM_NGramDistribution)->Arg(2)->Arg(3)->Arg(4);

void BM_BeamDecode(benchmark::State& state) {
  pb::CopyEchoLM lm(model(3), 0.95);
  const pb::VocabIndex index(lm.vocabulary());
  const auto src = pb::tokenize(corpus()[1]);
  const pb::EnglishInflector english;
  const auto dict = std::make_shared<const pb::BlockDictionary>(
      pb::build_dictionary(src, pb::default_closed_class_words(), english));
  const pb::TokenMask mask(index, pb::sample_active(dict, 0.5, 7));
  pb::DecodeParams params;
  params.beam_width = static_cast<int>(state.range(0));
  params.keep_per_dictionary = 1;
  for (auto _ : state) benchmark::DoNotOptimize(pb::decode(lm, src, mask, params));
}
BENCHMARK(BM_BeamDecode)->Arg(1)->Arg(4)->Arg(16);

void BM_GenerateAndRank(benchmark::State& state) {
  pb::CopyEchoLM lm(model(3), 0.95);
  const pb::EnglishInflector english;
  const pb::BlockingResources resources{&pb::default_closed_class_words(), &english};
  const auto src = pb::tokenize(corpus()[2]);
  std::vector<std::string> words;
  for (const auto& t : src) words.push_back(t.surface);
  const pb::IdfTable idf = pb::compute_idf(corpus());
  const pb::HashEmbedding embedder;
  pb::DecodeParams params;
  for (auto _ : state) {
    auto gen = pb::generate_candidates(lm, src, params, 11, resources);
    benchmark::DoNotOptimize(pb::rank(std::move(gen.candidates), words, idf, embedder));
  }
}
BENCHMARK(BM_GenerateAndRank);

void BM_CorpusBleu(benchmark::State& state) {
  std::vector<pb::TokenList> cands;
  std::vector<std::vector<pb::TokenList>> refs;
  for (std::size_t i = 0; i + 1 < corpus().size(); ++i) {
    pb::TokenList c, r;
    for (const auto& t : pb::tokenize(corpus()[i])) c.push_back(t.surface);
    for (const auto& t : pb::tokenize(corpus()[i + 1])) r.push_back(t.surface);
    cands.push_back(std::move(c));
    refs.push_back({std::move(r)});
  }
  for (auto _ : state) benchmark::DoNotOptimize(pb::corpus_bleu(cands, refs));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cands.size()));
}
BENCHMARK(BM_CorpusBleu);

}  // namespace

BENCHMARK_MAIN();
