#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "parablock/decoder.hpp"
#include "parablock/error.hpp"
#include "parablock/ngram_lm.hpp"
#include "support.hpp"

namespace parablock {
namespace {

using testing::train;

double prob(const NextTokenDistribution& d, TokenId id) {
  for (const auto& e : d.entries) {
    if (e.id == id) return std::exp(e.logprob);
  }
  return 0.0;
}

TEST(NGramLM, AddKHandComputation) {
  const auto lm = train({"a b c"}, 2, 1.0);
  const auto& v = lm->vocabulary();
  EXPECT_EQ(lm->predictable_size(), 4u);  // a b c </s>
  const std::vector<TokenId> prefix = {v.bos(), v.lookup("a")};
  const auto d = lm->distribution(prefix);
  EXPECT_NEAR(prob(d, v.lookup("b")), 0.4, 1e-12);
  EXPECT_NEAR(prob(d, v.lookup("c")), 0.2, 1e-12);
  EXPECT_NEAR(d.total_probability(), 1.0, 1e-9);
}

TEST(NGramLM, TrainingCounts) {
  const auto uni = train({"a"}, 1, 1.0);
  const auto& v = uni->vocabulary();
  const std::vector<TokenId> a = {v.lookup("a")};
  const std::vector<TokenId> eos = {v.eos()};
  EXPECT_EQ(uni->count(a), 1u);
  EXPECT_EQ(uni->count(eos), 1u);

  const auto bi = train({"a b", "a b"}, 2, 1.0);
  const auto& bv = bi->vocabulary();
  const std::vector<TokenId> ab = {bv.lookup("a"), bv.lookup("b")};
  EXPECT_EQ(bi->count(ab), 2u);
  const std::vector<TokenId> bos_a = {bv.bos(), bv.lookup("a")};
  EXPECT_EQ(bi->count(bos_a), 2u);
}

TEST(NGramLM, UnigramIgnoresPrefix) {
  const auto lm = train({"x y z", "y z", "z"}, 1, 0.5);
  const auto& v = lm->vocabulary();
  const auto d0 = lm->distribution(std::vector<TokenId>{v.bos()});
  const auto d1 = lm->distribution(std::vector<TokenId>{v.bos(), v.lookup("x"), v.lookup("z")});
  ASSERT_EQ(d0.entries.size(), d1.entries.size());
  for (std::size_t i = 0; i < d0.entries.size(); ++i) EXPECT_EQ(d0.entries[i].logprob, d1.entries[i].logprob);
}

TEST(NGramLM, EveryConditionalSumsToOne) {
  Rng rng(8);
  const auto words = testing::synthetic_words(12);
  std::vector<std::string> corpus;
  for (int i = 0; i < 40; ++i) corpus.push_back(testing::random_sentence(rng, words, 8));
  for (int order : {1, 2, 3, 4}) {
    const auto lm = train(corpus, order, 0.3);
    const auto& v = lm->vocabulary();
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<TokenId> prefix{v.bos()};
      const std::size_t len = rng.next() % 6;
      for (std::size_t i = 0; i < len; ++i) prefix.push_back(lm->predictable()[rng.next() % lm->predictable_size()]);
      const auto d = lm->distribution(prefix);
      ASSERT_NEAR(d.total_probability(), 1.0, 1e-9);
      ASSERT_NO_THROW(d.validate());
    }
  }
}

TEST(NGramLM, Deterministic) {
  const std::vector<std::string> corpus = {"the cat sat", "the dog sat", "a cat ran"};
  const auto a = train(corpus, 3, 1.0);
  const auto b = train(corpus, 3, 1.0);
  const auto& v = a->vocabulary();
  const std::vector<TokenId> prefix = {v.bos(), v.lookup("the")};
  const auto da = a->distribution(prefix);
  const auto db = b->distribution(prefix);
  ASSERT_EQ(da.entries.size(), db.entries.size());
  for (std::size_t i = 0; i < da.entries.size(); ++i) {
    EXPECT_EQ(da.entries[i].id, db.entries[i].id);
    EXPECT_EQ(da.entries[i].logprob, db.entries[i].logprob);
  }
}

TEST(NGramLM, SaveLoadRoundTrip) {
  const auto lm = train({"the cat sat on the mat .", "a dog sat ."}, 3, 0.25);
  std::stringstream buf;
  lm->save(buf);
  EXPECT_TRUE(NGramLM::looks_serialized(buf));
  const NGramLM loaded = NGramLM::load(buf);
  EXPECT_EQ(loaded.order(), 3);
  EXPECT_EQ(loaded.smoothing(), 0.25);
  ASSERT_EQ(loaded.vocabulary().surfaces(), lm->vocabulary().surfaces());
  const auto& v = lm->vocabulary();
  for (const auto* w : {"the", "cat", "sat", "dog"}) {
    const std::vector<TokenId> prefix = {v.bos(), v.lookup(w)};
    const auto d0 = lm->distribution(prefix);
    const auto d1 = loaded.distribution(prefix);
    ASSERT_EQ(d0.entries.size(), d1.entries.size());
    for (std::size_t i = 0; i < d0.entries.size(); ++i) EXPECT_EQ(d0.entries[i].logprob, d1.entries[i].logprob);
  }
  std::stringstream again;
  loaded.save(again);
  std::stringstream first;
  lm->save(first);
  EXPECT_EQ(again.str(), first.str());
}

TEST(NGramLM, RejectsBadConfiguration) {
  EXPECT_THROW(train_ngram(std::vector<std::string>{}, 2, 1.0), ConfigError);
  EXPECT_THROW(train_ngram(std::vector<std::string>{"a"}, 0, 1.0), ConfigError);
  EXPECT_THROW(train_ngram(std::vector<std::string>{"a"}, 2, 0.0), ConfigError);
  std::stringstream junk("not a model\n");
  EXPECT_FALSE(NGramLM::looks_serialized(junk));
  EXPECT_THROW(NGramLM::load(junk), FormatError);
}

TEST(CopyEchoLM, LambdaOnePointMass) {
  const auto bg = train({"x y z"}, 2, 1.0);
  CopyEchoLM lm(bg, 1.0);
  const auto& v = lm.vocabulary();
  const auto src = tokenize("x y");
  const auto d = lm.next_distribution(src, std::vector<TokenId>{v.bos()});
  EXPECT_NEAR(prob(d, v.lookup("x")), 1.0, 1e-12);
  EXPECT_EQ(prob(d, v.lookup("y")), 0.0);
}

TEST(CopyEchoLM, LambdaZeroIsBackground) {
  const auto bg = train({"x y z", "z y"}, 2, 1.0);
  CopyEchoLM lm(bg, 0.0);
  const auto& v = lm.vocabulary();
  const auto src = tokenize("z z y");
  const std::vector<TokenId> prefix = {v.bos(), v.lookup("z")};
  const auto a = lm.next_distribution(src, prefix);
  const auto b = bg->distribution(prefix);
  ASSERT_EQ(a.entries.size(), b.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) EXPECT_EQ(a.entries[i].logprob, b.entries[i].logprob);
}

TEST(CopyEchoLM, MixtureLawExhaustive) {
  // Vocabulary of 13 words + EOS; every prefix up to length 3 over it.
  const auto words = testing::synthetic_words(13);
  Rng rng(77);
  std::vector<std::string> corpus;
  for (int i = 0; i < 30; ++i) corpus.push_back(testing::random_sentence(rng, words, 6));
  const auto bg = train(corpus, 2, 0.5, words);
  const auto& v = bg->vocabulary();
  ASSERT_LE(bg->predictable_size(), 16u);
  const auto src = tokenize("w3 w1 w4 w1 w5");
  for (double lambda : {0.0, 0.3, 0.95, 1.0}) {
    CopyEchoLM lm(bg, lambda);
    std::vector<TokenId> prefix{v.bos()};
    std::function<void(int)> walk = [&](int depth) {
      const auto d = lm.next_distribution(src, prefix);
      const auto bd = bg->distribution(prefix);
      const TokenId pointed = lm.pointed(src, prefix);
      ASSERT_NEAR(d.total_probability(), 1.0, 1e-9);
      for (std::size_t i = 0; i < d.entries.size(); ++i) {
        const double expected = lambda * (d.entries[i].id == pointed ? 1.0 : 0.0) +
                                (1.0 - lambda) * std::exp(bd.entries[i].logprob);
        ASSERT_NEAR(std::exp(d.entries[i].logprob), expected, 1e-12);
      }
      if (depth == 3) return;
      for (TokenId id : bg->predictable()) {
        if (id == v.eos()) continue;
        prefix.push_back(id);
        walk(depth + 1);
        prefix.pop_back();
      }
    };
    walk(0);
  }
}

TEST(CopyEchoLM, PointerAdvancesOnlyOnMatch) {
  const auto bg = train({"a b c"}, 2, 1.0);
  CopyEchoLM lm(bg, 0.9);
  const auto& v = lm.vocabulary();
  const auto src = tokenize("a b c");
  const TokenId a = v.lookup("a"), b = v.lookup("b"), c = v.lookup("c");
  EXPECT_EQ(lm.pointed(src, std::vector<TokenId>{v.bos()}), a);
  EXPECT_EQ(lm.pointed(src, std::vector<TokenId>{v.bos(), a}), b);
  EXPECT_EQ(lm.pointed(src, std::vector<TokenId>{v.bos(), a, c}), b);
  EXPECT_EQ(lm.pointed(src, std::vector<TokenId>{v.bos(), a, c, b}), c);
  EXPECT_EQ(lm.pointed(src, std::vector<TokenId>{v.bos(), a, b, c}), v.eos());
}

TEST(CopyEchoLM, GreedyParrotsAndLambdaZeroIgnoresSource) {
  const auto bg = train({"the cat sat on the mat", "a dog ran home"}, 2, 1.0);
  DecodeParams params;
  params.mode = DecodeMode::kGreedy;
  params.blocking = BlockingMode::kOff;
  for (const char* s : {"the cat sat on the mat", "a dog sat on the mat", "mat the on"}) {
    const auto src = tokenize(s);
    for (double lambda : {0.95, 1.0}) {
      CopyEchoLM lm(bg, lambda);
      const auto hyps = decode(lm, src, TokenMask(), params);
      ASSERT_EQ(hyps.size(), 1u);
      EXPECT_EQ(detokenize(hyps[0].tokens, lm.vocabulary()), s);
      EXPECT_TRUE(hyps[0].finished);
    }
  }
  CopyEchoLM flat(bg, 0.0);
  const auto h1 = decode(flat, tokenize("the cat"), TokenMask(), params);
  const auto h2 = decode(flat, tokenize("a dog ran"), TokenMask(), params);
  EXPECT_EQ(h1[0].tokens, h2[0].tokens);
}

TEST(CopyEchoLM, RejectsBadLambda) {
  const auto bg = train({"a"}, 1, 1.0);
  EXPECT_THROW(make_copy_echo(bg, -0.1), ConfigError);
  EXPECT_THROW(make_copy_echo(bg, 1.5), ConfigError);
  EXPECT_THROW(CopyEchoLM(nullptr, 0.5), ConfigError);
}

TEST(NextTokenDistribution, Validation) {
  NextTokenDistribution d;
  d.coverage = NextTokenDistribution::Coverage::kSparse;
  d.top_k = 2;
  d.entries = {{1, -0.1}, {2, -0.5}};
  EXPECT_NO_THROW(d.validate());
  d.entries = {{1, -0.5}, {2, -0.1}};
  EXPECT_THROW(d.validate(), ProtocolError);
  d.entries = {{1, -0.1}, {2, std::nan("")}};
  EXPECT_THROW(d.validate(), ProtocolError);
  d.entries = {{1, -0.1}, {2, -0.2}, {3, -0.3}};
  EXPECT_THROW(d.validate(), ProtocolError);
}

}  // namespace
}  // namespace parablock
