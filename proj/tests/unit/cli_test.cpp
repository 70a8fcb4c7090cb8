#include <gtest/gtest.h>

#include <json.hpp>

#include "support.hpp"

namespace parablock {
namespace {

using testing::run_cli;

std::string temp(const std::string& name) { return ::testing::TempDir() + "pbcli_" + name; }

std::string toy() { return testing::data_path("toy_en.txt"); }

std::string copyecho() { return "copyecho:0.95:" + toy(); }

const std::string kInput = "the old man read a book .\nA tired driver watched the village church with great care .\n";

TEST(Cli, NoArgumentsIsUsageError) {
  EXPECT_EQ(run_cli({}).exit_code, 64);
  EXPECT_EQ(run_cli({"frobnicate"}).exit_code, 64);
  EXPECT_EQ(run_cli({"--help"}).exit_code, 0);
}

TEST(Cli, ParaphraseOutputFormat) {
  const auto r = run_cli({"paraphrase", "--backend", copyecho(), "--seed", "7"}, kInput);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    std::vector<std::string> cols;
    std::istringstream cs(line);
    std::string col;
    while (std::getline(cs, col, '\t')) cols.push_back(col);
    ASSERT_EQ(cols.size(), 4u) << line;
    EXPECT_GE(std::stoi(cols[1]), 1);
    const double score = std::stod(cols[3]);
    EXPECT_GE(score, 0.0);
    EXPECT_LE(score, 1.0);
    EXPECT_NE(cols[2], cols[0]);
  }
  EXPECT_GT(rows, 2);
}

TEST(Cli, ParaphraseDeterministicUnderSeed) {
  const std::vector<std::string> args = {"paraphrase", "--backend", copyecho(), "--seed", "123"};
  const auto a = run_cli(args, kInput);
  const auto b = run_cli(args, kInput);
  ASSERT_EQ(a.exit_code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  auto other = args;
  other.back() = "124";
  EXPECT_NE(run_cli(other, kInput).out, a.out);
}

TEST(Cli, DrawnSeedIsPrinted) {
  const auto r = run_cli({"paraphrase", "--backend", copyecho()}, kInput);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto pos = r.err.find("--seed ");
  ASSERT_NE(pos, std::string::npos) << r.err;
  const std::string seed = r.err.substr(pos + 7, r.err.find(' ', pos + 7) - pos - 7);
  const auto again = run_cli({"paraphrase", "--backend", copyecho(), "--seed", seed}, kInput);
  EXPECT_EQ(again.out, r.out);
}

TEST(Cli, NoParaphraseExitCode) {
  const auto r = run_cli({"paraphrase", "--backend", copyecho(), "--seed", "1", "--p", "0", "--keep", "1"}, kInput);
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_EQ(r.out, "");
  EXPECT_NE(r.err.find("no paraphrase"), std::string::npos);
}

TEST(Cli, BadFlagsAreUsageErrors) {
  EXPECT_EQ(run_cli({"paraphrase", "--backend", copyecho(), "--p", "1.5"}, kInput).exit_code, 64);
  EXPECT_EQ(run_cli({"paraphrase", "--backend", "copyecho:2:" + toy()}, kInput).exit_code, 64);
  EXPECT_EQ(run_cli({"paraphrase", "--backend", "bogus:x"}, kInput).exit_code, 64);
  EXPECT_EQ(run_cli({"paraphrase"}, kInput).exit_code, 64);
  EXPECT_EQ(run_cli({"paraphrase", "--backend", copyecho(), "--mode", "sideways"}, kInput).exit_code, 64);
}

TEST(Cli, IoAndDataErrors) {
  EXPECT_EQ(run_cli({"paraphrase", "--backend", "ngram:/nonexistent/model"}, kInput).exit_code, 66);
  EXPECT_EQ(run_cli({"evaluate", "--input", "/nonexistent/eval.tsv"}).exit_code, 66);
  const auto bad = temp("bad_eval.tsv");
  testing::write_file(bad, "only\ttwo\n");
  EXPECT_EQ(run_cli({"evaluate", "--input", bad}).exit_code, 65);
  const auto empty = temp("empty.txt");
  testing::write_file(empty, "\n\n");
  EXPECT_EQ(run_cli({"corpus-prep", "--corpus", empty}).exit_code, 65);
  const auto invalid = temp("invalid.txt");
  testing::write_file(invalid, "fine\n\xc3\x28\n");
  const auto r = run_cli({"corpus-prep", "--corpus", invalid});
  EXPECT_EQ(r.exit_code, 65);
  EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
}

TEST(Cli, BackendFailureExitCode) {
  const auto r = run_cli({"paraphrase", "--backend", "remote:exec:exit 0", "--timeout", "2"}, kInput);
  EXPECT_EQ(r.exit_code, 69) << r.err;
}

TEST(Cli, EvaluateCopyInput) {
  const auto path = temp("copy_eval.tsv");
  testing::write_file(path,
                      "how do i learn french ?\thow do i learn french ?\twhat is the best way to study french ?\n"
                      "why is the sky blue ?\twhy is the sky blue ?\twhat makes the sky look blue ?\n");
  const auto r = run_cli({"evaluate", "--input", path});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["self_bleu"].get<double>(), 100.0);
  EXPECT_EQ(j["bs_sb"].get<double>(), 0.0);
  EXPECT_NEAR(j["ibleu"].get<double>(), 0.9 * j["bleu"].get<double>() - 10.0, 1e-9);
  for (const char* key : {"bleu", "ibleu", "rouge1", "rouge2", "rougeL", "self_bleu", "bs_sb"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  const auto alpha = nlohmann::json::parse(run_cli({"evaluate", "--input", path, "--ibleu-alpha", "0.5"}).out);
  EXPECT_NEAR(alpha["ibleu"].get<double>(), 0.5 * alpha["bleu"].get<double>() - 50.0, 1e-9);
}

TEST(Cli, CorpusPrepWritesIdf) {
  const auto out = temp("idf.tsv");
  ASSERT_EQ(run_cli({"corpus-prep", "--corpus", toy(), "--out", out}).exit_code, 0);
  const auto text = testing::read_file(out);
  EXPECT_EQ(text.rfind("<unk>\t", 0), 0u);
  EXPECT_EQ(run_cli({"corpus-prep", "--corpus", toy()}).out, text);
  EXPECT_EQ(run_cli({"paraphrase", "--backend", copyecho(), "--seed", "3", "--idf", out}, kInput).exit_code, 0);
}

TEST(Cli, TrainedModelLoadsBack) {
  const auto model = temp("model.ngram");
  ASSERT_EQ(run_cli({"train-lm", "--corpus", toy(), "--order", "3", "--out", model}).exit_code, 0);
  const auto a = run_cli({"paraphrase", "--backend", "copyecho:0.95:" + model, "--seed", "9"}, kInput);
  ASSERT_EQ(a.exit_code, 0) << a.err;
  EXPECT_FALSE(a.out.empty());
}

TEST(Cli, SelfSupGenModes) {
  const auto adapt = temp("adapt.tsv");
  const auto r = run_cli({"selfsup-gen", "--mode", "adaptation", "--corpus", toy(), "--out", adapt, "--seed", "4"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NE(r.out.find("written "), std::string::npos);
  const auto stop = temp("stop.txt");
  testing::write_file(stop, "the\na\nwith\n");
  const auto s = run_cli({"selfsup-gen", "--mode", "adaptation", "--corruption", "stopword", "--stopwords", stop,
                          "--corpus", toy(), "--out", adapt, "--seed", "4"});
  ASSERT_EQ(s.exit_code, 0) << s.err;
  EXPECT_EQ(testing::read_file(adapt).find("\tthe "), std::string::npos);
  const auto self = temp("self.tsv");
  const auto t = run_cli({"selfsup-gen", "--mode", "selfsup", "--backend", copyecho(), "--corpus", toy(), "--out",
                          self, "--seed", "4", "--num-dicts", "3"});
  ASSERT_EQ(t.exit_code, 0) << t.err;
  EXPECT_EQ(run_cli({"selfsup-gen", "--mode", "selfsup", "--corpus", toy(), "--out", self}).exit_code, 64);
}

TEST(Cli, ServeSpeaksProtocol) {
  const auto r = run_cli({"serve", "--backend", "ngram:" + toy(), "--top-k", "5"},
                         "{\"type\":\"hello\",\"version\":1}\n{\"type\":\"next\",\"id\":1,\"source\":[\"a\"],\"prefix\":[]}\n");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  ASSERT_TRUE(std::getline(lines, line));
  EXPECT_EQ(nlohmann::json::parse(line)["type"], "ack");
  ASSERT_TRUE(std::getline(lines, line));
  const auto dist = nlohmann::json::parse(line);
  EXPECT_EQ(dist["type"], "dist");
  EXPECT_EQ(dist["tokens"].size(), 5u);
}

TEST(Cli, RemoteBackendThroughServe) {
  const std::string endpoint = "remote:exec:" + std::string(PARABLOCK_CLI_PATH) + " serve --backend copyecho:0.95:" + toy();
  const auto remote = run_cli({"paraphrase", "--backend", endpoint, "--seed", "5", "--num-dicts", "2"}, kInput);
  ASSERT_EQ(remote.exit_code, 0) << remote.err;
  EXPECT_FALSE(remote.out.empty());
}

}  // namespace
}  // namespace parablock
