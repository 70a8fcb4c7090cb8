#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

namespace parablock::testing {

std::string data_path(const std::string& name) { return std::string(PARABLOCK_TEST_DATA_DIR) + "/" + name; }

std::string fixture_path(const std::string& name) {
  return std::string(PARABLOCK_TEST_FIXTURE_DIR) + "/" + name;
}

std::vector<std::string> synthetic_words(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("w" + std::to_string(i));
  return out;
}

std::string random_sentence(Rng& rng, const std::vector<std::string>& words, std::size_t max_len) {
  const std::size_t len = 1 + rng.next() % max_len;
  std::string s;
  for (std::size_t i = 0; i < len; ++i) {
    if (i) s += ' ';
    s += words[rng.next() % words.size()];
  }
  return s;
}

std::set<std::string> blocked_forms_after(const ActiveBlockDictionary& active, const std::string& last) {
  std::set<std::string> out;
  const std::string key = normalize(last);
  const auto& entries = active.parent().entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!active.included()[i] || entries[i].trigger != key) continue;
    const auto& forms = active.parent().expansion(entries[i].blocked);
    out.insert(forms.begin(), forms.end());
  }
  return out;
}

std::vector<Violation> blocking_violations(const Hypothesis& hyp, const Vocabulary& vocab,
                                           const ActiveBlockDictionary& active) {
  std::vector<Violation> out;
  for (std::size_t j = 1; j + 1 < hyp.tokens.size(); ++j) {
    const TokenId prev = hyp.tokens[j];
    const TokenId next = hyp.tokens[j + 1];
    if (vocab.is_special(prev) || next == vocab.eos()) continue;
    const auto forms = blocked_forms_after(active, vocab.surface(prev));
    if (forms.contains(vocab.surface(next))) out.push_back({j, vocab.surface(prev), vocab.surface(next)});
  }
  return out;
}

bool audit_consistent(const Hypothesis& hyp) {
  if (hyp.audit.size() + 1 != hyp.tokens.size()) return false;
  for (std::size_t j = 0; j < hyp.audit.size(); ++j) {
    const auto& a = hyp.audit[j];
    if (a.after != hyp.tokens[j]) return false;
    if (a.fallback) continue;
    if (std::find(a.blocked->begin(), a.blocked->end(), hyp.tokens[j + 1]) != a.blocked->end()) return false;
  }
  return true;
}

std::vector<ScoredSequence> enumerate_sequences(LanguageModel& lm, const SourceSequence& source,
                                                const BlockedAfter& blocked_after, int max_length,
                                                bool length_normalize) {
  const Vocabulary& vocab = lm.vocabulary();
  std::vector<ScoredSequence> out;
  std::function<void(std::vector<TokenId>&, double)> walk = [&](std::vector<TokenId>& prefix, double lp) {
    const NextTokenDistribution dist = lm.next_distribution(source, prefix);
    const std::set<std::string> blocked =
        prefix.back() == vocab.bos() ? std::set<std::string>{} : blocked_after(vocab.surface(prefix.back()));
    std::vector<std::pair<TokenId, double>> kept;
    double total = 0.0;
    for (const auto& e : dist.entries) {
      if (e.id != vocab.eos() && blocked.contains(vocab.surface(e.id))) continue;
      const double p = std::exp(e.logprob);
      if (p == 0.0) continue;
      kept.emplace_back(e.id, p);
      total += p;
    }
    if (kept.empty()) {
      kept.emplace_back(vocab.eos(), 1.0);
      total = 1.0;
    }
    for (const auto& [id, p] : kept) {
      prefix.push_back(id);
      const double next_lp = lp + std::log(p / total);
      const auto length = prefix.size() - 1;
      if (id == vocab.eos() || length >= static_cast<std::size_t>(max_length)) {
        const double s = length_normalize ? next_lp / static_cast<double>(length) : next_lp;
        out.push_back({prefix, next_lp, s});
      } else {
        walk(prefix, next_lp);
      }
      prefix.pop_back();
    }
  };
  std::vector<TokenId> prefix{vocab.bos()};
  walk(prefix, 0.0);
  std::sort(out.begin(), out.end(), [](const ScoredSequence& a, const ScoredSequence& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.tokens < b.tokens;
  });
  return out;
}

std::shared_ptr<const NGramLM> train(const std::vector<std::string>& corpus, int order, double k,
                                     const std::vector<std::string>& extra) {
  return std::make_shared<const NGramLM>(train_ngram(corpus, order, k, extra));
}

std::vector<std::string> surfaces_of(const SourceSequence& seq) {
  std::vector<std::string> out;
  for (const auto& t : seq) out.push_back(t.surface);
  return out;
}

}  // namespace parablock::testing

namespace parablock::testing {

namespace {

std::string quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

CommandResult run_cli(const std::vector<std::string>& args, const std::string& input) {
  static int counter = 0;
  const std::string base = std::filesystem::temp_directory_path().string() + "/pbcli_" +
                           std::to_string(::getpid()) + "_" + std::to_string(counter++);
  write_file(base + ".in", input);
  std::string cmd = quote(PARABLOCK_CLI_PATH);
  for (const auto& a : args) cmd += " " + quote(a);
  cmd += " <" + quote(base + ".in") + " >" + quote(base + ".out") + " 2>" + quote(base + ".err");
  const int status = std::system(cmd.c_str());
  CommandResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_file(base + ".out");
  r.err = read_file(base + ".err");
  for (const char* ext : {".in", ".out", ".err"}) std::filesystem::remove(base + ext);
  return r;
}

}  // namespace parablock::testing
