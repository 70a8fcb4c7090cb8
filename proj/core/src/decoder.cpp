#include "parablock/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "parablock/error.hpp"

namespace parablock {

void DecodeParams::validate() const {
  if (beam_width < 1) throw ConfigError("beam width must be >= 1");
  if (keep_per_dictionary < 1 || keep_per_dictionary > beam_width) {
    throw ConfigError("keep per dictionary must lie in [1, beam width]");
  }
  if (num_dictionaries < 1) throw ConfigError("number of dictionaries must be >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("sampling probability p must lie in [0, 1]");
  if (max_length < 1) throw ConfigError("max length must be >= 1");
  if (mode == DecodeMode::kTopK && top_k < 1) throw ConfigError("top-k needs k >= 1");
  if (mode == DecodeMode::kTopP && !(top_p > 0.0 && top_p <= 1.0)) {
    throw ConfigError("top-p needs 0 < p <= 1");
  }
}

// ---------------------------------------------------------------------------

VocabIndex::VocabIndex(const Vocabulary& vocab) : vocab_(&vocab) {
  norms_.reserve(vocab.size());
  for (TokenId id = 0; id < vocab.size(); ++id) {
    norms_.push_back(normalize(vocab.surface(id)));
    if (!vocab.is_special(id)) by_norm_[norms_.back()].push_back(id);
  }
}

std::span<const TokenId> VocabIndex::with_norm(const std::string& key) const {
  auto it = by_norm_.find(key);
  if (it == by_norm_.end()) return {};
  return it->second;
}

std::vector<TokenId> VocabIndex::ids_of(const std::set<std::string>& forms) const {
  std::vector<TokenId> ids;
  for (const auto& f : forms) {
    if (!vocab_->contains(f)) continue;
    const TokenId id = vocab_->lookup(f);
    if (!vocab_->is_special(id)) ids.push_back(id);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

TokenMask::TokenMask() : always_(std::make_shared<const std::vector<TokenId>>()) {}

TokenMask::TokenMask(const VocabIndex& index, const ActiveBlockDictionary& active) : TokenMask() {
  const auto& entries = active.parent().entries();
  std::unordered_map<TokenId, std::vector<TokenId>> building;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!active.included()[i]) continue;
    const auto blocked = index.ids_of(active.parent().expansion(entries[i].blocked));
    for (TokenId trigger : index.with_norm(entries[i].trigger)) {
      auto& list = building[trigger];
      list.insert(list.end(), blocked.begin(), blocked.end());
    }
  }
  for (auto& [trigger, list] : building) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    triggers_.emplace(trigger, std::make_shared<const std::vector<TokenId>>(std::move(list)));
  }
}

TokenMask::TokenMask(const VocabIndex& index, const std::set<std::string>& forms)
    : always_(std::make_shared<const std::vector<TokenId>>(index.ids_of(forms))) {}

const std::shared_ptr<const std::vector<TokenId>>& TokenMask::blocked_after(TokenId last) const {
  auto it = triggers_.find(last);
  return it == triggers_.end() ? always_ : it->second;
}

// ---------------------------------------------------------------------------

std::vector<ScoredToken> mask_and_renormalize(const NextTokenDistribution& dist,
                                              std::span<const TokenId> blocked) {
  std::vector<ScoredToken> kept;
  kept.reserve(dist.entries.size());
  double max_lp = -std::numeric_limits<double>::infinity();
  for (const auto& e : dist.entries) {
    if (e.logprob == -std::numeric_limits<double>::infinity()) continue;
    if (std::binary_search(blocked.begin(), blocked.end(), e.id)) continue;
    kept.push_back(e);
    max_lp = std::max(max_lp, e.logprob);
  }
  if (kept.empty()) return kept;
  double z = 0.0;
  for (const auto& e : kept) z += std::exp(e.logprob - max_lp);
  const double log_z = max_lp + std::log(z);
  for (auto& e : kept) e.logprob -= log_z;
  return kept;
}

namespace {

struct Expansion {
  std::vector<ScoredToken> survivors;
  std::shared_ptr<const std::vector<TokenId>> blocked;
  bool fallback = false;
};

Expansion expand(LanguageModel& lm, const SourceSequence& source, std::span<const TokenId> tokens,
                 const TokenMask& mask) {
  NextTokenDistribution dist = lm.next_distribution(source, tokens);
  dist.validate();
  Expansion ex;
  ex.blocked = mask.blocked_after(tokens.back());
  ex.survivors = mask_and_renormalize(dist, *ex.blocked);
  if (ex.survivors.empty()) {
    ex.survivors.push_back({lm.vocabulary().eos(), 0.0});
    ex.fallback = true;
  }
  return ex;
}

bool better(const ScoredToken& a, const ScoredToken& b) {
  return a.logprob > b.logprob || (a.logprob == b.logprob && a.id < b.id);
}

ScoredToken sample_from(std::vector<ScoredToken> survivors, const DecodeParams& params, Rng& rng) {
  std::sort(survivors.begin(), survivors.end(), better);
  std::size_t keep = survivors.size();
  if (params.mode == DecodeMode::kTopK) {
    keep = std::min(keep, static_cast<std::size_t>(params.top_k));
  } else {
    double mass = 0.0;
    for (std::size_t i = 0; i < survivors.size(); ++i) {
      mass += std::exp(survivors[i].logprob);
      if (mass >= params.top_p) {
        keep = i + 1;
        break;
      }
    }
  }
  double total = 0.0;
  for (std::size_t i = 0; i < keep; ++i) total += std::exp(survivors[i].logprob);
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < keep; ++i) {
    u -= std::exp(survivors[i].logprob);
    if (u < 0.0) return survivors[i];
  }
  return survivors[keep - 1];
}

Hypothesis extend(const Hypothesis& parent, const ScoredToken& next, const Expansion& ex, TokenId eos) {
  Hypothesis h;
  h.tokens.reserve(parent.tokens.size() + 1);
  h.tokens = parent.tokens;
  h.tokens.push_back(next.id);
  h.cum_logprob = parent.cum_logprob + next.logprob;
  h.finished = next.id == eos;
  h.audit = parent.audit;
  h.audit.push_back({parent.tokens.back(), ex.blocked, ex.fallback});
  return h;
}

Hypothesis root(const LanguageModel& lm) {
  Hypothesis h;
  h.tokens.push_back(lm.vocabulary().bos());
  return h;
}

void require_rng(const DecodeParams& params, Rng* rng) {
  if ((params.mode == DecodeMode::kTopK || params.mode == DecodeMode::kTopP) && rng == nullptr) {
    throw UsageError("sampling modes need a random generator");
  }
}

}  // namespace

std::vector<Hypothesis> step(LanguageModel& lm, const SourceSequence& source, const Hypothesis& hyp,
                             const TokenMask& mask, const DecodeParams& params, Rng* rng) {
  if (hyp.finished) throw UsageError("cannot extend a finished hypothesis");
  if (hyp.tokens.empty()) throw UsageError("hypothesis must start with BOS");
  if (hyp.length() >= static_cast<std::size_t>(params.max_length)) {
    throw UsageError("hypothesis already at max length");
  }
  require_rng(params, rng);
  const Expansion ex = expand(lm, source, hyp.tokens, mask);
  const TokenId eos = lm.vocabulary().eos();
  std::vector<Hypothesis> out;
  switch (params.mode) {
    case DecodeMode::kGreedy:
      out.push_back(extend(hyp, *std::min_element(ex.survivors.begin(), ex.survivors.end(), better),
                           ex, eos));
      break;
    case DecodeMode::kBeam:
      out.reserve(ex.survivors.size());
      for (const auto& s : ex.survivors) out.push_back(extend(hyp, s, ex, eos));
      break;
    case DecodeMode::kTopK:
    case DecodeMode::kTopP:
      out.push_back(extend(hyp, sample_from(ex.survivors, params, *rng), ex, eos));
      break;
  }
  return out;
}

double score(const Hypothesis& hyp, bool length_normalize) {
  if (!length_normalize || hyp.length() == 0) return hyp.cum_logprob;
  return hyp.cum_logprob / static_cast<double>(hyp.length());
}

bool ranks_before(const Hypothesis& a, const Hypothesis& b, bool length_normalize) {
  const double sa = score(a, length_normalize);
  const double sb = score(b, length_normalize);
  if (sa != sb) return sa > sb;
  return a.tokens < b.tokens;
}

namespace {

// Greedy and sampled decodes: one token per step until EOS or max length.
Hypothesis run_single(LanguageModel& lm, const SourceSequence& source, const TokenMask& mask,
                      const DecodeParams& params, Rng* rng) {
  Hypothesis h = root(lm);
  while (!h.finished && h.length() < static_cast<std::size_t>(params.max_length)) {
    h = std::move(step(lm, source, h, mask, params, rng).front());
  }
  return h;
}

std::vector<Hypothesis> run_beam(LanguageModel& lm, const SourceSequence& source, const TokenMask& mask,
                                 const DecodeParams& params) {
  struct Scored {
    std::size_t parent;
    ScoredToken token;
    double cum;
    std::size_t expansion;
  };
  const auto width = static_cast<std::size_t>(params.beam_width);
  const auto max_length = static_cast<std::size_t>(params.max_length);
  const TokenId eos = lm.vocabulary().eos();

  std::vector<Hypothesis> alive{root(lm)};
  std::vector<Hypothesis> finished;
  while (!alive.empty()) {
    std::vector<Expansion> expansions;
    expansions.reserve(alive.size());
    std::vector<Scored> scored;
    for (std::size_t a = 0; a < alive.size(); ++a) {
      expansions.push_back(expand(lm, source, alive[a].tokens, mask));
      for (const auto& s : expansions.back().survivors) {
        scored.push_back({a, s, alive[a].cum_logprob + s.logprob, a});
      }
    }
    // Alive hypotheses share one length, so the raw sum orders them.
    std::stable_sort(scored.begin(), scored.end(),
                     [](const Scored& x, const Scored& y) { return x.cum > y.cum; });

    std::vector<Hypothesis> next_alive;
    const std::size_t considered = std::min(scored.size(), 2 * width);
    for (std::size_t rank = 0; rank < considered && next_alive.size() < width; ++rank) {
      const Scored& s = scored[rank];
      const bool terminal = s.token.id == eos || alive[s.parent].length() + 1 >= max_length;
      if (terminal) {
        // Only terminals ranked inside the beam are accepted.
        if (rank < width) finished.push_back(extend(alive[s.parent], s.token, expansions[s.expansion], eos));
        continue;
      }
      next_alive.push_back(extend(alive[s.parent], s.token, expansions[s.expansion], eos));
    }
    alive = std::move(next_alive);
    if (finished.size() >= width) break;
  }
  std::sort(finished.begin(), finished.end(), [&](const Hypothesis& a, const Hypothesis& b) {
    return ranks_before(a, b, params.length_normalize);
  });
  if (finished.size() > width) finished.resize(width);
  return finished;
}

}  // namespace

std::vector<Hypothesis> decode(LanguageModel& lm, const SourceSequence& source, const TokenMask& mask,
                               const DecodeParams& params, Rng* rng) {
  params.validate();
  require_rng(params, rng);
  switch (params.mode) {
    case DecodeMode::kGreedy:
      return {run_single(lm, source, mask, params, rng)};
    case DecodeMode::kBeam:
      return run_beam(lm, source, mask, params);
    case DecodeMode::kTopK:
    case DecodeMode::kTopP: {
      std::vector<Hypothesis> draws;
      for (int i = 0; i < params.beam_width; ++i) draws.push_back(run_single(lm, source, mask, params, rng));
      std::sort(draws.begin(), draws.end(), [&](const Hypothesis& a, const Hypothesis& b) {
        return ranks_before(a, b, params.length_normalize);
      });
      return draws;
    }
  }
  return {};
}

// ---------------------------------------------------------------------------

GenerationResult generate_candidates(LanguageModel& lm, const SourceSequence& source,
                                     const DecodeParams& params, std::uint64_t seed,
                                     const BlockingResources& resources) {
  params.validate();
  static const WordSet kNoWords;
  static const IdentityMorphology kIdentity;
  const WordSet& closed = resources.closed_class ? *resources.closed_class : kNoWords;
  const MorphologyProvider& morph = resources.morph ? *resources.morph : kIdentity;

  const Vocabulary& vocab = lm.vocabulary();
  SourceSequence src = source;
  vocab.assign(src);
  const VocabIndex index(vocab);

  std::vector<std::string> source_surfaces;
  for (const auto& t : src) source_surfaces.push_back(t.surface);
  const std::string source_text = render(source_surfaces);

  auto dict = std::make_shared<const BlockDictionary>(build_dictionary(src, closed, morph));
  std::optional<TokenMask> static_mask;
  if (params.blocking == BlockingMode::kStatic) {
    static_mask.emplace(index, static_block_set(src, closed, morph));
  }

  const bool deterministic = params.mode == DecodeMode::kGreedy || params.mode == DecodeMode::kBeam;
  const int runs = params.blocking != BlockingMode::kDynamic && deterministic ? 1 : params.num_dictionaries;

  GenerationResult result;
  std::unordered_set<std::string> seen;
  const Rng base(seed);
  for (int d = 0; d < runs; ++d) {
    Rng stream = base.fork(static_cast<std::uint64_t>(d));
    // Drawn in every mode so that sampling streams line up across modes.
    const std::uint64_t dict_seed = stream.next();
    TokenMask mask;
    if (params.blocking == BlockingMode::kDynamic) {
      mask = TokenMask(index, sample_active(dict, params.p, dict_seed));
    } else if (static_mask) {
      mask = *static_mask;
    }
    std::vector<Hypothesis> beams;
    ++result.decodes;
    try {
      beams = decode(lm, src, mask, params, &stream);
    } catch (const BackendError& e) {
      ++result.failed_decodes;
      result.errors.emplace_back(e.what());
      continue;
    }
    const std::size_t keep = std::min(beams.size(), static_cast<std::size_t>(params.keep_per_dictionary));
    for (std::size_t r = 0; r < keep; ++r) {
      Candidate c;
      for (TokenId id : beams[r].tokens) {
        if (id != vocab.bos() && id != vocab.eos()) c.tokens.push_back(vocab.surface(id));
      }
      c.text = render(c.tokens);
      if (c.text.empty() || c.text == source_text || !seen.insert(c.text).second) continue;
      c.model_score = score(beams[r], params.length_normalize);
      c.dictionary = static_cast<std::size_t>(d);
      c.beam_rank = r;
      result.candidates.push_back(std::move(c));
    }
  }
  return result;
}

}  // namespace parablock
