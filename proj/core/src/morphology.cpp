#include "parablock/morphology.hpp"

#include <array>
#include <map>
#include <vector>

namespace parablock {

namespace {

struct Paradigm {
  std::string_view base;
  std::string_view past;
  std::string_view participle;
};

// Irregular verbs: base, simple past, past participle. The third person and
// gerund follow the regular rules.
constexpr std::array kIrregularVerbs = {
    Paradigm{"arise", "arose", "arisen"},   Paradigm{"awake", "awoke", "awoken"},
    Paradigm{"be", "was", "been"},          Paradigm{"bear", "bore", "borne"},
    Paradigm{"beat", "beat", "beaten"},     Paradigm{"become", "became", "become"},
    Paradigm{"begin", "began", "begun"},    Paradigm{"bend", "bent", "bent"},
    Paradigm{"bet", "bet", "bet"},          Paradigm{"bind", "bound", "bound"},
    Paradigm{"bite", "bit", "bitten"},      Paradigm{"bleed", "bled", "bled"},
    Paradigm{"blow", "blew", "blown"},      Paradigm{"break", "broke", "broken"},
    Paradigm{"bring", "brought", "brought"}, Paradigm{"build", "built", "built"},
    Paradigm{"burn", "burnt", "burnt"},     Paradigm{"buy", "bought", "bought"},
    Paradigm{"catch", "caught", "caught"},  Paradigm{"choose", "chose", "chosen"},
    Paradigm{"come", "came", "come"},       Paradigm{"cost", "cost", "cost"},
    Paradigm{"cut", "cut", "cut"},          Paradigm{"deal", "dealt", "dealt"},
    Paradigm{"dig", "dug", "dug"},          Paradigm{"do", "did", "done"},
    Paradigm{"draw", "drew", "drawn"},      Paradigm{"dream", "dreamt", "dreamt"},
    Paradigm{"drink", "drank", "drunk"},    Paradigm{"drive", "drove", "driven"},
    Paradigm{"eat", "ate", "eaten"},        Paradigm{"fall", "fell", "fallen"},
    Paradigm{"feed", "fed", "fed"},         Paradigm{"feel", "felt", "felt"},
    Paradigm{"fight", "fought", "fought"},  Paradigm{"find", "found", "found"},
    Paradigm{"fly", "flew", "flown"},       Paradigm{"forget", "forgot", "forgotten"},
    Paradigm{"forgive", "forgave", "forgiven"}, Paradigm{"freeze", "froze", "frozen"},
    Paradigm{"get", "got", "gotten"},       Paradigm{"give", "gave", "given"},
    Paradigm{"go", "went", "gone"},         Paradigm{"grow", "grew", "grown"},
    Paradigm{"hang", "hung", "hung"},       Paradigm{"have", "had", "had"},
    Paradigm{"hear", "heard", "heard"},     Paradigm{"hide", "hid", "hidden"},
    Paradigm{"hit", "hit", "hit"},          Paradigm{"hold", "held", "held"},
    Paradigm{"hurt", "hurt", "hurt"},       Paradigm{"keep", "kept", "kept"},
    Paradigm{"know", "knew", "known"},      Paradigm{"lay", "laid", "laid"},
    Paradigm{"lead", "led", "led"},         Paradigm{"learn", "learnt", "learnt"},
    Paradigm{"leave", "left", "left"},      Paradigm{"lend", "lent", "lent"},
    Paradigm{"let", "let", "let"},          Paradigm{"lie", "lay", "lain"},
    Paradigm{"lose", "lost", "lost"},       Paradigm{"make", "made", "made"},
    Paradigm{"mean", "meant", "meant"},     Paradigm{"meet", "met", "met"},
    Paradigm{"pay", "paid", "paid"},        Paradigm{"put", "put", "put"},
    Paradigm{"read", "read", "read"},       Paradigm{"ride", "rode", "ridden"},
    Paradigm{"ring", "rang", "rung"},       Paradigm{"rise", "rose", "risen"},
    Paradigm{"run", "ran", "run"},          Paradigm{"say", "said", "said"},
    Paradigm{"see", "saw", "seen"},         Paradigm{"seek", "sought", "sought"},
    Paradigm{"sell", "sold", "sold"},       Paradigm{"send", "sent", "sent"},
    Paradigm{"set", "set", "set"},          Paradigm{"shake", "shook", "shaken"},
    Paradigm{"shine", "shone", "shone"},    Paradigm{"shoot", "shot", "shot"},
    Paradigm{"show", "showed", "shown"},    Paradigm{"shut", "shut", "shut"},
    Paradigm{"sing", "sang", "sung"},       Paradigm{"sink", "sank", "sunk"},
    Paradigm{"sit", "sat", "sat"},          Paradigm{"sleep", "slept", "slept"},
    Paradigm{"speak", "spoke", "spoken"},   Paradigm{"spend", "spent", "spent"},
    Paradigm{"stand", "stood", "stood"},    Paradigm{"steal", "stole", "stolen"},
    Paradigm{"stick", "stuck", "stuck"},    Paradigm{"strike", "struck", "struck"},
    Paradigm{"swim", "swam", "swum"},       Paradigm{"take", "took", "taken"},
    Paradigm{"teach", "taught", "taught"},  Paradigm{"tear", "tore", "torn"},
    Paradigm{"tell", "told", "told"},       Paradigm{"think", "thought", "thought"},
    Paradigm{"throw", "threw", "thrown"},   Paradigm{"understand", "understood", "understood"},
    Paradigm{"wake", "woke", "woken"},      Paradigm{"wear", "wore", "worn"},
    Paradigm{"win", "won", "won"},          Paradigm{"write", "wrote", "written"},
};

constexpr std::array<std::pair<std::string_view, std::string_view>, 12> kIrregularNouns = {{
    {"man", "men"},       {"woman", "women"}, {"child", "children"}, {"person", "people"},
    {"foot", "feet"},     {"tooth", "teeth"}, {"mouse", "mice"},     {"goose", "geese"},
    {"life", "lives"},    {"knife", "knives"}, {"wife", "wives"},    {"leaf", "leaves"},
}};

// Extra forms the regular rules miss for irregular bases.
const std::map<std::string_view, std::vector<std::string_view>>& extra_forms() {
  static const std::map<std::string_view, std::vector<std::string_view>> kExtra = {
      {"be", {"am", "is", "are", "were", "being"}},
      {"have", {"has", "having"}},
      {"do", {"does", "doing"}},
      {"go", {"goes", "going"}},
  };
  return kExtra;
}

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool plain_word(std::string_view key) {
  if (key.size() < 2) return false;
  for (char c : key) {
    if (c < 'a' || c > 'z') return false;
  }
  return true;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

// Short consonant-vowel-consonant words double their final consonant
// ("stop" -> "stopped", "run" -> "running").
bool doubles_final(std::string_view w) {
  if (w.size() < 3 || w.size() > 4) return false;
  const char last = w[w.size() - 1];
  const char mid = w[w.size() - 2];
  const char first = w[w.size() - 3];
  return !is_vowel(last) && last != 'w' && last != 'x' && last != 'y' && is_vowel(mid) &&
         !is_vowel(first);
}

void add_regular(std::string_view w, std::set<std::string>& out) {
  const std::string base(w);
  const bool consonant_y = ends_with(w, "y") && w.size() > 1 && !is_vowel(w[w.size() - 2]);

  // Plural / third person.
  if (ends_with(w, "s") || ends_with(w, "x") || ends_with(w, "z") || ends_with(w, "ch") ||
      ends_with(w, "sh") || ends_with(w, "o")) {
    out.insert(base + "es");
  } else if (consonant_y) {
    out.insert(base.substr(0, base.size() - 1) + "ies");
  } else {
    out.insert(base + "s");
  }

  // Past.
  if (ends_with(w, "e")) {
    out.insert(base + "d");
  } else if (consonant_y) {
    out.insert(base.substr(0, base.size() - 1) + "ied");
  } else {
    out.insert(base + "ed");
    if (doubles_final(w)) out.insert(base + base.back() + "ed");
  }

  // Gerund.
  if (ends_with(w, "ie")) {
    out.insert(base.substr(0, base.size() - 2) + "ying");
  } else if (ends_with(w, "e") && !ends_with(w, "ee") && !ends_with(w, "ye") && !ends_with(w, "oe")) {
    out.insert(base.substr(0, base.size() - 1) + "ing");
  } else {
    out.insert(base + "ing");
    if (doubles_final(w)) out.insert(base + base.back() + "ing");
  }
}

const Paradigm* find_irregular(std::string_view w) {
  for (const auto& p : kIrregularVerbs) {
    if (p.base == w || p.past == w || p.participle == w) return &p;
  }
  for (const auto& [base, forms] : extra_forms()) {
    for (auto f : forms) {
      if (f == w) {
        for (const auto& p : kIrregularVerbs) {
          if (p.base == base) return &p;
        }
      }
    }
  }
  return nullptr;
}

}  // namespace

std::set<std::string> EnglishInflector::inflections(std::string_view key) const {
  std::set<std::string> out{std::string(key)};
  if (!plain_word(key)) return out;

  if (const Paradigm* p = find_irregular(key)) {
    out.emplace(p->base);
    out.emplace(p->past);
    out.emplace(p->participle);
    add_regular(p->base, out);
    if (auto it = extra_forms().find(p->base); it != extra_forms().end()) {
      for (auto f : it->second) out.emplace(f);
    }
    // Regular -ed forms are wrong for irregular verbs.
    std::string base(p->base);
    for (auto wrong : {base + "ed", base + "d", base + base.back() + "ed"}) {
      if (wrong != p->past && wrong != p->participle) out.erase(wrong);
    }
    out.insert(std::string(key));
    return out;
  }
  for (const auto& [singular, plural] : kIrregularNouns) {
    if (key == singular || key == plural) {
      out.emplace(singular);
      out.emplace(plural);
      return out;
    }
  }
  add_regular(key, out);
  return out;
}

}  // namespace parablock
