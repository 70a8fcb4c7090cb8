#include "parablock/idf.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

#include "parablock/error.hpp"
#include "parablock/token.hpp"

namespace parablock {

namespace {

double idf_formula(std::size_t df, std::size_t n) {
  return std::log(static_cast<double>(n + 1) / static_cast<double>(df + 1)) + 1.0;
}

std::string format_weight(double w) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", w);
  return buf;
}

}  // namespace

IdfTable IdfTable::from_document_frequencies(const std::map<std::string, std::size_t>& df,
                                             std::size_t documents) {
  IdfTable t;
  t.documents_ = documents;
  t.unseen_ = idf_formula(0, documents);
  for (const auto& [key, count] : df) t.weights_[key] = idf_formula(count, documents);
  return t;
}

double IdfTable::weight(std::string_view token) const {
  if (weights_.empty()) return unseen_;
  auto it = weights_.find(normalize(token));
  return it == weights_.end() ? unseen_ : it->second;
}

void IdfTable::save(std::ostream& out) const {
  out << kUnkSurface << '\t' << format_weight(unseen_) << '\n';
  for (const auto& [key, w] : weights_) out << key << '\t' << format_weight(w) << '\n';
}

IdfTable IdfTable::load(std::istream& in) {
  IdfTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw FormatError("IDF row needs token<TAB>weight", lineno);
    const std::string key = line.substr(0, tab);
    double w = 0.0;
    try {
      std::size_t used = 0;
      w = std::stod(line.substr(tab + 1), &used);
      if (used != line.size() - tab - 1) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw FormatError("unparsable IDF weight", lineno);
    }
    if (!(w > 0.0) || !std::isfinite(w)) throw FormatError("IDF weight must be positive", lineno);
    if (key == kUnkSurface) {
      t.unseen_ = w;
    } else {
      t.weights_[normalize(key)] = w;
    }
  }
  return t;
}

}  // namespace parablock
