#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>

namespace parablock {

// Inverse document frequency per normalized token key:
//   idf = log((N + 1) / (df + 1)) + 1
// An empty table weights every token 1.
class IdfTable {
 public:
  IdfTable() = default;
  static IdfTable from_document_frequencies(const std::map<std::string, std::size_t>& df,
                                            std::size_t documents);

  // Keys are normalized before lookup; unseen keys get the df = 0 weight.
  double weight(std::string_view token) const;
  double unseen_weight() const { return unseen_; }
  std::size_t documents() const { return documents_; }
  const std::map<std::string, double>& weights() const { return weights_; }
  bool uniform() const { return weights_.empty() && unseen_ == 1.0; }

  // TSV token<TAB>weight, sorted by token, preceded by a "<unk>" row holding
  // the unseen weight. Weights are written with 17 significant digits.
  void save(std::ostream& out) const;
  static IdfTable load(std::istream& in);

 private:
  std::map<std::string, double> weights_;
  double unseen_ = 1.0;
  std::size_t documents_ = 0;
};

}  // namespace parablock
