#include "tracealign/reference.hpp"

#include <set>
#include <utility>

#include "tracealign/error.hpp"
#include "tracealign/metrics.hpp"

namespace tracealign::reference {

double ref_free_sps(const Alignment& a, const ScoringScheme& s) {
  require_valid(a);
  double total = 0.0;
  for (std::size_t c = 0; c < a.length(); ++c)
    for (std::size_t i = 0; i < a.rows(); ++i)
      for (std::size_t j = i + 1; j < a.rows(); ++j)
        total += s(a.symbol_at(i, c), a.symbol_at(j, c));
  return total;
}

std::map<std::vector<SymbolId>, std::size_t> pattern_counts(const EventLog& log,
                                                            std::size_t min_length,
                                                            std::size_t max_length) {
  std::map<std::vector<SymbolId>, std::size_t> counts;
  for (std::size_t t = 0; t < log.size(); ++t) {
    const auto seq = log.symbols(t);
    for (std::size_t start = 0; start < seq.size(); ++start)
      for (std::size_t len = min_length; len <= max_length && start + len <= seq.size(); ++len)
        ++counts[std::vector<SymbolId>(seq.begin() + static_cast<std::ptrdiff_t>(start),
                                       seq.begin() + static_cast<std::ptrdiff_t>(start + len))];
  }
  return counts;
}

double mean_information_score(const Alignment& a) {
  require_valid(a);
  double sum = 0.0;
  const std::size_t n_types = a.source().alphabet().size();
  for (std::size_t c = 0; c < a.length(); ++c)
    sum += information_score(column_histogram(a, c), n_types);
  return sum / static_cast<double>(a.length());
}

double pairwise_score(const Trace& first, const Trace& second, const ScoringScheme& s) {
  return tracealign::pairwise_align(first, second, s).score;
}

namespace {

using PairSet = std::set<std::pair<OccurrenceId, OccurrenceId>>;

PairSet pairs_of(const Alignment& a) {
  PairSet out;
  for (std::size_t c = 0; c < a.length(); ++c)
    for (std::size_t i = 0; i < a.rows(); ++i)
      for (std::size_t j = i + 1; j < a.rows(); ++j)
        if (!a.at(i, c).is_gap() && !a.at(j, c).is_gap())
          out.emplace(a.at(i, c).occurrence(), a.at(j, c).occurrence());
  return out;
}

}  // namespace

double ref_based_sps(const Alignment& a, const Alignment& ref) {
  require_valid(a);
  require_valid(ref);
  if (!(a.source() == ref.source())) throw MismatchError("different source logs");
  const auto pa = pairs_of(a);
  const auto pr = pairs_of(ref);
  if (pr.empty()) throw DegenerateError("reference has no pairs");
  std::size_t shared = 0;
  for (const auto& p : pr) shared += pa.count(p);
  return static_cast<double>(shared) / static_cast<double>(pr.size());
}

}  // namespace tracealign::reference
