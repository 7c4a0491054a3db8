#pragma once

// Test-only oracles and seeded input generators.

#include <algorithm>
#include <array>
#include <cstddef>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "tracealign/aligner.hpp"
#include "tracealign/core.hpp"

namespace tracealign::testing {

inline std::string source_path(const std::string& relative) {
  return std::string(TRACEALIGN_SOURCE_DIR) + "/" + relative;
}

inline std::string letter(std::size_t i) {
  return std::string(1, static_cast<char>('A' + i));
}

inline std::shared_ptr<const EventLog> make_log(
    const std::vector<std::vector<std::string>>& traces) {
  std::vector<Trace> out;
  for (std::size_t i = 0; i < traces.size(); ++i)
    out.push_back(Trace::from_labels("t" + std::to_string(i + 1), traces[i]));
  return std::make_shared<const EventLog>(std::move(out));
}

inline std::shared_ptr<const EventLog> random_log(std::mt19937_64& rng, std::size_t traces,
                                                  std::size_t min_len, std::size_t max_len,
                                                  std::size_t symbols) {
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<std::size_t> sym(0, symbols - 1);
  std::vector<std::vector<std::string>> rows(traces);
  for (auto& r : rows) {
    r.resize(len(rng));
    for (auto& l : r) l = letter(sym(rng));
  }
  return make_log(rows);
}

/// Valid canonical alignment with gaps scattered at random.
inline Alignment random_alignment(std::mt19937_64& rng, std::shared_ptr<const EventLog> log,
                                  std::size_t extra_columns) {
  const std::size_t width = log->max_trace_length() + extra_columns;
  std::vector<CellRow> rows(log->size(), CellRow(width));
  for (std::size_t r = 0; r < log->size(); ++r) {
    std::vector<std::size_t> cols(width);
    for (std::size_t c = 0; c < width; ++c) cols[c] = c;
    std::shuffle(cols.begin(), cols.end(), rng);
    cols.resize((*log)[r].size());
    std::sort(cols.begin(), cols.end());
    for (std::size_t k = 0; k < cols.size(); ++k) rows[r][cols[k]] = Cell::occupied(r, k);
  }
  std::vector<CellRow> compact(log->size());
  for (std::size_t c = 0; c < width; ++c) {
    bool any = false;
    for (const auto& row : rows) any = any || !row[c].is_gap();
    if (!any) continue;
    for (std::size_t r = 0; r < rows.size(); ++r) compact[r].push_back(rows[r][c]);
  }
  return Alignment(std::move(log), std::move(compact));
}

/// Maximum score over every global alignment of x and y, by exhaustive
/// enumeration of edit paths.
inline double brute_force_pairwise(const std::vector<SymbolId>& x, const std::vector<SymbolId>& y,
                                   const ScoringScheme& s, std::size_t i = 0, std::size_t j = 0) {
  if (i == x.size() && j == y.size()) return 0.0;
  double best = -std::numeric_limits<double>::infinity();
  if (i < x.size() && j < y.size())
    best = std::max(best, s(x[i], y[j]) + brute_force_pairwise(x, y, s, i + 1, j + 1));
  if (i < x.size())
    best = std::max(best, s(x[i], kGapSymbol) + brute_force_pairwise(x, y, s, i + 1, j));
  if (j < y.size())
    best = std::max(best, s(kGapSymbol, y[j]) + brute_force_pairwise(x, y, s, i, j + 1));
  return best;
}

/// Optimal sum-of-pairs score of three sequences by full 3-D dynamic
/// programming over all seven column shapes.
inline double three_way_optimum(const std::vector<SymbolId>& a, const std::vector<SymbolId>& b,
                                const std::vector<SymbolId>& c, const ScoringScheme& s) {
  const std::size_t na = a.size(), nb = b.size(), nc = c.size();
  const double neg = -std::numeric_limits<double>::infinity();
  std::vector<double> dp((na + 1) * (nb + 1) * (nc + 1), neg);
  auto at = [&](std::size_t i, std::size_t j, std::size_t k) -> double& {
    return dp[(i * (nb + 1) + j) * (nc + 1) + k];
  };
  at(0, 0, 0) = 0.0;
  for (std::size_t i = 0; i <= na; ++i)
    for (std::size_t j = 0; j <= nb; ++j)
      for (std::size_t k = 0; k <= nc; ++k) {
        if (i + j + k == 0) continue;
        double best = neg;
        for (int mask = 1; mask < 8; ++mask) {
          const bool ua = mask & 1, ub = mask & 2, uc = mask & 4;
          if ((ua && i == 0) || (ub && j == 0) || (uc && k == 0)) continue;
          const double prev = at(i - ua, j - ub, k - uc);
          if (prev == neg) continue;
          const SymbolId x = ua ? a[i - 1] : kGapSymbol;
          const SymbolId y = ub ? b[j - 1] : kGapSymbol;
          const SymbolId z = uc ? c[k - 1] : kGapSymbol;
          best = std::max(best, prev + s(x, y) + s(x, z) + s(y, z));
        }
        at(i, j, k) = best;
      }
  return at(na, nb, nc);
}

inline std::vector<SymbolId> symbols_of(const EventLog& log, std::size_t trace) {
  const auto s = log.symbols(trace);
  return {s.begin(), s.end()};
}

}  // namespace tracealign::testing
