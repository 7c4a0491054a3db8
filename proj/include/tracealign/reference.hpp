#pragma once

// Straightforward serial implementations of the optimized kernels. They take
// a different algorithmic route and exist to cross-check the kernels in tests
// and benchmarks.

#include <cstddef>
#include <map>
#include <vector>

#include "tracealign/aligner.hpp"
#include "tracealign/core.hpp"

namespace tracealign::reference {

/// Explicit enumeration of every row pair in every column.
double ref_free_sps(const Alignment& alignment, const ScoringScheme& scheme = {});

/// Every contiguous subsequence counted in an ordered map.
std::map<std::vector<SymbolId>, std::size_t> pattern_counts(const EventLog& log,
                                                            std::size_t min_length,
                                                            std::size_t max_length);

/// Mean of per-column information scores.
double mean_information_score(const Alignment& alignment);

/// Full-matrix DP score, for checking the linear-memory kernel.
double pairwise_score(const Trace& first, const Trace& second,
                      const ScoringScheme& scheme = {});

/// Pair-set based ref-based SPS.
double ref_based_sps(const Alignment& alignment, const Alignment& reference);

}  // namespace tracealign::reference
