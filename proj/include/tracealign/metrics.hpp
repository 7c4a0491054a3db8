#pragma once

// Alignment quality metrics.
//
// Accuracy: reference-free and reference-based sum-of-pairs scores, column
// score, misalignment score and the overall misalignment score (OMS).
// Confidence: per-column information score and overall information score
// (OIS). Complexity: gap fraction with its attainable bounds.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tracealign/aligner.hpp"
#include "tracealign/core.hpp"
#include "tracealign/parallel.hpp"

namespace tracealign {

// ---------------------------------------------------------------------------
// Accuracy

/// Sum over columns and unordered row pairs of scheme(x, y).
double ref_free_sps(const Alignment& alignment, const ScoringScheme& scheme = {},
                    Execution exec = Execution::kParallel);

/// Fraction of the reference's co-column occurrence pairs that are also
/// co-column in `alignment`. Throws MismatchError for different source logs
/// and DegenerateError when the reference has no pairs.
double ref_based_sps(const Alignment& alignment, const Alignment& reference);

/// Fraction of columns whose occurrence set equals some reference column.
double column_score(const Alignment& alignment, const Alignment& reference);

/// Number of occurrences whose set of co-column partners differs from the
/// reference. Zero iff both alignments have the same pair set.
std::size_t count_heuristic_errors(const Alignment& alignment,
                                   const Alignment& reference);

/// Contiguous, gap-free run of at least two activity labels.
class Pattern {
 public:
  /// Throws ConfigError for fewer than two labels or a gap label.
  explicit Pattern(std::vector<std::string> labels);

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::size_t size() const noexcept { return labels_.size(); }

  friend bool operator==(const Pattern&, const Pattern&) = default;
  friend auto operator<=>(const Pattern&, const Pattern&) = default;

 private:
  std::vector<std::string> labels_;
};

/// Occurrence counts (overlaps included) of every contiguous subsequence with
/// length in [min_length, max_length], stored as a prefix trie.
class PatternCensus {
 public:
  struct Entry {
    std::vector<SymbolId> symbols;
    std::size_t count;
  };

  PatternCensus(std::vector<std::string> alphabet, std::size_t min_length,
                std::size_t max_length);

  const std::vector<std::string>& alphabet() const noexcept { return alphabet_; }
  std::size_t min_length() const noexcept { return min_length_; }
  std::size_t max_length() const noexcept { return max_length_; }

  /// Number of distinct patterns in range.
  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }
  /// f_M, the largest count over patterns in range (0 when empty).
  std::size_t max_count() const noexcept { return max_count_; }

  /// f_p of a symbol sequence; 0 when absent or outside the length range.
  std::size_t count(std::span<const SymbolId> symbols) const;
  std::size_t count(const Pattern& pattern) const;

  /// Patterns with f_p >= threshold, ordered by (length, symbols).
  std::vector<Entry> entries_at_least(double threshold) const;
  std::vector<Entry> entries() const { return entries_at_least(0.0); }

  /// Most frequent pattern; ties go to the shorter one, then to the
  /// lexicographically smaller label sequence. Throws SizeError when empty.
  Entry most_frequent() const;

  Pattern to_pattern(std::span<const SymbolId> symbols) const;

 private:
  friend PatternCensus extract_patterns(const EventLog&, std::size_t,
                                        std::optional<std::size_t>, Execution);

  struct Node {
    SymbolId symbol = kGapSymbol;
    std::int32_t first_child = -1;
    std::int32_t next_sibling = -1;
    std::uint32_t depth = 0;
    std::uint64_t count = 0;
  };

  std::int32_t child(std::int32_t node, SymbolId symbol) const;
  void finalize();

  std::vector<std::string> alphabet_;
  std::size_t min_length_;
  std::size_t max_length_;
  std::vector<Node> nodes_;  // node 0 is the root
  std::size_t size_ = 0;
  std::size_t max_count_ = 0;
};

/// Counts every contiguous subsequence of every trace with length in
/// [min_length, max_length] (default max: longest trace). Throws SizeError
/// for an empty log and ConfigError for min_length < 2 or max < min.
PatternCensus extract_patterns(const EventLog& log, std::size_t min_length = 2,
                               std::optional<std::size_t> max_length = std::nullopt,
                               Execution exec = Execution::kParallel);

/// Pattern misalignment summed over unordered trace pairs.
///
/// Instances are matched k-th to k-th by start position. A matched pair adds
/// the distance between the start columns, plus 1 when an activity of either
/// instance faces a gap or an activity whose label is outside the pattern.
/// Each unmatched instance adds 1. Zero for a pattern absent from the log.
double misalignment_score(const Alignment& alignment, const Pattern& pattern);
double misalignment_score(const Alignment& alignment, std::span<const SymbolId> pattern);

inline constexpr double kDefaultTfRatio = 0.40;

struct OmsBreakdown {
  double oms = 0.0;
  double threshold = 0.0;       // T_f
  std::size_t max_count = 0;    // f_M
  std::size_t eligible = 0;     // number of patterns with f_p >= T_f
};

/// Frequency-weighted mean misalignment over patterns with f_p >= T_f,
/// T_f = tf_ratio * f_M:  OMS = (1/n) sum MS_p * f_p / f_M.
/// Throws SizeError for an empty census, ConfigError for tf_ratio outside
/// (0, 1], MismatchError when the census alphabet differs from the log's,
/// and ThresholdError when no pattern is eligible.
OmsBreakdown overall_misalignment(const Alignment& alignment, const PatternCensus& census,
                                  double tf_ratio = kDefaultTfRatio,
                                  Execution exec = Execution::kParallel);

double overall_misalignment_score(const Alignment& alignment, const PatternCensus& census,
                                  double tf_ratio = kDefaultTfRatio,
                                  Execution exec = Execution::kParallel);

// ---------------------------------------------------------------------------
// Confidence

/// Shannon entropy (bits) of a column histogram, gap included as a symbol.
double column_entropy(const ColumnHistogram& histogram);

/// IS = 1 - E / log2(n_types + 1), clamped to [0, 1]. Throws DegenerateError
/// for n_types == 0.
double information_score(const ColumnHistogram& histogram, std::size_t n_types);

/// OIS = 1 - sum_j E_j / (E_max * L).
double overall_information_score(const Alignment& alignment,
                                 Execution exec = Execution::kParallel);

// ---------------------------------------------------------------------------
// Complexity

struct Complexity {
  double value;        // P = 1 - M / (N * L)
  double lower_bound;  // 1 - M / (N * L_min)
  double upper_bound;  // 1 - 1 / N
};

/// Throws InvariantError when P falls outside its bounds.
Complexity alignment_complexity(const Alignment& alignment);

// ---------------------------------------------------------------------------
// Consensus

struct ConsensusItem {
  std::size_t column;
  std::string label;
  bool tie;  // another label had the same top count
};

/// Per column, the most frequent non-gap label when its share of all rows
/// strictly exceeds `majority`. Label ties resolve lexicographically.
std::vector<ConsensusItem> consensus_sequence(const Alignment& alignment,
                                              double majority = 0.5);

// ---------------------------------------------------------------------------
// Full report

struct EvaluationOptions {
  ScoringScheme scheme{};
  double tf_ratio = kDefaultTfRatio;
  double majority = 0.5;
  std::size_t min_pattern_length = 2;
  std::optional<std::size_t> max_pattern_length;
};

struct MostFrequentPattern {
  Pattern pattern;
  std::size_t count;
};

/// All metrics of one alignment, ordered accuracy, confidence, complexity.
/// Reference-based fields are present iff a reference was supplied.
struct MetricReport {
  // accuracy
  double ref_free_sps = 0.0;
  std::optional<double> ref_based_sps;
  std::optional<double> column_score;
  std::optional<std::size_t> n_e;
  // Pattern-based fields are absent when no trace reaches the minimum
  // pattern length.
  std::optional<double> ms_top;
  std::optional<MostFrequentPattern> top_pattern;
  std::optional<OmsBreakdown> oms;
  // confidence
  double ois = 0.0;
  // complexity
  Complexity complexity{};
  // summary
  std::vector<ConsensusItem> consensus;
  std::size_t traces = 0;
  std::size_t activities = 0;
  std::size_t length = 0;
  std::size_t activity_types = 0;
  EvaluationOptions options;
};

MetricReport evaluate(const Alignment& alignment,
                      const Alignment* reference = nullptr,
                      const EvaluationOptions& options = {},
                      Execution exec = Execution::kParallel);

}  // namespace tracealign
