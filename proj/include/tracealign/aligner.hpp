#pragma once

// Global trace alignment: Needleman-Wunsch for pairs, and progressive
// multiple alignment along an average-linkage guide tree.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "tracealign/core.hpp"
#include "tracealign/parallel.hpp"

namespace tracealign {

struct ScoringScheme {
  double match = 1.0;
  double mismatch = -1.0;
  double gap = 0.0;

  /// Throws ConfigError unless match > mismatch.
  void validate() const;

  /// Score of one symbol pair; gap/gap scores 0.
  double operator()(SymbolId x, SymbolId y) const noexcept {
    if (x == kGapSymbol) return y == kGapSymbol ? 0.0 : gap;
    if (y == kGapSymbol) return gap;
    return x == y ? match : mismatch;
  }

  friend bool operator==(const ScoringScheme&, const ScoringScheme&) = default;
};

struct PairwiseResult {
  Alignment alignment;  // two rows over a log holding the two traces
  double score;
};

/// Optimal global alignment of two traces (full DP). Traceback prefers the
/// diagonal, then a gap in the second trace, then a gap in the first.
///
/// If both traces carry the same case id, the second is renamed with a "#2"
/// suffix in the result's source log.
PairwiseResult pairwise_align(const Trace& first, const Trace& second,
                              const ScoringScheme& scheme = {});

/// Optimal global alignment score only, in linear memory.
double pairwise_score(std::span<const SymbolId> first,
                      std::span<const SymbolId> second,
                      const ScoringScheme& scheme);

/// Symmetric N x N matrix of normalized alignment distances,
/// d = clamp(1 - score / (match * min(|Ti|, |Tj|)), 0, 1).
class DistanceMatrix {
 public:
  explicit DistanceMatrix(std::size_t n) : n_(n), values_(n * n, 0.0) {}

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
  /// Sets both (i,j) and (j,i).
  void set(std::size_t i, std::size_t j, double d) {
    values_[i * n_ + j] = d;
    values_[j * n_ + i] = d;
  }

  friend bool operator==(const DistanceMatrix&, const DistanceMatrix&) = default;

 private:
  std::size_t n_;
  std::vector<double> values_;
};

/// Throws SizeError for fewer than two traces.
DistanceMatrix distance_matrix(const EventLog& log, const ScoringScheme& scheme,
                               Execution exec = Execution::kParallel);

/// Node of a guide tree. Leaves come first (node i is leaf i); internal nodes
/// follow in merge order, so children always precede their parent.
struct GuideNode {
  std::int64_t left = -1;
  std::int64_t right = -1;
  std::size_t leaf = 0;        // meaningful for leaves only
  double distance = 0.0;       // merge distance for internal nodes
  std::size_t cluster_size = 1;

  bool is_leaf() const noexcept { return left < 0; }
  friend bool operator==(const GuideNode&, const GuideNode&) = default;
};

class GuideTree {
 public:
  /// Validates that the nodes form a binary tree over leaves {0..n-1}.
  /// Throws ConfigError otherwise.
  GuideTree(std::size_t leaf_count, std::vector<GuideNode> nodes);

  std::size_t leaf_count() const noexcept { return leaf_count_; }
  const std::vector<GuideNode>& nodes() const noexcept { return nodes_; }
  std::size_t root() const noexcept { return nodes_.size() - 1; }

  /// Leaves under `node`, ascending.
  std::vector<std::size_t> leaves_under(std::size_t node) const;

  friend bool operator==(const GuideTree&, const GuideTree&) = default;

 private:
  std::size_t leaf_count_;
  std::vector<GuideNode> nodes_;
};

/// Average-linkage (UPGMA) agglomeration. At each step the two clusters with
/// minimal average distance merge; ties go to the lexicographically smallest
/// (cluster id, cluster id) pair, where leaves have ids 0..N-1 and merged
/// clusters receive N, N+1, ... in creation order.
/// Throws SizeError for N < 2 and ConfigError for an asymmetric matrix or a
/// non-zero diagonal.
GuideTree build_guide_tree(const DistanceMatrix& distances);

/// Partial alignment of a subset of traces, summarized by per-column symbol
/// frequencies over alphabet + gap (gap stored last).
class Profile {
 public:
  /// Profile holding one trace of `log`.
  static Profile from_trace(std::shared_ptr<const EventLog> log, std::size_t trace);

  /// Builds a profile from explicit member rows; throws StructuralError when
  /// the rows are not rectangular or do not strip to the members' traces.
  Profile(std::shared_ptr<const EventLog> log, std::vector<std::size_t> members,
          std::vector<CellRow> rows);

  const EventLog& log() const noexcept { return *log_; }
  const std::shared_ptr<const EventLog>& log_ptr() const noexcept { return log_; }
  const std::vector<std::size_t>& members() const noexcept { return members_; }
  const std::vector<CellRow>& rows() const noexcept { return rows_; }

  std::size_t length() const noexcept { return length_; }
  /// Number of symbols per column vector, alphabet size + 1.
  std::size_t width() const noexcept { return width_; }
  std::span<const double> column(std::size_t j) const {
    return {freq_.data() + j * width_, width_};
  }
  double gap_frequency(std::size_t j) const { return freq_[j * width_ + width_ - 1]; }

  /// Alignment with rows ordered by member index. Requires the profile to
  /// cover every trace of the log.
  Alignment to_alignment() const;

 private:
  Profile() = default;
  void compute_frequencies();

  std::shared_ptr<const EventLog> log_;
  std::vector<std::size_t> members_;
  std::vector<CellRow> rows_;
  std::size_t length_ = 0;
  std::size_t width_ = 0;
  std::vector<double> freq_;
};

struct ProfileMerge {
  Profile profile;
  /// Optimal DP score in expected-pair units.
  double score;
};

/// Aligns two profiles by DP over columns. A column pair scores
/// sum_{x,y} f1(x) f2(y) s(x,y); a column against an inserted gap column
/// scores (1 - f(gap)) * gap. Existing gaps are never removed.
/// Throws ConfigError when the profiles come from different alphabets or
/// share members.
ProfileMerge align_profiles(const Profile& first, const Profile& second,
                            const ScoringScheme& scheme = {});

/// Progressive alignment folding align_profiles over the guide tree
/// (built from distance_matrix when omitted). Independent subtrees merge
/// concurrently under Execution::kParallel.
Alignment progressive_align(std::shared_ptr<const EventLog> log,
                            const ScoringScheme& scheme = {},
                            const std::optional<GuideTree>& tree = std::nullopt,
                            Execution exec = Execution::kParallel);

/// Reference alignment: best of `k` progressive alignments, one from the
/// deterministic guide tree and k-1 from trees over distance matrices with
/// seeded multiplicative noise in [0.9, 1.1]. Chooses maximal ref-free SPS,
/// then lower complexity, then the earlier candidate.
Alignment consensus_reference(std::shared_ptr<const EventLog> log,
                              const ScoringScheme& scheme, std::size_t k,
                              std::uint64_t seed,
                              Execution exec = Execution::kParallel);

}  // namespace tracealign
