#pragma once

// Domain model: activities, traces, event logs and alignments.
//
// An alignment is a rectangular grid of cells. Each cell is either a gap or
// refers to one activity occurrence of the source log by (trace, ordinal), so
// repeated activities of the same type remain distinguishable.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tracealign {

/// Dense id of an activity label within an EventLog alphabet.
using SymbolId = std::int32_t;
inline constexpr SymbolId kGapSymbol = -1;

/// Serialized form of a gap cell. Never a valid activity label.
inline constexpr std::string_view kGapLabel = "-";

class Activity {
 public:
  /// Throws ConfigError for empty labels, "-", or labels with tab/newline.
  explicit Activity(std::string label);

  const std::string& label() const noexcept { return label_; }

  friend bool operator==(const Activity&, const Activity&) = default;
  friend auto operator<=>(const Activity&, const Activity&) = default;

 private:
  std::string label_;
};

class Trace {
 public:
  /// Throws ConfigError when `activities` is empty.
  Trace(std::string case_id, std::vector<Activity> activities);

  /// Convenience constructor from raw labels.
  static Trace from_labels(std::string case_id,
                           const std::vector<std::string>& labels);

  const std::string& case_id() const noexcept { return case_id_; }
  const std::vector<Activity>& activities() const noexcept {
    return activities_;
  }
  std::size_t size() const noexcept { return activities_.size(); }
  const Activity& operator[](std::size_t i) const { return activities_[i]; }

  friend bool operator==(const Trace&, const Trace&) = default;

 private:
  std::string case_id_;
  std::vector<Activity> activities_;
};

/// Ordered collection of traces with a derived, sorted alphabet.
///
/// Labels are interned at construction: `symbols(i)` gives trace i encoded as
/// SymbolIds, which index into `alphabet()`.
class EventLog {
 public:
  EventLog() = default;
  /// Throws ConfigError on duplicate case ids.
  explicit EventLog(std::vector<Trace> traces);

  const std::vector<Trace>& traces() const noexcept { return traces_; }
  std::size_t size() const noexcept { return traces_.size(); }
  bool empty() const noexcept { return traces_.empty(); }
  const Trace& operator[](std::size_t i) const { return traces_[i]; }

  const std::vector<std::string>& alphabet() const noexcept {
    return alphabet_;
  }
  std::span<const SymbolId> symbols(std::size_t trace) const {
    return encoded_[trace];
  }
  /// kGapSymbol when the label is not part of the alphabet.
  SymbolId symbol_of(std::string_view label) const;
  const std::string& label(SymbolId symbol) const { return alphabet_.at(symbol); }

  /// Total number of activity occurrences (M).
  std::size_t activity_count() const noexcept { return activity_count_; }
  /// Length of the longest trace (L_min of any alignment of this log).
  std::size_t max_trace_length() const noexcept { return max_length_; }

  friend bool operator==(const EventLog& a, const EventLog& b) {
    return a.traces_ == b.traces_;
  }

 private:
  std::vector<Trace> traces_;
  std::vector<std::string> alphabet_;
  std::vector<std::vector<SymbolId>> encoded_;
  std::size_t activity_count_ = 0;
  std::size_t max_length_ = 0;
};

struct OccurrenceId {
  std::uint32_t trace_index = 0;
  std::uint32_t ordinal = 0;

  friend bool operator==(const OccurrenceId&, const OccurrenceId&) = default;
  friend auto operator<=>(const OccurrenceId&, const OccurrenceId&) = default;
};

class Cell {
 public:
  constexpr Cell() = default;
  static constexpr Cell gap() { return Cell{}; }
  static constexpr Cell occupied(OccurrenceId id) { return Cell{id}; }
  static constexpr Cell occupied(std::size_t trace, std::size_t ordinal) {
    return Cell{OccurrenceId{static_cast<std::uint32_t>(trace),
                             static_cast<std::uint32_t>(ordinal)}};
  }

  constexpr bool is_gap() const noexcept { return !occupied_; }
  constexpr OccurrenceId occurrence() const noexcept { return id_; }

  friend constexpr bool operator==(const Cell&, const Cell&) = default;

 private:
  constexpr explicit Cell(OccurrenceId id) : id_(id), occupied_(true) {}

  OccurrenceId id_{};
  bool occupied_ = false;
};

using CellRow = std::vector<Cell>;

/// Grid of cells over a shared, immutable source log.
///
/// Construction does not validate; use validate_alignment() or
/// require_valid() before relying on the invariants. Every alignment returned
/// by the library is valid and canonical (no all-gap column).
class Alignment {
 public:
  Alignment(std::shared_ptr<const EventLog> source, std::vector<CellRow> rows);

  const EventLog& source() const noexcept { return *source_; }
  const std::shared_ptr<const EventLog>& source_ptr() const noexcept {
    return source_;
  }

  std::size_t rows() const noexcept { return rows_.size(); }
  /// Number of columns (L). For ragged grids, the longest row.
  std::size_t length() const noexcept { return length_; }
  /// Longest original trace (L_min).
  std::size_t min_length() const noexcept { return source_->max_trace_length(); }

  const std::vector<CellRow>& grid() const noexcept { return rows_; }
  std::span<const Cell> row(std::size_t r) const { return rows_[r]; }
  const Cell& at(std::size_t r, std::size_t c) const { return rows_[r][c]; }

  /// Activity symbol of a cell, kGapSymbol for gaps. Requires a valid cell.
  SymbolId symbol_at(std::size_t r, std::size_t c) const;
  /// Label of a cell, "-" for gaps.
  std::string_view label_at(std::size_t r, std::size_t c) const;

  friend bool operator==(const Alignment& a, const Alignment& b) {
    return a.rows_ == b.rows_ &&
           (a.source_ == b.source_ || *a.source_ == *b.source_);
  }

 private:
  std::shared_ptr<const EventLog> source_;
  std::vector<CellRow> rows_;
  std::size_t length_ = 0;
};

enum class ViolationKind {
  kEmptyGrid,
  kRowCount,
  kRaggedRow,
  kForeignOccurrence,
  kOrderViolated,
  kOccurrenceCount,
  kAllGapColumn,
  kTooShort,
};

std::string_view to_string(ViolationKind kind);

/// One broken invariant. `row`/`column` are -1 when not applicable.
struct Violation {
  ViolationKind kind;
  std::ptrdiff_t row = -1;
  std::ptrdiff_t column = -1;
  std::string message;
};

using ValidationReport = std::vector<Violation>;

/// Lists every invariant violation; an empty report means the alignment is
/// rectangular, roundtrips to its source, has no all-gap column and L >= L_min.
ValidationReport validate_alignment(const Alignment& alignment);

/// Throws StructuralError describing the first violation, if any.
void require_valid(const Alignment& alignment);

/// Removes gaps, recovering the source log. Throws StructuralError on an
/// invalid alignment.
EventLog strip_gaps(const Alignment& alignment);

struct HistogramEntry {
  SymbolId symbol;  // kGapSymbol for the gap
  std::size_t count;
  double frequency;
};

/// Per-symbol counts of one column, gap included, ordered by symbol id (gap
/// first). Counts sum to the number of rows.
struct ColumnHistogram {
  std::vector<HistogramEntry> entries;
  std::size_t rows = 0;

  std::size_t count(SymbolId symbol) const;
  double frequency(SymbolId symbol) const;
};

/// Throws BoundsError when `column` is out of range.
ColumnHistogram column_histogram(const Alignment& alignment,
                                 std::size_t column);

/// Gapless alignment of a log whose traces all have the same length.
/// Throws SizeError otherwise.
Alignment gapless_alignment(std::shared_ptr<const EventLog> log);

/// Builds an alignment from serialized rows of labels ("-" for gaps). The
/// source log is recovered by stripping gaps. Throws ConfigError when the id
/// and row counts differ or a row holds no activity; the grid itself is not
/// validated.
Alignment alignment_from_labels(
    const std::vector<std::string>& case_ids,
    const std::vector<std::vector<std::string>>& rows);

}  // namespace tracealign
