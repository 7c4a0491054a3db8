#include "tracealign/core.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "tracealign/error.hpp"

namespace tracealign {

Activity::Activity(std::string label) : label_(std::move(label)) {
  if (label_.empty()) throw ConfigError("activity label must not be empty");
  if (label_ == kGapLabel)
    throw ConfigError("activity label \"-\" is reserved for gaps");
  if (label_.find_first_of("\t\n\r") != std::string::npos)
    throw ConfigError("activity label contains a tab or newline: " + label_);
}

Trace::Trace(std::string case_id, std::vector<Activity> activities)
    : case_id_(std::move(case_id)), activities_(std::move(activities)) {
  if (activities_.empty())
    throw ConfigError("trace '" + case_id_ + "' has no activities");
}

Trace Trace::from_labels(std::string case_id,
                         const std::vector<std::string>& labels) {
  std::vector<Activity> activities;
  activities.reserve(labels.size());
  for (const auto& l : labels) activities.emplace_back(l);
  return Trace(std::move(case_id), std::move(activities));
}

EventLog::EventLog(std::vector<Trace> traces) : traces_(std::move(traces)) {
  std::set<std::string_view> ids;
  std::set<std::string> labels;
  for (const auto& t : traces_) {
    if (!ids.insert(t.case_id()).second)
      throw ConfigError("duplicate case id '" + t.case_id() + "'");
    for (const auto& a : t.activities()) labels.insert(a.label());
    activity_count_ += t.size();
    max_length_ = std::max(max_length_, t.size());
  }
  alphabet_.assign(labels.begin(), labels.end());
  encoded_.reserve(traces_.size());
  for (const auto& t : traces_) {
    std::vector<SymbolId> enc;
    enc.reserve(t.size());
    for (const auto& a : t.activities()) enc.push_back(symbol_of(a.label()));
    encoded_.push_back(std::move(enc));
  }
}

SymbolId EventLog::symbol_of(std::string_view label) const {
  auto it = std::lower_bound(alphabet_.begin(), alphabet_.end(), label);
  if (it == alphabet_.end() || *it != label) return kGapSymbol;
  return static_cast<SymbolId>(it - alphabet_.begin());
}

Alignment::Alignment(std::shared_ptr<const EventLog> source,
                     std::vector<CellRow> rows)
    : source_(std::move(source)), rows_(std::move(rows)) {
  if (!source_) throw ConfigError("alignment requires a source log");
  for (const auto& r : rows_) length_ = std::max(length_, r.size());
}

SymbolId Alignment::symbol_at(std::size_t r, std::size_t c) const {
  const Cell& cell = rows_[r][c];
  if (cell.is_gap()) return kGapSymbol;
  const auto id = cell.occurrence();
  return source_->symbols(id.trace_index)[id.ordinal];
}

std::string_view Alignment::label_at(std::size_t r, std::size_t c) const {
  const SymbolId s = symbol_at(r, c);
  return s == kGapSymbol ? kGapLabel : std::string_view(source_->label(s));
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kEmptyGrid: return "empty grid";
    case ViolationKind::kRowCount: return "row count";
    case ViolationKind::kRaggedRow: return "ragged row";
    case ViolationKind::kForeignOccurrence: return "foreign occurrence";
    case ViolationKind::kOrderViolated: return "order violated";
    case ViolationKind::kOccurrenceCount: return "occurrence count";
    case ViolationKind::kAllGapColumn: return "all-gap column";
    case ViolationKind::kTooShort: return "shorter than longest trace";
  }
  return "unknown";
}

namespace {

std::string describe(const Violation& v) {
  std::ostringstream os;
  os << to_string(v.kind);
  if (v.row >= 0) os << " at row " << v.row;
  if (v.column >= 0) os << (v.row >= 0 ? ", column " : " at column ") << v.column;
  if (!v.message.empty()) os << ": " << v.message;
  return os.str();
}

}  // namespace

ValidationReport validate_alignment(const Alignment& a) {
  ValidationReport report;
  const EventLog& log = a.source();
  if (a.rows() == 0 || a.length() == 0) {
    report.push_back({ViolationKind::kEmptyGrid, -1, -1, "no cells"});
    return report;
  }
  if (a.rows() != log.size()) {
    report.push_back({ViolationKind::kRowCount, -1, -1,
                      std::to_string(a.rows()) + " rows for " +
                          std::to_string(log.size()) + " traces"});
  }
  const std::size_t width = a.row(0).size();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    if (a.row(r).size() != width) {
      report.push_back({ViolationKind::kRaggedRow, static_cast<std::ptrdiff_t>(r), -1,
                        std::to_string(a.row(r).size()) + " cells, expected " +
                            std::to_string(width)});
    }
  }

  for (std::size_t r = 0; r < a.rows(); ++r) {
    const auto row = a.row(r);
    const std::size_t expected = r < log.size() ? log[r].size() : 0;
    std::vector<std::size_t> seen(expected, 0);
    std::size_t next = 0;
    std::ptrdiff_t first_disorder = -1;
    bool foreign = false;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (row[c].is_gap()) continue;
      const auto id = row[c].occurrence();
      if (id.trace_index != r || id.ordinal >= expected) {
        if (!foreign) {
          report.push_back({ViolationKind::kForeignOccurrence,
                            static_cast<std::ptrdiff_t>(r),
                            static_cast<std::ptrdiff_t>(c),
                            "occurrence (" + std::to_string(id.trace_index) +
                                "," + std::to_string(id.ordinal) +
                                ") does not belong to this row"});
        }
        foreign = true;
        continue;
      }
      ++seen[id.ordinal];
      if (id.ordinal != next && first_disorder < 0)
        first_disorder = static_cast<std::ptrdiff_t>(c);
      ++next;
    }
    if (foreign) continue;
    const bool complete =
        std::all_of(seen.begin(), seen.end(), [](std::size_t n) { return n == 1; });
    if (!complete) {
      report.push_back({ViolationKind::kOccurrenceCount,
                        static_cast<std::ptrdiff_t>(r), -1,
                        "row does not hold each of the trace's " +
                            std::to_string(expected) +
                            " occurrences exactly once"});
    } else if (first_disorder >= 0) {
      report.push_back({ViolationKind::kOrderViolated,
                        static_cast<std::ptrdiff_t>(r), first_disorder,
                        "occurrences are not in trace order"});
    }
  }

  for (std::size_t c = 0; c < a.length(); ++c) {
    bool all_gap = true;
    for (std::size_t r = 0; r < a.rows() && all_gap; ++r) {
      if (c < a.row(r).size() && !a.at(r, c).is_gap()) all_gap = false;
    }
    if (all_gap) {
      report.push_back({ViolationKind::kAllGapColumn, -1,
                        static_cast<std::ptrdiff_t>(c), ""});
    }
  }

  if (a.length() < a.min_length()) {
    report.push_back({ViolationKind::kTooShort, -1, -1,
                      "L=" + std::to_string(a.length()) + " < L_min=" +
                          std::to_string(a.min_length())});
  }
  return report;
}

void require_valid(const Alignment& a) {
  const auto report = validate_alignment(a);
  if (!report.empty())
    throw StructuralError("invalid alignment: " + describe(report.front()));
}

EventLog strip_gaps(const Alignment& a) {
  require_valid(a);
  const EventLog& src = a.source();
  std::vector<Trace> traces;
  traces.reserve(a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    std::vector<Activity> acts;
    for (const Cell& cell : a.row(r)) {
      if (cell.is_gap()) continue;
      const auto id = cell.occurrence();
      acts.push_back(src[id.trace_index][id.ordinal]);
    }
    traces.emplace_back(src[r].case_id(), std::move(acts));
  }
  return EventLog(std::move(traces));
}

std::size_t ColumnHistogram::count(SymbolId symbol) const {
  for (const auto& e : entries)
    if (e.symbol == symbol) return e.count;
  return 0;
}

double ColumnHistogram::frequency(SymbolId symbol) const {
  for (const auto& e : entries)
    if (e.symbol == symbol) return e.frequency;
  return 0.0;
}

ColumnHistogram column_histogram(const Alignment& a, std::size_t column) {
  if (column >= a.length())
    throw BoundsError("column " + std::to_string(column) +
                      " out of range for alignment of length " +
                      std::to_string(a.length()));
  std::map<SymbolId, std::size_t> counts;
  for (std::size_t r = 0; r < a.rows(); ++r) ++counts[a.symbol_at(r, column)];
  ColumnHistogram h;
  h.rows = a.rows();
  h.entries.reserve(counts.size());
  for (const auto& [sym, n] : counts) {
    h.entries.push_back({sym, n, static_cast<double>(n) / static_cast<double>(h.rows)});
  }
  return h;
}

Alignment gapless_alignment(std::shared_ptr<const EventLog> log) {
  if (!log || log->empty()) throw SizeError("gapless alignment of an empty log");
  const std::size_t len = (*log)[0].size();
  std::vector<CellRow> rows;
  rows.reserve(log->size());
  for (std::size_t r = 0; r < log->size(); ++r) {
    if ((*log)[r].size() != len)
      throw SizeError("gapless alignment requires equal trace lengths");
    CellRow row;
    row.reserve(len);
    for (std::size_t k = 0; k < len; ++k) row.push_back(Cell::occupied(r, k));
    rows.push_back(std::move(row));
  }
  return Alignment(std::move(log), std::move(rows));
}

Alignment alignment_from_labels(const std::vector<std::string>& case_ids,
                                const std::vector<std::vector<std::string>>& rows) {
  if (case_ids.size() != rows.size())
    throw ConfigError("case id count does not match row count");
  std::vector<Trace> traces;
  std::vector<CellRow> grid;
  traces.reserve(rows.size());
  grid.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::vector<Activity> acts;
    CellRow row;
    row.reserve(rows[r].size());
    for (const auto& label : rows[r]) {
      if (label == kGapLabel) {
        row.push_back(Cell::gap());
      } else {
        row.push_back(Cell::occupied(r, acts.size()));
        acts.emplace_back(label);
      }
    }
    traces.emplace_back(case_ids[r], std::move(acts));
    grid.push_back(std::move(row));
  }
  return Alignment(std::make_shared<const EventLog>(std::move(traces)),
                   std::move(grid));
}

}  // namespace tracealign
