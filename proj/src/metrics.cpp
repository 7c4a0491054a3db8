#include "tracealign/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "tracealign/error.hpp"

namespace tracealign {

namespace {

// Flattened view of a valid alignment.
struct AlignmentIndex {
  std::size_t rows = 0;
  std::size_t length = 0;
  std::vector<SymbolId> symbols;                   // rows x length
  std::vector<std::vector<std::uint32_t>> column;  // [trace][ordinal]

  SymbolId at(std::size_t r, std::size_t c) const { return symbols[r * length + c]; }
};

AlignmentIndex build_index(const Alignment& a) {
  AlignmentIndex idx;
  idx.rows = a.rows();
  idx.length = a.length();
  idx.symbols.resize(idx.rows * idx.length);
  idx.column.resize(idx.rows);
  for (std::size_t r = 0; r < idx.rows; ++r) {
    idx.column[r].resize(a.source()[r].size());
    for (std::size_t c = 0; c < idx.length; ++c) {
      idx.symbols[r * idx.length + c] = a.symbol_at(r, c);
      const Cell& cell = a.at(r, c);
      if (!cell.is_gap()) idx.column[r][cell.occurrence().ordinal] = static_cast<std::uint32_t>(c);
    }
  }
  return idx;
}

void require_same_source(const Alignment& a, const Alignment& b) {
  if (a.source_ptr() != b.source_ptr() && !(a.source() == b.source()))
    throw MismatchError("alignment and reference have different source logs");
}

template <class F>
void for_each_index(std::size_t n, Execution exec, F&& f) {
  const auto count = static_cast<std::ptrdiff_t>(n);
  if (exec == Execution::kParallel) {
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t i = 0; i < count; ++i) f(static_cast<std::size_t>(i));
  } else {
    for (std::ptrdiff_t i = 0; i < count; ++i) f(static_cast<std::size_t>(i));
  }
}

double choose2(std::size_t n) {
  return static_cast<double>(n) * static_cast<double>(n > 0 ? n - 1 : 0) / 2.0;
}

// Occupancy of each column of `a` and, per column, whether its occurrence set
// equals a column of `ref`.
struct ColumnMatch {
  std::vector<std::size_t> occupancy;
  std::vector<bool> correct;
};

ColumnMatch match_columns(const Alignment& a, const Alignment& ref) {
  const auto ia = build_index(a);
  const auto ir = build_index(ref);
  std::vector<std::size_t> ref_occupancy(ir.length, 0);
  for (const auto& cols : ir.column)
    for (auto c : cols) ++ref_occupancy[c];

  ColumnMatch m;
  m.occupancy.assign(ia.length, 0);
  m.correct.assign(ia.length, true);
  std::vector<std::int64_t> target(ia.length, -1);
  for (std::size_t t = 0; t < ia.column.size(); ++t) {
    for (std::size_t k = 0; k < ia.column[t].size(); ++k) {
      const auto ca = ia.column[t][k];
      const auto cr = static_cast<std::int64_t>(ir.column[t][k]);
      ++m.occupancy[ca];
      if (target[ca] < 0) {
        target[ca] = cr;
      } else if (target[ca] != cr) {
        m.correct[ca] = false;
      }
    }
  }
  for (std::size_t c = 0; c < ia.length; ++c) {
    if (m.correct[c] &&
        (target[c] < 0 || ref_occupancy[static_cast<std::size_t>(target[c])] != m.occupancy[c]))
      m.correct[c] = false;
  }
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// Sum-of-pairs

double ref_free_sps(const Alignment& a, const ScoringScheme& s, Execution exec) {
  require_valid(a);
  const auto idx = build_index(a);
  const std::size_t width = a.source().alphabet().size();
  std::vector<double> per_column(idx.length, 0.0);
  for_each_index(idx.length, exec, [&](std::size_t c) {
    std::vector<std::size_t> counts(width, 0);
    std::size_t gaps = 0;
    for (std::size_t r = 0; r < idx.rows; ++r) {
      const SymbolId x = idx.at(r, c);
      if (x == kGapSymbol) {
        ++gaps;
      } else {
        ++counts[static_cast<std::size_t>(x)];
      }
    }
    const std::size_t filled = idx.rows - gaps;
    double same = 0.0;
    for (auto n : counts) same += choose2(n);
    per_column[c] = same * s.match + (choose2(filled) - same) * s.mismatch +
                    static_cast<double>(gaps) * static_cast<double>(filled) * s.gap;
  });
  return std::accumulate(per_column.begin(), per_column.end(), 0.0);
}

double ref_based_sps(const Alignment& a, const Alignment& ref) {
  require_valid(a);
  require_valid(ref);
  require_same_source(a, ref);
  const auto ia = build_index(a);
  const auto ir = build_index(ref);

  std::vector<std::size_t> ref_occupancy(ir.length, 0);
  for (const auto& cols : ir.column)
    for (auto c : cols) ++ref_occupancy[c];
  double denominator = 0.0;
  for (auto n : ref_occupancy) denominator += choose2(n);
  if (denominator == 0.0)
    throw DegenerateError("reference alignment has no aligned activity pairs");

  // Pairs shared by both = pairs inside groups with equal (column, ref column).
  std::vector<std::vector<std::uint32_t>> ref_cols_of(ia.length);
  for (std::size_t t = 0; t < ia.column.size(); ++t)
    for (std::size_t k = 0; k < ia.column[t].size(); ++k)
      ref_cols_of[ia.column[t][k]].push_back(ir.column[t][k]);
  double numerator = 0.0;
  for (auto& group : ref_cols_of) {
    std::sort(group.begin(), group.end());
    for (std::size_t i = 0; i < group.size();) {
      std::size_t j = i;
      while (j < group.size() && group[j] == group[i]) ++j;
      numerator += choose2(j - i);
      i = j;
    }
  }
  return numerator / denominator;
}

double column_score(const Alignment& a, const Alignment& ref) {
  require_valid(a);
  require_valid(ref);
  require_same_source(a, ref);
  const auto m = match_columns(a, ref);
  const auto correct = std::count(m.correct.begin(), m.correct.end(), true);
  return static_cast<double>(correct) / static_cast<double>(a.length());
}

std::size_t count_heuristic_errors(const Alignment& a, const Alignment& ref) {
  require_valid(a);
  require_valid(ref);
  require_same_source(a, ref);
  // An occurrence keeps its partner set iff its whole column matches a
  // reference column exactly.
  const auto m = match_columns(a, ref);
  std::size_t errors = 0;
  for (std::size_t c = 0; c < m.occupancy.size(); ++c)
    if (!m.correct[c]) errors += m.occupancy[c];
  return errors;
}

// ---------------------------------------------------------------------------
// Patterns

Pattern::Pattern(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.size() < 2) throw ConfigError("a pattern needs at least two activities");
  for (const auto& l : labels_) {
    if (l.empty() || l == kGapLabel)
      throw ConfigError("a pattern must not contain gaps or empty labels");
  }
}

PatternCensus::PatternCensus(std::vector<std::string> alphabet, std::size_t min_length,
                             std::size_t max_length)
    : alphabet_(std::move(alphabet)),
      min_length_(min_length),
      max_length_(max_length),
      nodes_(1) {}

std::int32_t PatternCensus::child(std::int32_t node, SymbolId symbol) const {
  for (auto c = nodes_[static_cast<std::size_t>(node)].first_child; c >= 0;
       c = nodes_[static_cast<std::size_t>(c)].next_sibling) {
    if (nodes_[static_cast<std::size_t>(c)].symbol == symbol) return c;
  }
  return -1;
}

void PatternCensus::finalize() {
  size_ = 0;
  max_count_ = 0;
  for (const Node& n : nodes_) {
    if (n.depth >= min_length_ && n.depth <= max_length_) {
      ++size_;
      max_count_ = std::max<std::size_t>(max_count_, n.count);
    }
  }
}

std::size_t PatternCensus::count(std::span<const SymbolId> symbols) const {
  if (symbols.size() < min_length_ || symbols.size() > max_length_) return 0;
  std::int32_t node = 0;
  for (SymbolId s : symbols) {
    node = child(node, s);
    if (node < 0) return 0;
  }
  return nodes_[static_cast<std::size_t>(node)].count;
}

std::size_t PatternCensus::count(const Pattern& pattern) const {
  std::vector<SymbolId> symbols;
  for (const auto& l : pattern.labels()) {
    auto it = std::lower_bound(alphabet_.begin(), alphabet_.end(), l);
    if (it == alphabet_.end() || *it != l) return 0;
    symbols.push_back(static_cast<SymbolId>(it - alphabet_.begin()));
  }
  return count(symbols);
}

std::vector<PatternCensus::Entry> PatternCensus::entries_at_least(double threshold) const {
  std::vector<Entry> out;
  std::vector<SymbolId> path;
  // Counts never increase with depth, so a node below the threshold prunes
  // its subtree.
  std::function<void(std::int32_t)> visit = [&](std::int32_t node) {
    for (auto c = nodes_[static_cast<std::size_t>(node)].first_child; c >= 0;
         c = nodes_[static_cast<std::size_t>(c)].next_sibling) {
      const Node& n = nodes_[static_cast<std::size_t>(c)];
      if (static_cast<double>(n.count) + 1e-9 < threshold || n.depth > max_length_) continue;
      path.push_back(n.symbol);
      if (n.depth >= min_length_) out.push_back({path, static_cast<std::size_t>(n.count)});
      visit(c);
      path.pop_back();
    }
  };
  visit(0);
  std::sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) {
    if (a.symbols.size() != b.symbols.size()) return a.symbols.size() < b.symbols.size();
    return a.symbols < b.symbols;
  });
  return out;
}

PatternCensus::Entry PatternCensus::most_frequent() const {
  if (empty()) throw SizeError("pattern census is empty");
  // Symbol ids follow the sorted alphabet, so id order is label order.
  return entries_at_least(static_cast<double>(max_count_)).front();
}

Pattern PatternCensus::to_pattern(std::span<const SymbolId> symbols) const {
  std::vector<std::string> labels;
  labels.reserve(symbols.size());
  for (SymbolId s : symbols) labels.push_back(alphabet_.at(static_cast<std::size_t>(s)));
  return Pattern(std::move(labels));
}

PatternCensus extract_patterns(const EventLog& log, std::size_t min_length,
                               std::optional<std::size_t> max_length, Execution exec) {
  if (log.empty()) throw SizeError("pattern census of an empty log");
  if (min_length < 2) throw ConfigError("minimum pattern length must be at least 2");
  const std::size_t max_len = max_length.value_or(log.max_trace_length());
  if (max_len < min_length)
    throw ConfigError("maximum pattern length " + std::to_string(max_len) +
                      " is below the minimum " + std::to_string(min_length));

  using Node = PatternCensus::Node;
  const std::size_t width = log.alphabet().size();
  // One sub-trie per first symbol; sub-tries are independent.
  std::vector<std::vector<Node>> subtries(width);
  auto build = [&](std::size_t first) {
    std::vector<Node> nodes(1);
    nodes[0].symbol = static_cast<SymbolId>(first);
    nodes[0].depth = 1;
    for (std::size_t t = 0; t < log.size(); ++t) {
      const auto seq = log.symbols(t);
      for (std::size_t start = 0; start < seq.size(); ++start) {
        if (seq[start] != static_cast<SymbolId>(first)) continue;
        ++nodes[0].count;
        std::size_t node = 0;
        const std::size_t stop = std::min(seq.size(), start + max_len);
        for (std::size_t pos = start + 1; pos < stop; ++pos) {
          const SymbolId sym = seq[pos];
          std::int32_t c = nodes[node].first_child;
          std::int32_t last = -1;
          while (c >= 0 && nodes[static_cast<std::size_t>(c)].symbol != sym) {
            last = c;
            c = nodes[static_cast<std::size_t>(c)].next_sibling;
          }
          if (c < 0) {
            c = static_cast<std::int32_t>(nodes.size());
            Node fresh;
            fresh.symbol = sym;
            fresh.depth = nodes[node].depth + 1;
            nodes.push_back(fresh);
            if (last < 0) {
              nodes[node].first_child = c;
            } else {
              nodes[static_cast<std::size_t>(last)].next_sibling = c;
            }
          }
          node = static_cast<std::size_t>(c);
          ++nodes[node].count;
        }
      }
    }
    subtries[first] = std::move(nodes);
  };
  for_each_index(width, exec, build);

  PatternCensus census(log.alphabet(), min_length, max_len);
  std::int32_t prev_root = -1;
  for (std::size_t s = 0; s < width; ++s) {
    auto& sub = subtries[s];
    if (sub[0].count == 0) continue;
    const auto offset = static_cast<std::int32_t>(census.nodes_.size());
    for (Node n : sub) {
      if (n.first_child >= 0) n.first_child += offset;
      if (n.next_sibling >= 0) n.next_sibling += offset;
      census.nodes_.push_back(n);
    }
    if (prev_root < 0) {
      census.nodes_[0].first_child = offset;
    } else {
      census.nodes_[static_cast<std::size_t>(prev_root)].next_sibling = offset;
    }
    prev_root = offset;
    sub.clear();
    sub.shrink_to_fit();
  }
  census.finalize();
  return census;
}

// ---------------------------------------------------------------------------
// Misalignment

namespace {

double misalignment_indexed(const AlignmentIndex& idx, const EventLog& log,
                            std::span<const SymbolId> pattern) {
  const std::size_t m = pattern.size();
  std::vector<char> in_pattern(log.alphabet().size(), 0);
  for (SymbolId s : pattern) {
    if (s == kGapSymbol || static_cast<std::size_t>(s) >= in_pattern.size()) return 0.0;
    in_pattern[static_cast<std::size_t>(s)] = 1;
  }

  std::vector<std::vector<std::uint32_t>> starts(log.size());
  for (std::size_t t = 0; t < log.size(); ++t) {
    const auto seq = log.symbols(t);
    for (std::size_t s = 0; s + m <= seq.size(); ++s) {
      if (std::equal(pattern.begin(), pattern.end(), seq.begin() + static_cast<std::ptrdiff_t>(s)))
        starts[t].push_back(static_cast<std::uint32_t>(s));
    }
  }

  // 1 when an activity of instance `start` in trace `a` faces a gap or a
  // non-pattern activity in trace `b`.
  auto faces_foreign = [&](std::size_t a, std::uint32_t start, std::size_t b) {
    for (std::size_t q = 0; q < m; ++q) {
      const SymbolId other = idx.at(b, idx.column[a][start + q]);
      if (other == kGapSymbol || !in_pattern[static_cast<std::size_t>(other)]) return true;
    }
    return false;
  };

  double total = 0.0;
  for (std::size_t i = 0; i < log.size(); ++i) {
    for (std::size_t j = i + 1; j < log.size(); ++j) {
      const auto& si = starts[i];
      const auto& sj = starts[j];
      const std::size_t matched = std::min(si.size(), sj.size());
      double pair = static_cast<double>(std::max(si.size(), sj.size()) - matched);
      for (std::size_t k = 0; k < matched; ++k) {
        const auto ci = static_cast<double>(idx.column[i][si[k]]);
        const auto cj = static_cast<double>(idx.column[j][sj[k]]);
        pair += std::abs(ci - cj);
        if (faces_foreign(i, si[k], j) || faces_foreign(j, sj[k], i)) pair += 1.0;
      }
      total += pair;
    }
  }
  return total;
}

std::vector<SymbolId> encode_pattern(const EventLog& log, const Pattern& p) {
  std::vector<SymbolId> out;
  out.reserve(p.size());
  for (const auto& l : p.labels()) out.push_back(log.symbol_of(l));
  return out;
}

}  // namespace

double misalignment_score(const Alignment& a, std::span<const SymbolId> pattern) {
  if (pattern.size() < 2) throw ConfigError("a pattern needs at least two activities");
  require_valid(a);
  return misalignment_indexed(build_index(a), a.source(), pattern);
}

double misalignment_score(const Alignment& a, const Pattern& pattern) {
  return misalignment_score(a, encode_pattern(a.source(), pattern));
}

OmsBreakdown overall_misalignment(const Alignment& a, const PatternCensus& census,
                                  double tf_ratio, Execution exec) {
  if (!(tf_ratio > 0.0 && tf_ratio <= 1.0))
    throw ConfigError("tf_ratio must lie in (0, 1], got " + std::to_string(tf_ratio));
  if (census.empty()) throw SizeError("pattern census is empty");
  if (census.alphabet() != a.source().alphabet())
    throw MismatchError("pattern census was built over a different alphabet");
  require_valid(a);

  OmsBreakdown out;
  out.max_count = census.max_count();
  out.threshold = tf_ratio * static_cast<double>(out.max_count);
  const auto eligible = census.entries_at_least(out.threshold);
  if (eligible.empty())
    throw ThresholdError("no pattern reaches T_f=" + std::to_string(out.threshold) +
                         "; lower tf_ratio");
  out.eligible = eligible.size();

  const auto idx = build_index(a);
  std::vector<double> ms(eligible.size());
  for_each_index(eligible.size(), exec, [&](std::size_t p) {
    ms[p] = misalignment_indexed(idx, a.source(), eligible[p].symbols);
  });
  const double fm = static_cast<double>(out.max_count);
  double sum = 0.0;
  for (std::size_t p = 0; p < eligible.size(); ++p)
    sum += ms[p] * static_cast<double>(eligible[p].count) / fm;
  out.oms = sum / static_cast<double>(eligible.size());
  return out;
}

double overall_misalignment_score(const Alignment& a, const PatternCensus& census,
                                  double tf_ratio, Execution exec) {
  return overall_misalignment(a, census, tf_ratio, exec).oms;
}

// ---------------------------------------------------------------------------
// Information

double column_entropy(const ColumnHistogram& h) {
  double e = 0.0;
  for (const auto& entry : h.entries) {
    if (entry.frequency > 0.0) e -= entry.frequency * std::log2(entry.frequency);
  }
  return e;
}

double information_score(const ColumnHistogram& h, std::size_t n_types) {
  if (n_types == 0) throw DegenerateError("information score needs at least one activity type");
  const double e_max = std::log2(static_cast<double>(n_types) + 1.0);
  return std::clamp(1.0 - column_entropy(h) / e_max, 0.0, 1.0);
}

double overall_information_score(const Alignment& a, Execution exec) {
  require_valid(a);
  const auto idx = build_index(a);
  const std::size_t n_types = a.source().alphabet().size();
  const double e_max = std::log2(static_cast<double>(n_types) + 1.0);
  const double rows = static_cast<double>(idx.rows);
  std::vector<double> entropy(idx.length, 0.0);
  for_each_index(idx.length, exec, [&](std::size_t c) {
    std::vector<std::size_t> counts(n_types + 1, 0);
    for (std::size_t r = 0; r < idx.rows; ++r) {
      const SymbolId x = idx.at(r, c);
      ++counts[x == kGapSymbol ? n_types : static_cast<std::size_t>(x)];
    }
    double e = 0.0;
    for (auto n : counts) {
      if (n == 0) continue;
      const double p = static_cast<double>(n) / rows;
      e -= p * std::log2(p);
    }
    entropy[c] = e;
  });
  const double total = std::accumulate(entropy.begin(), entropy.end(), 0.0);
  return 1.0 - total / (e_max * static_cast<double>(idx.length));
}

// ---------------------------------------------------------------------------
// Complexity

Complexity alignment_complexity(const Alignment& a) {
  require_valid(a);
  const double m = static_cast<double>(a.source().activity_count());
  const double n = static_cast<double>(a.rows());
  Complexity c;
  c.value = 1.0 - m / (n * static_cast<double>(a.length()));
  c.lower_bound = 1.0 - m / (n * static_cast<double>(a.min_length()));
  c.upper_bound = 1.0 - 1.0 / n;
  constexpr double kTol = 1e-12;
  if (c.value < c.lower_bound - kTol || c.value > c.upper_bound + kTol)
    throw InvariantError("alignment complexity " + std::to_string(c.value) +
                         " outside [" + std::to_string(c.lower_bound) + ", " +
                         std::to_string(c.upper_bound) + "]");
  return c;
}

// ---------------------------------------------------------------------------
// Consensus

std::vector<ConsensusItem> consensus_sequence(const Alignment& a, double majority) {
  if (!(majority > 0.0 && majority <= 1.0))
    throw ConfigError("majority threshold must lie in (0, 1]");
  require_valid(a);
  const auto& alphabet = a.source().alphabet();
  std::vector<ConsensusItem> out;
  std::vector<std::size_t> counts(alphabet.size());
  for (std::size_t c = 0; c < a.length(); ++c) {
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t r = 0; r < a.rows(); ++r) {
      const SymbolId x = a.symbol_at(r, c);
      if (x != kGapSymbol) ++counts[static_cast<std::size_t>(x)];
    }
    const auto best = std::max_element(counts.begin(), counts.end());
    if (best == counts.end() || *best == 0) continue;
    const double share = static_cast<double>(*best) / static_cast<double>(a.rows());
    if (share <= majority) continue;
    const bool tie = std::count(counts.begin(), counts.end(), *best) > 1;
    out.push_back({c, alphabet[static_cast<std::size_t>(best - counts.begin())], tie});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Report

MetricReport evaluate(const Alignment& a, const Alignment* reference,
                      const EvaluationOptions& options, Execution exec) {
  options.scheme.validate();
  require_valid(a);
  MetricReport r;
  r.options = options;
  r.traces = a.rows();
  r.activities = a.source().activity_count();
  r.length = a.length();
  r.activity_types = a.source().alphabet().size();

  r.ref_free_sps = ref_free_sps(a, options.scheme, exec);
  if (reference) {
    r.ref_based_sps = ref_based_sps(a, *reference);
    r.column_score = column_score(a, *reference);
    r.n_e = count_heuristic_errors(a, *reference);
  }
  if (a.source().max_trace_length() >= options.min_pattern_length) {
    const auto census = extract_patterns(a.source(), options.min_pattern_length,
                                         options.max_pattern_length, exec);
    if (!census.empty()) {
      const auto top = census.most_frequent();
      r.top_pattern = MostFrequentPattern{census.to_pattern(top.symbols), top.count};
      r.ms_top = misalignment_score(a, top.symbols);
      r.oms = overall_misalignment(a, census, options.tf_ratio, exec);
    }
  }
  r.ois = overall_information_score(a, exec);
  r.complexity = alignment_complexity(a);
  r.consensus = consensus_sequence(a, options.majority);
  return r;
}

}  // namespace tracealign
