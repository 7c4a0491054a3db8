#include "tracealign/aligner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include "random.hpp"
#include "tracealign/error.hpp"
#include "tracealign/metrics.hpp"

namespace tracealign {

void ScoringScheme::validate() const {
  if (!(match > mismatch))
    throw ConfigError("scoring scheme requires match > mismatch (got match=" +
                      std::to_string(match) + ", mismatch=" +
                      std::to_string(mismatch) + ")");
  if (!std::isfinite(match) || !std::isfinite(mismatch) || !std::isfinite(gap))
    throw ConfigError("scoring scheme values must be finite");
}

namespace {

enum class Step : std::uint8_t { kDiag, kUp, kLeft };

struct DpPath {
  std::vector<Step> steps;  // in alignment order
  double score;
};

// Global alignment DP. `gap_first(i)` scores element i of the first sequence
// against a gap (an "up" move), `gap_second(j)` element j of the second.
template <class Sub, class GapFirst, class GapSecond>
DpPath needleman_wunsch(std::size_t n, std::size_t m, Sub&& sub,
                        GapFirst&& gap_first, GapSecond&& gap_second) {
  const std::size_t w = m + 1;
  std::vector<double> h((n + 1) * w);
  std::vector<Step> dir((n + 1) * w, Step::kDiag);
  for (std::size_t i = 1; i <= n; ++i) {
    h[i * w] = h[(i - 1) * w] + gap_first(i - 1);
    dir[i * w] = Step::kUp;
  }
  for (std::size_t j = 1; j <= m; ++j) {
    h[j] = h[j - 1] + gap_second(j - 1);
    dir[j] = Step::kLeft;
  }
  for (std::size_t i = 1; i <= n; ++i) {
    const double gi = gap_first(i - 1);
    for (std::size_t j = 1; j <= m; ++j) {
      const double d = h[(i - 1) * w + j - 1] + sub(i - 1, j - 1);
      const double u = h[(i - 1) * w + j] + gi;
      const double l = h[i * w + j - 1] + gap_second(j - 1);
      const double best = std::max({d, u, l});
      // Profile scores are sums of products; absorb rounding in tie-breaks.
      const double tol = 1e-9 * std::max(1.0, std::abs(best));
      Step s = Step::kLeft;
      if (d >= best - tol) {
        s = Step::kDiag;
      } else if (u >= best - tol) {
        s = Step::kUp;
      }
      h[i * w + j] = best;
      dir[i * w + j] = s;
    }
  }
  DpPath path;
  path.score = h[n * w + m];
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    const Step s = dir[i * w + j];
    path.steps.push_back(s);
    if (s != Step::kLeft) --i;
    if (s != Step::kUp) --j;
  }
  std::reverse(path.steps.begin(), path.steps.end());
  return path;
}

}  // namespace

PairwiseResult pairwise_align(const Trace& first, const Trace& second,
                              const ScoringScheme& scheme) {
  scheme.validate();
  std::vector<Trace> traces{first, second};
  if (first.case_id() == second.case_id())
    traces[1] = Trace(second.case_id() + "#2", second.activities());
  auto log = std::make_shared<const EventLog>(std::move(traces));
  const auto a = log->symbols(0);
  const auto b = log->symbols(1);
  const double gap = scheme.gap;
  auto path = needleman_wunsch(
      a.size(), b.size(), [&](std::size_t i, std::size_t j) { return scheme(a[i], b[j]); },
      [gap](std::size_t) { return gap; }, [gap](std::size_t) { return gap; });

  std::vector<CellRow> rows(2);
  std::size_t i = 0, j = 0;
  for (Step s : path.steps) {
    rows[0].push_back(s == Step::kLeft ? Cell::gap() : Cell::occupied(0, i++));
    rows[1].push_back(s == Step::kUp ? Cell::gap() : Cell::occupied(1, j++));
  }
  return {Alignment(std::move(log), std::move(rows)), path.score};
}

double pairwise_score(std::span<const SymbolId> a, std::span<const SymbolId> b,
                      const ScoringScheme& scheme) {
  std::vector<double> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 1; j <= b.size(); ++j) prev[j] = prev[j - 1] + scheme.gap;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = prev[0] + scheme.gap;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::max({prev[j - 1] + scheme(a[i - 1], b[j - 1]),
                         prev[j] + scheme.gap, cur[j - 1] + scheme.gap});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

DistanceMatrix distance_matrix(const EventLog& log, const ScoringScheme& scheme,
                               Execution exec) {
  scheme.validate();
  if (log.size() < 2) throw SizeError("distance matrix needs at least two traces");
  if (scheme.match <= 0)
    throw ConfigError("distance normalization requires a positive match score");
  const std::size_t n = log.size();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

  std::vector<double> dist(pairs.size());
  auto compute = [&](std::size_t p) {
    const auto [i, j] = pairs[p];
    const double score = pairwise_score(log.symbols(i), log.symbols(j), scheme);
    const double best =
        scheme.match * static_cast<double>(std::min(log[i].size(), log[j].size()));
    dist[p] = std::clamp(1.0 - score / best, 0.0, 1.0);
  };
  const auto count = static_cast<std::ptrdiff_t>(pairs.size());
  if (exec == Execution::kParallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t p = 0; p < count; ++p) compute(static_cast<std::size_t>(p));
  } else {
    for (std::ptrdiff_t p = 0; p < count; ++p) compute(static_cast<std::size_t>(p));
  }

  DistanceMatrix d(n);
  for (std::size_t p = 0; p < pairs.size(); ++p) d.set(pairs[p].first, pairs[p].second, dist[p]);
  return d;
}

GuideTree::GuideTree(std::size_t leaf_count, std::vector<GuideNode> nodes)
    : leaf_count_(leaf_count), nodes_(std::move(nodes)) {
  if (leaf_count_ == 0 || nodes_.size() != 2 * leaf_count_ - 1)
    throw ConfigError("guide tree over " + std::to_string(leaf_count_) +
                      " leaves must have " + std::to_string(2 * leaf_count_ - 1) +
                      " nodes");
  std::vector<int> used(nodes_.size(), 0);
  std::vector<int> leaf_seen(leaf_count_, 0);
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const GuideNode& node = nodes_[k];
    if (k < leaf_count_) {
      if (!node.is_leaf() || node.leaf >= leaf_count_ || leaf_seen[node.leaf]++)
        throw ConfigError("guide tree leaves must be {0..N-1}, each once");
      continue;
    }
    if (node.is_leaf() || node.right < 0 ||
        static_cast<std::size_t>(node.left) >= k ||
        static_cast<std::size_t>(node.right) >= k || node.left == node.right)
      throw ConfigError("guide tree node " + std::to_string(k) +
                        " must merge two earlier nodes");
    if (used[node.left]++ || used[node.right]++)
      throw ConfigError("guide tree node reused as a child");
  }
  for (std::size_t k = 0; k + 1 < nodes_.size(); ++k)
    if (!used[k]) throw ConfigError("guide tree is not connected");
}

std::vector<std::size_t> GuideTree::leaves_under(std::size_t node) const {
  std::vector<std::size_t> out;
  std::vector<std::size_t> stack{node};
  while (!stack.empty()) {
    const GuideNode& n = nodes_[stack.back()];
    stack.pop_back();
    if (n.is_leaf()) {
      out.push_back(n.leaf);
    } else {
      stack.push_back(static_cast<std::size_t>(n.left));
      stack.push_back(static_cast<std::size_t>(n.right));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

GuideTree build_guide_tree(const DistanceMatrix& d) {
  const std::size_t n = d.size();
  if (n < 2) throw SizeError("guide tree needs at least two traces");
  for (std::size_t i = 0; i < n; ++i) {
    if (d(i, i) != 0.0) throw ConfigError("distance matrix diagonal must be zero");
    for (std::size_t j = i + 1; j < n; ++j)
      if (d(i, j) != d(j, i)) throw ConfigError("distance matrix must be symmetric");
  }

  std::vector<GuideNode> nodes(n);
  for (std::size_t i = 0; i < n; ++i) nodes[i].leaf = i;

  // Active clusters by node id (ascending); dist is indexed by node id.
  const std::size_t total = 2 * n - 1;
  std::vector<double> dist(total * total, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) dist[i * total + j] = d(i, j);
  std::vector<std::size_t> active(n);
  std::iota(active.begin(), active.end(), 0);

  while (active.size() > 1) {
    std::size_t bi = 0, bj = 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < active.size(); ++a) {
      for (std::size_t b = a + 1; b < active.size(); ++b) {
        const double v = dist[active[a] * total + active[b]];
        if (v < best - 1e-12) {
          best = v;
          bi = a;
          bj = b;
        }
      }
    }
    const std::size_t left = active[bi], right = active[bj];
    GuideNode merged;
    merged.left = static_cast<std::int64_t>(left);
    merged.right = static_cast<std::int64_t>(right);
    merged.distance = best;
    merged.cluster_size = nodes[left].cluster_size + nodes[right].cluster_size;
    const std::size_t id = nodes.size();
    nodes.push_back(merged);

    const double wl = static_cast<double>(nodes[left].cluster_size);
    const double wr = static_cast<double>(nodes[right].cluster_size);
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bj));
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bi));
    for (std::size_t k : active) {
      const double v =
          (wl * dist[left * total + k] + wr * dist[right * total + k]) / (wl + wr);
      dist[id * total + k] = v;
      dist[k * total + id] = v;
    }
    active.push_back(id);
  }
  return GuideTree(n, std::move(nodes));
}

Profile Profile::from_trace(std::shared_ptr<const EventLog> log, std::size_t trace) {
  if (!log || trace >= log->size())
    throw BoundsError("trace index " + std::to_string(trace) + " out of range");
  Profile p;
  p.members_ = {trace};
  CellRow row;
  row.reserve((*log)[trace].size());
  for (std::size_t k = 0; k < (*log)[trace].size(); ++k)
    row.push_back(Cell::occupied(trace, k));
  p.rows_.push_back(std::move(row));
  p.log_ = std::move(log);
  p.compute_frequencies();
  return p;
}

Profile::Profile(std::shared_ptr<const EventLog> log, std::vector<std::size_t> members,
                 std::vector<CellRow> rows)
    : log_(std::move(log)), members_(std::move(members)), rows_(std::move(rows)) {
  if (!log_) throw ConfigError("profile requires a source log");
  if (members_.empty() || members_.size() != rows_.size())
    throw StructuralError("profile needs one row per member");
  const std::size_t len = rows_.front().size();
  std::set<std::size_t> seen;
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    const std::size_t m = members_[r];
    if (m >= log_->size() || !seen.insert(m).second)
      throw StructuralError("profile member out of range or repeated");
    if (rows_[r].size() != len) throw StructuralError("profile rows are ragged");
    std::size_t next = 0;
    for (const Cell& c : rows_[r]) {
      if (c.is_gap()) continue;
      const auto id = c.occurrence();
      if (id.trace_index != m || id.ordinal != next++)
        throw StructuralError("profile row does not strip to its trace");
    }
    if (next != (*log_)[m].size())
      throw StructuralError("profile row does not strip to its trace");
  }
  compute_frequencies();
}

void Profile::compute_frequencies() {
  length_ = rows_.empty() ? 0 : rows_.front().size();
  width_ = log_->alphabet().size() + 1;
  freq_.assign(length_ * width_, 0.0);
  const double unit = 1.0 / static_cast<double>(rows_.size());
  const std::size_t gap_slot = width_ - 1;
  for (const CellRow& row : rows_) {
    for (std::size_t j = 0; j < length_; ++j) {
      const Cell& c = row[j];
      std::size_t slot = gap_slot;
      if (!c.is_gap()) {
        const auto id = c.occurrence();
        slot = static_cast<std::size_t>(log_->symbols(id.trace_index)[id.ordinal]);
      }
      freq_[j * width_ + slot] += unit;
    }
  }
}

Alignment Profile::to_alignment() const {
  if (members_.size() != log_->size())
    throw SizeError("profile covers " + std::to_string(members_.size()) + " of " +
                    std::to_string(log_->size()) + " traces");
  std::vector<CellRow> grid(members_.size());
  for (std::size_t r = 0; r < members_.size(); ++r) grid.at(members_[r]) = rows_[r];
  return Alignment(log_, std::move(grid));
}

ProfileMerge align_profiles(const Profile& first, const Profile& second,
                            const ScoringScheme& scheme) {
  scheme.validate();
  if (first.log_ptr() != second.log_ptr() && !(first.log() == second.log())) {
    if (first.log().alphabet() != second.log().alphabet())
      throw ConfigError("profiles are over different alphabets");
    throw ConfigError("profiles come from different logs");
  }
  for (std::size_t m : first.members())
    if (std::find(second.members().begin(), second.members().end(), m) !=
        second.members().end())
      throw ConfigError("profiles share member " + std::to_string(m));

  const std::size_t width = first.width();
  const std::size_t gap_slot = width - 1;

  // expected[j][x]: expected score of symbol x against column j of `second`.
  std::vector<double> expected(second.length() * width);
  for (std::size_t j = 0; j < second.length(); ++j) {
    const auto col = second.column(j);
    const double gaps = col[gap_slot];
    const double filled = 1.0 - gaps;
    double* out = expected.data() + j * width;
    for (std::size_t x = 0; x < gap_slot; ++x)
      out[x] = scheme.match * col[x] + scheme.mismatch * (filled - col[x]) +
               scheme.gap * gaps;
    out[gap_slot] = scheme.gap * filled;
  }
  // Sparse view of the first profile's columns.
  std::vector<std::vector<std::pair<std::size_t, double>>> sparse(first.length());
  for (std::size_t i = 0; i < first.length(); ++i) {
    const auto col = first.column(i);
    for (std::size_t x = 0; x < width; ++x)
      if (col[x] > 0.0) sparse[i].emplace_back(x, col[x]);
  }

  auto path = needleman_wunsch(
      first.length(), second.length(),
      [&](std::size_t i, std::size_t j) {
        const double* e = expected.data() + j * width;
        double s = 0.0;
        for (const auto& [x, f] : sparse[i]) s += f * e[x];
        return s;
      },
      [&](std::size_t i) { return (1.0 - first.gap_frequency(i)) * scheme.gap; },
      [&](std::size_t j) { return (1.0 - second.gap_frequency(j)) * scheme.gap; });

  const std::size_t r1 = first.rows().size(), r2 = second.rows().size();
  std::vector<CellRow> rows(r1 + r2);
  for (auto& row : rows) row.reserve(path.steps.size());
  std::size_t i = 0, j = 0;
  for (Step s : path.steps) {
    for (std::size_t r = 0; r < r1; ++r)
      rows[r].push_back(s == Step::kLeft ? Cell::gap() : first.rows()[r][i]);
    for (std::size_t r = 0; r < r2; ++r)
      rows[r1 + r].push_back(s == Step::kUp ? Cell::gap() : second.rows()[r][j]);
    if (s != Step::kLeft) ++i;
    if (s != Step::kUp) ++j;
  }
  std::vector<std::size_t> members = first.members();
  members.insert(members.end(), second.members().begin(), second.members().end());
  return {Profile(first.log_ptr(), std::move(members), std::move(rows)), path.score};
}

namespace {

Alignment fold_tree(const std::shared_ptr<const EventLog>& log, const ScoringScheme& scheme,
                    const GuideTree& tree, Execution exec) {
  const auto& nodes = tree.nodes();
  std::vector<std::optional<Profile>> profiles(nodes.size());
  std::vector<std::size_t> level(nodes.size(), 0);
  std::size_t max_level = 0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (nodes[k].is_leaf()) {
      profiles[k] = Profile::from_trace(log, nodes[k].leaf);
    } else {
      level[k] = 1 + std::max(level[nodes[k].left], level[nodes[k].right]);
      max_level = std::max(max_level, level[k]);
    }
  }
  // Merges on one level only depend on lower levels.
  std::vector<std::vector<std::size_t>> by_level(max_level + 1);
  for (std::size_t k = tree.leaf_count(); k < nodes.size(); ++k)
    by_level[level[k]].push_back(k);

  auto merge = [&](std::size_t k) {
    const auto l = static_cast<std::size_t>(nodes[k].left);
    const auto r = static_cast<std::size_t>(nodes[k].right);
    profiles[k] = align_profiles(*profiles[l], *profiles[r], scheme).profile;
    profiles[l].reset();
    profiles[r].reset();
  };
  for (std::size_t lv = 1; lv <= max_level; ++lv) {
    const auto& todo = by_level[lv];
    const auto count = static_cast<std::ptrdiff_t>(todo.size());
    if (exec == Execution::kParallel && count > 1) {
#pragma omp parallel for schedule(dynamic, 1)
      for (std::ptrdiff_t t = 0; t < count; ++t) merge(todo[static_cast<std::size_t>(t)]);
    } else {
      for (std::size_t k : todo) merge(k);
    }
  }
  return profiles[tree.root()]->to_alignment();
}

}  // namespace

Alignment progressive_align(std::shared_ptr<const EventLog> log, const ScoringScheme& scheme,
                            const std::optional<GuideTree>& tree, Execution exec) {
  scheme.validate();
  if (!log || log->size() < 2)
    throw SizeError("progressive alignment needs at least two traces");
  if (tree) {
    if (tree->leaf_count() != log->size())
      throw ConfigError("guide tree has " + std::to_string(tree->leaf_count()) +
                        " leaves for " + std::to_string(log->size()) + " traces");
    return fold_tree(log, scheme, *tree, exec);
  }
  const GuideTree built = build_guide_tree(distance_matrix(*log, scheme, exec));
  return fold_tree(log, scheme, built, exec);
}

Alignment consensus_reference(std::shared_ptr<const EventLog> log,
                              const ScoringScheme& scheme, std::size_t k,
                              std::uint64_t seed, Execution exec) {
  if (k < 1) throw ConfigError("consensus reference needs k >= 1");
  scheme.validate();
  if (!log || log->size() < 2)
    throw SizeError("consensus reference needs at least two traces");
  const DistanceMatrix base = distance_matrix(*log, scheme, exec);
  const std::size_t n = base.size();

  std::vector<GuideTree> trees;
  trees.reserve(k);
  trees.push_back(build_guide_tree(base));
  for (std::size_t c = 1; c < k; ++c) {
    detail::Rng rng(detail::derive_seed(seed, c));
    std::uniform_real_distribution<double> noise(0.9, 1.1);
    DistanceMatrix noisy(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) noisy.set(i, j, base(i, j) * noise(rng));
    trees.push_back(build_guide_tree(noisy));
  }

  struct Candidate {
    std::optional<Alignment> alignment;
    double sps = 0;
    double complexity = 0;
  };
  std::vector<Candidate> candidates(k);
  auto evaluate = [&](std::size_t c) {
    // Identical trees give identical alignments; reuse the earlier one.
    for (std::size_t e = 0; e < c; ++e) {
      if (trees[e] == trees[c] && candidates[e].alignment) {
        candidates[c] = candidates[e];
        return;
      }
    }
    Alignment a = fold_tree(log, scheme, trees[c], Execution::kSerial);
    candidates[c].sps = ref_free_sps(a, scheme, Execution::kSerial);
    candidates[c].complexity = alignment_complexity(a).value;
    candidates[c].alignment = std::move(a);
  };
  const auto count = static_cast<std::ptrdiff_t>(k);
  if (exec == Execution::kParallel && k > 1) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t c = 0; c < count; ++c) {
      const auto cc = static_cast<std::size_t>(c);
      Alignment a = fold_tree(log, scheme, trees[cc], Execution::kSerial);
      candidates[cc].sps = ref_free_sps(a, scheme, Execution::kSerial);
      candidates[cc].complexity = alignment_complexity(a).value;
      candidates[cc].alignment = std::move(a);
    }
  } else {
    for (std::size_t c = 0; c < k; ++c) evaluate(c);
  }

  std::size_t best = 0;
  for (std::size_t c = 1; c < k; ++c) {
    const auto& cand = candidates[c];
    const auto& cur = candidates[best];
    if (cand.sps > cur.sps ||
        (cand.sps == cur.sps && cand.complexity < cur.complexity))
      best = c;
  }
  return std::move(*candidates[best].alignment);
}

}  // namespace tracealign
