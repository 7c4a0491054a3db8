#include "tracealign/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "random.hpp"
#include "tracealign/error.hpp"
#include "tracealign/metrics.hpp"

namespace tracealign {

// ---------------------------------------------------------------------------
// Error injection

PerturbedAlignment perturb(const Alignment& reference, std::size_t moves, std::uint64_t seed) {
  require_valid(reference);
  const EventLog& log = reference.source();
  std::vector<CellRow> rows = reference.grid();

  std::vector<std::size_t> offsets(log.size() + 1, 0);
  for (std::size_t t = 0; t < log.size(); ++t) offsets[t + 1] = offsets[t] + log[t].size();

  detail::Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick_occurrence(0, offsets.back() - 1);
  std::bernoulli_distribution go_left(0.5);

  for (std::size_t move = 0; move < moves; ++move) {
    const std::size_t flat = pick_occurrence(rng);
    const auto trace = static_cast<std::size_t>(
        std::upper_bound(offsets.begin(), offsets.end(), flat) - offsets.begin() - 1);
    const std::size_t ordinal = flat - offsets[trace];
    CellRow& row = rows[trace];
    std::size_t col = 0;
    while (row[col].is_gap() || row[col].occurrence().ordinal != ordinal) ++col;

    std::vector<std::size_t> left, right;
    for (std::size_t c = col; c > 0 && row[c - 1].is_gap(); --c) left.push_back(c - 1);
    for (std::size_t c = col + 1; c < row.size() && row[c].is_gap(); ++c) right.push_back(c);

    bool to_left = go_left(rng);
    if (to_left && left.empty() && !right.empty()) to_left = false;
    if (!to_left && right.empty() && !left.empty()) to_left = true;

    std::size_t target;
    if (left.empty() && right.empty()) {
      // Boxed in by neighbours: open a gap column beside the cell.
      const std::size_t at = to_left ? col : col + 1;
      for (auto& r : rows) r.insert(r.begin() + static_cast<std::ptrdiff_t>(at), Cell::gap());
      if (to_left) ++col;
      target = at;
    } else {
      const auto& side = to_left ? left : right;
      std::uniform_int_distribution<std::size_t> pick(0, side.size() - 1);
      target = side[pick(rng)];
    }
    std::swap(row[col], row[target]);
  }

  // Compact all-gap columns.
  const std::size_t width = rows.empty() ? 0 : rows.front().size();
  std::vector<bool> keep(width, false);
  for (const auto& r : rows)
    for (std::size_t c = 0; c < width; ++c)
      if (!r[c].is_gap()) keep[c] = true;
  for (auto& r : rows) {
    CellRow compact;
    compact.reserve(width);
    for (std::size_t c = 0; c < width; ++c)
      if (keep[c]) compact.push_back(r[c]);
    r = std::move(compact);
  }
  return {Alignment(reference.source_ptr(), std::move(rows)), moves, seed};
}

// ---------------------------------------------------------------------------
// Process models

std::string_view to_string(BlockKind kind) {
  switch (kind) {
    case BlockKind::kActivity: return "activity";
    case BlockKind::kSequence: return "sequence";
    case BlockKind::kChoice: return "choice";
    case BlockKind::kParallel: return "parallel";
    case BlockKind::kLoop: return "loop";
  }
  return "unknown";
}

ModelBlock ModelBlock::activity(std::string label) {
  ModelBlock b;
  b.kind = BlockKind::kActivity;
  b.label = std::move(label);
  return b;
}

ModelBlock ModelBlock::sequence(std::vector<ModelBlock> children) {
  ModelBlock b;
  b.kind = BlockKind::kSequence;
  b.children = std::move(children);
  return b;
}

ModelBlock ModelBlock::choice(std::vector<ModelBlock> children, std::vector<double> probabilities) {
  ModelBlock b;
  b.kind = BlockKind::kChoice;
  b.children = std::move(children);
  b.probabilities = std::move(probabilities);
  return b;
}

ModelBlock ModelBlock::parallel(std::vector<ModelBlock> children) {
  ModelBlock b;
  b.kind = BlockKind::kParallel;
  b.children = std::move(children);
  return b;
}

ModelBlock ModelBlock::loop(ModelBlock body, double repeat_probability) {
  ModelBlock b;
  b.kind = BlockKind::kLoop;
  b.children.push_back(std::move(body));
  b.repeat_probability = repeat_probability;
  return b;
}

namespace {

void validate_block(const ModelBlock& b, const std::string& path) {
  auto fail = [&](const std::string& what) {
    throw ConfigError("model block " + path + " (" + std::string(to_string(b.kind)) +
                      "): " + what);
  };
  switch (b.kind) {
    case BlockKind::kActivity:
      if (!b.children.empty()) fail("activity blocks have no children");
      try {
        Activity{b.label};
      } catch (const ConfigError& e) {
        fail(e.what());
      }
      return;
    case BlockKind::kSequence:
    case BlockKind::kParallel:
      if (b.children.empty()) fail("needs at least one child");
      break;
    case BlockKind::kChoice: {
      if (b.children.empty()) fail("needs at least one child");
      if (b.probabilities.size() != b.children.size())
        fail("needs one probability per child");
      double sum = 0.0;
      for (double p : b.probabilities) {
        if (!(p >= 0.0 && p <= 1.0)) fail("probabilities must lie in [0, 1]");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9) fail("probabilities sum to " + std::to_string(sum));
      break;
    }
    case BlockKind::kLoop:
      if (b.children.size() != 1) fail("needs exactly one body");
      if (!(b.repeat_probability >= 0.0 && b.repeat_probability < 1.0))
        fail("repeat probability must lie in [0, 1)");
      break;
  }
  for (std::size_t i = 0; i < b.children.size(); ++i)
    validate_block(b.children[i], path + "/" + std::to_string(i));
}

void collect_labels(const ModelBlock& b, std::set<std::string>& out) {
  if (b.kind == BlockKind::kActivity) out.insert(b.label);
  for (const auto& c : b.children) collect_labels(c, out);
}

void sample(const ModelBlock& b, detail::Rng& rng, std::vector<std::string>& out) {
  switch (b.kind) {
    case BlockKind::kActivity:
      out.push_back(b.label);
      return;
    case BlockKind::kSequence:
      for (const auto& c : b.children) sample(c, rng, out);
      return;
    case BlockKind::kChoice: {
      std::discrete_distribution<std::size_t> pick(b.probabilities.begin(), b.probabilities.end());
      sample(b.children[pick(rng)], rng, out);
      return;
    }
    case BlockKind::kParallel: {
      std::vector<std::vector<std::string>> parts(b.children.size());
      std::size_t remaining = 0;
      for (std::size_t i = 0; i < parts.size(); ++i) {
        sample(b.children[i], rng, parts[i]);
        remaining += parts[i].size();
      }
      // Drawing the next branch with probability proportional to its
      // remaining length yields a uniform interleaving.
      std::vector<std::size_t> next(parts.size(), 0);
      while (remaining > 0) {
        std::uniform_int_distribution<std::size_t> pick(0, remaining - 1);
        std::size_t u = pick(rng);
        std::size_t k = 0;
        while (u >= parts[k].size() - next[k]) {
          u -= parts[k].size() - next[k];
          ++k;
        }
        out.push_back(parts[k][next[k]++]);
        --remaining;
      }
      return;
    }
    case BlockKind::kLoop: {
      std::bernoulli_distribution again(b.repeat_probability);
      do {
        sample(b.children.front(), rng, out);
      } while (again(rng));
      return;
    }
  }
}

}  // namespace

void ProcessModelSpec::validate() const { validate_block(root, "root"); }

std::vector<std::string> ProcessModelSpec::activity_types() const {
  std::set<std::string> labels;
  collect_labels(root, labels);
  return {labels.begin(), labels.end()};
}

EventLog generate_log(const ProcessModelSpec& spec, std::size_t n_traces, std::uint64_t seed) {
  if (n_traces < 1) throw ConfigError("generate_log needs at least one trace");
  spec.validate();
  const std::size_t digits = std::max<std::size_t>(4, std::to_string(n_traces).size());
  std::vector<Trace> traces;
  traces.reserve(n_traces);
  for (std::size_t t = 0; t < n_traces; ++t) {
    detail::Rng rng(detail::derive_seed(seed, t));
    std::vector<std::string> labels;
    sample(spec.root, rng, labels);
    std::string id = std::to_string(t + 1);
    id.insert(0, digits - id.size(), '0');
    traces.push_back(Trace::from_labels("case_" + id, labels));
  }
  return EventLog(std::move(traces));
}

// ---------------------------------------------------------------------------
// Statistics

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw ConfigError("pearson: samples differ in length");
  if (xs.size() < 3) throw ConfigError("pearson: needs at least 3 points");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  // Values equal up to rounding count as constant.
  auto negligible = [](double ss, double mean, double count) {
    return ss <= 1e-24 * count * std::max(1.0, mean * mean);
  };
  if (negligible(sxx, mx, n) || negligible(syy, my, n))
    throw DegenerateError("correlation undefined: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && v[order[j]] == v[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j - 1)) / 2.0 + 1.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

}  // namespace

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw ConfigError("spearman: samples differ in length");
  return pearson(average_ranks(xs), average_ranks(ys));
}

// ---------------------------------------------------------------------------
// Correlation experiment

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::kRefFreeSps: return "ref_free_sps";
    case Metric::kRefBasedSps: return "ref_based_sps";
    case Metric::kColumnScore: return "column_score";
    case Metric::kMsTop: return "ms_top";
    case Metric::kOms: return "oms";
    case Metric::kOis: return "ois";
    case Metric::kComplexity: return "complexity";
  }
  return "unknown";
}

std::optional<double> CorrelationReport::coefficient(Metric m) const {
  for (const auto& c : correlations)
    if (c.metric == m) return c.coefficient;
  return std::nullopt;
}

namespace {

struct SampleSet {
  Alignment reference;
  PatternCensus census;
  std::vector<PerturbedAlignment> perturbed;
  std::vector<std::size_t> moves;
  std::vector<std::size_t> n_e;
};

template <class F>
void for_each_sample(std::size_t n, Execution exec, F&& f) {
  const auto count = static_cast<std::ptrdiff_t>(n);
  if (exec == Execution::kParallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < count; ++i) f(static_cast<std::size_t>(i));
  } else {
    for (std::ptrdiff_t i = 0; i < count; ++i) f(static_cast<std::size_t>(i));
  }
}

SampleSet draw_samples(const std::shared_ptr<const EventLog>& log, const ExperimentOptions& o,
                       Execution exec) {
  if (o.samples < 10) throw ConfigError("correlation experiment needs at least 10 samples");
  if (!(o.tf_ratio > 0.0 && o.tf_ratio <= 1.0))
    throw ConfigError("tf_ratio must lie in (0, 1]");
  Alignment reference = consensus_reference(log, o.scheme, o.consensus_trees, o.seed, exec);
  PatternCensus census = extract_patterns(*log, 2, std::nullopt, exec);
  if (census.empty()) throw SizeError("log has no patterns of length >= 2");

  std::vector<std::size_t> moves(o.samples);
  for (std::size_t i = 0; i < o.samples; ++i) {
    moves[i] = static_cast<std::size_t>(std::llround(
        static_cast<double>(i) * static_cast<double>(o.max_moves) /
        static_cast<double>(o.samples - 1)));
  }
  const std::uint64_t base = detail::derive_seed(o.seed, 0x5eed);
  std::vector<std::optional<PerturbedAlignment>> drawn(o.samples);
  std::vector<std::size_t> n_e(o.samples);
  for_each_sample(o.samples, exec, [&](std::size_t i) {
    drawn[i] = perturb(reference, moves[i], detail::derive_seed(base, i));
    n_e[i] = count_heuristic_errors(drawn[i]->alignment, reference);
  });
  std::vector<PerturbedAlignment> perturbed;
  perturbed.reserve(o.samples);
  for (auto& d : drawn) perturbed.push_back(std::move(*d));

  const bool constant = std::all_of(n_e.begin(), n_e.end(),
                                    [&](std::size_t v) { return v == n_e.front(); });
  if (constant)
    throw DegenerateError("zero N_e variance across samples; increase max_moves");
  return {std::move(reference), std::move(census), std::move(perturbed), std::move(moves),
          std::move(n_e)};
}

std::vector<double> as_doubles(const std::vector<std::size_t>& v) {
  return {v.begin(), v.end()};
}

std::optional<double> try_pearson(const std::vector<double>& xs, const std::vector<double>& ys,
                                  std::string* note) {
  try {
    return pearson(xs, ys);
  } catch (const DegenerateError& e) {
    if (note) *note = e.what();
    return std::nullopt;
  }
}

}  // namespace

CorrelationReport correlation_experiment(std::shared_ptr<const EventLog> log,
                                         const ExperimentOptions& options, Execution exec) {
  const SampleSet set = draw_samples(log, options, exec);
  const auto top = set.census.most_frequent();

  CorrelationReport report;
  report.options = options;
  report.most_frequent_pattern.clear();
  for (std::size_t k = 0; k < top.symbols.size(); ++k) {
    if (k) report.most_frequent_pattern += ",";
    report.most_frequent_pattern += log->label(top.symbols[k]);
  }
  report.samples.resize(options.samples);
  for_each_sample(options.samples, exec, [&](std::size_t i) {
    const Alignment& a = set.perturbed[i].alignment;
    CorrelationSample& s = report.samples[i];
    s.sample_id = i;
    s.moves = set.moves[i];
    s.n_e = set.n_e[i];
    s.values[0] = ref_free_sps(a, options.scheme, Execution::kSerial);
    s.values[1] = ref_based_sps(a, set.reference);
    s.values[2] = column_score(a, set.reference);
    s.values[3] = misalignment_score(a, top.symbols);
    s.values[4] = overall_misalignment_score(a, set.census, options.tf_ratio, Execution::kSerial);
    s.values[5] = overall_information_score(a, Execution::kSerial);
    s.values[6] = alignment_complexity(a).value;
  });

  const auto xs = as_doubles(set.n_e);
  for (std::size_t m = 0; m < kMetricCount; ++m) {
    std::vector<double> ys(options.samples);
    for (std::size_t i = 0; i < options.samples; ++i) ys[i] = report.samples[i].values[m];
    MetricCorrelation c{kAllMetrics[m], std::nullopt, ""};
    c.coefficient = try_pearson(xs, ys, &c.note);
    report.correlations.push_back(std::move(c));
  }
  return report;
}

std::vector<ThresholdPoint> threshold_sweep(std::shared_ptr<const EventLog> log,
                                            const ExperimentOptions& options,
                                            const std::vector<double>& tf_ratios,
                                            Execution exec) {
  for (double r : tf_ratios)
    if (!(r > 0.0 && r <= 1.0)) throw ConfigError("tf_ratio must lie in (0, 1]");
  const SampleSet set = draw_samples(log, options, exec);
  const auto xs = as_doubles(set.n_e);

  std::vector<ThresholdPoint> out;
  for (double ratio : tf_ratios) {
    std::vector<double> oms(options.samples);
    std::vector<std::size_t> eligible(options.samples);
    for_each_sample(options.samples, exec, [&](std::size_t i) {
      const auto b = overall_misalignment(set.perturbed[i].alignment, set.census, ratio,
                                          Execution::kSerial);
      oms[i] = b.oms;
      eligible[i] = b.eligible;
    });
    out.push_back({ratio, try_pearson(xs, oms, nullptr), eligible.front()});
  }
  return out;
}

}  // namespace tracealign
