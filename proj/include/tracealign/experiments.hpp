#pragma once

// Validation harness: controlled error injection into a reference alignment,
// synthetic logs from block-structured process models, and correlation of
// every metric with the number of heuristic errors.

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tracealign/aligner.hpp"
#include "tracealign/core.hpp"
#include "tracealign/parallel.hpp"

namespace tracealign {

struct PerturbedAlignment {
  Alignment alignment;
  std::size_t injected_moves;
  std::uint64_t seed;
};

/// Applies `moves` random single-occurrence relocations to `reference`.
///
/// Each move picks an occupied cell uniformly and shifts it left or right into
/// a gap cell of its own row without passing another occupied cell. When the
/// chosen side has no reachable gap the other side is used; when neither has
/// one, a fresh gap column is inserted next to the cell. All-gap columns are
/// removed at the end.
PerturbedAlignment perturb(const Alignment& reference, std::size_t moves, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Process models

enum class BlockKind { kActivity, kSequence, kChoice, kParallel, kLoop };

std::string_view to_string(BlockKind kind);

/// Block-structured process model node.
struct ModelBlock {
  BlockKind kind = BlockKind::kActivity;
  std::string label;                 // kActivity
  std::vector<ModelBlock> children;  // kSequence, kChoice, kParallel; kLoop body
  std::vector<double> probabilities; // kChoice, one per child
  double repeat_probability = 0.0;   // kLoop

  static ModelBlock activity(std::string label);
  static ModelBlock sequence(std::vector<ModelBlock> children);
  static ModelBlock choice(std::vector<ModelBlock> children, std::vector<double> probabilities);
  static ModelBlock parallel(std::vector<ModelBlock> children);
  static ModelBlock loop(ModelBlock body, double repeat_probability);

  friend bool operator==(const ModelBlock&, const ModelBlock&) = default;
};

struct ProcessModelSpec {
  std::string name;
  ModelBlock root;

  /// Throws ConfigError naming the offending block path.
  void validate() const;
  /// Distinct activity labels, sorted.
  std::vector<std::string> activity_types() const;

  friend bool operator==(const ProcessModelSpec&, const ProcessModelSpec&) = default;
};

/// Samples `n_traces` traces (case ids "case_0001", ...). Sequence concatenates,
/// Choice picks one child by probability, Parallel draws a uniform random
/// interleaving of its children's traces, Loop emits its body and repeats with
/// the given probability.
EventLog generate_log(const ProcessModelSpec& spec, std::size_t n_traces, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Statistics

/// Sample Pearson correlation. Throws ConfigError for length mismatch or fewer
/// than 3 points and DegenerateError when either side has zero variance.
double pearson(const std::vector<double>& xs, const std::vector<double>& ys);

/// Pearson correlation of average ranks.
double spearman(const std::vector<double>& xs, const std::vector<double>& ys);

// ---------------------------------------------------------------------------
// Correlation experiment

enum class Metric {
  kRefFreeSps,
  kRefBasedSps,
  kColumnScore,
  kMsTop,
  kOms,
  kOis,
  kComplexity,
};

inline constexpr std::size_t kMetricCount = 7;
inline constexpr std::array<Metric, kMetricCount> kAllMetrics = {
    Metric::kRefFreeSps, Metric::kRefBasedSps, Metric::kColumnScore, Metric::kMsTop,
    Metric::kOms,        Metric::kOis,         Metric::kComplexity};

/// Stable identifier used in reports and table headers.
std::string_view metric_name(Metric m);

struct ExperimentOptions {
  ScoringScheme scheme{};
  std::size_t samples = 30;
  std::size_t max_moves = 30;
  double tf_ratio = 0.40;
  std::size_t consensus_trees = 8;
  std::uint64_t seed = 1;
};

struct CorrelationSample {
  std::size_t sample_id;
  std::size_t moves;
  std::size_t n_e;
  std::array<double, kMetricCount> values;  // indexed like kAllMetrics
};

struct MetricCorrelation {
  Metric metric;
  std::optional<double> coefficient;
  std::string note;  // reason when the coefficient is undefined
};

struct CorrelationReport {
  std::vector<MetricCorrelation> correlations;
  std::vector<CorrelationSample> samples;
  ExperimentOptions options;
  std::string most_frequent_pattern;

  std::optional<double> coefficient(Metric m) const;
};

/// Builds a consensus reference, perturbs it with moves spread evenly over
/// [0, max_moves], labels each sample with its heuristic-error count and
/// correlates every metric with it. Samples are independent and seeded
/// per sample, so serial and parallel runs agree exactly.
/// Throws ConfigError for samples < 10 and DegenerateError when N_e has
/// zero variance.
CorrelationReport correlation_experiment(std::shared_ptr<const EventLog> log,
                                         const ExperimentOptions& options,
                                         Execution exec = Execution::kParallel);

struct ThresholdPoint {
  double tf_ratio;
  std::optional<double> coefficient;  // corr(OMS, N_e)
  std::size_t eligible_patterns;
};

/// corr(OMS, N_e) for each ratio, sharing one set of perturbed samples.
std::vector<ThresholdPoint> threshold_sweep(std::shared_ptr<const EventLog> log,
                                            const ExperimentOptions& options,
                                            const std::vector<double>& tf_ratios,
                                            Execution exec = Execution::kParallel);

}  // namespace tracealign
