#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tracealign/aligner.hpp"

namespace tracealign::cli {

enum class OutputFormat { kHuman, kJson, kCsv };

struct RunConfig {
  std::string command;  // align, consensus, evaluate, patterns, perturb, gen-log, correlate
  std::string input;    // log, alignment or model file depending on the command
  std::string reference;
  std::string output;   // empty: standard output
  std::string table;    // correlate: sample table (CSV) path
  ScoringScheme scheme{};
  double tf_ratio = 0.40;
  double majority = 0.5;
  std::size_t consensus_trees = 8;
  std::optional<std::uint64_t> seed;
  std::size_t samples = 30;
  std::size_t max_moves = 30;
  std::size_t moves = 1;
  std::size_t traces = 30;
  std::size_t min_pattern_length = 2;
  std::optional<std::size_t> max_pattern_length;
  std::size_t top = 20;  // patterns: most frequent entries listed
  std::vector<double> sweep;  // correlate: tf_ratio grid
  OutputFormat format = OutputFormat::kHuman;
  int threads = 0;  // 0: all available

  /// Throws ConfigError for parameters outside their documented ranges and
  /// for unreadable inputs or unwritable outputs.
  void validate() const;
};

/// Parses argv. Returns nullopt after printing help (exit 0) or a usage error
/// (exit code stored in `exit_code`).
std::optional<RunConfig> parse_arguments(int argc, const char* const* argv, std::ostream& out,
                                         std::ostream& err, int& exit_code);

/// Executes one command. Returns 0 on success; otherwise prints a single-line
/// diagnostic to `err` and returns 1.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// parse_arguments + run.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tracealign::cli
