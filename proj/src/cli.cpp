#include "tracealign/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tracealign/error.hpp"
#include "tracealign/experiments.hpp"
#include "tracealign/io.hpp"
#include "tracealign/metrics.hpp"
#include "tracealign/parallel.hpp"

namespace tracealign::cli {
namespace {

namespace fs = std::filesystem;

bool randomized(const std::string& command) {
  return command == "consensus" || command == "perturb" || command == "gen-log" ||
         command == "correlate";
}

void require_readable(const std::string& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string("missing ") + what);
  std::error_code ec;
  if (!fs::exists(path, ec)) throw ConfigError(std::string(what) + " not found: " + path);
  if (fs::is_directory(path, ec)) throw ConfigError(std::string(what) + " is a directory: " + path);
  std::ifstream probe(path);
  if (!probe) throw ConfigError(std::string(what) + " is not readable: " + path);
}

void require_writable(const std::string& path, const char* what) {
  if (path.empty()) return;
  std::error_code ec;
  if (fs::is_directory(path, ec)) throw ConfigError(std::string(what) + " is a directory: " + path);
  fs::path parent = fs::path(path).parent_path();
  if (parent.empty()) parent = ".";
  if (!fs::is_directory(parent, ec))
    throw ConfigError(std::string(what) + " directory does not exist: " + parent.string());
}

void require_ratio(double v, const char* name) {
  if (!(v > 0.0 && v <= 1.0)) throw ConfigError(std::string(name) + " must be in (0, 1]");
}

void emit(const RunConfig& c, std::ostream& out, const std::string& text) {
  if (c.output.empty()) {
    out << text;
    out.flush();
    return;
  }
  std::ofstream f(c.output, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot open output file: " + c.output);
  f << text;
  if (!f) throw ConfigError("failed writing output file: " + c.output);
}

void write_side_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot open output file: " + path);
  f << text;
}

std::shared_ptr<const EventLog> load_log(const std::string& path) {
  return std::make_shared<const EventLog>(io::read_log_file(path));
}

std::string alignment_text(const Alignment& a) {
  std::ostringstream s;
  io::write_alignment(s, a);
  return s.str();
}

EvaluationOptions evaluation_options(const RunConfig& c) {
  EvaluationOptions o;
  o.scheme = c.scheme;
  o.tf_ratio = c.tf_ratio;
  o.majority = c.majority;
  o.min_pattern_length = c.min_pattern_length;
  o.max_pattern_length = c.max_pattern_length;
  return o;
}

ExperimentOptions experiment_options(const RunConfig& c, std::uint64_t seed) {
  ExperimentOptions o;
  o.scheme = c.scheme;
  o.samples = c.samples;
  o.max_moves = c.max_moves;
  o.tf_ratio = c.tf_ratio;
  o.consensus_trees = c.consensus_trees;
  o.seed = seed;
  return o;
}

std::string join_labels(const Pattern& p) {
  std::string s;
  for (const auto& l : p.labels()) {
    if (!s.empty()) s += ',';
    s += l;
  }
  return s;
}

// Pattern census: per-length summary plus the most frequent entries. The CSV
// form lists every pattern as (length, count, labels), ready for a
// length-versus-frequency scatter plot.
std::string patterns_output(const RunConfig& c, const PatternCensus& census) {
  auto entries = census.entries();
  struct LengthRow {
    std::size_t distinct = 0;
    std::size_t occurrences = 0;
    std::size_t max_count = 0;
  };
  std::map<std::size_t, LengthRow> by_length;
  for (const auto& e : entries) {
    auto& r = by_length[e.symbols.size()];
    ++r.distinct;
    r.occurrences += e.count;
    r.max_count = std::max(r.max_count, e.count);
  }
  auto ranked = entries;
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.count > b.count; });
  if (ranked.size() > c.top) ranked.resize(c.top);

  std::ostringstream s;
  switch (c.format) {
    case OutputFormat::kCsv: {
      s << "length,count,pattern\n";
      for (const auto& e : entries) {
        s << e.symbols.size() << ',' << e.count << ",\""
          << join_labels(census.to_pattern(e.symbols)) << "\"\n";
      }
      break;
    }
    case OutputFormat::kJson: {
      nlohmann::ordered_json j;
      j["schema_version"] = io::kFormatVersion;
      j["distinct_patterns"] = census.size();
      j["max_count"] = census.max_count();
      j["min_length"] = census.min_length();
      j["max_length"] = census.max_length();
      auto& lengths = j["by_length"] = nlohmann::ordered_json::array();
      for (const auto& [len, r] : by_length) {
        lengths.push_back({{"length", len},
                           {"distinct", r.distinct},
                           {"occurrences", r.occurrences},
                           {"max_count", r.max_count}});
      }
      auto& top = j["top"] = nlohmann::ordered_json::array();
      for (const auto& e : ranked) {
        top.push_back({{"pattern", census.to_pattern(e.symbols).labels()},
                       {"count", e.count}});
      }
      s << j.dump(2) << '\n';
      break;
    }
    case OutputFormat::kHuman: {
      s << "distinct patterns  " << census.size() << '\n'
        << "max count (f_M)    " << census.max_count() << "\n\n"
        << "length  distinct  occurrences  max_count\n";
      for (const auto& [len, r] : by_length) {
        s << std::setw(6) << len << "  " << std::setw(8) << r.distinct << "  "
          << std::setw(11) << r.occurrences << "  " << std::setw(9) << r.max_count << '\n';
      }
      s << "\ncount  pattern\n";
      for (const auto& e : ranked) {
        s << std::setw(5) << e.count << "  " << join_labels(census.to_pattern(e.symbols))
          << '\n';
      }
      break;
    }
  }
  return s.str();
}

int execute(const RunConfig& c, std::ostream& out, std::ostream& err) {
  set_thread_count(c.threads);
  std::uint64_t seed = 0;
  if (randomized(c.command)) {
    seed = c.seed ? *c.seed : std::random_device{}() * 0x100000001ull + std::random_device{}();
    err << "seed: " << seed << '\n';
  }

  const std::string& cmd = c.command;
  if (cmd == "align") {
    auto log = load_log(c.input);
    emit(c, out, alignment_text(progressive_align(log, c.scheme)));
  } else if (cmd == "consensus") {
    auto log = load_log(c.input);
    emit(c, out, alignment_text(consensus_reference(log, c.scheme, c.consensus_trees, seed)));
  } else if (cmd == "evaluate") {
    Alignment a = io::read_alignment_file(c.input);
    std::optional<Alignment> ref;
    if (!c.reference.empty())
      ref = io::align_rows_to(io::read_alignment_file(c.reference), a.source_ptr());
    MetricReport r = evaluate(a, ref ? &*ref : nullptr, evaluation_options(c));
    switch (c.format) {
      case OutputFormat::kHuman: emit(c, out, io::report_to_table(r)); break;
      case OutputFormat::kJson: emit(c, out, io::report_to_json(r)); break;
      case OutputFormat::kCsv: emit(c, out, io::report_to_csv(r)); break;
    }
  } else if (cmd == "patterns") {
    auto log = load_log(c.input);
    auto census = extract_patterns(*log, c.min_pattern_length, c.max_pattern_length);
    emit(c, out, patterns_output(c, census));
  } else if (cmd == "perturb") {
    Alignment ref = io::read_alignment_file(c.input);
    require_valid(ref);
    emit(c, out, alignment_text(perturb(ref, c.moves, seed).alignment));
  } else if (cmd == "gen-log") {
    ProcessModelSpec spec = io::read_model_file(c.input);
    std::ostringstream s;
    io::write_log(s, generate_log(spec, c.traces, seed));
    emit(c, out, s.str());
  } else if (cmd == "correlate") {
    auto log = load_log(c.input);
    ExperimentOptions o = experiment_options(c, seed);
    if (!c.sweep.empty()) {
      auto sweep = threshold_sweep(log, o, c.sweep);
      switch (c.format) {
        case OutputFormat::kHuman: emit(c, out, io::sweep_to_table(sweep)); break;
        case OutputFormat::kJson: emit(c, out, io::sweep_to_json(sweep, o)); break;
        case OutputFormat::kCsv: emit(c, out, io::sweep_to_csv(sweep)); break;
      }
    } else {
      CorrelationReport r = correlation_experiment(log, o);
      if (!c.table.empty()) write_side_file(c.table, io::samples_to_csv(r));
      switch (c.format) {
        case OutputFormat::kHuman: emit(c, out, io::correlation_to_table(r)); break;
        case OutputFormat::kJson: emit(c, out, io::correlation_to_json(r)); break;
        case OutputFormat::kCsv: emit(c, out, io::samples_to_csv(r)); break;
      }
    }
  } else {
    throw ConfigError("unknown command: " + cmd);
  }
  return 0;
}

std::string one_line(std::string message) {
  std::replace(message.begin(), message.end(), '\n', ' ');
  std::replace(message.begin(), message.end(), '\r', ' ');
  return message;
}

}  // namespace

void RunConfig::validate() const {
  static const std::vector<std::string> commands = {
      "align", "consensus", "evaluate", "patterns", "perturb", "gen-log", "correlate"};
  if (std::find(commands.begin(), commands.end(), command) == commands.end())
    throw ConfigError("unknown command: " + command);

  const char* input_kind = command == "evaluate" || command == "perturb" ? "alignment file"
                           : command == "gen-log"                          ? "model file"
                                                                           : "log file";
  require_readable(input, input_kind);
  if (!reference.empty()) require_readable(reference, "reference file");
  require_writable(output, "output file");
  require_writable(table, "table file");
  if (!table.empty() && command != "correlate")
    throw ConfigError("--table applies only to correlate");

  scheme.validate();
  if ((command == "align" || command == "consensus" || command == "correlate") &&
      !(scheme.match > 0.0))
    throw ConfigError("match score must be positive for alignment");
  require_ratio(tf_ratio, "tf-ratio");
  require_ratio(majority, "majority");
  for (double r : sweep) require_ratio(r, "sweep ratio");
  if (consensus_trees < 1) throw ConfigError("k must be at least 1");
  if (samples < 10) throw ConfigError("samples must be at least 10");
  if (traces < 1) throw ConfigError("traces must be at least 1");
  if (min_pattern_length < 2) throw ConfigError("min-pattern-length must be at least 2");
  if (max_pattern_length && *max_pattern_length < min_pattern_length)
    throw ConfigError("max-pattern-length must not be below min-pattern-length");
  if (threads < 0) throw ConfigError("threads must be non-negative");
}

std::optional<RunConfig> parse_arguments(int argc, const char* const* argv, std::ostream& out,
                                         std::ostream& err, int& exit_code) {
  RunConfig c;
  CLI::App app{"Trace alignment and alignment-quality evaluation for event logs", "tracealign"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "tracealign 1.0");

  std::string format = "human";
  auto common = [&](CLI::App* sub) {
    sub->add_option("-o,--output", c.output, "Output file (default: standard output)");
    sub->add_option("--threads", c.threads, "Worker threads, 0 = all available")
        ->check(CLI::NonNegativeNumber);
  };
  auto scoring = [&](CLI::App* sub) {
    sub->add_option("--match", c.scheme.match, "Match score")->capture_default_str();
    sub->add_option("--mismatch", c.scheme.mismatch, "Mismatch score")->capture_default_str();
    sub->add_option("--gap", c.scheme.gap, "Gap score")->capture_default_str();
  };
  auto formatted = [&](CLI::App* sub) {
    sub->add_option("--format", format, "Output format")
        ->check(CLI::IsMember({"human", "json", "csv"}))
        ->capture_default_str();
  };
  auto seeded = [&](CLI::App* sub) {
    sub->add_option("--seed", c.seed, "Random seed (default: drawn and printed)");
  };
  auto patterns_range = [&](CLI::App* sub) {
    sub->add_option("--min-pattern-length", c.min_pattern_length, "Shortest pattern counted")
        ->capture_default_str();
    sub->add_option("--max-pattern-length", c.max_pattern_length,
                    "Longest pattern counted (default: longest trace)");
  };

  auto* align = app.add_subcommand("align", "Progressive alignment of a log");
  align->add_option("log", c.input, "Trace log")->required();
  common(align);
  scoring(align);

  auto* consensus = app.add_subcommand("consensus", "Best-of-k reference alignment of a log");
  consensus->add_option("log", c.input, "Trace log")->required();
  consensus->add_option("--k", c.consensus_trees, "Candidate guide trees")->capture_default_str();
  common(consensus);
  scoring(consensus);
  seeded(consensus);

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Metric report for an alignment");
  evaluate_cmd->add_option("alignment", c.input, "Alignment file")->required();
  evaluate_cmd->add_option("--reference", c.reference, "Reference alignment of the same log");
  evaluate_cmd->add_option("--tf-ratio", c.tf_ratio, "Pattern threshold as a share of f_M")
      ->capture_default_str();
  evaluate_cmd->add_option("--majority", c.majority, "Consensus majority share")
      ->capture_default_str();
  common(evaluate_cmd);
  scoring(evaluate_cmd);
  formatted(evaluate_cmd);
  patterns_range(evaluate_cmd);

  auto* patterns = app.add_subcommand("patterns", "Pattern length and frequency census");
  patterns->add_option("log", c.input, "Trace log")->required();
  patterns->add_option("--top", c.top, "Most frequent patterns listed")->capture_default_str();
  common(patterns);
  formatted(patterns);
  patterns_range(patterns);

  auto* perturb_cmd = app.add_subcommand("perturb", "Inject random moves into an alignment");
  perturb_cmd->add_option("alignment", c.input, "Alignment file")->required();
  perturb_cmd->add_option("--moves", c.moves, "Occurrence moves")->capture_default_str();
  common(perturb_cmd);
  seeded(perturb_cmd);

  auto* gen = app.add_subcommand("gen-log", "Sample a trace log from a process model");
  gen->add_option("model", c.input, "Process model (JSON)")->required();
  gen->add_option("--traces", c.traces, "Number of traces")->capture_default_str();
  common(gen);
  seeded(gen);

  auto* correlate = app.add_subcommand("correlate", "Correlate metrics with heuristic errors");
  correlate->add_option("log", c.input, "Trace log")->required();
  correlate->add_option("--samples", c.samples, "Perturbed alignments")->capture_default_str();
  correlate->add_option("--max-moves", c.max_moves, "Moves in the most perturbed sample")
      ->capture_default_str();
  correlate->add_option("--tf-ratio", c.tf_ratio, "Pattern threshold as a share of f_M")
      ->capture_default_str();
  correlate->add_option("--k", c.consensus_trees, "Candidate guide trees for the reference")
      ->capture_default_str();
  correlate->add_option("--sweep", c.sweep, "Report corr(OMS, N_e) for these tf ratios")
      ->delimiter(',');
  correlate->add_option("--table", c.table, "Also write the sample table (CSV) here");
  common(correlate);
  scoring(correlate);
  formatted(correlate);
  seeded(correlate);

  std::vector<const char*> args(argv, argv + argc);
  try {
    app.parse(argc, args.data());
  } catch (const CLI::CallForHelp& e) {
    exit_code = app.exit(e, out, err);
    return std::nullopt;
  } catch (const CLI::CallForAllHelp& e) {
    exit_code = app.exit(e, out, err);
    return std::nullopt;
  } catch (const CLI::CallForVersion& e) {
    exit_code = app.exit(e, out, err);
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    err << "error: " << one_line(e.what()) << '\n';
    exit_code = 2;
    return std::nullopt;
  }

  for (auto* sub : app.get_subcommands()) c.command = sub->get_name();
  c.format = format == "json" ? OutputFormat::kJson
             : format == "csv" ? OutputFormat::kCsv
                               : OutputFormat::kHuman;
  exit_code = 0;
  return c;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    config.validate();
    return execute(config, out, err);
  } catch (const std::exception& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return 1;
  }
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  int code = 0;
  auto config = parse_arguments(argc, argv, out, err, code);
  if (!config) return code;
  return run(*config, out, err);
}

}  // namespace tracealign::cli
