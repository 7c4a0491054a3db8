#pragma once

// File formats.
//
// Trace log (text, version 1):
//   #tracealign-log v1            optional header; other versions rejected
//   <case_id> TAB <label>,<label>,...
// Alignment (text, version 1):
//   #tracealign-alignment v1
//   #L=<columns>
//   <case_id> TAB <cell> TAB <cell> ...      cell = label or "-"
// Process model (JSON, version 1): see docs/formats.md.
// Metric and correlation reports (JSON, "schema_version": 1) and the
// correlation sample table (CSV).
//
// Lines starting with '#' (other than the headers above) and blank lines are
// ignored by the text parsers.

#include <iosfwd>
#include <string>
#include <vector>

#include "tracealign/core.hpp"
#include "tracealign/experiments.hpp"
#include "tracealign/metrics.hpp"

namespace tracealign::io {

inline constexpr int kFormatVersion = 1;
inline constexpr std::string_view kLogHeader = "#tracealign-log";
inline constexpr std::string_view kAlignmentHeader = "#tracealign-alignment";
inline constexpr std::string_view kModelFormat = "tracealign-model";

/// `source` names the stream in ParseError messages.
EventLog parse_log(std::istream& in, const std::string& source = "<log>");
void write_log(std::ostream& out, const EventLog& log);

Alignment parse_alignment(std::istream& in, const std::string& source = "<alignment>");
void write_alignment(std::ostream& out, const Alignment& alignment);

ProcessModelSpec parse_model(std::istream& in, const std::string& source = "<model>");
void write_model(std::ostream& out, const ProcessModelSpec& spec);

/// Reorders the rows of `alignment` to follow the case order of `log`.
/// Throws MismatchError when the case ids or traces differ.
Alignment align_rows_to(const Alignment& alignment, const std::shared_ptr<const EventLog>& log);

EventLog read_log_file(const std::string& path);
Alignment read_alignment_file(const std::string& path);
ProcessModelSpec read_model_file(const std::string& path);

/// Metric report as a JSON document (schema_version 1).
std::string report_to_json(const MetricReport& report);
/// Aligned two-column table, same values and order as the JSON document.
std::string report_to_table(const MetricReport& report);
/// key,value rows.
std::string report_to_csv(const MetricReport& report);

std::string correlation_to_json(const CorrelationReport& report);
std::string correlation_to_table(const CorrelationReport& report);
/// sample_id,n_e, then one column per metric.
std::string samples_to_csv(const CorrelationReport& report);

std::string sweep_to_json(const std::vector<ThresholdPoint>& sweep, const ExperimentOptions& o);
std::string sweep_to_table(const std::vector<ThresholdPoint>& sweep);
std::string sweep_to_csv(const std::vector<ThresholdPoint>& sweep);

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

}  // namespace tracealign::io
