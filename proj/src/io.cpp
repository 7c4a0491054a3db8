#include "tracealign/io.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tracealign/error.hpp"

namespace tracealign::io {

using ordered_json = nlohmann::ordered_json;

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace {

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

bool is_blank(const std::string& line) {
  return line.find_first_not_of(" \t") == std::string::npos;
}

// Parses "<header> v<N>"; throws on a version other than kFormatVersion.
void check_version(const std::string& line, std::string_view header, const std::string& source,
                   std::size_t line_no) {
  const std::string rest = line.substr(header.size());
  if (rest != " v" + std::to_string(kFormatVersion)) {
    throw ParseError(source, line_no, header.size() + 1,
                     "unsupported format version '" + rest.substr(rest.empty() ? 0 : 1) +
                         "' (expected v" + std::to_string(kFormatVersion) + ")");
  }
}

bool starts_with(const std::string& s, std::string_view prefix) {
  return s.compare(0, prefix.size(), prefix) == 0;
}

void check_label(const std::string& label, const std::string& source, std::size_t line_no,
                 std::size_t column) {
  if (label.empty()) throw ParseError(source, line_no, column, "empty activity label");
  if (label == kGapLabel)
    throw ParseError(source, line_no, column, "activity label \"-\" is reserved for gaps");
}

}  // namespace

EventLog parse_log(std::istream& in, const std::string& source) {
  std::vector<Trace> traces;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (is_blank(line)) continue;
    if (line[0] == '#') {
      if (starts_with(line, kLogHeader)) check_version(line, kLogHeader, source, line_no);
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw ParseError(source, line_no, line.size() + 1, "expected TAB after case id");
    if (tab == 0) throw ParseError(source, line_no, 1, "empty case id");
    std::string id = line.substr(0, tab);
    if (!ids.insert(id).second) throw ParseError(source, line_no, 1, "duplicate case id '" + id + "'");

    std::vector<std::string> labels;
    std::size_t start = tab + 1;
    while (true) {
      const auto comma = line.find(',', start);
      const auto end = comma == std::string::npos ? line.size() : comma;
      std::string label = line.substr(start, end - start);
      const auto bad = label.find('\t');
      if (bad != std::string::npos)
        throw ParseError(source, line_no, start + bad + 1, "unexpected TAB inside activity list");
      check_label(label, source, line_no, start + 1);
      labels.push_back(std::move(label));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    try {
      traces.push_back(Trace::from_labels(std::move(id), labels));
    } catch (const ConfigError& e) {
      throw ParseError(source, line_no, tab + 2, e.what());
    }
  }
  return EventLog(std::move(traces));
}

void write_log(std::ostream& out, const EventLog& log) {
  out << kLogHeader << " v" << kFormatVersion << '\n';
  for (const Trace& t : log.traces()) {
    out << t.case_id() << '\t';
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (t[k].label().find(',') != std::string::npos)
        throw ConfigError("label '" + t[k].label() + "' contains a comma; not representable in a log file");
      out << (k ? "," : "") << t[k].label();
    }
    out << '\n';
  }
}

Alignment parse_alignment(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::optional<std::size_t> length;
  std::size_t length_line = 0;
  std::vector<std::string> ids;
  std::vector<std::vector<std::string>> rows;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (is_blank(line)) continue;
    if (line[0] == '#') {
      if (starts_with(line, kAlignmentHeader)) {
        check_version(line, kAlignmentHeader, source, line_no);
        have_header = true;
      } else if (starts_with(line, "#L=")) {
        std::size_t v = 0;
        const char* first = line.data() + 3;
        const char* last = line.data() + line.size();
        const auto res = std::from_chars(first, last, v);
        if (res.ec != std::errc{} || res.ptr != last || v == 0)
          throw ParseError(source, line_no, 4, "invalid column count '" + line.substr(3) + "'");
        length = v;
        length_line = line_no;
      } else if (!have_header) {
        throw ParseError(source, line_no, 1, "missing '#tracealign-alignment v1' header");
      }
      continue;
    }
    if (!have_header) throw ParseError(source, line_no, 1, "missing '#tracealign-alignment v1' header");
    if (!length) throw ParseError(source, line_no, 1, "missing '#L=<columns>' line before rows");

    std::vector<std::string> fields;
    std::vector<std::size_t> columns;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      const auto end = tab == std::string::npos ? line.size() : tab;
      fields.push_back(line.substr(start, end - start));
      columns.push_back(start + 1);
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields[0].empty()) throw ParseError(source, line_no, 1, "empty case id");
    if (!seen.insert(fields[0]).second)
      throw ParseError(source, line_no, 1, "duplicate case id '" + fields[0] + "'");
    if (fields.size() - 1 != *length)
      throw ParseError(source, line_no, columns.back(),
                       "row has " + std::to_string(fields.size() - 1) + " cells, expected " +
                           std::to_string(*length));
    bool any = false;
    for (std::size_t f = 1; f < fields.size(); ++f) {
      if (fields[f] == kGapLabel) continue;
      if (fields[f].empty()) throw ParseError(source, line_no, columns[f], "empty cell");
      any = true;
    }
    if (!any) throw ParseError(source, line_no, 1, "row has no activities");
    ids.push_back(fields[0]);
    rows.emplace_back(fields.begin() + 1, fields.end());
  }
  if (!have_header) throw ParseError(source, line_no + 1, 1, "missing '#tracealign-alignment v1' header");
  if (rows.empty()) throw ParseError(source, line_no + 1, 1, "alignment has no rows");

  Alignment a = alignment_from_labels(ids, rows);
  for (const auto& v : validate_alignment(a)) {
    if (v.kind == ViolationKind::kAllGapColumn)
      throw ParseError(source, length_line, 1,
                       "column " + std::to_string(v.column + 1) + " holds only gaps");
  }
  return a;
}

void write_alignment(std::ostream& out, const Alignment& a) {
  require_valid(a);
  out << kAlignmentHeader << " v" << kFormatVersion << '\n';
  out << "#L=" << a.length() << '\n';
  for (std::size_t r = 0; r < a.rows(); ++r) {
    out << a.source()[r].case_id();
    for (std::size_t c = 0; c < a.length(); ++c) out << '\t' << a.label_at(r, c);
    out << '\n';
  }
}

Alignment align_rows_to(const Alignment& a, const std::shared_ptr<const EventLog>& log) {
  require_valid(a);
  if (a.rows() != log->size())
    throw MismatchError("alignment has " + std::to_string(a.rows()) + " rows, log has " +
                        std::to_string(log->size()) + " traces");
  std::map<std::string, std::size_t> row_of;
  for (std::size_t r = 0; r < a.rows(); ++r) row_of[a.source()[r].case_id()] = r;
  std::vector<CellRow> rows;
  rows.reserve(log->size());
  for (std::size_t t = 0; t < log->size(); ++t) {
    const auto it = row_of.find((*log)[t].case_id());
    if (it == row_of.end())
      throw MismatchError("case '" + (*log)[t].case_id() + "' missing from alignment");
    if (!(a.source()[it->second] == (*log)[t]))
      throw MismatchError("case '" + (*log)[t].case_id() + "' has different activities");
    CellRow row;
    row.reserve(a.length());
    for (const Cell& c : a.row(it->second))
      row.push_back(c.is_gap() ? Cell::gap() : Cell::occupied(t, c.occurrence().ordinal));
    rows.push_back(std::move(row));
  }
  return Alignment(log, std::move(rows));
}

// ---------------------------------------------------------------------------
// Process models

namespace {

struct JsonPath {
  std::string source;
  std::string pointer;

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(source, 0, 0, (pointer.empty() ? "/" : pointer) + ": " + what);
  }
  JsonPath operator/(const std::string& key) const { return {source, pointer + "/" + key}; }
};

const ordered_json& field(const ordered_json& j, const char* key, const JsonPath& at) {
  if (!j.is_object()) at.fail("expected an object");
  const auto it = j.find(key);
  if (it == j.end()) at.fail(std::string("missing '") + key + "'");
  return *it;
}

double number_field(const ordered_json& j, const char* key, const JsonPath& at) {
  const auto& v = field(j, key, at);
  if (!v.is_number()) (at / key).fail("expected a number");
  return v.get<double>();
}

ModelBlock block_from_json(const ordered_json& j, const JsonPath& at) {
  const auto& kind_j = field(j, "kind", at);
  if (!kind_j.is_string()) (at / "kind").fail("expected a string");
  const auto kind = kind_j.get<std::string>();
  auto children = [&](const char* key) {
    const auto& arr = field(j, key, at);
    if (!arr.is_array()) (at / key).fail("expected an array");
    std::vector<ModelBlock> out;
    for (std::size_t i = 0; i < arr.size(); ++i)
      out.push_back(block_from_json(arr[i], at / key / std::to_string(i)));
    return out;
  };
  if (kind == "activity") {
    const auto& label = field(j, "label", at);
    if (!label.is_string()) (at / "label").fail("expected a string");
    return ModelBlock::activity(label.get<std::string>());
  }
  if (kind == "sequence") return ModelBlock::sequence(children("children"));
  if (kind == "parallel") return ModelBlock::parallel(children("children"));
  if (kind == "choice") {
    const auto& arr = field(j, "branches", at);
    if (!arr.is_array()) (at / "branches").fail("expected an array");
    std::vector<ModelBlock> blocks;
    std::vector<double> probs;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto here = at / "branches" / std::to_string(i);
      probs.push_back(number_field(arr[i], "probability", here));
      blocks.push_back(block_from_json(field(arr[i], "block", here), here / "block"));
    }
    return ModelBlock::choice(std::move(blocks), std::move(probs));
  }
  if (kind == "loop") {
    return ModelBlock::loop(block_from_json(field(j, "body", at), at / "body"),
                            number_field(j, "repeat_probability", at));
  }
  (at / "kind").fail("unknown block kind '" + kind + "'");
}

ordered_json block_to_json(const ModelBlock& b) {
  ordered_json j;
  j["kind"] = std::string(to_string(b.kind));
  switch (b.kind) {
    case BlockKind::kActivity:
      j["label"] = b.label;
      break;
    case BlockKind::kSequence:
    case BlockKind::kParallel:
      j["children"] = ordered_json::array();
      for (const auto& c : b.children) j["children"].push_back(block_to_json(c));
      break;
    case BlockKind::kChoice:
      j["branches"] = ordered_json::array();
      for (std::size_t i = 0; i < b.children.size(); ++i) {
        ordered_json br;
        br["probability"] = i < b.probabilities.size() ? b.probabilities[i] : 0.0;
        br["block"] = block_to_json(b.children[i]);
        j["branches"].push_back(std::move(br));
      }
      break;
    case BlockKind::kLoop:
      j["repeat_probability"] = b.repeat_probability;
      j["body"] = b.children.empty() ? ordered_json() : block_to_json(b.children.front());
      break;
  }
  return j;
}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t offset) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

ProcessModelSpec parse_model(std::istream& in, const std::string& source) {
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string what = e.what();
    const auto colon = what.rfind(": ");
    throw ParseError(source, line, col, colon == std::string::npos ? what : what.substr(colon + 2));
  }
  const JsonPath root{source, ""};
  const auto& format = field(j, "format", root);
  if (!format.is_string() || format.get<std::string>() != kModelFormat)
    (root / "format").fail("expected \"" + std::string(kModelFormat) + "\"");
  const auto& version = field(j, "version", root);
  if (!version.is_number_integer() || version.get<int>() != kFormatVersion)
    (root / "version").fail("unsupported version " + version.dump() + " (expected " +
                            std::to_string(kFormatVersion) + ")");
  ProcessModelSpec spec;
  if (const auto it = j.find("name"); it != j.end() && it->is_string()) spec.name = it->get<std::string>();
  spec.root = block_from_json(field(j, "root", root), root / "root");
  try {
    spec.validate();
  } catch (const ConfigError& e) {
    root.fail(e.what());
  }
  return spec;
}

void write_model(std::ostream& out, const ProcessModelSpec& spec) {
  ordered_json j;
  j["format"] = std::string(kModelFormat);
  j["version"] = kFormatVersion;
  j["name"] = spec.name;
  j["root"] = block_to_json(spec.root);
  out << j.dump(2) << '\n';
}

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, 0, 0, "cannot open file for reading");
  return in;
}

}  // namespace

EventLog read_log_file(const std::string& path) {
  auto in = open_input(path);
  return parse_log(in, path);
}

Alignment read_alignment_file(const std::string& path) {
  auto in = open_input(path);
  return parse_alignment(in, path);
}

ProcessModelSpec read_model_file(const std::string& path) {
  auto in = open_input(path);
  return parse_model(in, path);
}

// ---------------------------------------------------------------------------
// Reports

namespace {

ordered_json scheme_json(const ScoringScheme& s) {
  ordered_json j;
  j["match"] = s.match;
  j["mismatch"] = s.mismatch;
  j["gap"] = s.gap;
  return j;
}

template <class T>
ordered_json optional_json(const std::optional<T>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

// One (key, rendered value) pair per scalar metric, in report order.
std::vector<std::pair<std::string, std::string>> report_rows(const MetricReport& r) {
  auto opt = [](const auto& v) -> std::string {
    if (!v) return "n/a";
    return format_number(static_cast<double>(*v));
  };
  std::vector<std::pair<std::string, std::string>> rows;
  rows.emplace_back("ref_free_sps", format_number(r.ref_free_sps));
  rows.emplace_back("ref_based_sps", opt(r.ref_based_sps));
  rows.emplace_back("column_score", opt(r.column_score));
  rows.emplace_back("n_e", opt(r.n_e));
  rows.emplace_back("ms_top", opt(r.ms_top));
  rows.emplace_back("most_frequent_pattern",
                    r.top_pattern ? join(r.top_pattern->pattern.labels(), ",") : "n/a");
  rows.emplace_back("oms", r.oms ? format_number(r.oms->oms) : "n/a");
  rows.emplace_back("oms_threshold", r.oms ? format_number(r.oms->threshold) : "n/a");
  rows.emplace_back("oms_eligible_patterns",
                    r.oms ? std::to_string(r.oms->eligible) : "n/a");
  rows.emplace_back("ois", format_number(r.ois));
  rows.emplace_back("complexity", format_number(r.complexity.value));
  rows.emplace_back("complexity_lower_bound", format_number(r.complexity.lower_bound));
  rows.emplace_back("complexity_upper_bound", format_number(r.complexity.upper_bound));
  return rows;
}

}  // namespace

std::string report_to_json(const MetricReport& r) {
  ordered_json j;
  j["schema_version"] = kFormatVersion;
  j["kind"] = "metric-report";
  j["alignment"] = {{"traces", r.traces},
                    {"activities", r.activities},
                    {"length", r.length},
                    {"activity_types", r.activity_types}};
  ordered_json params;
  params["scoring"] = scheme_json(r.options.scheme);
  params["tf_ratio"] = r.options.tf_ratio;
  params["majority"] = r.options.majority;
  params["min_pattern_length"] = r.options.min_pattern_length;
  params["max_pattern_length"] = optional_json(r.options.max_pattern_length);
  j["parameters"] = std::move(params);

  ordered_json acc;
  acc["ref_free_sps"] = r.ref_free_sps;
  acc["ref_based_sps"] = optional_json(r.ref_based_sps);
  acc["column_score"] = optional_json(r.column_score);
  acc["n_e"] = optional_json(r.n_e);
  acc["ms_top"] = optional_json(r.ms_top);
  if (r.top_pattern) {
    acc["most_frequent_pattern"] = {{"pattern", r.top_pattern->pattern.labels()},
                                    {"count", r.top_pattern->count}};
  } else {
    acc["most_frequent_pattern"] = nullptr;
  }
  acc["oms"] = r.oms ? ordered_json(r.oms->oms) : ordered_json(nullptr);
  acc["oms_threshold"] = r.oms ? ordered_json(r.oms->threshold) : ordered_json(nullptr);
  acc["oms_f_max"] = r.oms ? ordered_json(r.oms->max_count) : ordered_json(nullptr);
  acc["oms_eligible_patterns"] = r.oms ? ordered_json(r.oms->eligible) : ordered_json(nullptr);
  j["accuracy"] = std::move(acc);
  j["confidence"] = {{"ois", r.ois}};
  j["complexity"] = {{"value", r.complexity.value},
                     {"lower_bound", r.complexity.lower_bound},
                     {"upper_bound", r.complexity.upper_bound}};
  ordered_json cons = ordered_json::array();
  for (const auto& c : r.consensus)
    cons.push_back({{"column", c.column}, {"label", c.label}, {"tie", c.tie}});
  j["consensus"] = std::move(cons);
  return j.dump(2) + "\n";
}

std::string report_to_table(const MetricReport& r) {
  std::ostringstream os;
  os << "alignment: " << r.traces << " traces, " << r.activities << " activities, "
     << r.activity_types << " types, L=" << r.length << "\n";
  os << "scoring: match=" << format_number(r.options.scheme.match)
     << " mismatch=" << format_number(r.options.scheme.mismatch)
     << " gap=" << format_number(r.options.scheme.gap)
     << "  tf_ratio=" << format_number(r.options.tf_ratio)
     << "  majority=" << format_number(r.options.majority) << "\n\n";
  const auto rows = report_rows(r);
  const char* sections[] = {"accuracy", "confidence", "complexity"};
  // Rows 0-8 accuracy, 9 confidence, 10-12 complexity.
  const std::size_t bounds[] = {0, 9, 10, rows.size()};
  for (std::size_t s = 0; s < 3; ++s) {
    os << "[" << sections[s] << "]\n";
    for (std::size_t i = bounds[s]; i < bounds[s + 1]; ++i)
      os << "  " << std::left << std::setw(24) << rows[i].first << rows[i].second << "\n";
  }
  os << "[consensus]\n  ";
  std::vector<std::string> items;
  for (const auto& c : r.consensus)
    items.push_back(std::to_string(c.column) + ":" + c.label + (c.tie ? "*" : ""));
  os << (items.empty() ? "(none)" : join(items, " ")) << "\n";
  return os.str();
}

std::string report_to_csv(const MetricReport& r) {
  std::ostringstream os;
  os << "metric,value\n";
  for (const auto& [k, v] : report_rows(r)) {
    const bool quote = v.find(',') != std::string::npos;
    os << k << "," << (quote ? "\"" + v + "\"" : v) << "\n";
  }
  return os.str();
}

std::string correlation_to_json(const CorrelationReport& r) {
  ordered_json j;
  j["schema_version"] = kFormatVersion;
  j["kind"] = "correlation-report";
  const auto& o = r.options;
  j["parameters"] = {{"scoring", scheme_json(o.scheme)},
                     {"samples", o.samples},
                     {"max_moves", o.max_moves},
                     {"tf_ratio", o.tf_ratio},
                     {"consensus_trees", o.consensus_trees},
                     {"seed", o.seed}};
  j["most_frequent_pattern"] = r.most_frequent_pattern;
  ordered_json corr;
  ordered_json notes = ordered_json::object();
  for (const auto& c : r.correlations) {
    corr[std::string(metric_name(c.metric))] = optional_json(c.coefficient);
    if (!c.coefficient) notes[std::string(metric_name(c.metric))] = c.note;
  }
  j["correlation_to_n_e"] = std::move(corr);
  j["undefined"] = std::move(notes);
  ordered_json samples = ordered_json::array();
  for (const auto& s : r.samples) {
    ordered_json row;
    row["sample_id"] = s.sample_id;
    row["moves"] = s.moves;
    row["n_e"] = s.n_e;
    for (std::size_t m = 0; m < kMetricCount; ++m)
      row[std::string(metric_name(kAllMetrics[m]))] = s.values[m];
    samples.push_back(std::move(row));
  }
  j["samples"] = std::move(samples);
  return j.dump(2) + "\n";
}

std::string correlation_to_table(const CorrelationReport& r) {
  std::ostringstream os;
  os << "samples=" << r.options.samples << " max_moves=" << r.options.max_moves
     << " tf_ratio=" << format_number(r.options.tf_ratio) << " seed=" << r.options.seed << "\n";
  os << "most frequent pattern: " << r.most_frequent_pattern << "\n\n";
  os << std::left << std::setw(16) << "metric" << "corr(N_e)\n";
  for (const auto& c : r.correlations) {
    os << std::left << std::setw(16) << metric_name(c.metric)
       << (c.coefficient ? format_number(*c.coefficient) : "undefined (" + c.note + ")") << "\n";
  }
  return os.str();
}

std::string samples_to_csv(const CorrelationReport& r) {
  std::ostringstream os;
  os << "sample_id,n_e";
  for (Metric m : kAllMetrics) os << "," << metric_name(m);
  os << "\n";
  for (const auto& s : r.samples) {
    os << s.sample_id << "," << s.n_e;
    for (double v : s.values) os << "," << format_number(v);
    os << "\n";
  }
  return os.str();
}

std::string sweep_to_json(const std::vector<ThresholdPoint>& sweep, const ExperimentOptions& o) {
  ordered_json j;
  j["schema_version"] = kFormatVersion;
  j["kind"] = "threshold-sweep";
  j["parameters"] = {{"scoring", scheme_json(o.scheme)},
                     {"samples", o.samples},
                     {"max_moves", o.max_moves},
                     {"consensus_trees", o.consensus_trees},
                     {"seed", o.seed}};
  ordered_json points = ordered_json::array();
  for (const auto& p : sweep)
    points.push_back({{"tf_ratio", p.tf_ratio},
                      {"eligible_patterns", p.eligible_patterns},
                      {"oms_correlation_to_n_e", optional_json(p.coefficient)}});
  j["points"] = std::move(points);
  return j.dump(2) + "\n";
}

std::string sweep_to_table(const std::vector<ThresholdPoint>& sweep) {
  std::ostringstream os;
  os << std::left << std::setw(10) << "tf_ratio" << std::setw(10) << "eligible"
     << "corr(OMS, N_e)\n";
  for (const auto& p : sweep)
    os << std::left << std::setw(10) << format_number(p.tf_ratio) << std::setw(10)
       << p.eligible_patterns << (p.coefficient ? format_number(*p.coefficient) : "undefined")
       << "\n";
  return os.str();
}

std::string sweep_to_csv(const std::vector<ThresholdPoint>& sweep) {
  std::ostringstream os;
  os << "tf_ratio,eligible_patterns,oms_correlation\n";
  for (const auto& p : sweep)
    os << format_number(p.tf_ratio) << "," << p.eligible_patterns << ","
       << (p.coefficient ? format_number(*p.coefficient) : "") << "\n";
  return os.str();
}

}  // namespace tracealign::io
