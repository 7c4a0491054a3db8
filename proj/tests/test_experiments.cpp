#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>

#include "support.hpp"
#include "tracealign/error.hpp"
#include "tracealign/experiments.hpp"
#include "tracealign/metrics.hpp"

using namespace tracealign;

namespace {

using B = ModelBlock;

std::map<OccurrenceId, std::size_t> columns_of(const Alignment& a) {
  std::map<OccurrenceId, std::size_t> out;
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.length(); ++c)
      if (!a.at(r, c).is_gap()) out[a.at(r, c).occurrence()] = c;
  return out;
}

std::vector<std::string> labels(const Trace& t) {
  std::vector<std::string> out;
  for (const auto& a : t.activities()) out.push_back(a.label());
  return out;
}

ProcessModelSpec triage_like() {
  return {"triage",
          B::sequence({B::activity("Register"), B::activity("Triage"),
                       B::choice({B::sequence({B::activity("Exam"), B::activity("Lab")}),
                                  B::activity("Fast track")},
                                 {0.6, 0.4}),
                       B::activity("Review"),
                       B::choice({B::activity("Discharge"), B::activity("Admit")}, {0.7, 0.3})})};
}

}  // namespace

// ---------------------------------------------------------------------------
// Perturbation

TEST_CASE("perturb with zero moves returns the reference") {
  auto ref = alignment_from_labels({"a", "b"}, {{"A", "B", "-"}, {"A", "-", "C"}});
  for (std::uint64_t seed : {1u, 2u, 99u}) {
    auto p = perturb(ref, 0, seed);
    CHECK(p.alignment == ref);
    CHECK(p.injected_moves == 0);
    CHECK(p.seed == seed);
  }
}

TEST_CASE("perturb with one move relocates a single occurrence") {
  auto ref = alignment_from_labels({"t1", "t2", "t3"},
                                   {{"A", "B", "C", "D"}, {"A", "B", "-", "D"}, {"-", "B", "C", "-"}});
  const auto before = columns_of(ref);
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    auto p = perturb(ref, 1, seed);
    REQUIRE(validate_alignment(p.alignment).empty());
    CHECK(strip_gaps(p.alignment) == ref.source());
    CHECK(p.injected_moves == 1);
    if (p.alignment.length() != ref.length()) continue;  // a column was inserted
    const auto after = columns_of(p.alignment);
    std::size_t changed = 0;
    for (const auto& [id, col] : before) changed += after.at(id) != col;
    CHECK(changed == 1);
  }
}

TEST_CASE("perturb inserts a column when no gap is reachable") {
  auto ref = alignment_from_labels({"a", "b"}, {{"A"}, {"B"}});
  auto p = perturb(ref, 1, 5);
  CHECK(p.alignment.length() == 2);
  CHECK(validate_alignment(p.alignment).empty());
}

TEST_CASE("perturb preserves the source log and is deterministic") {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 50; ++i) {
    auto log = testing::random_log(rng, 6, 1, 8, 4);
    auto ref = progressive_align(log);
    const std::size_t moves = i % 12;
    auto p = perturb(ref, moves, 1000 + i);
    CHECK(validate_alignment(p.alignment).empty());
    CHECK(strip_gaps(p.alignment) == *log);
    CHECK(p.alignment == perturb(ref, moves, 1000 + i).alignment);
  }
}

TEST_CASE("heuristic errors grow with the number of injected moves") {
  std::mt19937_64 rng(3);
  auto log = testing::random_log(rng, 12, 5, 10, 5);
  auto ref = progressive_align(log);
  std::vector<double> moves, errors;
  for (std::size_t s = 0; s < 30; ++s) {
    const std::size_t m = s;
    moves.push_back(static_cast<double>(m));
    errors.push_back(static_cast<double>(count_heuristic_errors(perturb(ref, m, 500 + s).alignment, ref)));
  }
  CHECK(spearman(moves, errors) > 0.8);
}

// ---------------------------------------------------------------------------
// Process models

TEST_CASE("model: sequence yields a fixed trace") {
  ProcessModelSpec spec{"seq", B::sequence({B::activity("A"), B::activity("B"), B::activity("C")})};
  auto log = generate_log(spec, 25, 1);
  REQUIRE(log.size() == 25);
  CHECK(log[0].case_id() == "case_0001");
  CHECK(log[24].case_id() == "case_0025");
  for (const auto& t : log.traces()) CHECK(labels(t) == std::vector<std::string>{"A", "B", "C"});
}

TEST_CASE("model: choice frequencies stay within the binomial band") {
  ProcessModelSpec spec{"choice", B::choice({B::activity("A"), B::activity("B")}, {0.5, 0.5})};
  auto log = generate_log(spec, 1000, 2024);
  std::size_t a = 0;
  for (const auto& t : log.traces()) a += t[0].label() == "A";
  CHECK(a >= 440);
  CHECK(a <= 560);
}

TEST_CASE("model: parallel interleaving keeps each branch's order") {
  ProcessModelSpec spec{"par", B::parallel({B::sequence({B::activity("A"), B::activity("B")}),
                                            B::activity("C")})};
  auto log = generate_log(spec, 300, 9);
  std::map<std::vector<std::string>, int> seen;
  for (const auto& t : log.traces()) {
    auto l = labels(t);
    REQUIRE(l.size() == 3);
    auto a = std::find(l.begin(), l.end(), "A");
    auto b = std::find(l.begin(), l.end(), "B");
    CHECK(a < b);
    CHECK(std::count(l.begin(), l.end(), "C") == 1);
    ++seen[l];
  }
  CHECK(seen.size() == 3);
}

TEST_CASE("model: loops repeat their body") {
  ProcessModelSpec spec{"loop", B::sequence({B::activity("S"), B::loop(B::activity("X"), 0.5),
                                             B::activity("E")})};
  auto log = generate_log(spec, 400, 4);
  std::size_t longest = 0;
  double total = 0.0;
  for (const auto& t : log.traces()) {
    CHECK(t[0].label() == "S");
    CHECK(t[t.size() - 1].label() == "E");
    longest = std::max(longest, t.size());
    total += static_cast<double>(t.size() - 2);
  }
  CHECK(longest > 3);
  CHECK(total / 400.0 == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("model: validation and determinism") {
  CHECK_THROWS_AS((ProcessModelSpec{"bad", B::choice({B::activity("A"), B::activity("B")}, {0.5, 0.4})}
                       .validate()),
                  ConfigError);
  CHECK_THROWS_AS((ProcessModelSpec{"bad", B::loop(B::activity("A"), 1.0)}.validate()), ConfigError);
  CHECK_THROWS_AS((ProcessModelSpec{"bad", B::sequence({})}.validate()), ConfigError);
  CHECK_THROWS_AS((ProcessModelSpec{"bad", B::activity("-")}.validate()), ConfigError);
  CHECK_THROWS_AS(generate_log(triage_like(), 0, 1), ConfigError);
  auto spec = triage_like();
  CHECK(spec.activity_types() ==
        std::vector<std::string>{"Admit", "Discharge", "Exam", "Fast track", "Lab", "Register", "Review",
                                 "Triage"});
  CHECK(generate_log(spec, 40, 8) == generate_log(spec, 40, 8));
  CHECK(!(generate_log(spec, 40, 8) == generate_log(spec, 40, 9)));
}

// ---------------------------------------------------------------------------
// Statistics

TEST_CASE("pearson and spearman") {
  std::vector<double> x{1, 2, 3, 4, 5};
  std::vector<double> y2;
  std::vector<double> neg;
  for (double v : x) {
    y2.push_back(2 * v + 1);
    neg.push_back(-v);
  }
  CHECK(pearson(x, y2) == doctest::Approx(1.0));
  CHECK(pearson(x, neg) == doctest::Approx(-1.0));
  CHECK(pearson({1, 2, 3}, {1, 3, 2}) == doctest::Approx(0.5));
  CHECK(spearman({1, 2, 3, 4}, {1, 4, 9, 16}) == doctest::Approx(1.0));
  CHECK(spearman({1, 2, 2, 3}, {1, 2, 2, 3}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(pearson({1, 1, 1}, {1, 2, 3}), DegenerateError);
  CHECK_THROWS_AS(pearson({1, 2}, {1, 2}), ConfigError);
  CHECK_THROWS_AS(pearson({1, 2, 3}, {1, 2}), ConfigError);
}

// ---------------------------------------------------------------------------
// Correlation experiment

TEST_CASE("correlation experiment on a sequence and choice model") {
  auto log = std::make_shared<const EventLog>(generate_log(triage_like(), 25, 3));
  ExperimentOptions o;
  o.samples = 20;
  o.max_moves = 20;
  o.consensus_trees = 4;
  o.seed = 11;
  auto r = correlation_experiment(log, o);
  REQUIRE(r.samples.size() == 20);
  CHECK(r.samples.front().moves == 0);
  CHECK(r.samples.back().moves == 20);
  CHECK(r.samples.front().n_e == 0);
  REQUIRE(r.coefficient(Metric::kOms));
  CHECK(*r.coefficient(Metric::kOms) > 0.0);
  CHECK(*r.coefficient(Metric::kRefBasedSps) < 0.0);
  for (const auto& c : r.correlations)
    if (c.coefficient) {
      CHECK(*c.coefficient >= -1.0);
      CHECK(*c.coefficient <= 1.0);
    }

  auto serial = correlation_experiment(log, o, Execution::kSerial);
  REQUIRE(serial.samples.size() == r.samples.size());
  for (std::size_t i = 0; i < r.samples.size(); ++i) {
    CHECK(serial.samples[i].n_e == r.samples[i].n_e);
    CHECK(serial.samples[i].values == r.samples[i].values);
  }

  auto sweep = threshold_sweep(log, o, {0.2, 0.4, 1.0});
  REQUIRE(sweep.size() == 3);
  CHECK(sweep[1].tf_ratio == 0.4);
  CHECK(*sweep[1].coefficient == doctest::Approx(*r.coefficient(Metric::kOms)).epsilon(1e-12));
  CHECK(sweep[0].eligible_patterns >= sweep[1].eligible_patterns);
  CHECK(sweep[1].eligible_patterns >= sweep[2].eligible_patterns);
}

TEST_CASE("correlation experiment rejects degenerate setups") {
  auto log = std::make_shared<const EventLog>(generate_log(triage_like(), 15, 3));
  ExperimentOptions o;
  o.samples = 9;
  CHECK_THROWS_AS(correlation_experiment(log, o), ConfigError);
  o.samples = 10;
  o.max_moves = 0;
  CHECK_THROWS_AS(correlation_experiment(log, o), DegenerateError);
}
