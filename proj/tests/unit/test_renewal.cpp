#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "adsm/cycles.hpp"
#include "adsm/error.hpp"
#include "adsm/renewal.hpp"
#include "adsm/rng.hpp"

using namespace adsm;
using namespace adsm::renewal;

namespace {

double exp_draw(Rng& rng, double mean) { return -mean * std::log(uniform01(rng)); }

double lomax_draw(Rng& rng, double shape) { return std::expm1(-std::log(uniform01(rng)) / shape); }

std::vector<Cycle> iid_cycles(Rng& rng, std::size_t b, double mean_s = 2.0, double mean_c = 1.0) {
  std::vector<Cycle> out;
  out.reserve(b);
  for (std::size_t i = 0; i < b; ++i) out.push_back({exp_draw(rng, mean_s), exp_draw(rng, mean_c)});
  return out;
}

CyclesTrace single(std::vector<Cycle> cycles) { return CyclesTrace{{NodeTrace{0, "", std::move(cycles)}}}; }

std::vector<double> iid_sequence(Rng& rng, std::size_t n) {
  std::vector<double> out(n);
  for (auto& x : out) x = exp_draw(rng, 1.0);
  return out;
}

}  // namespace

TEST_CASE("estimate_node examples") {
  const std::vector<Cycle> toy{{2, 1}, {4, 3}, {3, 2}};
  CHECK(estimate_node(toy) == doctest::Approx(0.4).epsilon(1e-15));
  for (std::size_t b : {1u, 7u, 1000u}) CHECK(estimate_node(std::vector<Cycle>(b, Cycle{1, 1})) == 0.5);
  Rng rng(1);
  CHECK(std::abs(estimate_node(iid_cycles(rng, 10000)) - 1.0 / 3.0) <= 0.02);
  CHECK_THROWS_AS(estimate_node({}), InsufficientData);
}

TEST_CASE("estimate is scale equivariant") {
  Rng rng(2);
  const auto cycles = iid_cycles(rng, 100);
  for (double c : {0.001, 3.0, 1e6}) {
    auto scaled = cycles;
    for (auto& cy : scaled) {
      cy.secure *= c;
      cy.compromised *= c;
    }
    CHECK(std::abs(estimate_node(scaled) - estimate_node(cycles)) <= 1e-12);
  }
}

TEST_CASE("independence test verdicts") {
  std::vector<double> increasing(100);
  for (std::size_t i = 0; i < increasing.size(); ++i) increasing[i] = 1.0 + i;
  CHECK(test_independence(increasing).verdict == Independence::fail);
  CHECK(test_independence(std::vector<double>{1, 2, 3, 4, 5}).verdict == Independence::inconclusive);
  CHECK(test_independence(std::vector<double>(50, 2.0)).verdict == Independence::inconclusive);
  CHECK(test_pair_independence(increasing, increasing).verdict == Independence::fail);
  CHECK_THROWS_AS(test_pair_independence(increasing, std::vector<double>(10, 1.0)), InvalidParameter);
}

TEST_CASE("independence tests hold their level under the null") {
  Rng rng(3);
  int lag_pass = 0, pair_pass = 0;
  const int reps = 1000;
  for (int i = 0; i < reps; ++i) {
    const auto a = iid_sequence(rng, 100);
    const auto b = iid_sequence(rng, 100);
    lag_pass += test_independence(a).verdict == Independence::pass;
    pair_pass += test_pair_independence(a, b).verdict == Independence::pass;
  }
  CHECK(std::abs(lag_pass / double(reps) - 0.95) <= 0.02);
  CHECK(std::abs(pair_pass / double(reps) - 0.95) <= 0.02);
}

TEST_CASE("finite-variance verdicts") {
  Rng rng(4);
  CHECK(test_finite_variance(iid_sequence(rng, 10000)).verdict == Tail::finite);
  std::vector<double> heavy(10000);
  for (auto& x : heavy) x = lomax_draw(rng, 1.5);
  const auto t = test_finite_variance(heavy);
  CHECK(t.verdict == Tail::heavy_tail);
  CHECK(t.index == doctest::Approx(1.5).epsilon(0.15));
  CHECK(t.order_statistics == 1000);
  CHECK(test_finite_variance(iid_sequence(rng, 30)).verdict == Tail::inconclusive);
}

TEST_CASE("procedure with forced pass reduces to the node estimate") {
  Options o;
  o.force_pass = true;
  const auto est = estimate_procedure(single({{2, 1}, {4, 3}, {3, 2}}), o);
  CHECK(est.q_bar == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(est.survivors == 1);
  CHECK_FALSE(est.standard_error.has_value());
}

TEST_CASE("procedure on short traces proceeds with warnings") {
  const auto est = estimate_procedure(single({{2, 1}, {4, 3}, {3, 2}}));
  CHECK(est.survivors == 1);
  CHECK(est.nodes[0].steadiness == "inconclusive");
  CHECK_FALSE(est.nodes[0].warnings.empty());
  CHECK(est.q_bar == doctest::Approx(0.4));
}

TEST_CASE("procedure on i.i.d. cycles rarely aborts") {
  Rng rng(5);
  const int reps = 100;
  int clean = 0;
  for (int r = 0; r < reps; ++r) {
    CyclesTrace trace;
    for (graph::NodeId v = 0; v < 10; ++v) trace.nodes.push_back({v, "", iid_cycles(rng, 10000)});
    const auto est = estimate_procedure(trace);
    CHECK(std::abs(est.q_bar - 1.0 / 3.0) <= 0.01);
    clean += est.abort_log.empty();
  }
  CHECK(clean >= 0.9 * reps);
}

TEST_CASE("autocorrelated secure durations abort the node") {
  Rng rng(6);
  std::vector<Cycle> cycles;
  double s = 2.0;
  for (int i = 0; i < 500; ++i) {
    s *= std::exp(0.25 * std::sqrt(-2 * std::log(uniform01(rng))) * std::cos(6.283185307179586 * uniform01(rng)));
    cycles.push_back({s, exp_draw(rng, 1.0)});
  }
  CyclesTrace trace = single(cycles);
  trace.nodes.push_back({1, "", iid_cycles(rng, 500)});
  const auto est = estimate_procedure(trace);
  CHECK(est.nodes[0].aborted);
  CHECK(est.nodes[0].secure_independence.verdict == Independence::fail);
  CHECK(est.survivors == 1);
  CHECK(est.abort_log.size() >= 1);
  CHECK(est.abort_log[0].rfind("node 0:", 0) == 0);

  try {
    estimate_procedure(single(cycles));
    FAIL("expected the procedure to abort");
  } catch (const ProcedureAbort& e) {
    CHECK_FALSE(e.reasons().empty());
  }
}

TEST_CASE("heavy-tailed compromised durations abort the node") {
  Rng rng(7);
  std::vector<Cycle> cycles;
  for (int i = 0; i < 10000; ++i) cycles.push_back({exp_draw(rng, 2.0), lomax_draw(rng, 1.5)});
  const auto est = estimate_procedure(CyclesTrace{{NodeTrace{0, "", cycles}, NodeTrace{1, "", iid_cycles(rng, 10000)}}});
  CHECK(est.nodes[0].compromised_tail.verdict == Tail::heavy_tail);
  CHECK(est.nodes[0].aborted);
  CHECK_FALSE(est.nodes[1].aborted);
}

TEST_CASE("nodes without cycles abort and bad durations are data errors") {
  CyclesTrace trace{{NodeTrace{0, "", {}}, NodeTrace{1, "", {{1, 1}}}}};
  const auto est = estimate_procedure(trace);
  CHECK(est.nodes[0].aborted);
  CHECK(est.survivors == 1);
  CHECK_THROWS_AS(estimate_procedure(single({{1, 0}})), DataError);
  CHECK_THROWS_AS(estimate_procedure(CyclesTrace{}), InsufficientData);
}

TEST_CASE("estimator error shrinks like one over root b") {
  Rng rng(8);
  std::vector<double> rms;
  for (std::size_t b : {100u, 1000u, 10000u}) {
    double ss = 0.0;
    for (int r = 0; r < 200; ++r) {
      const double e = estimate_node(iid_cycles(rng, b)) - 1.0 / 3.0;
      ss += e * e;
    }
    rms.push_back(std::sqrt(ss / 200) * std::sqrt(double(b)));
  }
  for (double x : rms) CHECK(x <= 2 * rms[0]);
  for (double x : rms) CHECK(x >= 0.5 * rms[0]);
}

TEST_CASE("estimator still converges under positively dependent secure durations") {
  // Blocks of 10 consecutive secure durations share a common shock; the mean stays 2.
  Rng rng(9);
  auto dependent = [&](std::size_t b) {
    std::vector<Cycle> out;
    double shared = 0.0;
    for (std::size_t i = 0; i < b; ++i) {
      if (i % 10 == 0) shared = exp_draw(rng, 1.0);
      out.push_back({exp_draw(rng, 1.0) + shared, exp_draw(rng, 1.0)});
    }
    return out;
  };
  double small = 0.0, large = 0.0;
  for (int r = 0; r < 50; ++r) {
    small += std::pow(estimate_node(dependent(1000)) - 1.0 / 3.0, 2);
    large += std::pow(estimate_node(dependent(100000)) - 1.0 / 3.0, 2);
  }
  CHECK(std::sqrt(large / 50) < std::sqrt(small / 50));
  CHECK(std::sqrt(large / 50) <= 0.005);
}

TEST_CASE("cycles CSV round trip") {
  Rng rng(10);
  CyclesTrace trace;
  trace.nodes.push_back({3, "", iid_cycles(rng, 5)});
  trace.nodes.push_back({8, "", iid_cycles(rng, 2)});
  std::ostringstream out;
  write_cycles_csv(trace, out);
  CHECK(out.str().rfind(std::string(kCyclesCsvHeader) + "\n", 0) == 0);
  std::istringstream in(out.str());
  const auto back = read_cycles_csv(in, "mem");
  REQUIRE(back.nodes.size() == 2);
  CHECK(back.nodes[0].node == 3);
  CHECK(back.nodes[0].cycles == trace.nodes[0].cycles);
  CHECK(back.nodes[1].cycles == trace.nodes[1].cycles);

  std::istringstream prefixed(out.str());
  CHECK(read_cycles_csv(prefixed, "mem", "f1").nodes[0].label() == "f1:3");
}

TEST_CASE("cycles CSV allows interleaved nodes") {
  std::istringstream in(std::string(kCyclesCsvHeader) + "\n2,1,1.5,1\n1,1,2,1\n2,2,3,2\n");
  const auto t = read_cycles_csv(in, "mem");
  REQUIRE(t.nodes.size() == 2);
  CHECK(t.nodes[0].node == 1);
  CHECK(t.nodes[1].cycles == std::vector<Cycle>{{1.5, 1}, {3, 2}});
}

TEST_CASE("cycles CSV errors name the line") {
  auto error_of = [](const std::string& text) {
    std::istringstream in(text);
    try {
      read_cycles_csv(in, "trace.csv");
    } catch (const DataError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  const std::string header(kCyclesCsvHeader);
  const auto missing_col = error_of(header + "\n0,1,2.0\n");
  CHECK(missing_col.find("trace.csv:2:") != std::string::npos);
  CHECK(missing_col.find(header) != std::string::npos);
  CHECK(error_of("node,cycle\n0,1\n").find(header) != std::string::npos);
  CHECK(error_of(header + "\n0,1,2,1\n0,3,2,1\n").find("trace.csv:3:") != std::string::npos);
  CHECK(error_of(header + "\n0,1,-2,1\n").find("trace.csv:2:") != std::string::npos);
  CHECK(error_of(header + "\n0,1,abc,1\n").find("trace.csv:2:") != std::string::npos);
  CHECK(error_of(header + "\n0,1,2,1\n").empty());
}
