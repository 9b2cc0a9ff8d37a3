#include "adsm/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "adsm/error.hpp"
#include "adsm/sim.hpp"

namespace adsm::renewal {

namespace {

// Mid-ranks, ties averaged.
std::vector<double> ranks(std::span<const double> xs) {
  std::vector<std::size_t> idx(xs.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> r(xs.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && xs[idx[j + 1]] == xs[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) r[idx[t]] = avg;
    i = j + 1;
  }
  return r;
}

double two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

RankTest decide(double z, double significance) {
  RankTest t;
  t.statistic = z;
  t.p_value = two_sided_p(z);
  t.verdict = t.p_value < significance ? Independence::fail : Independence::pass;
  return t;
}

void check_significance(double s) {
  if (!(s > 0.0 && s < 1.0)) throw InvalidParameter(fmt::format("significance {} must lie in (0, 1)", s));
}

}  // namespace

std::string_view to_string(Independence v) noexcept {
  switch (v) {
    case Independence::pass:
      return "pass";
    case Independence::fail:
      return "fail";
    case Independence::inconclusive:
      return "inconclusive";
  }
  return "?";
}

std::string_view to_string(Tail v) noexcept {
  switch (v) {
    case Tail::finite:
      return "finite";
    case Tail::heavy_tail:
      return "heavy_tail";
    case Tail::inconclusive:
      return "inconclusive";
  }
  return "?";
}

double estimate_node(std::span<const Cycle> cycles) {
  if (cycles.empty()) throw InsufficientData("estimate_node: no complete cycles");
  double w = 0.0, d = 0.0;
  for (const auto& c : cycles) {
    w += c.secure;
    d += c.compromised;
  }
  return d / (w + d);
}

RankTest test_independence(std::span<const double> seq, double significance, std::size_t min_length) {
  check_significance(significance);
  const std::size_t n = seq.size();
  if (n < std::max<std::size_t>(min_length, 3)) return {};
  const auto r = ranks(seq);
  const double mean = 0.5 * static_cast<double>(n + 1);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    den += (r[i] - mean) * (r[i] - mean);
    if (i + 1 < n) num += (r[i] - mean) * (r[i + 1] - mean);
  }
  if (den == 0.0) return {};
  const double nd = static_cast<double>(n);
  // Null moments of the lag-1 serial rank correlation.
  const double rho = num / den;
  const double z = (rho + 1.0 / nd) / std::sqrt((nd - 2.0) / (nd * (nd - 1.0)));
  return decide(z, significance);
}

RankTest test_pair_independence(std::span<const double> a, std::span<const double> b, double significance,
                                std::size_t min_length) {
  check_significance(significance);
  if (a.size() != b.size())
    throw InvalidParameter(fmt::format("paired sequences differ in length ({} vs {})", a.size(), b.size()));
  const std::size_t n = a.size();
  if (n < std::max<std::size_t>(min_length, 3)) return {};
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const double mean = 0.5 * static_cast<double>(n + 1);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (ra[i] - mean) * (rb[i] - mean);
    saa += (ra[i] - mean) * (ra[i] - mean);
    sbb += (rb[i] - mean) * (rb[i] - mean);
  }
  if (saa == 0.0 || sbb == 0.0) return {};
  const double rho = sab / std::sqrt(saa * sbb);
  return decide(rho * std::sqrt(static_cast<double>(n - 1)), significance);
}

TailTest test_finite_variance(std::span<const double> seq, std::size_t min_length, double fraction, double cutoff) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw InvalidParameter("tail fraction must lie in (0, 1)");
  TailTest t;
  if (seq.size() < std::max<std::size_t>(min_length, 2)) return t;
  std::vector<double> xs(seq.begin(), seq.end());
  std::sort(xs.begin(), xs.end(), std::greater<>());
  const std::size_t k = std::max<std::size_t>(
      2, std::min(xs.size() - 1, static_cast<std::size_t>(std::floor(fraction * static_cast<double>(xs.size())))));
  const double threshold = xs[k];
  if (!(threshold > 0.0)) return t;
  double h = 0.0;
  for (std::size_t i = 0; i < k; ++i) h += std::log(xs[i] / threshold);
  h /= static_cast<double>(k);
  t.order_statistics = k;
  if (!(h > 0.0)) return t;
  t.index = 1.0 / h;
  const double half = 1.959963984540054 * t.index / std::sqrt(static_cast<double>(k));
  t.lower = t.index - half;
  t.upper = t.index + half;
  if (t.index <= 2.0 && t.upper < cutoff)
    t.verdict = Tail::heavy_tail;
  else if (t.lower > cutoff)
    t.verdict = Tail::finite;
  return t;
}

RenewalEstimate estimate_procedure(const CyclesTrace& trace, const Options& opt) {
  if (trace.nodes.empty()) throw InsufficientData("estimate_procedure: trace holds no nodes");
  check_significance(opt.significance);
  const double alpha =
      opt.bonferroni ? opt.significance / (3.0 * static_cast<double>(trace.nodes.size())) : opt.significance;

  RenewalEstimate est;
  std::vector<double> survivors;
  for (const auto& node : trace.nodes) {
    NodeDiagnostics d;
    d.label = node.label();
    d.cycles = node.cycles.size();
    auto abort = [&](std::string reason) {
      d.aborted = true;
      est.abort_log.push_back(fmt::format("node {}: {}", d.label, reason));
      d.reasons.push_back(std::move(reason));
    };

    if (node.cycles.empty()) {
      abort("no complete cycles observed");
      est.nodes.push_back(std::move(d));
      continue;
    }
    std::vector<double> s, c;
    std::vector<std::pair<double, double>> running;
    for (const auto& cy : node.cycles) {
      if (!(cy.secure > 0.0 && cy.compromised > 0.0) || !std::isfinite(cy.secure) || !std::isfinite(cy.compromised))
        throw DataError(fmt::format("node {}: cycle durations must be positive and finite", d.label));
      s.push_back(cy.secure);
      c.push_back(cy.compromised);
      d.secure_total += cy.secure;
      d.compromised_total += cy.compromised;
      running.emplace_back(d.secure_total + d.compromised_total,
                           d.compromised_total / (d.secure_total + d.compromised_total));
    }
    const double q = d.compromised_total / (d.secure_total + d.compromised_total);

    if (opt.force_pass) {
      d.steadiness = "skipped";
    } else {
      if (running.size() < 2 * opt.steady_window) {
        d.steadiness = "inconclusive";
        d.warnings.emplace_back("too few cycles for the steadiness check");
      } else {
        const auto verdict = sim::detect_steady(running, opt.steady_window, opt.steady_tol);
        d.steadiness = verdict.steady ? "steady" : "not_steady";
        d.steady_time = verdict.time;
        if (!verdict.steady) abort("running estimate never settled within the steadiness tolerance");
      }

      d.secure_independence = test_independence(s, alpha, opt.min_independence_length);
      d.compromised_independence = test_independence(c, alpha, opt.min_independence_length);
      d.pair_independence = test_pair_independence(s, c, alpha, opt.min_independence_length);
      const std::pair<const char*, const RankTest*> rank_tests[] = {
          {"secure durations", &d.secure_independence},
          {"compromised durations", &d.compromised_independence},
          {"secure/compromised pairs", &d.pair_independence}};
      for (const auto& [what, t] : rank_tests) {
        if (t->verdict == Independence::fail)
          abort(fmt::format("independence test failed on {} (z={:.4g}, p={:.3g})", what, t->statistic, t->p_value));
        else if (t->verdict == Independence::inconclusive)
          d.warnings.push_back(fmt::format("independence test inconclusive on {}", what));
      }

      d.secure_tail = test_finite_variance(s, opt.min_tail_length, opt.tail_fraction, opt.tail_cutoff);
      d.compromised_tail = test_finite_variance(c, opt.min_tail_length, opt.tail_fraction, opt.tail_cutoff);
      const std::pair<const char*, const TailTest*> tail_tests[] = {{"secure durations", &d.secure_tail},
                                                                    {"compromised durations", &d.compromised_tail}};
      for (const auto& [what, t] : tail_tests) {
        if (t->verdict == Tail::heavy_tail)
          abort(fmt::format("heavy tail on {} (Hill index {:.4g}, 95% interval [{:.4g}, {:.4g}])", what, t->index,
                            t->lower, t->upper));
        else if (t->verdict == Tail::inconclusive)
          d.warnings.push_back(fmt::format("finite-variance check inconclusive on {}", what));
      }
    }

    if (!d.aborted) {
      d.q = q;
      survivors.push_back(q);
    }
    est.nodes.push_back(std::move(d));
  }

  est.survivors = survivors.size();
  if (survivors.empty()) throw ProcedureAbort("every observed node was rejected by the diagnostics", est.abort_log);
  est.q_bar = std::accumulate(survivors.begin(), survivors.end(), 0.0) / static_cast<double>(survivors.size());
  if (survivors.size() >= 2) {
    double ss = 0.0;
    for (double x : survivors) ss += (x - est.q_bar) * (x - est.q_bar);
    const double n = static_cast<double>(survivors.size());
    est.standard_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return est;
}

}  // namespace adsm::renewal
