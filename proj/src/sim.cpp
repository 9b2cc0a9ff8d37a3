#include "adsm/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <queue>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "adsm/error.hpp"
#include "adsm/rng.hpp"

namespace adsm::sim {

namespace {

enum class EventKind : std::uint8_t { external, neighbor, recover };

struct Event {
  double time;
  std::uint64_t seq;
  graph::NodeId node;
  graph::NodeId source;
  std::uint32_t epoch;
  std::uint32_t source_epoch;
  EventKind kind;
};

struct Later {
  bool operator()(const Event& a, const Event& b) const noexcept {
    if (a.time != b.time) return a.time > b.time;
    return a.seq > b.seq;
  }
};

// Tracks one node's alternation and emits completed cycles whose secure
// period started at or after record_from.
struct CycleRecorder {
  double secure_start = 0.0;
  double compromised_start = 0.0;
  bool in_secure = true;

  void compromise(double t) {
    compromised_start = t;
    in_secure = false;
  }
  // Returns true and fills `out` when a full cycle closes.
  bool recover(double t, double record_from, bool had_secure, Cycle& out) {
    const bool complete = had_secure && secure_start >= record_from;
    if (complete) out = Cycle{compromised_start - secure_start, t - compromised_start};
    secure_start = t;
    in_secure = true;
    return complete;
  }
};

double overlap(double a, double b, double lo, double hi) {
  const double l = std::max(a, lo);
  const double h = std::min(b, hi);
  return h > l ? h - l : 0.0;
}

double mean_of(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

double sample_sd(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

struct Checkpoint {
  double time;
  bool snapshot;
  int batch_boundary;  // -1 when not a boundary
};

std::vector<Checkpoint> make_checkpoints(const ScenarioConfig& c, double burn_in) {
  std::vector<Checkpoint> cps;
  const auto count = static_cast<std::size_t>(std::floor(c.horizon / c.snapshot_interval));
  for (std::size_t i = 0; i <= count; ++i) cps.push_back({static_cast<double>(i) * c.snapshot_interval, true, -1});
  const double width = (c.horizon - burn_in) / static_cast<double>(c.batches);
  for (std::size_t j = 0; j <= c.batches; ++j) {
    const double t = j == c.batches ? c.horizon : burn_in + static_cast<double>(j) * width;
    cps.push_back({t, false, static_cast<int>(j)});
  }
  std::stable_sort(cps.begin(), cps.end(), [](const Checkpoint& a, const Checkpoint& b) { return a.time < b.time; });
  return cps;
}

class Replication {
 public:
  Replication(const ScenarioConfig& config, std::size_t r, double burn_in)
      : c_(config), g_(config.graph), model_(config.model), burn_in_(burn_in), n_(g_.size()) {
    out_.seed = replication_seed(config.master_seed, r);
    out_.burn_in = burn_in;
    compromised_.assign(n_, 0);
    epoch_.assign(n_, 0);
    comp_nbrs_.assign(n_, 0);
    last_change_.assign(n_, 0.0);
    shock_.assign(n_, INFINITY);
    recorder_.assign(n_, CycleRecorder{});
    had_secure_.assign(n_, 1);
    out_.secure_time.assign(n_, 0.0);
    out_.compromised_time.assign(n_, 0.0);
    out_.k_counts_secure.resize(n_);
    out_.k_counts_all.resize(n_);
    for (graph::NodeId v = 0; v < n_; ++v) {
      out_.k_counts_secure[v].assign(g_.degree(v) + 1, 0);
      out_.k_counts_all[v].assign(g_.degree(v) + 1, 0);
    }
    if (c_.record_cycles) {
      out_.cycles.nodes.resize(n_);
      for (graph::NodeId v = 0; v < n_; ++v) out_.cycles.nodes[v].node = v;
    }
    rngs_.reserve(n_);
    for (graph::NodeId v = 0; v < n_; ++v) rngs_.emplace_back(derive_seed(out_.seed, {stream_tag::node, v}));
  }

  ReplicationResult run() {
    initialise();
    const auto checkpoints = make_checkpoints(c_, burn_in_);
    std::vector<double> batch_area(c_.batches + 1, 0.0);
    std::size_t next_cp = 0;

    auto handle_checkpoints_up_to = [&](double t) {
      while (next_cp < checkpoints.size() && checkpoints[next_cp].time <= t) {
        const auto& cp = checkpoints[next_cp++];
        const double area = area_ + static_cast<double>(count_) * (cp.time - area_time_);
        if (cp.batch_boundary >= 0) batch_area[static_cast<std::size_t>(cp.batch_boundary)] = area;
        if (cp.snapshot) snapshot(cp.time, area);
      }
    };

    while (!queue_.empty()) {
      const Event ev = queue_.top();
      if (ev.time > c_.horizon) break;
      queue_.pop();
      handle_checkpoints_up_to(std::nextafter(ev.time, -INFINITY));
      if (!valid(ev)) continue;
      ++out_.events;
      if (ev.kind == EventKind::recover)
        recover(ev.node, ev.time);
      else
        compromise(ev.node, ev.time);
    }
    handle_checkpoints_up_to(c_.horizon);
    finish(batch_area);
    return std::move(out_);
  }

 private:
  void push(double time, graph::NodeId node, EventKind kind, graph::NodeId source = 0, std::uint32_t source_epoch = 0) {
    if (!(time <= c_.horizon)) return;
    queue_.push(Event{time, seq_++, node, source, epoch_[node], source_epoch, kind});
  }

  bool valid(const Event& ev) const {
    if (epoch_[ev.node] != ev.epoch) return false;
    switch (ev.kind) {
      case EventKind::recover:
        return compromised_[ev.node] != 0;
      case EventKind::external:
        return compromised_[ev.node] == 0;
      case EventKind::neighbor:
        return compromised_[ev.node] == 0 && compromised_[ev.source] != 0 && epoch_[ev.source] == ev.source_epoch;
    }
    return false;
  }

  void initialise() {
    if (c_.initial_compromised_fraction > 0.0) {
      Rng init(derive_seed(out_.seed, {stream_tag::init}));
      for (graph::NodeId v = 0; v < n_; ++v) {
        if (uniform01(init) < c_.initial_compromised_fraction) {
          compromised_[v] = 1;
          ++count_;
          // Starting compromised means no completed secure period precedes
          // the first recovery.
          had_secure_[v] = 0;
          recorder_[v].compromise(0.0);
        }
      }
      for (graph::NodeId v = 0; v < n_; ++v)
        if (compromised_[v])
          for (graph::NodeId u : g_.neighbors(v)) ++comp_nbrs_[u];
      for (graph::NodeId v = 0; v < n_; ++v)
        if (compromised_[v]) push(dist::sample_defense(model_, rngs_[v]).duration(), v, EventKind::recover);
    }
    for (graph::NodeId v = 0; v < n_; ++v)
      if (!compromised_[v]) start_secure(v, 0.0);
  }

  void start_secure(graph::NodeId v, double t) {
    Rng& rng = rngs_[v];
    shock_[v] = dist::draw_cycle_shock(model_, rng);
    push(t + dist::sample(model_, dist::Variable::x1, rng), v, EventKind::external);
    for (graph::NodeId u : g_.neighbors(v))
      if (compromised_[u])
        push(t + dist::sample_neighbor_clock(model_, shock_[v], rng), v, EventKind::neighbor, u, epoch_[u]);
  }

  void advance_area(double t) {
    area_ += static_cast<double>(count_) * (t - area_time_);
    area_time_ = t;
  }

  void compromise(graph::NodeId v, double t) {
    advance_area(t);
    out_.secure_time[v] += overlap(last_change_[v], t, burn_in_, c_.horizon);
    last_change_[v] = t;
    compromised_[v] = 1;
    ++epoch_[v];
    ++count_;
    recorder_[v].compromise(t);
    for (graph::NodeId u : g_.neighbors(v)) {
      ++comp_nbrs_[u];
      if (!compromised_[u])
        push(t + dist::sample_neighbor_clock(model_, shock_[u], rngs_[u]), u, EventKind::neighbor, v, epoch_[v]);
    }
    push(t + dist::sample_defense(model_, rngs_[v]).duration(), v, EventKind::recover);
  }

  void recover(graph::NodeId v, double t) {
    advance_area(t);
    out_.compromised_time[v] += overlap(last_change_[v], t, burn_in_, c_.horizon);
    last_change_[v] = t;
    compromised_[v] = 0;
    ++epoch_[v];
    --count_;
    for (graph::NodeId u : g_.neighbors(v)) --comp_nbrs_[u];
    Cycle cycle;
    if (recorder_[v].recover(t, burn_in_, had_secure_[v] != 0, cycle) && c_.record_cycles)
      out_.cycles.nodes[v].cycles.push_back(cycle);
    had_secure_[v] = 1;
    start_secure(v, t);
  }

  void snapshot(double t, double area) {
    if (t > 0.0) out_.running_q.emplace_back(t, area / (static_cast<double>(n_) * t));
    if (t >= burn_in_) {
      for (graph::NodeId v = 0; v < n_; ++v) {
        ++out_.k_counts_all[v][comp_nbrs_[v]];
        if (!compromised_[v]) ++out_.k_counts_secure[v][comp_nbrs_[v]];
      }
    }
    if (c_.record_snapshots) {
      out_.snapshot_times.push_back(t);
      out_.snapshot_states.push_back(compromised_);
    }
  }

  void finish(const std::vector<double>& batch_area) {
    advance_area(c_.horizon);
    for (graph::NodeId v = 0; v < n_; ++v) {
      auto& bucket = compromised_[v] ? out_.compromised_time : out_.secure_time;
      bucket[v] += overlap(last_change_[v], c_.horizon, burn_in_, c_.horizon);
    }
    const double window = c_.horizon - burn_in_;
    out_.occupancy.resize(n_);
    double total = 0.0;
    for (graph::NodeId v = 0; v < n_; ++v) {
      out_.occupancy[v] = std::clamp(out_.compromised_time[v] / window, 0.0, 1.0);
      total += out_.compromised_time[v];
    }
    out_.q = total / (static_cast<double>(n_) * window);
    const double width = window / static_cast<double>(c_.batches);
    for (std::size_t j = 0; j < c_.batches; ++j)
      out_.batch_q.push_back((batch_area[j + 1] - batch_area[j]) / (static_cast<double>(n_) * width));
    out_.degenerate = out_.events == 0;
  }

  const ScenarioConfig& c_;
  const graph::Graph& g_;
  const dist::AttackDefenseModel& model_;
  double burn_in_;
  std::size_t n_;

  std::vector<std::uint8_t> compromised_;
  std::vector<std::uint32_t> epoch_;
  std::vector<std::uint32_t> comp_nbrs_;
  std::vector<double> last_change_;
  std::vector<double> shock_;
  std::vector<CycleRecorder> recorder_;
  std::vector<std::uint8_t> had_secure_;
  std::vector<Rng> rngs_;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::uint64_t seq_ = 0;
  std::size_t count_ = 0;
  double area_ = 0.0;
  double area_time_ = 0.0;
  ReplicationResult out_;
};

}  // namespace

void validate(const ScenarioConfig& c) {
  if (c.graph.size() == 0) throw InvalidParameter("scenario: graph has no nodes");
  if (c.model.regime() == dist::Regime::tabulated)
    throw Unsupported("simulation needs a samplable model; the tabulated regime only supplies diagonal curves");
  if (!(c.horizon > 0.0) || !std::isfinite(c.horizon))
    throw InvalidParameter(fmt::format("scenario: horizon={} must be finite and > 0", c.horizon));
  switch (c.burn_in.kind) {
    case BurnIn::Kind::fraction:
    case BurnIn::Kind::automatic:
      if (!(c.burn_in.value >= 0.0 && c.burn_in.value < 1.0))
        throw InvalidParameter(fmt::format("scenario: burn-in fraction {} must lie in [0, 1)", c.burn_in.value));
      break;
    case BurnIn::Kind::absolute:
      if (!(c.burn_in.value >= 0.0 && c.burn_in.value < c.horizon))
        throw InvalidParameter(
            fmt::format("scenario: burn-in {} must satisfy 0 <= burn_in < horizon={}", c.burn_in.value, c.horizon));
      break;
  }
  if (c.replications < 1) throw InvalidParameter("scenario: replications must be >= 1");
  if (!(c.snapshot_interval > 0.0) || !std::isfinite(c.snapshot_interval))
    throw InvalidParameter(fmt::format("scenario: snapshot interval {} must be > 0", c.snapshot_interval));
  if (!(c.initial_compromised_fraction >= 0.0 && c.initial_compromised_fraction <= 1.0))
    throw InvalidParameter("scenario: initial compromised fraction must lie in [0, 1]");
  if (c.batches < 2) throw InvalidParameter("scenario: batches must be >= 2");
  if (c.steady_window == 0) throw InvalidParameter("scenario: steadiness window must be >= 1");
  if (!(c.steady_tol > 0.0)) throw InvalidParameter("scenario: steadiness tolerance must be > 0");
}

Steadiness detect_steady(std::span<const std::pair<double, double>> series, std::size_t window, double tol) {
  if (window == 0) throw InvalidParameter("detect_steady: window must be >= 1");
  if (series.size() < 2 * window)
    throw InvalidParameter(
        fmt::format("detect_steady: series of length {} is shorter than 2*window={}", series.size(), 2 * window));
  const std::size_t n = series.size();
  const std::size_t nw = n - window + 1;

  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + series[i].second;
  std::vector<double> wmean(nw);
  for (std::size_t j = 0; j < nw; ++j) wmean[j] = (prefix[j + window] - prefix[j]) / static_cast<double>(window);

  std::vector<double> suf_max(nw), suf_min(nw);
  suf_max[nw - 1] = suf_min[nw - 1] = wmean[nw - 1];
  for (std::size_t j = nw - 1; j-- > 0;) {
    suf_max[j] = std::max(suf_max[j + 1], wmean[j]);
    suf_min[j] = std::min(suf_min[j + 1], wmean[j]);
  }

  for (std::size_t i = 0; i + 2 * window <= n; ++i) {
    const double mu = (prefix[n] - prefix[i]) / static_cast<double>(n - i);
    const double dev = std::max(suf_max[i] - mu, mu - suf_min[i]);
    if (dev <= tol * std::abs(mu)) return Steadiness{true, i, series[i].first};
  }
  return Steadiness{};
}

std::uint64_t replication_seed(std::uint64_t master_seed, std::size_t r) {
  return derive_seed(master_seed, {stream_tag::replication, r});
}

namespace {

double floor_burn_in(const ScenarioConfig& c) {
  switch (c.burn_in.kind) {
    case BurnIn::Kind::absolute:
      return c.burn_in.value;
    case BurnIn::Kind::fraction:
    case BurnIn::Kind::automatic:
      break;
  }
  return c.burn_in.value * c.horizon;
}

Steadiness steadiness_of(const ScenarioConfig& c, const ReplicationResult& rep) {
  if (rep.running_q.size() < 2 * c.steady_window) return Steadiness{};
  return detect_steady(rep.running_q, c.steady_window, c.steady_tol);
}

}  // namespace

namespace {

// Automatic burn-in runs replication 0 as a pilot with the floor burn-in. When
// the floor wins, that pilot is exactly replication 0 and is handed back.
double resolve_with_pilot(const ScenarioConfig& config, std::optional<ReplicationResult>* reuse) {
  validate(config);
  const double floor = floor_burn_in(config);
  if (config.burn_in.kind != BurnIn::Kind::automatic) return floor;
  auto pilot = Replication(config, 0, floor).run();
  const auto verdict = steadiness_of(config, pilot);
  if (verdict.steady && verdict.time > floor && verdict.time < config.horizon) return verdict.time;
  if (reuse) *reuse = std::move(pilot);
  return floor;
}

}  // namespace

double resolve_burn_in(const ScenarioConfig& config) { return resolve_with_pilot(config, nullptr); }

ReplicationResult run_replication(const ScenarioConfig& config, std::size_t r, double burn_in) {
  validate(config);
  if (!(burn_in >= 0.0 && burn_in < config.horizon))
    throw InvalidParameter(fmt::format("burn-in {} must satisfy 0 <= burn_in < horizon={}", burn_in, config.horizon));
  return Replication(config, r, burn_in).run();
}

SimResult run(const ScenarioConfig& config) {
  validate(config);
  SimResult result;
  result.master_seed = config.master_seed;
  std::optional<ReplicationResult> pilot;
  result.burn_in = resolve_with_pilot(config, &pilot);

  const std::size_t reps = config.replications;
  result.replications.resize(reps);
  const std::size_t first = pilot ? 1 : 0;
  if (pilot) result.replications[0] = std::move(*pilot);
  const std::size_t jobs = std::clamp<std::size_t>(config.jobs, 1, reps);
  if (jobs == 1) {
    for (std::size_t r = first; r < reps; ++r) result.replications[r] = Replication(config, r, result.burn_in).run();
  } else {
    std::atomic<std::size_t> next{first};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (std::size_t r = next++; r < reps; r = next++) {
          try {
            result.replications[r] = Replication(config, r, result.burn_in).run();
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& t : workers) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<double> qs;
  for (const auto& rep : result.replications) qs.push_back(rep.q);
  result.q = mean_of(qs);
  if (reps >= 2) {
    result.standard_error = sample_sd(qs) / std::sqrt(static_cast<double>(reps));
    result.error_method = "replications";
  } else {
    const auto& b = result.replications.front().batch_q;
    result.standard_error = sample_sd(b) / std::sqrt(static_cast<double>(b.size()));
    result.error_method = "batch_means";
  }

  const std::size_t n = config.graph.size();
  result.occupancy.assign(n, 0.0);
  for (const auto& rep : result.replications)
    for (std::size_t v = 0; v < n; ++v) result.occupancy[v] += rep.occupancy[v] / static_cast<double>(reps);

  result.steady = steadiness_of(config, result.replications.front());
  if (!result.steady.steady)
    result.warnings.emplace_back("running q did not reach the steadiness tolerance in replication 0");
  if (std::all_of(result.replications.begin(), result.replications.end(),
                  [](const ReplicationResult& r) { return r.degenerate; }))
    result.warnings.emplace_back(
        "degenerate scenario: no attack can start (no external attack and nothing compromised), q = 0");
  return result;
}

CyclesTrace export_cycles(const SimResult& result, std::size_t replication) {
  if (replication >= result.replications.size())
    throw InvalidParameter(fmt::format("export_cycles: replication {} out of range", replication));
  return result.replications[replication].cycles;
}

std::vector<Cycle> segment_cycles(std::span<const double> change_times, double start, double record_from) {
  std::vector<Cycle> cycles;
  CycleRecorder rec;
  rec.secure_start = start;
  double previous = start;
  for (std::size_t i = 0; i < change_times.size(); ++i) {
    const double t = change_times[i];
    if (!(t >= previous)) throw InvalidParameter("segment_cycles: change times must be non-decreasing");
    previous = t;
    Cycle c;
    if (i % 2 == 0)
      rec.compromise(t);
    else if (rec.recover(t, record_from, true, c))
      cycles.push_back(c);
  }
  return cycles;
}

std::vector<double> k_pmf(const ReplicationResult& rep, graph::NodeId v, bool secure_only) {
  const auto& counts = (secure_only ? rep.k_counts_secure : rep.k_counts_all).at(v);
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) throw InsufficientData(fmt::format("no snapshots recorded for node {}", v));
  std::vector<double> pmf;
  pmf.reserve(counts.size());
  for (auto c : counts) pmf.push_back(static_cast<double>(c) / static_cast<double>(total));
  return pmf;
}

void write_snapshots_csv(const ReplicationResult& rep, std::ostream& out) {
  out << "time,node_id,state\n";
  for (std::size_t i = 0; i < rep.snapshot_times.size(); ++i) {
    const auto& states = rep.snapshot_states[i];
    for (std::size_t v = 0; v < states.size(); ++v)
      fmt::print(out, "{:.17g},{},{}\n", rep.snapshot_times[i], v, static_cast<int>(states[v]));
  }
}

void write_snapshots_csv(const ReplicationResult& rep, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot open {} for writing", path.string()));
  write_snapshots_csv(rep, out);
  if (!out) throw DataError(fmt::format("write to {} failed", path.string()));
}

}  // namespace adsm::sim
