#pragma once

// Minimal trips of a graph series by a backward dynamic program over
// snapshots, one destination column at a time, plus earliest-arrival
// queries on the raw link stream.
//
// For a destination v the sweep keeps, for every source u, the earliest
// arrival EA(u) over paths departing at or after the current snapshot k and
// the minimum hop count H(u) among paths attaining it. Going from k+1 to k,
// only sources with an arc in snapshot k can improve:
//
//   EA_k(u) = min(EA_{k+1}(u), min_{(u,w) in E_k} [w == v ? k : EA_{k+1}(w)])
//
// (u, v, k, EA_k(u)) is a minimal trip exactly when EA_k(u) < EA_{k+1}(u).
// The work per column is linear in the number of arcs, O(nM) overall.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <numeric>
#include <optional>
#include <span>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "satscale/aggregate.hpp"
#include "satscale/link_stream.hpp"

namespace satscale {

struct MinimalTrip {
  NodeId u = 0;
  NodeId v = 0;
  SnapshotIndex t_dep = 0;
  SnapshotIndex t_arr = 0;
  std::uint32_t hops = 0;

  std::uint32_t duration() const noexcept { return t_arr - t_dep + 1; }

  friend bool operator==(const MinimalTrip&, const MinimalTrip&) = default;
  friend auto operator<=>(const MinimalTrip&, const MinimalTrip&) = default;
};

/// Exact non-negative rational in lowest terms.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational make(std::int64_t n, std::int64_t d) {
    if (d <= 0) throw Error("rational with non-positive denominator");
    const auto g = std::gcd(n, d);
    return {n / g, d / g};
  }
  double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }

  friend bool operator==(const Rational&, const Rational&) = default;
  friend bool operator<(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
  }
};

/// hops / duration; requires 1 <= hops <= duration.
inline Rational occupancy_rate(std::int64_t hops, std::int64_t duration) {
  if (hops < 1 || hops > duration)
    throw Error("occupancy rate needs 1 <= hops <= duration (got " + std::to_string(hops) +
                "/" + std::to_string(duration) + ")");
  return Rational::make(hops, duration);
}

/// Multiset of occupancy rates keyed by the exact (hops, duration) pair.
class OccupancyDistribution {
 public:
  struct Entry {
    std::uint32_t hops;
    std::uint32_t duration;
    std::uint64_t count;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  void add(std::uint32_t hops, std::uint32_t duration, std::uint64_t count = 1) {
    counts_[key(hops, duration)] += count;
    total_ += count;
  }
  void merge(const OccupancyDistribution& other) {
    for (const auto& [k, c] : other.counts_) counts_[k] += c;
    total_ += other.total_;
  }

  std::uint64_t total() const noexcept { return total_; }
  bool empty() const noexcept { return total_ == 0; }
  std::size_t distinct_keys() const noexcept { return counts_.size(); }

  /// Entries ordered by (hops, duration).
  std::vector<Entry> entries() const {
    std::vector<Entry> out;
    out.reserve(counts_.size());
    for (const auto& [k, c] : counts_)
      out.push_back({static_cast<std::uint32_t>(k >> 32), static_cast<std::uint32_t>(k), c});
    std::sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) {
      return std::pair(a.hops, a.duration) < std::pair(b.hops, b.duration);
    });
    return out;
  }

  friend bool operator==(const OccupancyDistribution& a, const OccupancyDistribution& b) {
    return a.total_ == b.total_ && a.counts_ == b.counts_;
  }

 private:
  static std::uint64_t key(std::uint32_t hops, std::uint32_t duration) {
    return (static_cast<std::uint64_t>(hops) << 32) | duration;
  }

  std::unordered_map<std::uint64_t, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

/// Sums of d_time(u,v,k) and d_hops(u,v,k) over ordered pairs u != v and
/// departure snapshots k = 1..K with finite distance.
struct DistanceAggregates {
  unsigned __int128 sum_d_time = 0;
  unsigned __int128 sum_d_hops = 0;
  std::uint64_t finite_triples = 0;
  std::uint64_t total_triples = 0;

  void merge(const DistanceAggregates& o) {
    sum_d_time += o.sum_d_time;
    sum_d_hops += o.sum_d_hops;
    finite_triples += o.finite_triples;
    total_triples += o.total_triples;
  }
  friend bool operator==(const DistanceAggregates&, const DistanceAggregates&) = default;
};

struct SweepResult {
  OccupancyDistribution occupancy;
  DistanceAggregates distances;
};

struct SweepOptions {
  /// Worker threads; 0 means hardware concurrency.
  unsigned threads = 1;
  /// Destinations to process; all nodes when unset.
  std::optional<std::vector<NodeId>> destinations = std::nullopt;
};

/// Per-worker state for one destination column at a time: O(n) memory.
class ColumnSweeper {
 public:
  explicit ColumnSweeper(const GraphSeries& g)
      : g_(g),
        ea_(g.node_count(), kUnreachable),
        hops_(g.node_count(), 0),
        set_at_(g.node_count(), 0) {}

  /// Runs the backward sweep toward `dest`, calling on_trip(MinimalTrip) for
  /// every minimal trip in order of decreasing departure and accumulating
  /// distance sums into `acc`.
  template <class TripVisitor>
  void run(NodeId dest, TripVisitor&& on_trip, DistanceAggregates& acc) {
    const auto K = g_.snapshot_count();
    for (NodeId u : touched_) {
      ea_[u] = kUnreachable;
      hops_[u] = 0;
    }
    touched_.clear();
    acc.total_triples += static_cast<std::uint64_t>(g_.node_count() - 1) * K;

    for (std::size_t a = g_.active_count(); a-- > 0;) {
      const SnapshotIndex k = g_.active_index(a);
      const auto arcs = g_.active_arcs(a);
      // Candidates read only values from k+1; they are applied afterwards so
      // that two arcs of one snapshot never chain.
      updates_.clear();
      for (std::size_t i = 0; i < arcs.size();) {
        const NodeId u = arcs[i].src;
        if (u == dest) {
          while (i < arcs.size() && arcs[i].src == u) ++i;
          continue;
        }
        SnapshotIndex best = ea_[u];
        std::uint32_t best_hops = hops_[u];
        for (; i < arcs.size() && arcs[i].src == u; ++i) {
          const NodeId w = arcs[i].dst;
          SnapshotIndex arr;
          std::uint32_t h;
          if (w == dest) {
            arr = k;
            h = 1;
          } else {
            arr = ea_[w];
            if (arr == kUnreachable) continue;
            h = hops_[w] + 1;
          }
          if (arr < best || (arr == best && h < best_hops)) {
            best = arr;
            best_hops = h;
          }
        }
        if (best != ea_[u] || best_hops != hops_[u]) updates_.push_back({u, best, best_hops});
      }
      for (const auto& up : updates_) {
        const NodeId u = up.node;
        if (ea_[u] == kUnreachable) {
          touched_.push_back(u);
        } else {
          flush(u, k + 1, set_at_[u], acc);
        }
        if (up.ea < ea_[u]) on_trip(MinimalTrip{u, dest, k, up.ea, up.hops});
        ea_[u] = up.ea;
        hops_[u] = up.hops;
        set_at_[u] = k;
      }
    }
    for (NodeId u : touched_) flush(u, 1, set_at_[u], acc);
  }

 private:
  struct Update {
    NodeId node;
    SnapshotIndex ea;
    std::uint32_t hops;
  };

  // Departures k in [lo, hi] all see the current (EA, H) of u.
  void flush(NodeId u, SnapshotIndex lo, SnapshotIndex hi, DistanceAggregates& acc) const {
    if (lo > hi) return;
    const auto count = static_cast<unsigned __int128>(hi - lo + 1);
    const auto sum_k = count * (static_cast<unsigned __int128>(lo) + hi) / 2;
    acc.sum_d_time += count * (static_cast<unsigned __int128>(ea_[u]) + 1) - sum_k;
    acc.sum_d_hops += count * hops_[u];
    acc.finite_triples += static_cast<std::uint64_t>(count);
  }

  const GraphSeries& g_;
  std::vector<SnapshotIndex> ea_;
  std::vector<std::uint32_t> hops_;
  std::vector<SnapshotIndex> set_at_;
  std::vector<NodeId> touched_;
  std::vector<Update> updates_;
};

namespace detail {

inline std::vector<NodeId> destinations_of(const GraphSeries& g, const SweepOptions& opt) {
  if (opt.destinations) {
    for (NodeId v : *opt.destinations)
      if (v >= g.node_count()) throw Error("destination id out of range");
    return *opt.destinations;
  }
  std::vector<NodeId> all(g.node_count());
  std::iota(all.begin(), all.end(), NodeId{0});
  return all;
}

inline unsigned worker_count(unsigned requested, std::size_t jobs) {
  unsigned w = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  return static_cast<unsigned>(std::min<std::size_t>(w, std::max<std::size_t>(jobs, 1)));
}

/// Runs job(worker, index) for index in [0, jobs) on `workers` threads with
/// dynamic assignment.
template <class Job>
void parallel_for(unsigned workers, std::size_t jobs, Job&& job) {
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) job(0u, i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i; (i = next.fetch_add(1)) < jobs;) job(w, i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(jobs);
        }
      });
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

/// Occupancy distribution and distance sums over all minimal trips of `g`.
/// The result does not depend on the thread count.
inline SweepResult minimal_trip_sweep(const GraphSeries& g, const SweepOptions& opt = {}) {
  const auto dests = detail::destinations_of(g, opt);
  const unsigned workers = detail::worker_count(opt.threads, dests.size());
  std::vector<SweepResult> partial(workers);
  std::vector<ColumnSweeper> sweepers;
  sweepers.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) sweepers.emplace_back(g);

  detail::parallel_for(workers, dests.size(), [&](unsigned w, std::size_t i) {
    auto& out = partial[w];
    sweepers[w].run(
        dests[i], [&](const MinimalTrip& p) { out.occupancy.add(p.hops, p.duration()); },
        out.distances);
  });

  SweepResult result = std::move(partial[0]);
  for (unsigned w = 1; w < workers; ++w) {
    result.occupancy.merge(partial[w].occupancy);
    result.distances.merge(partial[w].distances);
  }
  return result;
}

/// Every minimal trip of `g`, sorted. Meant for small series and tests.
inline std::vector<MinimalTrip> collect_minimal_trips(const GraphSeries& g,
                                                      const SweepOptions& opt = {}) {
  std::vector<MinimalTrip> trips;
  ColumnSweeper sweeper(g);
  DistanceAggregates unused;
  for (NodeId v : detail::destinations_of(g, opt))
    sweeper.run(v, [&](const MinimalTrip& p) { trips.push_back(p); }, unused);
  std::sort(trips.begin(), trips.end());
  return trips;
}

/// Fastest realization of a trip in the raw stream.
struct StreamTrip {
  Timestamp t_dep = 0;
  Timestamp t_arr = 0;
  Timestamp duration() const noexcept { return t_arr - t_dep; }
  friend bool operator==(const StreamTrip&, const StreamTrip&) = default;
};

/// Reusable backward scan over link-stream events for earliest-arrival
/// queries toward one destination; O(n) state, reset in time proportional to
/// the nodes it touched.
class StreamArrivalScanner {
 public:
  explicit StreamArrivalScanner(const LinkStream& s)
      : s_(s), ea_(s.node_count(), kNever) {}

  /// Minimum t_arr - t_dep over temporal paths from u to v using only events
  /// with timestamps in [t_lo, t_hi]; among equally fast paths the latest
  /// departure is returned.
  std::optional<StreamTrip> fastest(NodeId u, NodeId v, Timestamp t_lo, Timestamp t_hi) {
    reset();
    std::optional<StreamTrip> best;
    if (u == v || t_lo > t_hi) return best;
    const auto& ev = s_.events();
    auto first = std::lower_bound(ev.begin(), ev.end(), t_lo,
                                  [](const Event& e, Timestamp t) { return e.t < t; });
    auto last = std::upper_bound(ev.begin(), ev.end(), t_hi,
                                 [](Timestamp t, const Event& e) { return t < e.t; });
    auto group_end = last;
    while (group_end != first) {
      const Timestamp t = std::prev(group_end)->t;
      auto group_begin = group_end;
      while (group_begin != first && std::prev(group_begin)->t == t) --group_begin;
      pending_.clear();
      for (auto it = group_begin; it != group_end; ++it) {
        relax(it->u, it->v, t, v, best, u);
        if (!s_.directed()) relax(it->v, it->u, t, v, best, u);
      }
      for (const auto& [x, arr] : pending_) {
        if (ea_[x] == kNever) touched_.push_back(x);
        ea_[x] = std::min(ea_[x], arr);
      }
      group_end = group_begin;
    }
    return best;
  }

 private:
  static constexpr Timestamp kNever = std::numeric_limits<Timestamp>::max();

  void relax(NodeId x, NodeId y, Timestamp t, NodeId dest, std::optional<StreamTrip>& best,
             NodeId source) {
    if (x == dest) return;
    const Timestamp arr = (y == dest) ? t : ea_[y];
    if (arr == kNever) return;
    if (arr < ea_[x]) pending_.emplace_back(x, arr);
    if (x == source && (!best || arr - t < best->duration())) best = StreamTrip{t, arr};
  }

  void reset() {
    for (NodeId x : touched_) ea_[x] = kNever;
    touched_.clear();
  }

  const LinkStream& s_;
  std::vector<Timestamp> ea_;
  std::vector<NodeId> touched_;
  std::vector<std::pair<NodeId, Timestamp>> pending_;
};

inline std::optional<StreamTrip> stream_earliest_arrival(const LinkStream& s, NodeId u,
                                                         Timestamp t_lo, Timestamp t_hi,
                                                         NodeId v) {
  StreamArrivalScanner scanner(s);
  return scanner.fastest(u, v, t_lo, t_hi);
}

}  // namespace satscale
