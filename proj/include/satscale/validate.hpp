#pragma once

// Information lost by aggregation: shortest transitions that collapse into a
// single window, and elongation of series minimal trips relative to the
// fastest realization in the raw stream.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "satscale/aggregate.hpp"
#include "satscale/link_stream.hpp"
#include "satscale/reach.hpp"

namespace satscale {

/// Two-hop temporal path (a, b, t1), (b, c, t2) whose endpoints form a
/// minimal trip (a, c, t1, t2) of the stream.
struct ShortestTransition {
  NodeId a = 0, b = 0, c = 0;
  Timestamp t1 = 0, t2 = 0;

  friend bool operator==(const ShortestTransition&, const ShortestTransition&) = default;
  friend auto operator<=>(const ShortestTransition&, const ShortestTransition&) = default;
};

/// All shortest transitions, sorted.
///
/// One backward scan over the events per destination c. When the scan reaches
/// an arc (a, b, t1), the only candidate second hop is the earliest b -> c event
/// after t1; it is kept iff the earliest arrival at c departing at or after t1
/// is t2 while departing strictly after t1 arrives strictly later.
inline std::vector<ShortestTransition> enumerate_shortest_transitions(const LinkStream& s,
                                                                      unsigned threads = 1) {
  constexpr Timestamp kNever = std::numeric_limits<Timestamp>::max();
  const std::size_t n = s.node_count();
  const auto& ev = s.events();
  const unsigned workers = detail::worker_count(threads, n);

  struct Worker {
    std::vector<Timestamp> ea, fresh, next_direct;
    std::vector<NodeId> improved;
    std::vector<std::pair<NodeId, Timestamp>> direct;
    std::vector<Arc> arcs;
    std::vector<ShortestTransition> found;
  };
  std::vector<Worker> pool(workers);
  for (auto& w : pool) {
    w.ea.assign(n, kNever);
    w.fresh.assign(n, kNever);
    w.next_direct.assign(n, kNever);
  }

  detail::parallel_for(workers, n, [&](unsigned wi, std::size_t ci) {
    auto& w = pool[wi];
    const auto c = static_cast<NodeId>(ci);
    std::fill(w.ea.begin(), w.ea.end(), kNever);
    std::fill(w.next_direct.begin(), w.next_direct.end(), kNever);
    std::size_t end = ev.size();
    while (end > 0) {
      const Timestamp t = ev[end - 1].t;
      std::size_t begin = end;
      while (begin > 0 && ev[begin - 1].t == t) --begin;
      w.arcs.clear();
      for (std::size_t i = begin; i < end; ++i) {
        w.arcs.push_back({ev[i].u, ev[i].v});
        if (!s.directed()) w.arcs.push_back({ev[i].v, ev[i].u});
      }
      // ea holds arrivals for departures > t; fresh collects departures at t.
      w.improved.clear();
      w.direct.clear();
      for (const auto& arc : w.arcs) {
        if (arc.src == c) continue;
        const Timestamp arr = arc.dst == c ? t : w.ea[arc.dst];
        if (arc.dst == c) w.direct.emplace_back(arc.src, t);
        if (arr == kNever) continue;
        if (w.fresh[arc.src] == kNever) w.improved.push_back(arc.src);
        w.fresh[arc.src] = std::min(w.fresh[arc.src], arr);
      }
      for (const auto& arc : w.arcs) {
        const NodeId a = arc.src, b = arc.dst;
        if (a == c || b == c) continue;
        const Timestamp t2 = w.next_direct[b];
        if (t2 == kNever) continue;
        const Timestamp ea_from = std::min(w.ea[a], w.fresh[a]);
        if (ea_from == t2 && w.ea[a] > t2) w.found.push_back({a, b, c, t, t2});
      }
      for (NodeId x : w.improved) {
        w.ea[x] = std::min(w.ea[x], w.fresh[x]);
        w.fresh[x] = kNever;
      }
      for (const auto& [x, time] : w.direct) w.next_direct[x] = time;
      end = begin;
    }
  });

  std::vector<ShortestTransition> all;
  for (auto& w : pool) all.insert(all.end(), w.found.begin(), w.found.end());
  std::sort(all.begin(), all.end());
  return all;
}

/// Fraction of shortest transitions whose two events share a window of the
/// K-window aggregation; nullopt when there is no transition at all.
inline std::optional<double> lost_fraction(const std::vector<ShortestTransition>& transitions,
                                           const WindowLength& window) {
  if (transitions.empty()) return std::nullopt;
  std::size_t lost = 0;
  for (const auto& tr : transitions)
    if (window.snapshot_of(tr.t1) == window.snapshot_of(tr.t2)) ++lost;
  return static_cast<double>(lost) / static_cast<double>(transitions.size());
}

struct ElongationOptions {
  /// Below this many eligible trips every one is measured.
  std::uint64_t full_limit = 1'000'000;
  /// Sample size otherwise.
  std::uint64_t samples = 100'000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct ElongationResult {
  std::uint64_t eligible_trips = 0;  // minimal trips with t_dep != t_arr
  std::uint64_t measured = 0;
  bool subsampled = false;
  std::optional<double> mean;  // unset when nothing was eligible
  double min_factor = std::numeric_limits<double>::infinity();
  double max_factor = 0;
};

/// e_P = (t_arr - t_dep + 1) * window / time_L(P) where time_L(P) is the
/// fastest stream path from u to v among the events of snapshots
/// t_dep..t_arr. Throws std::logic_error if some factor falls below 1.
inline ElongationResult mean_elongation(const LinkStream& s, const GraphSeries& g,
                                        const ElongationOptions& opt = {}) {
  const auto& window = g.window();
  const std::size_t n = g.node_count();
  const unsigned workers = detail::worker_count(opt.threads, n);

  // Eligible trips per destination column, to index them globally.
  std::vector<std::uint64_t> per_dest(n, 0);
  {
    std::vector<ColumnSweeper> sweepers;
    for (unsigned w = 0; w < workers; ++w) sweepers.emplace_back(g);
    std::vector<DistanceAggregates> unused(workers);
    detail::parallel_for(workers, n, [&](unsigned w, std::size_t v) {
      std::uint64_t count = 0;
      sweepers[w].run(
          static_cast<NodeId>(v), [&](const MinimalTrip& p) { count += p.t_dep != p.t_arr; },
          unused[w]);
      per_dest[v] = count;
    });
  }
  std::vector<std::uint64_t> offset(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) offset[v + 1] = offset[v] + per_dest[v];

  ElongationResult result;
  result.eligible_trips = offset[n];
  if (result.eligible_trips == 0) return result;

  // Sorted global indices of trips to measure (Floyd's sampling when large).
  std::vector<std::uint64_t> chosen;
  result.subsampled = result.eligible_trips > opt.full_limit && opt.samples < result.eligible_trips;
  if (result.subsampled) {
    std::mt19937_64 rng(opt.seed);
    std::unordered_set<std::uint64_t> pick;
    const std::uint64_t N = result.eligible_trips;
    for (std::uint64_t j = N - opt.samples; j < N; ++j) {
      const std::uint64_t r = std::uniform_int_distribution<std::uint64_t>(0, j)(rng);
      if (!pick.insert(r).second) pick.insert(j);
    }
    chosen.assign(pick.begin(), pick.end());
    std::sort(chosen.begin(), chosen.end());
  }

  std::vector<ColumnSweeper> sweepers;
  std::vector<StreamArrivalScanner> scanners;
  for (unsigned w = 0; w < workers; ++w) {
    sweepers.emplace_back(g);
    scanners.emplace_back(s);
  }
  std::vector<DistanceAggregates> unused(workers);
  std::vector<std::vector<double>> factors(n);

  detail::parallel_for(workers, n, [&](unsigned w, std::size_t v) {
    if (per_dest[v] == 0) return;
    std::uint64_t index = offset[v];
    auto pick = result.subsampled ? std::lower_bound(chosen.begin(), chosen.end(), index)
                                  : chosen.end();
    auto& out = factors[v];
    sweepers[w].run(
        static_cast<NodeId>(v),
        [&](const MinimalTrip& p) {
          if (p.t_dep == p.t_arr) return;
          const std::uint64_t my = index++;
          if (result.subsampled) {
            if (pick == chosen.end() || *pick != my) return;
            ++pick;
          }
          const Timestamp lo = window.window_begin(p.t_dep);
          const Timestamp hi = window.window_end(p.t_arr) - 1;
          const auto fastest = scanners[w].fastest(p.u, p.v, lo, hi);
          if (!fastest || fastest->duration() <= 0)
            throw std::logic_error("series trip without a non-instant stream realization");
          const long double span = static_cast<long double>(p.duration()) * window.horizon /
                                   window.count;
          out.push_back(static_cast<double>(span / fastest->duration()));
        },
        unused[w]);
  });

  // Summed in destination order so the result is thread-count independent.
  long double sum = 0;
  for (const auto& col : factors)
    for (double f : col) {
      if (f < 1.0) throw std::logic_error("elongation factor below 1");
      sum += f;
      ++result.measured;
      result.min_factor = std::min(result.min_factor, f);
      result.max_factor = std::max(result.max_factor, f);
    }
  if (result.measured > 0) result.mean = static_cast<double>(sum / result.measured);
  return result;
}

}  // namespace satscale
