#pragma once

// Classical per-snapshot statistics of a graph series: density, degree,
// connectedness and temporal distances.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "satscale/aggregate.hpp"
#include "satscale/reach.hpp"

namespace satscale {

struct SnapshotStats {
  double mean_density = 0;
  double mean_degree = 0;
  double mean_largest_cc = 0;
  double mean_non_isolated = 0;
};

struct DistanceStats {
  double mean_d_time = 0;      // snapshots
  double mean_d_hops = 0;
  double mean_d_time_abs = 0;  // seconds
  double finite_pair_fraction = 0;
};

struct ClassicStats {
  SnapshotStats snapshots;
  DistanceStats distances;
};

namespace detail {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), NodeId{0});
  }
  NodeId find(NodeId x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  std::uint32_t unite(NodeId a, NodeId b) {
    a = find(a);
    b = find(b);
    if (a == b) return size_[a];
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    return size_[a] += size_[b];
  }
  void reset(NodeId x) {
    parent_[x] = x;
    size_[x] = 1;
  }

 private:
  std::vector<NodeId> parent_;
  std::vector<std::uint32_t> size_;
};

}  // namespace detail

/// Averages over all K snapshots, empty ones included (an empty snapshot has
/// density 0, largest component 1 and no non-isolated node). Components of
/// directed snapshots are weak.
inline SnapshotStats snapshot_stats(const GraphSeries& g) {
  const double n = static_cast<double>(g.node_count());
  const double K = static_cast<double>(g.snapshot_count());
  const double pairs = g.directed() ? n * (n - 1) : n * (n - 1) / 2;

  detail::UnionFind uf(g.node_count());
  std::vector<NodeId> nodes;
  double sum_cc = 0, sum_active = 0;
  for (std::size_t i = 0; i < g.active_count(); ++i) {
    const auto arcs = g.active_arcs(i);
    nodes.clear();
    std::uint32_t largest = 1;
    for (const auto& a : arcs) {
      nodes.push_back(a.src);
      nodes.push_back(a.dst);
      largest = std::max(largest, uf.unite(a.src, a.dst));
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    sum_cc += largest;
    sum_active += static_cast<double>(nodes.size());
    for (NodeId x : nodes) uf.reset(x);
  }
  const double empty = K - static_cast<double>(g.active_count());

  SnapshotStats r;
  r.mean_density = pairs > 0 ? static_cast<double>(g.total_edges()) / (K * pairs) : 0.0;
  r.mean_degree = r.mean_density * (n - 1);
  r.mean_largest_cc = (sum_cc + empty) / K;
  r.mean_non_isolated = sum_active / K;
  return r;
}

/// Means of d_time, d_hops and d_time_abs = window * d_time over finite
/// (u, v, k) triples, from the sums accumulated by minimal_trip_sweep.
inline DistanceStats distance_stats(const DistanceAggregates& agg, const WindowLength& window) {
  DistanceStats r;
  if (agg.finite_triples > 0) {
    const auto finite = static_cast<long double>(agg.finite_triples);
    r.mean_d_time = static_cast<double>(static_cast<long double>(agg.sum_d_time) / finite);
    r.mean_d_hops = static_cast<double>(static_cast<long double>(agg.sum_d_hops) / finite);
    r.mean_d_time_abs = static_cast<double>(static_cast<long double>(agg.sum_d_time) *
                                            window.horizon * window.resolution /
                                            window.count / finite);
  }
  if (agg.total_triples > 0)
    r.finite_pair_fraction = static_cast<double>(agg.finite_triples) /
                             static_cast<double>(agg.total_triples);
  return r;
}

inline DistanceStats distance_stats(const GraphSeries& g, const SweepOptions& opt = {}) {
  return distance_stats(minimal_trip_sweep(g, opt).distances, g.window());
}

}  // namespace satscale
