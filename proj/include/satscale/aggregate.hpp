#pragma once

// Aggregation of a link stream into a series of K snapshot graphs over
// disjoint windows of equal length T/K, and the sweep grid of window counts.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "satscale/link_stream.hpp"

namespace satscale {

/// 1-based snapshot index; kUnreachable doubles as "no snapshot".
using SnapshotIndex = std::uint32_t;
inline constexpr SnapshotIndex kUnreachable = std::numeric_limits<SnapshotIndex>::max();

/// Window length T/K kept as an exact ratio.
struct WindowLength {
  Timestamp horizon = 1;  // resolution units
  std::int64_t count = 1;  // K
  Timestamp resolution = 1;

  double units() const { return static_cast<double>(horizon) / static_cast<double>(count); }
  double seconds() const { return units() * static_cast<double>(resolution); }

  /// First timestamp (resolution units) that falls in snapshot k.
  Timestamp window_begin(std::int64_t k) const {
    const auto num = static_cast<__int128>(k - 1) * horizon;
    return static_cast<Timestamp>((num + count - 1) / count);
  }
  /// One past the last timestamp that falls in snapshot k.
  Timestamp window_end(std::int64_t k) const { return window_begin(k + 1); }
  /// Snapshot containing timestamp t.
  std::int64_t snapshot_of(Timestamp t) const {
    return static_cast<std::int64_t>(static_cast<__int128>(t) * count / horizon) + 1;
  }
};

/// Directed arc of a snapshot; undirected edges are stored as two arcs.
struct Arc {
  NodeId src = 0;
  NodeId dst = 0;

  friend bool operator==(const Arc&, const Arc&) = default;
  friend auto operator<=>(const Arc&, const Arc&) = default;
};

/// Aggregated graph series. Only non-empty snapshots are materialized; each
/// holds its arcs sorted by (src, dst) without duplicates.
class GraphSeries {
 public:
  SnapshotIndex snapshot_count() const noexcept { return static_cast<SnapshotIndex>(window_.count); }
  std::size_t node_count() const noexcept { return node_count_; }
  bool directed() const noexcept { return directed_; }
  const WindowLength& window() const noexcept { return window_; }

  /// Number of non-empty snapshots.
  std::size_t active_count() const noexcept { return active_.size(); }
  SnapshotIndex active_index(std::size_t i) const { return active_[i]; }
  std::span<const Arc> active_arcs(std::size_t i) const {
    return {arcs_.data() + offsets_[i], arcs_.data() + offsets_[i + 1]};
  }
  std::size_t active_edge_count(std::size_t i) const { return edge_counts_[i]; }

  /// Arcs of snapshot k (1-based); empty when nothing happened in the window.
  std::span<const Arc> arcs(SnapshotIndex k) const {
    auto it = std::lower_bound(active_.begin(), active_.end(), k);
    if (it == active_.end() || *it != k) return {};
    return active_arcs(static_cast<std::size_t>(it - active_.begin()));
  }
  std::size_t edge_count(SnapshotIndex k) const {
    auto it = std::lower_bound(active_.begin(), active_.end(), k);
    if (it == active_.end() || *it != k) return 0;
    return edge_counts_[static_cast<std::size_t>(it - active_.begin())];
  }

  /// M: sum over snapshots of the number of distinct edges.
  std::size_t total_edges() const noexcept { return total_edges_; }

  friend GraphSeries aggregate(const LinkStream& s, std::int64_t K);

 private:
  std::size_t node_count_ = 0;
  bool directed_ = false;
  WindowLength window_;
  std::vector<SnapshotIndex> active_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Arc> arcs_;
  std::vector<std::size_t> edge_counts_;
  std::size_t total_edges_ = 0;
};

/// Buckets event (u, v, t) into snapshot floor(t*K/T) + 1.
inline GraphSeries aggregate(const LinkStream& s, std::int64_t K) {
  if (K < 1 || K > s.horizon())
    throw Error("window count K=" + std::to_string(K) + " outside [1, " +
                std::to_string(s.horizon()) + "]");
  if (K > std::numeric_limits<SnapshotIndex>::max() - 2)
    throw Error("window count too large for snapshot indices");

  GraphSeries g;
  g.node_count_ = s.node_count();
  g.directed_ = s.directed();
  g.window_ = {s.horizon(), K, s.resolution()};

  const auto& events = s.events();
  std::vector<Arc> bucket;
  std::size_t i = 0;
  while (i < events.size()) {
    const auto k = g.window_.snapshot_of(events[i].t);
    const Timestamp end = g.window_.window_end(k);
    bucket.clear();
    for (; i < events.size() && events[i].t < end; ++i) {
      bucket.push_back({events[i].u, events[i].v});
      if (!s.directed()) bucket.push_back({events[i].v, events[i].u});
    }
    std::sort(bucket.begin(), bucket.end());
    bucket.erase(std::unique(bucket.begin(), bucket.end()), bucket.end());
    const std::size_t edges = s.directed() ? bucket.size() : bucket.size() / 2;
    g.active_.push_back(static_cast<SnapshotIndex>(k));
    g.arcs_.insert(g.arcs_.end(), bucket.begin(), bucket.end());
    g.offsets_.push_back(g.arcs_.size());
    g.edge_counts_.push_back(edges);
    g.total_edges_ += edges;
  }
  return g;
}

struct GridPoint {
  std::int64_t count = 1;  // K
  WindowLength window;
};

/// Window counts for a sweep, K strictly decreasing (Δ increasing).
using DeltaGrid = std::vector<GridPoint>;

/// `points` log-spaced window lengths between one resolution unit and the
/// horizon, mapped to K = round(T/Δ), deduplicated, endpoints always present.
inline DeltaGrid delta_grid(const LinkStream& s, int points) {
  if (points < 2) throw Error("grid needs at least 2 points");
  const Timestamp T = s.horizon();
  std::vector<std::int64_t> ks{T, 1};
  const double log_T = std::log(static_cast<double>(T));
  for (int i = 0; i < points; ++i) {
    const double delta = std::exp(log_T * i / (points - 1));
    auto k = static_cast<std::int64_t>(std::llround(static_cast<double>(T) / delta));
    ks.push_back(std::clamp<std::int64_t>(k, 1, T));
  }
  std::sort(ks.begin(), ks.end(), std::greater<>());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  DeltaGrid grid;
  for (auto k : ks) grid.push_back({k, {T, k, s.resolution()}});
  return grid;
}

/// Explicit K list, validated and ordered like delta_grid.
inline DeltaGrid k_list_grid(const LinkStream& s, std::vector<std::int64_t> ks) {
  if (ks.empty()) throw Error("empty K list");
  for (auto k : ks)
    if (k < 1 || k > s.horizon())
      throw Error("window count K=" + std::to_string(k) + " outside [1, " +
                  std::to_string(s.horizon()) + "]");
  std::sort(ks.begin(), ks.end(), std::greater<>());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  DeltaGrid grid;
  for (auto k : ks) grid.push_back({k, {s.horizon(), k, s.resolution()}});
  return grid;
}

}  // namespace satscale
