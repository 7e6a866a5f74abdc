#pragma once

// Seeded synthetic link streams: time-uniform and two-mode (alternating high
// and low activity) networks.
//
// Randomness comes from std::mt19937_64, whose output sequence is fixed by
// the standard; bounded draws use our own rejection sampling so streams are
// identical across standard library implementations.

#include <cstdint>
#include <iostream>
#include <limits>
#include <random>
#include <unordered_set>
#include <vector>

#include "satscale/link_stream.hpp"

namespace satscale {

struct UniformSpec {
  std::size_t n = 100;
  std::uint64_t links_per_pair = 10;  // N
  Timestamp horizon = 100'000;        // T
  std::uint64_t seed = 1;
  bool directed = false;
};

struct TwoModeSpec {
  std::size_t n = 100;
  std::uint64_t n1 = 10;  // links per pair in each high-activity segment
  Timestamp t1 = 5'000;
  std::uint64_t n2 = 1;  // links per pair in each low-activity segment
  Timestamp t2 = 5'000;
  int alternations = 10;
  std::uint64_t seed = 1;
  bool directed = false;

  Timestamp horizon() const { return alternations * (t1 + t2); }
  /// Share of low-activity time.
  double rho() const { return static_cast<double>(t2) / static_cast<double>(t1 + t2); }
};

namespace detail {

/// Uniform integer in [0, bound) from raw 64-bit draws (rejection sampling).
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

// Appends `count` distinct timestamps in [offset, offset + length) for every
// pair; collisions are re-drawn so counts are exact.
inline void fill_segment(std::vector<Event>& out, std::size_t n, bool directed,
                         std::uint64_t count, Timestamp offset, Timestamp length,
                         std::mt19937_64& rng) {
  if (count == 0 || length == 0) return;
  if (count > static_cast<std::uint64_t>(length))
    throw Error("more links per pair than timestamps in the segment");
  std::unordered_set<Timestamp> used;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = directed ? 0 : u + 1; v < n; ++v) {
      if (u == v) continue;
      used.clear();
      while (used.size() < count) {
        const auto t = offset + static_cast<Timestamp>(
                                    uniform_below(rng, static_cast<std::uint64_t>(length)));
        if (used.insert(t).second) out.push_back({u, v, t});
      }
    }
  }
}

inline void check_nodes(std::size_t n) {
  if (n < 2) throw Error("need at least 2 nodes");
}

}  // namespace detail

/// N links per pair (ordered pair when directed), timestamps uniform in [0, T).
inline LinkStream gen_uniform(const UniformSpec& spec) {
  detail::check_nodes(spec.n);
  if (spec.links_per_pair < 1) throw Error("links per pair must be >= 1");
  if (spec.horizon < 1) throw Error("horizon must be >= 1");
  if (spec.links_per_pair * 10 > static_cast<std::uint64_t>(spec.horizon))
    std::cerr << "warning: links per pair exceeds a tenth of the horizon\n";
  std::mt19937_64 rng(spec.seed);
  std::vector<Event> events;
  detail::fill_segment(events, spec.n, spec.directed, spec.links_per_pair, 0, spec.horizon, rng);
  return LinkStream::from_events(std::move(events), spec.n, spec.horizon, spec.directed);
}

/// `alternations` blocks, each a high segment (n1 links per pair within t1)
/// followed by a low segment (n2 links per pair within t2). Zero-length
/// segments receive no links.
inline LinkStream gen_two_mode(const TwoModeSpec& spec) {
  detail::check_nodes(spec.n);
  if (spec.alternations < 1) throw Error("alternations must be >= 1");
  if (spec.t1 < 0 || spec.t2 < 0 || spec.t1 + spec.t2 == 0)
    throw Error("segment lengths must be non-negative and not both zero");
  std::mt19937_64 rng(spec.seed);
  std::vector<Event> events;
  Timestamp offset = 0;
  for (int block = 0; block < spec.alternations; ++block) {
    detail::fill_segment(events, spec.n, spec.directed, spec.n1, offset, spec.t1, rng);
    offset += spec.t1;
    detail::fill_segment(events, spec.n, spec.directed, spec.n2, offset, spec.t2, rng);
    offset += spec.t2;
  }
  if (events.empty()) throw Error("two-mode specification produces no links");
  return LinkStream::from_events(std::move(events), spec.n, spec.horizon(), spec.directed);
}

}  // namespace satscale
