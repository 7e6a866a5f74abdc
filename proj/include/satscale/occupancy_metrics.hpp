#pragma once

// Spread metrics of occupancy-rate distributions on [0, 1] and selection of
// the saturation scale.
//
// Metrics act on a RateLaw: a finite mixture of atoms at exact rationals and
// uniform-density pieces. Its inverse cumulative distribution
// ICD(l) = P(X > l) is piecewise linear between breakpoints, so every
// integral below is evaluated in closed form segment by segment.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "satscale/reach.hpp"

namespace satscale {

class RateLaw {
 public:
  struct Atom {
    Rational at;
    double weight;
  };
  struct Piece {
    double lo, hi;  // uniform density on [lo, hi], 0 <= lo < hi <= 1
    double weight;
  };

  RateLaw() = default;

  static RateLaw from(const OccupancyDistribution& dist) {
    RateLaw law;
    for (const auto& e : dist.entries())
      law.add_atom(occupancy_rate(e.hops, e.duration), static_cast<double>(e.count));
    return law;
  }
  static RateLaw uniform() {
    RateLaw law;
    law.add_piece(0.0, 1.0, 1.0);
    return law;
  }

  RateLaw& add_atom(Rational at, double weight) {
    if (at.num <= 0 || at.num > at.den) throw Error("atom outside (0, 1]");
    if (!(weight > 0)) throw Error("atom weight must be positive");
    atoms_.push_back({at, weight});
    sorted_ = false;
    total_ += weight;
    return *this;
  }
  RateLaw& add_piece(double lo, double hi, double weight) {
    if (!(0.0 <= lo && lo < hi && hi <= 1.0)) throw Error("piece outside [0, 1]");
    if (!(weight > 0)) throw Error("piece weight must be positive");
    pieces_.push_back({lo, hi, weight});
    total_ += weight;
    return *this;
  }

  bool empty() const noexcept { return total_ <= 0; }
  double total_weight() const noexcept { return total_; }

  /// Atoms merged by value, in increasing order.
  const std::vector<Atom>& atoms() const {
    if (!sorted_) {
      std::sort(atoms_.begin(), atoms_.end(),
                [](const Atom& a, const Atom& b) { return a.at < b.at; });
      std::vector<Atom> merged;
      for (const auto& a : atoms_) {
        if (!merged.empty() && merged.back().at == a.at)
          merged.back().weight += a.weight;
        else
          merged.push_back(a);
      }
      atoms_ = std::move(merged);
      sorted_ = true;
    }
    return atoms_;
  }
  const std::vector<Piece>& pieces() const noexcept { return pieces_; }

 private:
  mutable std::vector<Atom> atoms_;
  mutable bool sorted_ = true;
  std::vector<Piece> pieces_;
  double total_ = 0;
};

namespace detail {

inline void require_nonempty(const RateLaw& law) {
  if (law.empty()) throw Error("empty occupancy distribution");
}

/// Segment [a, b] on which ICD(l) = c - s*l.
struct IcdSegment {
  double a, b, c, s;
};

inline std::vector<IcdSegment> icd_segments(const RateLaw& law) {
  const auto& atoms = law.atoms();
  const double W = law.total_weight();
  std::vector<double> cuts{0.0, 1.0};
  for (const auto& a : atoms) cuts.push_back(a.at.value());
  for (const auto& p : law.pieces()) {
    cuts.push_back(p.lo);
    cuts.push_back(p.hi);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  // Mass of atoms strictly above the left end of each segment.
  double atoms_above = 0;
  for (const auto& a : atoms) atoms_above += a.weight;
  std::size_t next_atom = 0;

  std::vector<IcdSegment> segs;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    while (next_atom < atoms.size() && atoms[next_atom].at.value() <= a)
      atoms_above -= atoms[next_atom++].weight;
    // On (a, b): ICD(l) = atoms_above + sum over pieces of w*(hi - l)/(hi - lo)
    // for pieces covering the segment, + w for pieces entirely to the right.
    double c = atoms_above, s = 0;
    for (const auto& p : law.pieces()) {
      if (p.lo >= b) {
        c += p.weight;
      } else if (p.lo <= a && p.hi >= b) {
        const double density = p.weight / (p.hi - p.lo);
        c += density * p.hi;
        s += density;
      }
    }
    segs.push_back({a, b, c / W, s / W});
  }
  return segs;
}

// Integral over [a, b] of |alpha + beta*l|.
inline double abs_linear_integral(double a, double b, double alpha, double beta) {
  auto prim = [&](double l) { return alpha * l + beta * l * l / 2; };
  const auto val = [&](double l) { return alpha + beta * l; };
  if (beta != 0) {
    const double root = -alpha / beta;
    if (root > a && root < b)
      return std::abs(prim(root) - prim(a)) + std::abs(prim(b) - prim(root));
  }
  const double mid = val((a + b) / 2);
  return (mid >= 0 ? 1.0 : -1.0) * (prim(b) - prim(a));
}

inline double xlogx(double x) { return x > 0 ? x * std::log(x) : 0.0; }

// Integral over [a, b] of p ln p with p(l) = c - s*l >= 0.
inline double plogp_integral(double a, double b, double c, double s) {
  if (s == 0) return (b - a) * xlogx(c);
  // d/dl F(p(l)) = -s * p ln p for F(p) = p^2 ln p / 2 - p^2 / 4.
  auto F = [](double p) { return p > 0 ? p * p * std::log(p) / 2 - p * p / 4 : 0.0; };
  const double pa = std::max(0.0, c - s * a), pb = std::max(0.0, c - s * b);
  return (F(pb) - F(pa)) / -s;
}

}  // namespace detail

/// P(X > lambda).
inline double icd(const RateLaw& law, double lambda) {
  detail::require_nonempty(law);
  double above = 0;
  for (const auto& a : law.atoms())
    if (a.at.value() > lambda) above += a.weight;
  for (const auto& p : law.pieces()) {
    if (lambda < p.lo)
      above += p.weight;
    else if (lambda < p.hi)
      above += p.weight * (p.hi - lambda) / (p.hi - p.lo);
  }
  return above / law.total_weight();
}

/// Area between the ICD and the uniform reference 1 - lambda; in [0, 1/2].
inline double mk_distance(const RateLaw& law) {
  detail::require_nonempty(law);
  double area = 0;
  for (const auto& g : detail::icd_segments(law))
    area += detail::abs_linear_integral(g.a, g.b, g.c - 1.0, 1.0 - g.s);
  return area;
}

inline double mk_proximity(const RateLaw& law) { return 0.5 - mk_distance(law); }

inline double mean(const RateLaw& law) {
  detail::require_nonempty(law);
  double m = 0;
  for (const auto& a : law.atoms()) m += a.weight * a.at.value();
  for (const auto& p : law.pieces()) m += p.weight * (p.lo + p.hi) / 2;
  return m / law.total_weight();
}

/// Population standard deviation.
inline double std_dev(const RateLaw& law) {
  const double mu = mean(law);
  double var = 0;
  for (const auto& a : law.atoms()) {
    const double d = a.at.value() - mu;
    var += a.weight * d * d;
  }
  for (const auto& p : law.pieces()) {
    // E[(X - mu)^2] for X uniform on [lo, hi].
    const double lo = p.lo - mu, hi = p.hi - mu;
    var += p.weight * (lo * lo + lo * hi + hi * hi) / 3;
  }
  return std::sqrt(std::max(0.0, var / law.total_weight()));
}

inline double variation_coeff(const RateLaw& law) { return std_dev(law) / mean(law); }

/// Slot masses over ((i-1)/k, i/k], i = 1..k.
inline std::vector<double> slot_masses(const RateLaw& law, int slots) {
  if (slots < 2) throw Error("Shannon entropy needs at least 2 slots");
  detail::require_nonempty(law);
  std::vector<double> mass(static_cast<std::size_t>(slots), 0.0);
  for (const auto& a : law.atoms()) {
    // smallest i with num/den <= i/k
    const auto i = (static_cast<__int128>(a.at.num) * slots + a.at.den - 1) / a.at.den;
    mass[static_cast<std::size_t>(i - 1)] += a.weight;
  }
  for (const auto& p : law.pieces()) {
    for (int i = 0; i < slots; ++i) {
      const double lo = std::max(p.lo, static_cast<double>(i) / slots);
      const double hi = std::min(p.hi, static_cast<double>(i + 1) / slots);
      if (hi > lo) mass[static_cast<std::size_t>(i)] += p.weight * (hi - lo) / (p.hi - p.lo);
    }
  }
  for (auto& m : mass) m /= law.total_weight();
  return mass;
}

/// Shannon entropy (natural log) of the slotted distribution.
inline double shannon_entropy(const RateLaw& law, int slots) {
  double h = 0;
  for (double p : slot_masses(law, slots)) h -= detail::xlogx(p);
  return h;
}

/// Cumulative residual entropy -int_0^1 P(X > l) ln P(X > l) dl.
inline double cre(const RateLaw& law) {
  detail::require_nonempty(law);
  double e = 0;
  for (const auto& g : detail::icd_segments(law)) e -= detail::plogp_integral(g.a, g.b, g.c, g.s);
  return e;
}

// Convenience overloads on the exact distribution.
inline double icd(const OccupancyDistribution& d, double l) { return icd(RateLaw::from(d), l); }
inline double mk_distance(const OccupancyDistribution& d) { return mk_distance(RateLaw::from(d)); }
inline double mk_proximity(const OccupancyDistribution& d) { return mk_proximity(RateLaw::from(d)); }
inline double std_dev(const OccupancyDistribution& d) { return std_dev(RateLaw::from(d)); }
inline double variation_coeff(const OccupancyDistribution& d) {
  return variation_coeff(RateLaw::from(d));
}
inline double shannon_entropy(const OccupancyDistribution& d, int slots) {
  return shannon_entropy(RateLaw::from(d), slots);
}
inline double cre(const OccupancyDistribution& d) { return cre(RateLaw::from(d)); }

/// (lambda, ICD(lambda)) at 0, at every distinct rate and at 1.
inline std::vector<std::pair<Rational, double>> icd_points(const OccupancyDistribution& d) {
  const auto law = RateLaw::from(d);
  detail::require_nonempty(law);
  std::vector<std::pair<Rational, double>> out;
  double above = law.total_weight();
  out.emplace_back(Rational{0, 1}, 1.0);
  for (const auto& a : law.atoms()) {
    above -= a.weight;
    out.emplace_back(a.at, std::max(0.0, above / law.total_weight()));
  }
  if (!(out.back().first == Rational{1, 1})) out.emplace_back(Rational{1, 1}, 0.0);
  return out;
}

enum class MetricKind { mk, stddev, cv, shannon, cre };

struct Metric {
  MetricKind kind = MetricKind::mk;
  int slots = 10;  // shannon only

  std::string name() const {
    switch (kind) {
      case MetricKind::mk: return "mk";
      case MetricKind::stddev: return "stddev";
      case MetricKind::cv: return "cv";
      case MetricKind::shannon: return "shannon:" + std::to_string(slots);
      case MetricKind::cre: return "cre";
    }
    return "?";
  }

  /// Parses "mk", "stddev", "cv", "cre", "shannon" or "shannon:<k>".
  static Metric parse(std::string_view s) {
    if (s == "mk") return {MetricKind::mk};
    if (s == "stddev") return {MetricKind::stddev};
    if (s == "cv") return {MetricKind::cv};
    if (s == "cre") return {MetricKind::cre};
    if (s == "shannon") return {MetricKind::shannon, 10};
    if (s.starts_with("shannon:")) {
      auto k = detail::parse_int(s.substr(8));
      if (!k || *k < 2 || *k > 100) throw Error("shannon slots must be in [2, 100]");
      return {MetricKind::shannon, static_cast<int>(*k)};
    }
    throw Error("unknown metric '" + std::string(s) + "'");
  }

  /// Score to maximize: M-K proximity for mk, the metric itself otherwise.
  double score(const RateLaw& law) const {
    switch (kind) {
      case MetricKind::mk: return mk_proximity(law);
      case MetricKind::stddev: return std_dev(law);
      case MetricKind::cv: return variation_coeff(law);
      case MetricKind::shannon: return shannon_entropy(law, slots);
      case MetricKind::cre: return cre(law);
    }
    return 0;
  }

  friend bool operator==(const Metric&, const Metric&) = default;
};

inline std::vector<Metric> all_metrics(int shannon_slots = 10) {
  return {{MetricKind::mk}, {MetricKind::stddev}, {MetricKind::cv},
          {MetricKind::shannon, shannon_slots}, {MetricKind::cre}};
}

struct CurvePoint {
  std::int64_t count = 1;  // K
  double delta_s = 0;
  double score = 0;
};

/// Index of the maximum score; exact ties go to the smaller window length.
inline std::size_t select_gamma(const std::vector<CurvePoint>& curve) {
  if (curve.empty()) throw Error("empty metric curve");
  std::size_t best = 0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    const auto& c = curve[i];
    const auto& b = curve[best];
    if (c.score > b.score || (c.score == b.score && c.count > b.count)) best = i;
  }
  return best;
}

}  // namespace satscale
