#pragma once

// Window-length sweep: aggregate, compute minimal trips and score the
// occupancy distribution at every grid point, then pick gamma per metric.
// Also serializes sweep and validation results as JSON and CSV.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "satscale/aggregate.hpp"
#include "satscale/classic.hpp"
#include "satscale/link_stream.hpp"
#include "satscale/occupancy_metrics.hpp"
#include "satscale/reach.hpp"
#include "satscale/validate.hpp"

namespace satscale {

inline constexpr const char* kVersion = "1.0.0";

struct InputDescriptor {
  std::string path;
  std::string format;
  bool directed = false;
  std::size_t node_count = 0;
  std::size_t event_count = 0;
  std::size_t raw_event_count = 0;
  Timestamp horizon = 0;
  Timestamp resolution = 1;

  static InputDescriptor of(const LinkStream& s, std::string path = {}, std::string format = {}) {
    return {std::move(path), std::move(format), s.directed(), s.node_count(),
            s.event_count(), s.stats().raw_events, s.horizon(), s.resolution()};
  }
};

struct SweepConfig {
  DeltaGrid grid;
  int shannon_slots = 10;
  bool classic = false;
  unsigned threads = 1;
  /// ICD sampled at lambda = i / icd_samples, i = 0..icd_samples.
  int icd_samples = 20;
  /// Called after each grid point with (index, count).
  std::function<void(std::size_t, std::size_t)> progress;
};

struct GridEntry {
  std::int64_t count = 1;  // K
  double delta_s = 0;
  std::uint64_t trip_count = 0;
  std::vector<std::pair<double, double>> icd;  // (lambda, P(X > lambda))
  std::map<std::string, double> scores;        // metric name -> score
  std::optional<ClassicStats> classic;
};

struct GammaChoice {
  std::size_t index = 0;
  std::int64_t count = 1;
  double delta_s = 0;
};

struct SweepReport {
  InputDescriptor input;
  std::vector<std::string> metrics;  // metric names, report order
  std::vector<GridEntry> entries;    // Δ increasing
  std::map<std::string, GammaChoice> gamma;

  std::vector<CurvePoint> curve(const std::string& metric) const {
    std::vector<CurvePoint> c;
    for (const auto& e : entries) c.push_back({e.count, e.delta_s, e.scores.at(metric)});
    return c;
  }
};

/// Runs the occupancy method on every grid point. Grid points whose series
/// has no minimal trip at all abort the run.
inline SweepReport run_sweep(const LinkStream& s, const SweepConfig& cfg,
                             InputDescriptor input = {}) {
  if (cfg.grid.empty()) throw Error("empty grid");
  SweepReport report;
  report.input = input.node_count ? std::move(input) : InputDescriptor::of(s);
  const auto metrics = all_metrics(cfg.shannon_slots);
  for (const auto& m : metrics) report.metrics.push_back(m.name());

  // Δ increasing = K decreasing.
  DeltaGrid grid = cfg.grid;
  std::sort(grid.begin(), grid.end(),
            [](const GridPoint& a, const GridPoint& b) { return a.count > b.count; });

  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& point = grid[i];
    const auto series = aggregate(s, point.count);
    auto sweep = minimal_trip_sweep(series, {.threads = cfg.threads});
    if (sweep.occupancy.empty())
      throw Error("no minimal trip at K=" + std::to_string(point.count));
    const auto law = RateLaw::from(sweep.occupancy);

    GridEntry e;
    e.count = point.count;
    e.delta_s = point.window.seconds();
    e.trip_count = sweep.occupancy.total();
    for (int j = 0; j <= cfg.icd_samples; ++j) {
      const double l = static_cast<double>(j) / cfg.icd_samples;
      e.icd.emplace_back(l, icd(law, l));
    }
    for (const auto& m : metrics) e.scores[m.name()] = m.score(law);
    if (cfg.classic)
      e.classic = ClassicStats{snapshot_stats(series),
                               distance_stats(sweep.distances, series.window())};
    report.entries.push_back(std::move(e));
    if (cfg.progress) cfg.progress(i, grid.size());
  }
  for (const auto& m : metrics) {
    const auto c = report.curve(m.name());
    const auto best = select_gamma(c);
    report.gamma[m.name()] = {best, c[best].count, c[best].delta_s};
  }
  return report;
}

// ---------------------------------------------------------------------------
// Serialization. Floating-point values carry 12 significant digits.

inline double round12(double x) {
  if (!std::isfinite(x)) return x;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

inline std::string fmt12(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline nlohmann::ordered_json to_json(const InputDescriptor& in) {
  return {{"path", in.path},
          {"format", in.format},
          {"directed", in.directed},
          {"nodes", in.node_count},
          {"events", in.event_count},
          {"raw_events", in.raw_event_count},
          {"horizon", in.horizon},
          {"resolution_s", in.resolution}};
}

inline nlohmann::ordered_json to_json(const ClassicStats& c) {
  return {{"density", round12(c.snapshots.mean_density)},
          {"degree", round12(c.snapshots.mean_degree)},
          {"largest_cc", round12(c.snapshots.mean_largest_cc)},
          {"non_isolated", round12(c.snapshots.mean_non_isolated)},
          {"d_time", round12(c.distances.mean_d_time)},
          {"d_hops", round12(c.distances.mean_d_hops)},
          {"d_time_abs_s", round12(c.distances.mean_d_time_abs)},
          {"finite_frac", round12(c.distances.finite_pair_fraction)}};
}

/// Deterministic report body: identical for identical inputs and settings,
/// whatever the thread count.
inline nlohmann::ordered_json to_json(const SweepReport& r, const SweepConfig& cfg,
                                      const std::vector<std::string>& node_labels = {}) {
  nlohmann::ordered_json j;
  j["tool"] = {{"name", "satscale"}, {"version", kVersion}};
  j["input"] = to_json(r.input);
  if (!node_labels.empty()) j["node_labels"] = node_labels;
  nlohmann::ordered_json grid = nlohmann::ordered_json::array();
  for (const auto& p : cfg.grid) grid.push_back(p.count);
  j["parameters"] = {{"grid_k", grid},
                     {"shannon_slots", cfg.shannon_slots},
                     {"classic", cfg.classic},
                     {"icd_samples", cfg.icd_samples},
                     {"log_base", "e"},
                     {"diagonal_trips", "excluded"}};
  nlohmann::ordered_json entries = nlohmann::ordered_json::array();
  for (const auto& e : r.entries) {
    nlohmann::ordered_json je;
    je["K"] = e.count;
    je["delta_s"] = round12(e.delta_s);
    je["trip_count"] = e.trip_count;
    nlohmann::ordered_json scores;
    for (const auto& name : r.metrics) scores[name] = round12(e.scores.at(name));
    je["scores"] = scores;
    nlohmann::ordered_json pts = nlohmann::ordered_json::array();
    for (const auto& [l, p] : e.icd) pts.push_back({round12(l), round12(p)});
    je["icd"] = pts;
    if (e.classic) je["classic"] = to_json(*e.classic);
    entries.push_back(std::move(je));
  }
  j["grid"] = std::move(entries);
  nlohmann::ordered_json gamma;
  for (const auto& name : r.metrics) {
    const auto& g = r.gamma.at(name);
    gamma[name] = {{"K", g.count}, {"delta_s", round12(g.delta_s)},
                   {"delta_h", round12(g.delta_s / 3600.0)}};
  }
  j["gamma"] = gamma;
  return j;
}

/// K,delta_s,score
inline void write_curve_csv(std::ostream& os, const SweepReport& r, const std::string& metric) {
  os << "K,delta_s,score\n";
  for (const auto& e : r.entries)
    os << e.count << ',' << fmt12(e.delta_s) << ',' << fmt12(e.scores.at(metric)) << '\n';
}

inline void write_classic_csv(std::ostream& os, const SweepReport& r) {
  os << "K,delta_s,density,degree,largest_cc,non_isolated,d_time,d_hops,d_time_abs,finite_frac\n";
  for (const auto& e : r.entries) {
    if (!e.classic) continue;
    const auto& c = *e.classic;
    os << e.count << ',' << fmt12(e.delta_s) << ',' << fmt12(c.snapshots.mean_density) << ','
       << fmt12(c.snapshots.mean_degree) << ',' << fmt12(c.snapshots.mean_largest_cc) << ','
       << fmt12(c.snapshots.mean_non_isolated) << ',' << fmt12(c.distances.mean_d_time) << ','
       << fmt12(c.distances.mean_d_hops) << ',' << fmt12(c.distances.mean_d_time_abs) << ','
       << fmt12(c.distances.finite_pair_fraction) << '\n';
  }
}

/// lambda,icd at 0, every distinct occupancy rate, and 1.
inline void write_icd_csv(std::ostream& os, const OccupancyDistribution& d) {
  os << "lambda,icd\n";
  for (const auto& [l, p] : icd_points(d)) os << fmt12(l.value()) << ',' << fmt12(p) << '\n';
}

struct LossRow {
  std::int64_t count = 1;
  double delta_s = 0;
  std::optional<double> lost_fraction;
  ElongationResult elongation;
};

/// Lost shortest transitions and elongation at each requested window count.
inline std::vector<LossRow> run_validation(const LinkStream& s, const DeltaGrid& grid,
                                           const ElongationOptions& opt) {
  const auto transitions = enumerate_shortest_transitions(s, opt.threads);
  std::vector<LossRow> rows;
  for (const auto& p : grid) {
    const auto series = aggregate(s, p.count);
    rows.push_back({p.count, p.window.seconds(), lost_fraction(transitions, p.window),
                    mean_elongation(s, series, opt)});
  }
  return rows;
}

/// K,delta_s,lost_fraction,mean_elongation,samples ("nan" marks undefined).
inline void write_loss_csv(std::ostream& os, const std::vector<LossRow>& rows) {
  os << "K,delta_s,lost_fraction,mean_elongation,samples\n";
  for (const auto& r : rows)
    os << r.count << ',' << fmt12(r.delta_s) << ','
       << (r.lost_fraction ? fmt12(*r.lost_fraction) : "nan") << ','
       << (r.elongation.mean ? fmt12(*r.elongation.mean) : "nan") << ','
       << r.elongation.measured << '\n';
}

}  // namespace satscale
