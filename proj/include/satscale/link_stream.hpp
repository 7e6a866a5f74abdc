#pragma once

// Link streams: timestamped (u, v, t) events, parsing and canonical TSV output.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace satscale {

using NodeId = std::uint32_t;
using Timestamp = std::int64_t;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

namespace detail {
struct StreamAccess;
}

struct Event {
  NodeId u = 0;
  NodeId v = 0;
  Timestamp t = 0;

  friend bool operator==(const Event&, const Event&) = default;
  friend bool operator<(const Event& a, const Event& b) {
    if (a.t != b.t) return a.t < b.t;
    if (a.u != b.u) return a.u < b.u;
    return a.v < b.v;
  }
};

/// Counters collected while normalizing raw input.
struct IngestStats {
  std::size_t raw_events = 0;
  std::size_t self_loops_dropped = 0;
  std::size_t duplicates_removed = 0;

  friend bool operator==(const IngestStats&, const IngestStats&) = default;
};

/// Immutable, normalized link stream.
///
/// Events are sorted by (t, u, v) without duplicates or self-loops, all
/// timestamps lie in [0, horizon) and node ids are dense. Undirected streams
/// store every event with u < v.
class LinkStream {
 public:
  LinkStream() = default;

  /// Normalizes `events` into a stream over `node_count` nodes. Self-loops are
  /// dropped and duplicates removed (both counted in stats()); out-of-range
  /// timestamps or ids, unused ids and empty input throw Error.
  static LinkStream from_events(std::vector<Event> events, std::size_t node_count,
                                Timestamp horizon, bool directed,
                                std::vector<std::string> labels = {},
                                Timestamp origin = 0, Timestamp resolution = 1) {
    if (resolution <= 0) throw Error("resolution must be positive");
    if (horizon <= 0) throw Error("horizon must be positive");
    LinkStream s;
    s.directed_ = directed;
    s.origin_ = origin;
    s.horizon_ = horizon;
    s.resolution_ = resolution;
    s.stats_.raw_events = events.size();

    std::erase_if(events, [&](const Event& e) {
      if (e.u != e.v) return false;
      ++s.stats_.self_loops_dropped;
      return true;
    });
    for (auto& e : events) {
      if (e.u >= node_count || e.v >= node_count) throw Error("node id out of range");
      if (e.t < 0 || e.t >= horizon) throw Error("timestamp outside [0, horizon)");
      if (!directed && e.u > e.v) std::swap(e.u, e.v);
    }
    std::sort(events.begin(), events.end());
    auto tail = std::unique(events.begin(), events.end());
    s.stats_.duplicates_removed = static_cast<std::size_t>(events.end() - tail);
    events.erase(tail, events.end());
    if (events.empty()) throw Error("empty link stream");

    std::vector<bool> seen(node_count, false);
    for (const auto& e : events) seen[e.u] = seen[e.v] = true;
    if (std::find(seen.begin(), seen.end(), false) != seen.end())
      throw Error("node ids are not dense: some node has no event");

    if (labels.empty()) {
      labels.reserve(node_count);
      for (std::size_t i = 0; i < node_count; ++i) labels.push_back(std::to_string(i));
    }
    if (labels.size() != node_count) throw Error("label count does not match node count");

    s.events_ = std::move(events);
    s.labels_ = std::move(labels);
    return s;
  }

  const std::vector<Event>& events() const noexcept { return events_; }
  std::size_t event_count() const noexcept { return events_.size(); }
  std::size_t node_count() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::string& label(NodeId id) const { return labels_.at(id); }
  Timestamp origin() const noexcept { return origin_; }
  /// Length T of the period of study, in resolution units.
  Timestamp horizon() const noexcept { return horizon_; }
  /// Seconds per timestamp unit.
  Timestamp resolution() const noexcept { return resolution_; }
  bool directed() const noexcept { return directed_; }
  const IngestStats& stats() const noexcept { return stats_; }

  /// Equality of content; ingest counters are not compared.
  friend bool operator==(const LinkStream& a, const LinkStream& b) {
    return a.directed_ == b.directed_ && a.origin_ == b.origin_ &&
           a.horizon_ == b.horizon_ && a.resolution_ == b.resolution_ &&
           a.labels_ == b.labels_ && a.events_ == b.events_;
  }

 private:
  friend struct detail::StreamAccess;

  std::vector<Event> events_;
  std::vector<std::string> labels_;
  Timestamp origin_ = 0;
  Timestamp horizon_ = 0;
  Timestamp resolution_ = 1;
  bool directed_ = false;
  IngestStats stats_;
};

struct ParseOptions {
  bool directed = false;
  /// Seconds per unit; raw timestamps are divided by it after shifting.
  Timestamp resolution = 1;
};

namespace detail {

struct StreamAccess {
  static IngestStats& stats(LinkStream& s) { return s.stats_; }
};

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::optional<Timestamp> parse_int(std::string_view field) {
  Timestamp value = 0;
  const char* first = field.data();
  if (!field.empty() && field.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) return std::nullopt;
  return value;
}

struct RawLink {
  std::string_view u, v;
  Timestamp t;
};

// Directives written by write_tsv so that a canonical file parses back to
// the identical stream: "# @nodes l0 l1 ...", "# @origin t", "# @horizon T".
struct Directives {
  std::vector<std::string> nodes;
  std::optional<Timestamp> origin;
  std::optional<Timestamp> horizon;
};

inline void read_directive(std::string_view line, std::size_t line_no, Directives& d) {
  auto fields = split_ws(line.substr(1));
  if (fields.empty() || fields.front().empty() || fields.front().front() != '@') return;
  auto key = fields.front();
  if (key == "@nodes") {
    for (std::size_t i = 1; i < fields.size(); ++i) d.nodes.emplace_back(fields[i]);
  } else if (key == "@origin" || key == "@horizon") {
    std::optional<Timestamp> value;
    if (fields.size() == 2) value = parse_int(fields[1]);
    if (!value) throw ParseError(line_no, "malformed " + std::string(key) + " directive");
    (key == "@origin" ? d.origin : d.horizon) = value;
  }
}

inline LinkStream normalize(const std::vector<RawLink>& raw, const Directives& dir,
                            const ParseOptions& opt) {
  if (opt.resolution <= 0) throw Error("resolution must be positive");
  if (raw.empty()) throw Error("empty link stream");

  std::unordered_map<std::string_view, NodeId> ids;
  std::vector<std::string> labels;
  auto intern = [&](std::string_view label) {
    auto [it, fresh] = ids.try_emplace(label, static_cast<NodeId>(labels.size()));
    if (fresh) labels.emplace_back(label);
    return it->second;
  };
  for (const auto& l : dir.nodes) intern(l);

  Timestamp t_min = std::numeric_limits<Timestamp>::max();
  Timestamp t_max = std::numeric_limits<Timestamp>::min();
  std::size_t self_loops = 0;
  for (const auto& r : raw) {
    if (r.u == r.v) {
      ++self_loops;
      continue;
    }
    t_min = std::min(t_min, r.t);
    t_max = std::max(t_max, r.t);
  }
  if (t_min > t_max) throw Error("empty link stream (only self-loops)");

  Timestamp origin = t_min;
  if (dir.origin) {
    if (*dir.origin > t_min) throw Error("@origin is later than the first event");
    origin = *dir.origin;
  }
  Timestamp horizon = (t_max - origin) / opt.resolution + 1;
  if (dir.horizon) {
    if (*dir.horizon < horizon) throw Error("@horizon does not cover every event");
    horizon = *dir.horizon;
  }

  std::vector<Event> events;
  events.reserve(raw.size());
  for (const auto& r : raw) {
    if (r.u == r.v) continue;
    events.push_back({intern(r.u), intern(r.v), (r.t - origin) / opt.resolution});
  }
  // Self-loop-only labels would break density; keep only labels seen on real events.
  std::vector<bool> used(labels.size(), false);
  for (const auto& e : events) used[e.u] = used[e.v] = true;
  if (std::find(used.begin(), used.end(), false) != used.end()) {
    std::vector<NodeId> remap(labels.size());
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      remap[i] = static_cast<NodeId>(kept.size());
      if (used[i]) kept.push_back(labels[i]);
    }
    for (auto& e : events) {
      e.u = remap[e.u];
      e.v = remap[e.v];
    }
    labels = std::move(kept);
  }

  const std::size_t n = labels.size();
  auto stream = LinkStream::from_events(std::move(events), n, horizon, opt.directed,
                                        std::move(labels), origin, opt.resolution);
  // from_events saw the stream without self-loops; report the raw view.
  auto& stats = StreamAccess::stats(stream);
  stats.raw_events = raw.size();
  stats.self_loops_dropped = self_loops;
  return stream;
}

template <class RowHandler>
void for_each_data_line(std::string_view text, std::string_view comment_chars, Directives& dir,
                        RowHandler&& on_row) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    ++line_no;
    pos = end + 1;
    auto fields = split_ws(line);
    if (fields.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (comment_chars.find(fields.front().front()) != std::string_view::npos) {
      if (fields.front().front() == '#') read_directive(line.substr(line.find('#')), line_no, dir);
    } else {
      on_row(fields, line_no);
    }
    if (end == text.size()) break;
  }
}

}  // namespace detail

/// Whitespace-separated "<u> <v> <t>" lines; '#' and '%' start comments.
inline LinkStream parse_tsv(std::string_view text, const ParseOptions& opt = {}) {
  std::vector<detail::RawLink> raw;
  detail::Directives dir;
  detail::for_each_data_line(text, "#%", dir, [&](const auto& f, std::size_t line) {
    if (f.size() < 3) throw ParseError(line, "expected at least 3 fields");
    auto t = detail::parse_int(f[2]);
    if (!t) throw ParseError(line, "timestamp is not an integer: '" + std::string(f[2]) + "'");
    raw.push_back({f[0], f[1], *t});
  });
  return detail::normalize(raw, dir, opt);
}

/// KONECT edge lists: "u v", "u v w" or "u v w t"; only the last form carries
/// time, anything shorter is rejected.
inline LinkStream parse_konect(std::string_view text, const ParseOptions& opt = {}) {
  std::vector<detail::RawLink> raw;
  detail::Directives dir;
  detail::for_each_data_line(text, "%#", dir, [&](const auto& f, std::size_t line) {
    if (f.size() < 2) throw ParseError(line, "expected at least 2 fields");
    if (f.size() < 4) throw ParseError(line, "untimestamped data");
    auto t = detail::parse_int(f[3]);
    if (!t) throw ParseError(line, "timestamp is not an integer: '" + std::string(f[3]) + "'");
    raw.push_back({f[0], f[1], *t});
  });
  return detail::normalize(raw, dir, opt);
}

/// Canonical TSV writer; parse_tsv of the output reproduces `s` exactly when
/// parsed with the same directedness and resolution.
inline void write_tsv(std::ostream& os, const LinkStream& s) {
  os << "# link stream: " << s.node_count() << " nodes, " << s.event_count() << " events, "
     << (s.directed() ? "directed" : "undirected") << ", resolution " << s.resolution()
     << " s\n";
  os << "# @nodes";
  for (const auto& l : s.labels()) os << ' ' << l;
  os << "\n# @origin " << s.origin() << "\n# @horizon " << s.horizon() << '\n';
  for (const auto& e : s.events())
    os << s.label(e.u) << '\t' << s.label(e.v) << '\t' << (s.origin() + e.t * s.resolution())
       << '\n';
}

inline std::string to_tsv(const LinkStream& s) {
  std::ostringstream os;
  write_tsv(os, s);
  return os.str();
}

struct StreamSummary {
  std::size_t node_count = 0;
  std::size_t event_count = 0;
  std::size_t raw_event_count = 0;
  Timestamp horizon = 0;
  Timestamp resolution = 1;
  double horizon_days = 0;
  /// Events per node per day.
  double activity_per_day = 0;
  /// horizon / (mean number of events a node takes part in), in seconds.
  double mean_intercontact_s = 0;
};

inline StreamSummary stream_summary(const LinkStream& s) {
  StreamSummary r;
  r.node_count = s.node_count();
  r.event_count = s.event_count();
  r.raw_event_count = s.stats().raw_events;
  r.horizon = s.horizon();
  r.resolution = s.resolution();
  const double seconds = static_cast<double>(s.horizon()) * static_cast<double>(s.resolution());
  r.horizon_days = seconds / 86400.0;
  const double n = static_cast<double>(r.node_count);
  const double m = static_cast<double>(r.event_count);
  r.activity_per_day = m / (n * r.horizon_days);
  r.mean_intercontact_s = seconds * n / (2.0 * m);
  return r;
}

}  // namespace satscale
