// satscale: saturation scale of link streams from the command line.
//
// Exit codes: 0 success, 1 usage error, 2 data or I/O error. Data goes to
// files or standard output; progress and diagnostics go to standard error.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "satscale/aggregate.hpp"
#include "satscale/classic.hpp"
#include "satscale/link_stream.hpp"
#include "satscale/occupancy_metrics.hpp"
#include "satscale/reach.hpp"
#include "satscale/sweep.hpp"
#include "satscale/synth.hpp"
#include "satscale/validate.hpp"

namespace fs = std::filesystem;
using namespace satscale;

namespace {

struct InputArgs {
  std::string path;
  std::string format = "tsv";
  bool directed = false;
  Timestamp resolution = 1;
};

struct GridArgs {
  std::string grid = "log:40";
  std::vector<std::int64_t> k_list;
};

void add_input(CLI::App* cmd, InputArgs& in) {
  cmd->add_option("--input", in.path, "Link stream file")->required();
  cmd->add_option("--format", in.format, "Input format")
      ->check(CLI::IsMember({"tsv", "konect"}));
  cmd->add_flag("--directed", in.directed, "Treat links as directed");
  cmd->add_option("--resolution", in.resolution, "Seconds per timestamp unit")
      ->check(CLI::PositiveNumber);
}

void add_grid(CLI::App* cmd, GridArgs& g) {
  auto* grid = cmd->add_option("--grid", g.grid, "Window grid, log:<points>");
  auto* ks = cmd->add_option("--k-list", g.k_list, "Explicit window counts")->delimiter(',');
  grid->excludes(ks);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

LinkStream load(const InputArgs& in) {
  const auto text = read_file(in.path);
  ParseOptions opt{in.directed, in.resolution};
  auto s = in.format == "konect" ? parse_konect(text, opt) : parse_tsv(text, opt);
  const auto& st = s.stats();
  std::cerr << "loaded " << in.path << ": " << s.node_count() << " nodes, " << st.raw_events
            << " raw events, " << s.event_count() << " after dedup ("
            << st.duplicates_removed << " duplicates, " << st.self_loops_dropped
            << " self-loops dropped), horizon " << s.horizon() << "\n";
  return s;
}

DeltaGrid make_grid(const LinkStream& s, const GridArgs& g) {
  if (!g.k_list.empty()) return k_list_grid(s, g.k_list);
  if (!g.grid.starts_with("log:")) throw CLI::ValidationError("--grid", "expected log:<points>");
  int points = 0;
  try {
    points = std::stoi(g.grid.substr(4));
  } catch (const std::exception&) {
    throw CLI::ValidationError("--grid", "expected log:<points>");
  }
  if (points < 2) throw CLI::ValidationError("--grid", "need at least 2 points");
  return delta_grid(s, points);
}

std::vector<Metric> selected_metrics(const std::string& spec, int& shannon_slots) {
  if (spec == "all") return all_metrics(shannon_slots);
  Metric m;
  try {
    m = Metric::parse(spec);
  } catch (const Error& e) {
    throw CLI::ValidationError("--metric", e.what());
  }
  if (m.kind == MetricKind::shannon) shannon_slots = m.slots;
  return {m};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

std::string file_safe(std::string name) {
  for (auto& c : name)
    if (c == ':') c = '_';
  return name;
}

unsigned thread_count(unsigned requested) {
  return requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
}

std::string gamma_line(const SweepReport& r, const std::string& metric) {
  const auto& g = r.gamma.at(metric);
  std::ostringstream os;
  os << metric << "\tK=" << g.count << "\tdelta_s=" << fmt12(g.delta_s)
     << "\tdelta_h=" << fmt12(g.delta_s / 3600.0) << '\n';
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Saturation scale of link streams (occupancy method)"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  InputArgs in;
  GridArgs grid;
  std::string metric = "mk";
  unsigned threads = 0;
  std::string out_dir;
  std::uint64_t seed = 1;

  // sweep
  bool with_classic = false;
  auto* sweep = app.add_subcommand("sweep", "Occupancy method over a window grid");
  add_input(sweep, in);
  add_grid(sweep, grid);
  sweep->add_option("--metric", metric, "mk|stddev|cv|shannon:<k>|cre|all");
  sweep->add_flag("--classic", with_classic, "Also compute classical series statistics");
  sweep->add_option("--threads", threads, "Worker threads (0 = all cores)");
  sweep->add_option("--out-dir", out_dir, "Directory for report.json and CSV files");

  // validate
  bool at_gamma = false;
  std::uint64_t samples = 100'000, full_limit = 1'000'000;
  auto* validate = app.add_subcommand("validate", "Lost shortest transitions and elongation");
  add_input(validate, in);
  add_grid(validate, grid);
  validate->add_flag("--at-gamma", at_gamma, "Measure at gamma of --metric (runs a sweep)");
  validate->add_option("--metric", metric, "Metric selecting gamma for --at-gamma");
  validate->add_option("--threads", threads, "Worker threads (0 = all cores)");
  validate->add_option("--seed", seed, "Seed of the elongation subsample");
  validate->add_option("--samples", samples, "Elongation subsample size");
  validate->add_option("--full-limit", full_limit, "Measure all trips below this count");
  validate->add_option("--out-dir", out_dir, "Directory for loss.csv");

  // distribution
  std::int64_t k_value = 1;
  auto* distribution = app.add_subcommand("distribution", "ICD of occupancy rates at one K");
  add_input(distribution, in);
  distribution->add_option("-k,--k", k_value, "Window count K")->required();
  distribution->add_option("--threads", threads, "Worker threads (0 = all cores)");
  distribution->add_option("--out-dir", out_dir, "Directory for icd_K<k>.csv");

  // classic
  auto* classic = app.add_subcommand("classic", "Classical statistics over a window grid");
  add_input(classic, in);
  add_grid(classic, grid);
  classic->add_option("--threads", threads, "Worker threads (0 = all cores)");
  classic->add_option("--out-dir", out_dir, "Directory for classic.csv");

  // summary
  auto* summary = app.add_subcommand("summary", "Size and activity of a link stream");
  add_input(summary, in);

  // generate
  std::string output;
  auto* generate = app.add_subcommand("generate", "Synthetic link streams (canonical TSV)");
  generate->require_subcommand(1);
  UniformSpec uni;
  auto* gen_uni = generate->add_subcommand("uniform", "Time-uniform network");
  gen_uni->add_option("--n", uni.n, "Nodes")->required();
  gen_uni->add_option("--links-per-pair", uni.links_per_pair, "Links per pair N")->required();
  gen_uni->add_option("--horizon", uni.horizon, "Horizon T (s)")->required();
  gen_uni->add_option("--seed", uni.seed, "Seed");
  gen_uni->add_flag("--directed", uni.directed, "Ordered pairs");
  gen_uni->add_option("--output", output, "Output file (default: stdout)");
  TwoModeSpec two;
  auto* gen_two = generate->add_subcommand("twomode", "Alternating high/low activity");
  gen_two->add_option("--n", two.n, "Nodes")->required();
  gen_two->add_option("--n1", two.n1, "Links per pair per high segment")->required();
  gen_two->add_option("--t1", two.t1, "High segment length (s)")->required();
  gen_two->add_option("--n2", two.n2, "Links per pair per low segment")->required();
  gen_two->add_option("--t2", two.t2, "Low segment length (s)")->required();
  gen_two->add_option("--alternations", two.alternations, "High/low blocks");
  gen_two->add_option("--seed", two.seed, "Seed");
  gen_two->add_flag("--directed", two.directed, "Ordered pairs");
  gen_two->add_option("--output", output, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  auto emit = [&](const std::string& file, const std::string& text) {
    if (out_dir.empty()) {
      std::cout << text;
    } else {
      fs::create_directories(out_dir);
      write_text(fs::path(out_dir) / file, text);
      std::cerr << "wrote " << (fs::path(out_dir) / file).string() << '\n';
    }
  };

  try {
    if (*sweep) {
      const auto s = load(in);
      int slots = 10;
      const auto wanted = selected_metrics(metric, slots);
      SweepConfig cfg;
      cfg.grid = make_grid(s, grid);
      cfg.shannon_slots = slots;
      cfg.classic = with_classic;
      cfg.threads = thread_count(threads);
      cfg.progress = [](std::size_t i, std::size_t n) {
        std::cerr << "\rgrid point " << (i + 1) << "/" << n << std::flush;
        if (i + 1 == n) std::cerr << '\n';
      };
      const auto start = std::chrono::steady_clock::now();
      const auto report = run_sweep(s, cfg, InputDescriptor::of(s, in.path, in.format));
      const double seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

      std::string gammas;
      for (const auto& m : wanted) gammas += gamma_line(report, m.name());
      if (out_dir.empty()) {
        std::cout << gammas;
        return 0;
      }
      fs::create_directories(out_dir);
      const fs::path dir(out_dir);
      write_text(dir / "report.json", to_json(report, cfg, s.labels()).dump(2) + "\n");
      nlohmann::ordered_json run = {{"version", kVersion},
                                    {"threads", cfg.threads},
                                    {"runtime_s", round12(seconds)}};
      write_text(dir / "run.json", run.dump(2) + "\n");
      for (const auto& name : report.metrics) {
        std::ostringstream csv;
        write_curve_csv(csv, report, name);
        write_text(dir / ("curve_" + file_safe(name) + ".csv"), csv.str());
      }
      if (with_classic) {
        std::ostringstream csv;
        write_classic_csv(csv, report);
        write_text(dir / "classic.csv", csv.str());
      }
      std::cout << gammas;
      std::cerr << "report written to " << dir.string() << " in " << fmt12(seconds) << " s\n";
    } else if (*validate) {
      const auto s = load(in);
      DeltaGrid points;
      if (at_gamma) {
        int slots = 10;
        const auto wanted = selected_metrics(metric, slots);
        if (wanted.size() != 1) throw CLI::ValidationError("--metric", "pick a single metric");
        SweepConfig cfg;
        cfg.grid = make_grid(s, grid);
        cfg.shannon_slots = slots;
        cfg.threads = thread_count(threads);
        const auto report = run_sweep(s, cfg);
        const auto& g = report.gamma.at(wanted.front().name());
        std::cerr << gamma_line(report, wanted.front().name());
        points = k_list_grid(s, {g.count});
      } else {
        points = make_grid(s, grid);
      }
      ElongationOptions opt;
      opt.full_limit = full_limit;
      opt.samples = samples;
      opt.seed = seed;
      opt.threads = thread_count(threads);
      std::ostringstream csv;
      write_loss_csv(csv, run_validation(s, points, opt));
      emit("loss.csv", csv.str());
    } else if (*distribution) {
      const auto s = load(in);
      const auto series = aggregate(s, k_value);
      const auto sweep_result = minimal_trip_sweep(series, {.threads = thread_count(threads)});
      if (sweep_result.occupancy.empty()) throw Error("no minimal trip at this K");
      std::ostringstream csv;
      write_icd_csv(csv, sweep_result.occupancy);
      emit("icd_K" + std::to_string(k_value) + ".csv", csv.str());
    } else if (*classic) {
      const auto s = load(in);
      SweepReport report;
      for (const auto& p : make_grid(s, grid)) {
        const auto series = aggregate(s, p.count);
        const auto d = minimal_trip_sweep(series, {.threads = thread_count(threads)}).distances;
        GridEntry e;
        e.count = p.count;
        e.delta_s = p.window.seconds();
        e.classic = ClassicStats{snapshot_stats(series), distance_stats(d, series.window())};
        report.entries.push_back(std::move(e));
      }
      std::ostringstream csv;
      write_classic_csv(csv, report);
      emit("classic.csv", csv.str());
    } else if (*summary) {
      const auto s = load(in);
      const auto r = stream_summary(s);
      nlohmann::ordered_json j = {{"nodes", r.node_count},
                                  {"events", r.event_count},
                                  {"raw_events", r.raw_event_count},
                                  {"duplicates_removed", s.stats().duplicates_removed},
                                  {"self_loops_dropped", s.stats().self_loops_dropped},
                                  {"horizon", r.horizon},
                                  {"resolution_s", r.resolution},
                                  {"horizon_days", round12(r.horizon_days)},
                                  {"activity_per_day", round12(r.activity_per_day)},
                                  {"mean_intercontact_s", round12(r.mean_intercontact_s)}};
      std::cout << j.dump(2) << '\n';
    } else if (*generate) {
      const auto s = *gen_uni ? gen_uniform(uni) : gen_two_mode(two);
      const auto text = to_tsv(s);
      if (output.empty())
        std::cout << text;
      else
        write_text(output, text);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
