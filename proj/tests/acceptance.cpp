// Acceptance run: one PASS/FAIL/SKIP line per criterion.
//
// Usage: satscale_acceptance [criterion ...]   (default: all of 1..10)
// Datasets for criteria 5-8 are looked up under $SATSCALE_DATA_DIR.

#include <sys/wait.h>

#include <boost/math/distributions/students_t.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "quadrature.hpp"
#include "satscale/classic.hpp"
#include "satscale/sweep.hpp"
#include "satscale/synth.hpp"
#include "satscale/validate.hpp"

using namespace satscale;
namespace fs = std::filesystem;

namespace {

enum class Status { pass, fail, skip };

struct Outcome {
  Status status = Status::pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double x, int digits = 4) {
  std::ostringstream ss;
  ss.precision(digits);
  ss << x;
  return ss.str();
}

std::string hours(double s) { return num(s / 3600.0) + " h"; }

// Collects failed checks of one criterion.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  Outcome outcome(const std::string& summary) const {
    if (failures_.empty()) return {Status::pass, summary};
    std::string d = summary + "; failed:";
    for (const auto& f : failures_) d += " [" + f + "]";
    return {Status::fail, d};
  }

 private:
  std::vector<std::string> failures_;
};

unsigned hardware_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

// ---------------------------------------------------------------------------

Outcome criterion1() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1001);
  int mismatches = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const auto toy = oracle::random_toy(rng, rep % 2 == 1);
    const auto series = aggregate(oracle::as_stream(toy), toy.K);
    const auto trips = collect_minimal_trips(series);
    const auto sweep = minimal_trip_sweep(series);
    const auto dist = oracle::brute_distances(toy);
    const bool ok = trips == oracle::brute_minimal_trips(toy) &&
                    sweep.occupancy.total() == trips.size() &&
                    sweep.distances.sum_d_time == dist.sum_d_time &&
                    sweep.distances.sum_d_hops == dist.sum_d_hops &&
                    sweep.distances.finite_triples == dist.finite;
    mismatches += !ok;
  }
  const double elapsed = seconds_since(t0);
  Checks c;
  c.expect(mismatches == 0, std::to_string(mismatches) + " instances differ");
  c.expect(elapsed < 60, "runtime " + num(elapsed) + " s >= 60 s");
  return c.outcome("1000 instances, " + std::to_string(1000 - mismatches) + " match, " +
                   num(elapsed, 3) + " s");
}

Outcome criterion2() {
  const auto t0 = Clock::now();
  Checks c;
  auto near = [&](double got, double want, const std::string& what) {
    c.expect(std::abs(got - want) <= 1e-9, what + " = " + num(got, 12));
  };
  RateLaw point;
  point.add_atom({1, 1}, 1.0);
  near(mk_distance(point), 0.5, "mk_distance(point mass at 1)");
  near(mk_proximity(RateLaw::uniform()), 0.5, "mk_proximity(uniform)");
  near(cre(RateLaw::uniform()), 0.25, "cre(uniform)");
  near(shannon_entropy(RateLaw::uniform(), 10), std::log(10.0), "shannon(uniform, 10)");

  std::mt19937_64 rng(2002);
  double worst = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const auto law = oracle::random_law(rng);
    worst = std::max({worst, std::abs(mk_distance(law) - oracle::mk_quadrature(law)),
                      std::abs(cre(law) - oracle::cre_quadrature(law))});
  }
  c.expect(worst <= 1e-9, "quadrature deviation " + num(worst));
  return c.outcome("closed forms exact; 100 random laws, max |closed - quadrature| = " +
                   num(worst, 2) + ", " + num(seconds_since(t0), 3) + " s");
}

// γ_mk on time-uniform networks against the mean intercontact time.
Outcome criterion3() {
  const auto t0 = Clock::now();
  const std::size_t n = 30;
  const Timestamp T = 20'000;
  std::vector<double> xs, ys;
  for (std::uint64_t N : {5, 10, 20, 40, 80})
    for (std::uint64_t seed : {1, 2, 3}) {
      const auto s = gen_uniform({.n = n, .links_per_pair = N, .horizon = T, .seed = seed});
      SweepConfig cfg;
      cfg.grid = delta_grid(s, 30);
      cfg.threads = hardware_threads();
      xs.push_back(static_cast<double>(T) / static_cast<double>(N * (n - 1)));
      ys.push_back(run_sweep(s, cfg).gamma.at("mk").delta_s);
    }
  const double m = static_cast<double>(xs.size());

  // Through the origin.
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double slope0 = sxy / sxx;
  double y_mean = 0;
  for (double y : ys) y_mean += y / m;
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    ss_res += std::pow(ys[i] - slope0 * xs[i], 2);
    ss_tot += std::pow(ys[i] - y_mean, 2);
  }
  const double r2 = 1 - ss_res / ss_tot;

  // Ordinary least squares with intercept.
  double x_mean = 0;
  for (double x : xs) x_mean += x / m;
  double cxx = 0, cxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    cxx += (xs[i] - x_mean) * (xs[i] - x_mean);
    cxy += (xs[i] - x_mean) * (ys[i] - y_mean);
  }
  const double slope = cxy / cxx;
  const double intercept = y_mean - slope * x_mean;
  double rss = 0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    rss += std::pow(ys[i] - intercept - slope * xs[i], 2);
  const double se = std::sqrt(rss / (m - 2) * (1 / m + x_mean * x_mean / cxx));
  const double t_crit = boost::math::quantile(boost::math::students_t(m - 2), 0.975);
  const double min_x = *std::min_element(xs.begin(), xs.end());
  const double scale = slope * min_x;
  const double relative = std::abs(intercept) / scale;

  const double elapsed = seconds_since(t0);
  Checks c;
  c.expect(r2 >= 0.9, "R^2 " + num(r2) + " < 0.9");
  c.expect(relative <= 0.1, "|intercept| / (slope * min x) = " + num(relative) + " > 0.1");
  c.expect(elapsed < 600, "runtime " + num(elapsed) + " s");
  return c.outcome("15 streams, gamma_mk = " + num(slope0) + " * x, R^2 = " + num(r2, 6) +
                   "; OLS intercept " + num(intercept) + " (95% CI half-width " +
                   num(t_crit * se) + ", " + num(100 * relative, 3) +
                   "% of slope * min x); " + num(elapsed, 3) + " s");
}

// Two-mode family: high rate 80 links per pair per block, low rate 10.
Outcome criterion4() {
  const auto t0 = Clock::now();
  const Timestamp block = 20'000;
  const double high = 80, ratio = 8;
  std::map<double, double> gamma;
  for (double rho : {0.0, 0.2, 0.4, 0.6, 0.7, 0.9, 1.0}) {
    TwoModeSpec spec;
    spec.n = 30;
    spec.alternations = 10;
    spec.seed = 1;
    spec.t2 = static_cast<Timestamp>(std::llround(rho * static_cast<double>(block)));
    spec.t1 = block - spec.t2;
    spec.n1 = static_cast<std::uint64_t>(std::llround(high * spec.t1 / block));
    spec.n2 = static_cast<std::uint64_t>(std::llround(high / ratio * spec.t2 / block));
    const auto s = gen_two_mode(spec);
    SweepConfig cfg;
    cfg.grid = delta_grid(s, 60);
    cfg.threads = hardware_threads();
    gamma[rho] = run_sweep(s, cfg).gamma.at("mk").delta_s;
  }
  const double base = gamma.at(0.0);
  Checks c;
  std::string curve;
  for (auto [rho, g] : gamma) {
    curve += (curve.empty() ? "" : ", ") + num(rho, 2) + ":" + num(g);
    if (rho <= 0.7) c.expect(g <= 1.5 * base, "gamma(" + num(rho, 2) + ") = " + num(g));
  }
  c.expect(gamma.at(1.0) >= 3 * base, "gamma(1) = " + num(gamma.at(1.0)));
  const double elapsed = seconds_since(t0);
  c.expect(elapsed < 900, "runtime " + num(elapsed) + " s");
  return c.outcome("ratio 8, gamma_mk(rho) = {" + curve + "}, gamma(0.7)/gamma(0) = " +
                   num(gamma.at(0.7) / base, 3) + ", gamma(1)/gamma(0) = " +
                   num(gamma.at(1.0) / base, 3) + "; " + num(elapsed, 3) + " s");
}

// ---------------------------------------------------------------------------
// Real datasets (KONECT format, ingested as directed).

struct Dataset {
  std::string name;
  std::vector<std::string> files;  // candidates relative to SATSCALE_DATA_DIR
};

const std::vector<Dataset>& datasets() {
  static const std::vector<Dataset> all{
      {"irvine", {"irvine.konect", "out.opsahl-ucsocial", "opsahl-ucsocial/out.opsahl-ucsocial"}},
      {"facebook",
       {"facebook.konect", "out.facebook-wosn-wall", "facebook-wosn-wall/out.facebook-wosn-wall"}},
      {"enron", {"enron.konect"}},
      {"manufacturing",
       {"manufacturing.konect", "out.radoslaw_email_email", "radoslaw_email/out.radoslaw_email_email"}},
  };
  return all;
}

std::optional<fs::path> dataset_path(const std::string& name) {
  const char* dir = std::getenv("SATSCALE_DATA_DIR");
  if (!dir) return std::nullopt;
  for (const auto& d : datasets())
    if (d.name == name)
      for (const auto& f : d.files)
        if (fs::is_regular_file(fs::path(dir) / f)) return fs::path(dir) / f;
  return std::nullopt;
}

std::string missing_notice(const std::vector<std::string>& names) {
  std::string list;
  for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
  return "dataset file(s) not found (" + list + "); set SATSCALE_DATA_DIR to a directory holding " +
         "<name>.konect or the original KONECT out.* file";
}

struct Loaded {
  LinkStream stream;
  SweepReport report;
};

// Streams and log:40 sweeps, computed once per dataset.
Loaded& load(const std::string& name, bool classic) {
  static std::map<std::string, Loaded> cache;
  auto it = cache.find(name);
  if (it != cache.end() && (!classic || it->second.report.entries.front().classic))
    return it->second;
  const auto path = *dataset_path(name);
  std::ifstream in(path, std::ios::binary);
  std::ostringstream text;
  text << in.rdbuf();
  auto s = parse_konect(text.str(), {.directed = true});
  SweepConfig cfg;
  cfg.grid = delta_grid(s, 40);
  cfg.classic = classic;
  cfg.threads = hardware_threads();
  auto report = run_sweep(s, cfg);
  return cache.insert_or_assign(name, Loaded{std::move(s), std::move(report)}).first->second;
}

constexpr double kHour = 3600.0;

Outcome criterion5() {
  if (!dataset_path("irvine")) return {Status::skip, missing_notice({"irvine"})};
  const auto t0 = Clock::now();
  const auto& r = load("irvine", true).report;
  const auto& g = r.gamma;
  const double mk = g.at("mk").delta_s;
  const double sh = g.at("shannon:10").delta_s;
  const double cr = g.at("cre").delta_s;
  Checks c;
  c.expect(mk >= 14 * kHour && mk <= 22 * kHour, "gamma_mk " + hours(mk));
  c.expect(g.at("stddev").index == g.at("mk").index,
           "stddev selects " + hours(g.at("stddev").delta_s));
  c.expect(std::abs(sh - mk) <= 0.25 * mk, "shannon:10 selects " + hours(sh));
  c.expect(cr < mk && cr >= 10 * kHour && cr <= 19 * kHour, "cre selects " + hours(cr));
  c.expect(g.at("cv").index == 0, "cv selects " + num(g.at("cv").delta_s) + " s");
  return c.outcome("gamma mk " + hours(mk) + ", stddev " + hours(g.at("stddev").delta_s) +
                   ", shannon:10 " + hours(sh) + ", cre " + hours(cr) + ", cv " +
                   num(g.at("cv").delta_s) + " s; " + num(seconds_since(t0), 4) + " s");
}

Outcome criterion6() {
  if (!dataset_path("irvine")) return {Status::skip, missing_notice({"irvine"})};
  const auto t0 = Clock::now();
  const auto& d = load("irvine", true);
  const auto& s = d.stream;
  const auto k_gamma = d.report.gamma.at("mk").count;
  const auto k_half =
      std::max<std::int64_t>(1, std::llround(static_cast<double>(s.horizon()) *
                                             static_cast<double>(s.resolution()) / 1800.0));
  ElongationOptions opt;
  opt.threads = hardware_threads();
  const auto rows = run_validation(s, k_list_grid(s, {k_gamma, k_half}), opt);
  const auto& at_gamma = rows[0].count == k_gamma ? rows[0] : rows[1];
  const auto& at_half = rows[0].count == k_half ? rows[0] : rows[1];
  const double lost = at_gamma.lost_fraction.value_or(-1);
  const double elong = at_gamma.elongation.mean.value_or(-1);
  const double lost_half = at_half.lost_fraction.value_or(-1);
  Checks c;
  c.expect(lost >= 0.38 && lost <= 0.58, "lost fraction at gamma " + num(lost));
  c.expect(elong >= 1.0 && elong <= 1.5, "mean elongation at gamma " + num(elong));
  c.expect(lost_half >= 0.05 && lost_half <= 0.20, "lost fraction at 0.5 h " + num(lost_half));
  return c.outcome("at gamma: lost " + num(lost) + ", elongation " + num(elong) + " over " +
                   std::to_string(at_gamma.elongation.measured) + " trips; at 0.5 h: lost " +
                   num(lost_half) + "; " + num(seconds_since(t0), 4) + " s");
}

Outcome criterion7() {
  if (!dataset_path("irvine")) return {Status::skip, missing_notice({"irvine"})};
  const auto& d = load("irvine", true);
  const auto& entries = d.report.entries;
  const auto& finest = *entries.front().classic;
  const auto& whole = *entries.back().classic;
  const double horizon_s = static_cast<double>(d.stream.horizon()) *
                           static_cast<double>(d.stream.resolution());
  const double density = whole.snapshots.mean_density;
  Checks c;
  c.expect(entries.back().count == 1, "last grid point is not K=1");
  c.expect(std::abs(density - 7.2e-3) <= 0.1 * 7.2e-3, "density at K=1 " + num(density));
  c.expect(finest.distances.mean_d_hops >= 4.5,
           "mean_d_hops at finest " + num(finest.distances.mean_d_hops));
  c.expect(whole.distances.mean_d_hops == 1.0,
           "mean_d_hops at K=1 " + num(whole.distances.mean_d_hops, 12));
  c.expect(whole.distances.mean_d_time_abs == horizon_s,
           "mean_d_time_abs at K=1 " + num(whole.distances.mean_d_time_abs, 12));
  return c.outcome("density(K=1) " + num(density) + ", d_hops " +
                   num(finest.distances.mean_d_hops) + " -> " + num(whole.distances.mean_d_hops) +
                   ", d_time_abs(K=1) " + num(whole.distances.mean_d_time_abs, 12) + " s");
}

Outcome criterion8() {
  std::vector<std::string> missing;
  for (const auto& d : datasets())
    if (!dataset_path(d.name)) missing.push_back(d.name);
  if (!missing.empty()) return {Status::skip, missing_notice(missing)};
  const auto t0 = Clock::now();
  const std::map<std::string, double> expected{
      {"facebook", 46 * kHour}, {"enron", 78 * kHour}, {"manufacturing", 12 * kHour}};
  std::map<std::string, double> gamma;
  for (const auto& d : datasets()) gamma[d.name] = load(d.name, false).report.gamma.at("mk").delta_s;
  Checks c;
  std::string summary;
  for (const auto& [name, want] : expected) {
    c.expect(std::abs(gamma[name] - want) <= 0.4 * want, name + " gamma_mk " + hours(gamma[name]));
    summary += name + " " + hours(gamma[name]) + ", ";
  }
  c.expect(gamma["manufacturing"] < gamma["irvine"] && gamma["irvine"] < gamma["facebook"] &&
               gamma["facebook"] < gamma["enron"],
           "ordering manufacturing < irvine < facebook < enron");
  return c.outcome(summary + "irvine " + hours(gamma["irvine"]) + "; " +
                   num(seconds_since(t0), 4) + " s");
}

// ---------------------------------------------------------------------------

int run_cli(const std::string& args, const fs::path& stdout_file) {
  const std::string cmd =
      std::string(SATSCALE_CLI) + " " + args + " > '" + stdout_file.string() + "' 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Every output of every subcommand, threads 1 against threads 8.
Outcome criterion9() {
  const auto t0 = Clock::now();
  const fs::path root = fs::temp_directory_path() / "satscale_acceptance_threads";
  fs::remove_all(root);
  fs::create_directories(root);
  Checks c;

  const auto uniform = root / "uniform.tsv";
  const auto twomode = root / "twomode.tsv";
  c.expect(run_cli("generate uniform --n 40 --links-per-pair 4 --horizon 20000 --seed 9 --output " +
                       uniform.string(),
                   root / "gen1.out") == 0,
           "generate uniform");
  c.expect(run_cli("generate twomode --n 25 --n1 6 --t1 3000 --n2 1 --t2 2000 --alternations 4 "
                   "--seed 4 --directed --output " + twomode.string(),
                   root / "gen2.out") == 0,
           "generate twomode");

  struct Job {
    std::string name, args;
  };
  std::vector<Job> jobs;
  for (const auto& [tag, input] :
       {std::pair{std::string("uniform"), uniform.string()},
        std::pair{std::string("twomode"), twomode.string() + " --directed"}}) {
    const auto in = " --input " + input;
    jobs.push_back({tag + "_sweep", "sweep" + in + " --grid log:25 --metric all --classic"});
    jobs.push_back({tag + "_validate", "validate" + in + " --grid log:8 --samples 300 --full-limit 500"});
    jobs.push_back({tag + "_at_gamma", "validate" + in + " --grid log:25 --at-gamma"});
    jobs.push_back({tag + "_distribution", "distribution" + in + " -k 200"});
    jobs.push_back({tag + "_classic", "classic" + in + " --grid log:12"});
    jobs.push_back({tag + "_summary", "summary" + in});
  }

  std::size_t files = 0;
  for (const auto& job : jobs) {
    std::map<unsigned, std::map<std::string, std::string>> outputs;
    for (unsigned threads : {1u, 8u}) {
      const auto dir = root / (job.name + "_t" + std::to_string(threads));
      fs::create_directories(dir);
      const bool takes_threads = job.name.find("summary") == std::string::npos;
      const std::string extra = takes_threads ? " --threads " + std::to_string(threads) +
                                                    " --out-dir " + dir.string()
                                              : "";
      const int code = run_cli(job.args + extra, dir / "stdout.txt");
      c.expect(code == 0, job.name + " exited " + std::to_string(code));
      for (const auto& f : fs::directory_iterator(dir))
        if (f.path().filename() != "run.json")  // runtime and worker count
          outputs[threads][f.path().filename().string()] = slurp(f.path());
    }
    c.expect(outputs[1] == outputs[8], job.name + " outputs differ");
    files += outputs[1].size();
  }
  c.expect(slurp(uniform).size() > 0 && slurp(twomode).size() > 0, "empty generated stream");
  fs::remove_all(root);
  return c.outcome(std::to_string(jobs.size()) + " runs, " + std::to_string(files) +
                   " output files byte-identical across --threads 1 and 8; " +
                   num(seconds_since(t0), 3) + " s");
}

// Transitions against brute force, elongation factors checked one by one.
Outcome criterion10() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1010);
  int mismatches = 0;
  std::uint64_t transitions = 0, samples = 0;
  double min_factor = std::numeric_limits<double>::infinity();
  for (int rep = 0; rep < 500; ++rep) {
    const auto s = oracle::random_stream(rng, 2 + rng() % 7, 1 + rng() % 30, 40, rep % 2 == 1);
    const auto got = enumerate_shortest_transitions(s, 1 + rep % 4);
    mismatches += got != oracle::brute_shortest_transitions(s);
    transitions += got.size();
    for (std::int64_t K : {std::int64_t{1}, std::int64_t{3}, std::int64_t{7},
                           1 + static_cast<std::int64_t>(rng() % s.horizon())}) {
      const auto g = aggregate(s, K);
      // Brute-force factors of every eligible trip; path enumeration is
      // exponential, so only on the smaller streams.
      if (s.event_count() <= 14) {
        const auto toy = oracle::bucket(s, static_cast<std::uint32_t>(K));
        for (const auto& p : oracle::brute_minimal_trips(toy)) {
          if (p.t_dep == p.t_arr) continue;
          const auto fastest = oracle::brute_fastest(s, p.u, p.v, g.window().window_begin(p.t_dep),
                                                     g.window().window_end(p.t_arr) - 1);
          if (!fastest || *fastest <= 0) {
            ++mismatches;
            continue;
          }
          min_factor = std::min(min_factor, p.duration() * g.window().units() /
                                                static_cast<double>(*fastest));
        }
      }
      // The library asserts e_P >= 1 on each of its samples and reports the minimum.
      const auto r = mean_elongation(s, g);
      samples += r.measured;
      if (r.measured > 0) min_factor = std::min(min_factor, r.min_factor);
    }
  }
  Checks c;
  c.expect(mismatches == 0, std::to_string(mismatches) + " mismatches");
  c.expect(!(min_factor < 1.0), "elongation factor " + num(min_factor, 12) + " below 1");
  return c.outcome("500 streams, " + std::to_string(transitions) +
                   " shortest transitions match brute force; " + std::to_string(samples) +
                   " elongation samples, min e_P = " + num(min_factor, 6) + "; " +
                   num(seconds_since(t0), 3) + " s");
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle equivalence of the minimal-trip sweep", criterion1},
      {"metric closed forms and quadrature", criterion2},
      {"time-uniform proportionality", criterion3},
      {"two-mode plateau", criterion4},
      {"irvine saturation scales", criterion5},
      {"irvine validation", criterion6},
      {"irvine classic endpoints", criterion7},
      {"other datasets", criterion8},
      {"determinism across thread counts", criterion9},
      {"validation oracles", criterion10},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (k < 1 || k > static_cast<int>(criteria.size())) {
      std::cerr << "unknown criterion '" << argv[i] << "'\n";
      return 2;
    }
    selected.push_back(k);
  }
  if (selected.empty())
    for (int k = 1; k <= static_cast<int>(criteria.size()); ++k) selected.push_back(k);

  int failed = 0;
  for (int k : selected) {
    const auto& [title, run] = criteria[k - 1];
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {Status::fail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.status == Status::pass ? "PASS" : o.status == Status::fail ? "FAIL" : "SKIP";
    failed += o.status == Status::fail;
    std::cout << tag << "  " << k << "  " << title << ": " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
