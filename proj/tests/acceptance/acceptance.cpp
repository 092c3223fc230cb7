// Runs every acceptance criterion at its pinned tolerance and prints one
// PASS/FAIL line per criterion. Exit status is nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "apsel/scenario.hpp"

using namespace apsel;
namespace fs = std::filesystem;

namespace {

constexpr int kSeeds = 10;

struct Verdict {
  std::string name;
  bool pass;
  std::string detail;
};

std::vector<Verdict> verdicts;

void report(const std::string& name, bool pass, const std::string& detail) {
  verdicts.push_back({name, pass, detail});
  std::printf("%s %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::uint64_t> seed_list() {
  std::vector<std::uint64_t> s;
  for (int k = 1; k <= kSeeds; ++k) s.push_back(static_cast<std::uint64_t>(k));
  return s;
}

// ---------------------------------------------------------------------------

void rate_mapping() {
  struct Case {
    double db;
    std::optional<double> mbps;
  };
  // One point inside every bracket, then the edges.
  const std::vector<Case> cases{{6.5, 6.0},   {8.0, 9.0},   {10.0, 12.0}, {12.0, 18.0}, {18.0, 24.0},
                                {20.0, 36.0}, {24.3, 48.0}, {30.0, 54.0}, {5.0, std::nullopt},
                                {6.0, 6.0},   {24.6, 54.0}};
  int ok = 0;
  for (const auto& c : cases) ok += rate_for_sinr(c.db) == c.mbps;
  report("rate-table", ok == static_cast<int>(cases.size()), fmt("%d/%zu cases exact", ok, cases.size()));
}

void solver_oracle() {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int agree = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 6);
    const int m = 1 + static_cast<int>(rng() % 4);
    AssignmentInstance inst;
    inst.benefit = Eigen::MatrixXd::NullaryExpr(n, m, [&] { return u(rng); });
    inst.feasible = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::NullaryExpr(n, m, [&] { return u(rng) < 0.6; });
    const double a = solve_exact(inst).objective;
    const double b = solve_bruteforce(inst).objective;
    worst = std::max(worst, std::abs(a - b));
    agree += std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b));
  }
  report("solver-oracle", agree == 500, fmt("%d/500 instances agree, max |diff| %.3g", agree, worst));
}

struct Cell {
  int num_stas;
  std::uint64_t seed;
  ScenarioOutcome outcome;
};

double mean_over_seeds(const std::vector<Cell>& cells, int n, Strategy s, bool delay) {
  double sum = 0.0;
  int count = 0;
  for (const auto& c : cells) {
    if (c.num_stas != n) continue;
    const StrategyOutcome* o = c.outcome.find(s);
    if (delay) {
      sum += o->mean_delay_s.value_or(std::nan(""));
    } else {
      sum += o->aggregate_mbps;
    }
    ++count;
  }
  return sum / count;
}

// summary.csv rows keyed by (strategy, num_stas, frame_bytes) -> throughputs over seeds.
std::map<std::tuple<std::string, int, int>, std::vector<double>> read_summary(const fs::path& path) {
  std::map<std::tuple<std::string, int, int>, std::vector<double>> out;
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
    if (f.size() < 7) continue;
    out[{f[1], std::stoi(f[2]), std::stoi(f[4])}].push_back(std::stod(f[6]));
  }
  return out;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? std::nan("") : s / static_cast<double>(v.size());
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  rate_mapping();
  solver_oracle();

  ScenarioSpec spec;
  spec.seeds = seed_list();
  for (int n = 50; n <= 400; n += 50) spec.num_stas.push_back(n);

  std::vector<Cell> cells;
  for (int n : spec.num_stas)
    for (std::uint64_t seed : spec.seeds) cells.push_back({n, seed, run_scenario(spec, seed, n, kDefaultFrameBytes)});

  std::printf("\nseed-averaged results (%d seeds)\n%6s", kSeeds, "stas");
  for (Strategy s : spec.strategies) std::printf(" %9s Mbps %7s ms", std::string(to_string(s)).c_str(), "");
  std::printf("\n");
  for (int n : spec.num_stas) {
    std::printf("%6d", n);
    for (Strategy s : spec.strategies)
      std::printf(" %14.3f %10.3f", mean_over_seeds(cells, n, s, false), 1e3 * mean_over_seeds(cells, n, s, true));
    std::printf("\n");
  }
  std::printf("\n");

  // Exclusivity and conservation, including the warm-up runs.
  {
    std::uint64_t violations = 0, runs = 0, runs_400 = 0;
    bool conserved = true;
    for (const auto& c : cells) {
      violations += c.outcome.warmup_exclusivity_violations;
      conserved = conserved && c.outcome.warmup_conserved;
      for (const auto& s : c.outcome.strategies) {
        violations += s.result.exclusivity_violations;
        conserved = conserved && s.result.conserved();
        ++runs;
        runs_400 += c.num_stas == 400;
      }
    }
    report("exclusivity-conservation", violations == 0 && conserved && runs_400 > 0,
           fmt("%llu measured runs (%llu at 400 STAs, 50 APs, %ld slots): %llu violations, conservation %s",
               static_cast<unsigned long long>(runs), static_cast<unsigned long long>(runs_400), spec.run_duration_slots,
               static_cast<unsigned long long>(violations), conserved ? "holds" : "broken"));
  }

  // Throughput ordering at 300 STAs.
  {
    const double ssf = mean_over_seeds(cells, 300, Strategy::SSF, false);
    const double mpd = mean_over_seeds(cells, 300, Strategy::MPD, false);
    const double dasa = mean_over_seeds(cells, 300, Strategy::DASA, false);
    const double opasa = mean_over_seeds(cells, 300, Strategy::OPASA, false);
    const bool order = opasa >= dasa && dasa > mpd && mpd > ssf;
    const bool ratios = dasa / ssf >= 1.5 && dasa / mpd >= 1.2;
    report("throughput-ordering", order && ratios,
           fmt("300 STAs: OPASA %.3f DASA %.3f MPD %.3f SSF %.3f Mbps; DASA/SSF %.3f (need >= 1.5), "
               "DASA/MPD %.3f (need >= 1.2)",
               opasa, dasa, mpd, ssf, dasa / ssf, dasa / mpd));
  }

  // Delay ordering at 400 STAs and the small-network bound.
  {
    const double ssf = mean_over_seeds(cells, 400, Strategy::SSF, true);
    const double dasa = mean_over_seeds(cells, 400, Strategy::DASA, true);
    double worst50 = 0.0;
    for (Strategy s : spec.strategies) worst50 = std::max(worst50, mean_over_seeds(cells, 50, s, true));
    report("delay-ordering", ssf / dasa >= 1.3 && worst50 < 4e-3,
           fmt("400 STAs: SSF %.3f ms, DASA %.3f ms, ratio %.3f (need >= 1.3); 50 STAs worst %.3f ms (need < 4)",
               ssf * 1e3, dasa * 1e3, ssf / dasa, worst50 * 1e3));
  }

  // Densification.
  {
    bool monotone = true;
    std::string series;
    double prev = -1.0;
    for (int n : spec.num_stas) {
      const double v = mean_over_seeds(cells, n, Strategy::DASA, false);
      monotone = monotone && v >= prev;
      prev = v;
      series += fmt("%s%d:%.3f", series.empty() ? "" : " ", n, v);
    }
    report("densification", monotone, "DASA Mbps " + series);
  }

  // Redundancy of the reduced problem.
  {
    std::uint64_t checked = 0, bad = 0;
    for (const auto& c : cells) {
      checked += c.outcome.redundancy.cells_checked;
      bad += c.outcome.redundancy.counterexamples();
    }
    report("redundancy", bad == 0 && checked > 0,
           fmt("%zu scenarios, %llu feasible cells checked, %llu counterexamples", cells.size(),
               static_cast<unsigned long long>(checked), static_cast<unsigned long long>(bad)));
  }

  const fs::path scratch = fs::temp_directory_path() / "apsel_acceptance";
  fs::remove_all(scratch);

  // Frame-size convergence at 400 STAs on fixed topologies.
  {
    ScenarioSpec frames = spec;
    frames.num_stas = {400};
    frames.frame_sizes = {1400, 1500};
    frames.strategies = {Strategy::MPD, Strategy::DASA};
    const SweepReport r = sweep(frames, {scratch / "frames", 1, {}});
    const auto rows = read_summary(scratch / "frames" / "summary.csv");
    auto gap = [&](int f) {
      return std::abs(mean(rows.at({"DASA", 400, f})) - mean(rows.at({"MPD", 400, f})));
    };
    const double g1400 = gap(1400), g1500 = gap(1500);
    report("frame-size-convergence", r.failed == 0 && g1500 < g1400,
           fmt("|DASA - MPD| at 1400 B %.4f Mbps, at 1500 B %.4f Mbps (need 1500 < 1400)", g1400, g1500));
  }

  // Determinism of the full sweep.
  {
    const SweepReport a = sweep(spec, {scratch / "run1", 1, {}});
    const SweepReport b = sweep(spec, {scratch / "run2", 2, {}});
    bool same = a.failed == 0 && b.failed == 0;
    for (const char* f : {"summary.csv", "links.csv", "manifest.txt"})
      same = same && slurp(scratch / "run1" / f) == slurp(scratch / "run2" / f);
    // The sweep reproduces the direct runs above.
    std::ostringstream direct;
    write_summary_header(direct);
    for (const auto& c : cells) write_summary_rows(direct, c.outcome);
    const bool matches_direct = direct.str() == slurp(scratch / "run1" / "summary.csv");
    report("determinism", same && matches_direct,
           fmt("%zu cells twice (1 and 2 workers): CSVs and manifest %s; sweep %s the direct runs", a.cells,
               same ? "byte-identical" : "differ", matches_direct ? "matches" : "differs from"));
  }
  fs::remove_all(scratch);

  int failed = 0;
  for (const auto& v : verdicts) failed += !v.pass;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("\n%zu criteria, %d failed, %.0f s\n", verdicts.size(), failed, secs);
  return failed == 0 ? 0 : 1;
}
