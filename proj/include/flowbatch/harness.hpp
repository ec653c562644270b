#pragma once
// Experiment orchestration: named (preset x algorithm x horizon) matrices,
// seeded repetition (trial i uses base_seed + i, identical across cells so
// algorithms are seed-paired), result persistence, and table/trace emission.
//
// Output layout under an output directory:
//   <preset>/<ALGO>/<H>H/trace_<trial>.csv       per-trial gens,OV curves
//   <preset>/<ALGO>/<H>H/archive_<trial>.csv     surrogate runs only
//   summary_<preset>.csv                         quality-indicator table
//   comparison_<preset>.csv                      surrogate rows vs baselines
// All floats are written with fixed two decimals; every file is a pure
// function of (spec, base seed).

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "flowbatch/evolutionary.hpp"
#include "flowbatch/metrics.hpp"
#include "flowbatch/plant.hpp"
#include "flowbatch/psaf.hpp"

namespace flowbatch {

// --- known optima -------------------------------------------------------------

// Best achievable objective per (preset, horizon), used as the reference for
// SR/AESR/AGSR thresholds.
class OptimaTable {
 public:
  static double optimum_for(const std::string& preset, double horizon_hours) {
    const int h = static_cast<int>(horizon_hours);
    static const std::map<std::pair<std::string, int>, double> table = {
        {{"primary", 12}, 100},  {{"primary", 24}, 350},
        {{"primary", 36}, 625},  {{"primary", 48}, 900},
        {{"primary", 60}, 1150}, {{"primary", 72}, 1425},
        {{"primary", 168}, 3550}, {{"variant", 12}, 100},
        {{"variant", 24}, 325},  {{"variant", 36}, 575},
        {{"variant", 48}, 800},  {{"variant", 60}, 1000},
        {{"variant", 72}, 1250}, {{"variant", 168}, 2825},
    };
    const auto it = table.find({preset, h});
    if (it == table.end() || static_cast<double>(h) != horizon_hours)
      throw std::invalid_argument("no known optimum for preset '" + preset +
                                  "' at horizon " +
                                  std::to_string(horizon_hours));
    return it->second;
  }
};

// Success thresholds per preset: the tighter variant uses looser percentages.
inline std::pair<double, double> thresholds_for(const std::string& preset) {
  if (preset == "primary") return {95.0, 99.5};
  if (preset == "variant") return {90.0, 95.0};
  throw std::invalid_argument("unknown preset: " + preset);
}

// --- algorithms ---------------------------------------------------------------

enum class AlgoKind { ga, de, psaf_ga, psaf_de };

inline const char* to_string(AlgoKind a) {
  switch (a) {
    case AlgoKind::ga: return "GA";
    case AlgoKind::de: return "DE";
    case AlgoKind::psaf_ga: return "PSAF-GA";
    case AlgoKind::psaf_de: return "PSAF-DE";
  }
  return "?";
}

inline AlgoKind parse_algo(std::string name) {
  for (auto& c : name) c = static_cast<char>(std::tolower(c));
  if (name == "ga") return AlgoKind::ga;
  if (name == "de") return AlgoKind::de;
  if (name == "psaf-ga" || name == "psaf_ga") return AlgoKind::psaf_ga;
  if (name == "psaf-de" || name == "psaf_de") return AlgoKind::psaf_de;
  throw std::invalid_argument("unknown algorithm: " + name);
}

inline bool is_surrogate_assisted(AlgoKind a) {
  return a == AlgoKind::psaf_ga || a == AlgoKind::psaf_de;
}

inline AlgoKind baseline_of(AlgoKind a) {
  switch (a) {
    case AlgoKind::psaf_ga: return AlgoKind::ga;
    case AlgoKind::psaf_de: return AlgoKind::de;
    default: return a;
  }
}

// --- experiment spec -----------------------------------------------------------

struct ExperimentSpec {
  std::string preset = "primary";  // primary | variant
  std::vector<double> horizons = {12, 24, 36, 48, 60, 72, 168};
  std::vector<AlgoKind> algorithms = {AlgoKind::ga, AlgoKind::de,
                                      AlgoKind::psaf_ga, AlgoKind::psaf_de};
  int n_trials = 30;
  std::uint64_t base_seed = 1;
  EAParams ea;                       // template; seed set per trial
  PsafParams psaf;                   // alpha/beta/n_infills; inner = ea
  std::optional<int> generations_override;  // otherwise 20 (15 at 168H)
  std::string out_dir;               // empty: keep results in memory only
  int jobs = 1;                      // worker-pool width; trials stay
                                     // independent, so results never depend
                                     // on it

  int generations_for(double horizon_hours) const {
    if (generations_override) return *generations_override;
    return static_cast<int>(horizon_hours) == 168 ? 15 : 20;
  }
};

struct CellResult {
  AlgoKind algorithm{};
  double horizon_hours = 0.0;
  QualityReport report;
  std::vector<TrialRecord> trials;
};

struct ExperimentResult {
  std::string preset;
  std::vector<CellResult> cells;

  std::vector<QualityReport> reports() const {
    std::vector<QualityReport> rs;
    rs.reserve(cells.size());
    for (const auto& c : cells) rs.push_back(c.report);
    return rs;
  }
};

// --- formatting helpers ---------------------------------------------------------

namespace detail {

inline std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string horizon_label(double h) {
  return std::to_string(static_cast<int>(h)) + "H";
}

inline std::string sr_header(double p) {
  char buf[32];
  // 95 -> "SR@95", 99.5 -> "SR@99.5"
  if (p == static_cast<int>(p))
    std::snprintf(buf, sizeof buf, "%d", static_cast<int>(p));
  else
    std::snprintf(buf, sizeof buf, "%.1f", p);
  return buf;
}

}  // namespace detail

// --- single trial --------------------------------------------------------------

// Runs one seeded trial; when `archive_path` is non-empty and the algorithm
// is surrogate-assisted, the evaluation archive is written there.
inline TrialRecord run_trial(const PlantConfig& config, double horizon_hours,
                             AlgoKind algo, const ExperimentSpec& spec,
                             std::uint64_t seed,
                             const std::string& archive_path = {}) {
  Problem problem{config, horizon_hours};
  EAParams ea = spec.ea;
  ea.n_generations = spec.generations_for(horizon_hours);
  ea.seed = seed;

  if (!is_surrogate_assisted(algo)) {
    RunResult r = run(algo == AlgoKind::ga ? Algorithm::ga : Algorithm::de,
                      problem, ea);
    return make_trial(r.trace, seed);
  }

  PsafParams pp = spec.psaf;
  pp.inner = ea;
  pp.baseline =
      algo == AlgoKind::psaf_ga ? Algorithm::ga : Algorithm::de;
  PsafResult r = run_psaf(problem, pp);
  if (!archive_path.empty()) {
    std::ofstream os(archive_path);
    if (!os) throw std::runtime_error("cannot write " + archive_path);
    r.archive.write_csv(os);
  }
  return make_trial(r.trace, seed);
}

// --- tables ----------------------------------------------------------------------

// Summary CSV in the quality-indicator table layout.
inline void emit_summary(const std::vector<QualityReport>& reports,
                         std::ostream& os) {
  if (reports.empty()) return;
  const std::string p1 = detail::sr_header(reports.front().p1);
  const std::string p2 = detail::sr_header(reports.front().p2);
  os << "Algorithm,TimeHorizon,ObjectiveValue,SR@" << p1 << ",SR@" << p2
     << ",AESR@" << p1 << ",AESR@" << p2 << ",AGSR@" << p1 << ",AGSR@" << p2
     << "\n";
  for (const auto& r : reports) {
    os << r.algorithm << ',' << detail::horizon_label(r.horizon_hours) << ','
       << detail::fmt2(r.optimum) << ',' << detail::fmt2(r.sr1) << ','
       << detail::fmt2(r.sr2) << ',' << detail::fmt2(r.aesr1) << ','
       << detail::fmt2(r.aesr2) << ',' << detail::fmt2(r.agsr1) << ','
       << detail::fmt2(r.agsr2) << '\n';
  }
}

namespace detail {

// Higher SR is better.
inline std::string mark_sr(double ours, double base) {
  if (ours > base) return "+";
  if (ours < base) return "-";
  return "=";
}

// Lower AESR/AGSR is better when both sides succeeded; 0 means "never
// succeeded", so 0-vs-0 is a tie and mixed cells have no defined direction.
inline std::string mark_cost(double ours, double base) {
  const bool z1 = ours == 0.0, z2 = base == 0.0;
  if (z1 && z2) return "=";
  if (z1 != z2) return "incomparable";
  if (ours < base) return "+";
  if (ours > base) return "-";
  return "=";
}

}  // namespace detail

// Comparison CSV: one row per surrogate-assisted report, each metric cell
// annotated against the same-horizon baseline (+ better, - worse, = tie,
// "incomparable" for mixed success/no-success cost cells). Throws if a
// surrogate row lacks its baseline.
inline void emit_comparison(const std::vector<QualityReport>& reports,
                            std::ostream& os) {
  const auto find_report =
      [&reports](const std::string& algo,
                 double horizon) -> const QualityReport* {
    for (const auto& r : reports)
      if (r.algorithm == algo && r.horizon_hours == horizon) return &r;
    return nullptr;
  };

  bool wrote_header = false;
  for (const auto& r : reports) {
    AlgoKind kind;
    try {
      kind = parse_algo(r.algorithm);
    } catch (const std::invalid_argument&) {
      continue;
    }
    if (!is_surrogate_assisted(kind)) continue;
    const QualityReport* base =
        find_report(to_string(baseline_of(kind)), r.horizon_hours);
    if (base == nullptr)
      throw std::invalid_argument("comparison: no baseline for " +
                                  r.algorithm + " at " +
                                  detail::horizon_label(r.horizon_hours));
    if (!wrote_header) {
      const std::string p1 = detail::sr_header(r.p1);
      const std::string p2 = detail::sr_header(r.p2);
      os << "Algorithm,TimeHorizon,ObjectiveValue";
      for (const auto& m : {"SR@" + p1, "SR@" + p2, "AESR@" + p1,
                            "AESR@" + p2, "AGSR@" + p1, "AGSR@" + p2})
        os << ',' << m << ',' << m << "_vs_baseline";
      os << '\n';
      wrote_header = true;
    }
    os << r.algorithm << ',' << detail::horizon_label(r.horizon_hours) << ','
       << detail::fmt2(r.optimum);
    os << ',' << detail::fmt2(r.sr1) << ',' << detail::mark_sr(r.sr1, base->sr1);
    os << ',' << detail::fmt2(r.sr2) << ',' << detail::mark_sr(r.sr2, base->sr2);
    os << ',' << detail::fmt2(r.aesr1) << ','
       << detail::mark_cost(r.aesr1, base->aesr1);
    os << ',' << detail::fmt2(r.aesr2) << ','
       << detail::mark_cost(r.aesr2, base->aesr2);
    os << ',' << detail::fmt2(r.agsr1) << ','
       << detail::mark_cost(r.agsr1, base->agsr1);
    os << ',' << detail::fmt2(r.agsr2) << ','
       << detail::mark_cost(r.agsr2, base->agsr2);
    os << '\n';
  }
}

// --- full experiment --------------------------------------------------------------

inline ExperimentResult run_experiment(const ExperimentSpec& spec) {
  const PlantConfig config = PlantConfig::preset(spec.preset);
  const auto [p1, p2] = thresholds_for(spec.preset);
  if (spec.n_trials < 1) throw std::invalid_argument("n_trials >= 1");

  namespace fs = std::filesystem;
  const bool persist = !spec.out_dir.empty();

  ExperimentResult result;
  result.preset = spec.preset;

  for (AlgoKind algo : spec.algorithms) {
    for (double h : spec.horizons) {
      const double optimum = OptimaTable::optimum_for(spec.preset, h);

      std::string cell_dir;
      if (persist) {
        cell_dir = (fs::path(spec.out_dir) / spec.preset / to_string(algo) /
                    detail::horizon_label(h))
                       .string();
        fs::create_directories(cell_dir);
      }

      CellResult cell;
      cell.algorithm = algo;
      cell.horizon_hours = h;
      cell.trials.resize(static_cast<std::size_t>(spec.n_trials));

      // Each trial is a pure function of its seed and writes only its own
      // files, so a pool of any width produces identical results.
      const auto one_trial = [&](int i) {
        const std::uint64_t seed =
            spec.base_seed + static_cast<std::uint64_t>(i);
        std::string archive_path;
        if (persist && is_surrogate_assisted(algo))
          archive_path = cell_dir + "/archive_" + std::to_string(i) + ".csv";
        TrialRecord trial =
            run_trial(config, h, algo, spec, seed, archive_path);
        if (persist) {
          std::ofstream os(cell_dir + "/trace_" + std::to_string(i) + ".csv");
          if (!os)
            throw std::runtime_error("cannot write trace in " + cell_dir);
          trial.trace.write_csv(os);
        }
        cell.trials[static_cast<std::size_t>(i)] = std::move(trial);
      };

      const int pool = std::max(1, std::min(spec.jobs, spec.n_trials));
      if (pool == 1) {
        for (int i = 0; i < spec.n_trials; ++i) one_trial(i);
      } else {
        std::atomic<int> next(0);
        std::vector<std::exception_ptr> errors(
            static_cast<std::size_t>(pool));
        std::vector<std::thread> workers;
        workers.reserve(static_cast<std::size_t>(pool));
        for (int w = 0; w < pool; ++w) {
          workers.emplace_back([&, w] {
            try {
              for (int i = next.fetch_add(1); i < spec.n_trials;
                   i = next.fetch_add(1))
                one_trial(i);
            } catch (...) {
              errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
          });
        }
        for (auto& t : workers) t.join();
        for (const auto& err : errors)
          if (err) std::rethrow_exception(err);
      }

      cell.report = make_report(to_string(algo), h, optimum, p1, p2,
                                cell.trials);
      result.cells.push_back(std::move(cell));
    }
  }

  if (persist) {
    std::ofstream os(fs::path(spec.out_dir) /
                     ("summary_" + spec.preset + ".csv"));
    if (!os) throw std::runtime_error("cannot write summary CSV");
    emit_summary(result.reports(), os);

    const bool any_pair = std::any_of(
        spec.algorithms.begin(), spec.algorithms.end(), [&spec](AlgoKind a) {
          return is_surrogate_assisted(a) &&
                 std::find(spec.algorithms.begin(), spec.algorithms.end(),
                           baseline_of(a)) != spec.algorithms.end();
        });
    if (any_pair) {
      std::ofstream cs(fs::path(spec.out_dir) /
                       ("comparison_" + spec.preset + ".csv"));
      if (!cs) throw std::runtime_error("cannot write comparison CSV");
      emit_comparison(result.reports(), cs);
    }
  }

  return result;
}

// --- trace aggregates ---------------------------------------------------------------

// Per-generation median of best-so-far across a cell's trials; the plot-data
// aggregate behind the convergence figures.
inline std::vector<TraceEntry> median_trace(const CellResult& cell) {
  std::vector<TraceEntry> out;
  if (cell.trials.empty()) return out;
  const std::size_t n_entries = cell.trials.front().trace.entries.size();
  for (const auto& t : cell.trials)
    if (t.trace.entries.size() != n_entries)
      throw std::logic_error("median_trace: ragged traces");
  for (std::size_t g = 0; g < n_entries; ++g) {
    std::vector<double> bests;
    bests.reserve(cell.trials.size());
    for (const auto& t : cell.trials)
      bests.push_back(t.trace.entries[g].best);
    std::sort(bests.begin(), bests.end());
    const std::size_t m = bests.size();
    const double med = (m % 2 == 1)
                           ? bests[m / 2]
                           : 0.5 * (bests[m / 2 - 1] + bests[m / 2]);
    out.push_back({cell.trials.front().trace.entries[g].generation, med,
                   cell.trials.front().trace.entries[g].evaluations});
  }
  return out;
}

// Writes one `<H>_<ALGO>.csv` (gens,OV) aggregate per cell.
inline void write_trace_aggregates(const ExperimentResult& result,
                                   const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  for (const auto& cell : result.cells) {
    const std::string name =
        std::to_string(static_cast<int>(cell.horizon_hours)) + "_" +
        to_string(cell.algorithm) + ".csv";
    std::ofstream os(fs::path(out_dir) / name);
    if (!os) throw std::runtime_error("cannot write " + name);
    os << "gens,OV\n";
    for (const auto& e : median_trace(cell))
      os << e.generation << ',' << detail::fmt2(e.best) << '\n';
  }
}

}  // namespace flowbatch
