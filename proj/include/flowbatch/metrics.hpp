#pragma once
// Quality indicators over repeated trials: Success Rate (SR@p), Average
// Evaluations to a Solution (AESR@p), Average Generations to a Solution
// (AGSR@p). Maximization: a trial succeeds at level p when its best
// objective reaches (p/100) * optimum; AESR/AGSR average the first
// best-so-far crossing over successful trials only and report 0 when no
// trial succeeds.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "flowbatch/evolutionary.hpp"

namespace flowbatch {

struct TrialRecord {
  RunTrace trace;
  double best = 0.0;  // max over the trace
  std::uint64_t seed = 0;
};

inline TrialRecord make_trial(const RunTrace& trace, std::uint64_t seed) {
  TrialRecord t{trace, 0.0, seed};
  for (const auto& e : trace.entries) t.best = std::max(t.best, e.best);
  return t;
}

namespace detail {
// Guards the >= threshold comparison against representation error only
// (objectives and optima are exact small doubles; thresholds like
// 0.995 * 3550 are not).
constexpr double kThresholdSlack = 1e-9;

inline double threshold(double optimum, double p) {
  return (p / 100.0) * optimum - kThresholdSlack;
}

inline void require_valid(const std::vector<TrialRecord>& trials,
                          double optimum, double p) {
  if (trials.empty())
    throw std::invalid_argument("metrics: empty trial set");
  if (!(optimum > 0.0))
    throw std::invalid_argument("metrics: optimum must be positive");
  if (!(p > 0.0 && p <= 100.0))
    throw std::invalid_argument("metrics: p must be in (0, 100]");
}
}  // namespace detail

inline bool trial_succeeds(const TrialRecord& t, double optimum, double p) {
  return t.best >= detail::threshold(optimum, p);
}

// 100 * (successful trials) / (all trials).
inline double success_rate(const std::vector<TrialRecord>& trials,
                           double optimum, double p) {
  detail::require_valid(trials, optimum, p);
  std::size_t hits = 0;
  for (const auto& t : trials)
    if (trial_succeeds(t, optimum, p)) ++hits;
  return 100.0 * static_cast<double>(hits) /
         static_cast<double>(trials.size());
}

// Mean over successful trials of the cumulative evaluation count at the
// first trace entry whose best-so-far crosses the threshold; 0 when no
// trial succeeds.
inline double avg_evals_to_solution(const std::vector<TrialRecord>& trials,
                                    double optimum, double p) {
  detail::require_valid(trials, optimum, p);
  const double thr = detail::threshold(optimum, p);
  double sum = 0.0;
  std::size_t hits = 0;
  for (const auto& t : trials) {
    for (const auto& e : t.trace.entries) {
      if (e.best >= thr) {
        sum += static_cast<double>(e.evaluations);
        ++hits;
        break;
      }
    }
  }
  return hits == 0 ? 0.0 : sum / static_cast<double>(hits);
}

// Same with the generation index (initial population = generation 1).
inline double avg_gens_to_solution(const std::vector<TrialRecord>& trials,
                                   double optimum, double p) {
  detail::require_valid(trials, optimum, p);
  const double thr = detail::threshold(optimum, p);
  double sum = 0.0;
  std::size_t hits = 0;
  for (const auto& t : trials) {
    for (const auto& e : t.trace.entries) {
      if (e.best >= thr) {
        sum += static_cast<double>(e.generation);
        ++hits;
        break;
      }
    }
  }
  return hits == 0 ? 0.0 : sum / static_cast<double>(hits);
}

struct QualityReport {
  std::string algorithm;
  double horizon_hours = 0.0;
  double optimum = 0.0;
  int n_trials = 0;
  double p1 = 0.0, p2 = 0.0;  // the two thresholds, p1 < p2
  double sr1 = 0.0, sr2 = 0.0;
  double aesr1 = 0.0, aesr2 = 0.0;
  double agsr1 = 0.0, agsr2 = 0.0;
};

inline QualityReport make_report(const std::string& algorithm,
                                 double horizon_hours, double optimum,
                                 double p1, double p2,
                                 const std::vector<TrialRecord>& trials) {
  QualityReport r;
  r.algorithm = algorithm;
  r.horizon_hours = horizon_hours;
  r.optimum = optimum;
  r.n_trials = static_cast<int>(trials.size());
  r.p1 = p1;
  r.p2 = p2;
  r.sr1 = success_rate(trials, optimum, p1);
  r.sr2 = success_rate(trials, optimum, p2);
  r.aesr1 = avg_evals_to_solution(trials, optimum, p1);
  r.aesr2 = avg_evals_to_solution(trials, optimum, p2);
  r.agsr1 = avg_gens_to_solution(trials, optimum, p1);
  r.agsr2 = avg_gens_to_solution(trials, optimum, p2);
  return r;
}

}  // namespace flowbatch
