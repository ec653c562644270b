#pragma once
// Probabilistic surrogate-assisted framework wrapping a baseline EA.
//
// Each generation runs two surrogate phases before spending any simulator
// budget:
//   alpha-phase  — a parent pool is filled by size-alpha tournaments decided
//                  on cached surrogate predictions of the current population
//                  (ties go to the first-drawn competitor), then the
//                  baseline's variation operators produce one candidate per
//                  population slot;
//   beta-phase   — the baseline's variation+selection loop runs for beta
//                  further generations with predict() as a free fitness.
// The surviving candidates are ranked by prediction, deduplicated against
// the archive and each other, and the top n_infills (topped up with fresh
// random genomes when duplicates run out) are evaluated on the true
// simulator — exactly n_infills true evaluations per generation. Survival
// back into the population is (mu+lambda) truncation on true fitness.
//
// Candidate individuals inside the two phases carry surrogate scores in
// their fitness slot; they are re-scored on the true simulator if and only
// if they are chosen as infills. The trace records true evaluations only.
//
// Disabling the surrogate (use_surrogate = false, the alpha=1/beta=0
// setting) delegates each generation to the baseline step implementation —
// the same code path consuming the same random stream — so a paired-seed
// PSAF run reproduces the baseline trace bit for bit.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "flowbatch/encoding.hpp"
#include "flowbatch/evolutionary.hpp"
#include "flowbatch/rng.hpp"
#include "flowbatch/surrogate.hpp"

namespace flowbatch {

struct PsafParams {
  int alpha = 5;        // tournament size on surrogate predictions
  int beta = 5;         // surrogate-only refinement generations
  int n_infills = 10;   // true evaluations per generation
  Algorithm baseline = Algorithm::ga;
  EAParams inner;       // population/operator/seed settings
  bool use_surrogate = true;

  void validate() const {
    inner.validate();
    if (alpha < 1) throw std::invalid_argument("alpha >= 1");
    if (beta < 0) throw std::invalid_argument("beta >= 0");
    if (n_infills < 1) throw std::invalid_argument("n_infills >= 1");
  }
};

struct PsafState {
  std::vector<Individual> population;  // true-evaluated
  EvalArchive archive;                 // every true evaluation ever made
  SurrogateModel model;
  RunTrace trace;
  Individual best;
};

struct PsafResult {
  Individual best;
  RunTrace trace;
  EvalArchive archive;
};

// --- alpha phase --------------------------------------------------------------

// Fills pool_size parent slots; slot = argmax of predictions among alpha
// uniformly drawn competitor indices, ties to the first drawn. Consumes
// exactly pool_size * alpha index draws.
inline std::vector<std::size_t> alpha_phase(
    const std::vector<double>& predictions, int alpha, std::size_t pool_size,
    Rng& rng) {
  std::vector<std::size_t> pool(pool_size);
  for (std::size_t slot = 0; slot < pool_size; ++slot) {
    std::size_t winner = rng.next_below(predictions.size());
    for (int t = 1; t < alpha; ++t) {
      const std::size_t c = rng.next_below(predictions.size());
      if (predictions[c] > predictions[winner]) winner = c;
    }
    pool[slot] = winner;
  }
  return pool;
}

// --- candidate generation (baseline variation over the parent pool) -----------

namespace detail {

inline std::vector<Individual> vary_candidates(
    const std::vector<Individual>& pop, const std::vector<std::size_t>& pool,
    const PsafParams& params, const SurrogateModel& model, Rng& rng) {
  const std::size_t n = pool.size();
  const std::size_t L = pop.front().genome.bits.size();
  const double mrate = params.inner.effective_mutation_rate(L);
  std::vector<Individual> cands;
  cands.reserve(n);

  if (params.baseline == Algorithm::ga) {
    // Consecutive parent pairs, two children per pair (segment exchange).
    for (std::size_t k = 0; k + 1 < n; k += 2) {
      const auto& g1 = pop[pool[k]].genome;
      const auto& g2 = pop[pool[k + 1]].genome;
      Individual c1{g1, std::nullopt}, c2{g2, std::nullopt};
      if (rng.next_real01() < params.inner.crossover_rate) {
        std::size_t a = rng.next_below(L + 1);
        std::size_t b = rng.next_below(L + 1);
        if (a > b) std::swap(a, b);
        for (std::size_t j = a; j < b; ++j) {
          c1.genome.bits[j] = g2.bits[j];
          c2.genome.bits[j] = g1.bits[j];
        }
      }
      mutate_bits(c1.genome.bits, mrate, rng);
      mutate_bits(c2.genome.bits, mrate, rng);
      cands.push_back(std::move(c1));
      cands.push_back(std::move(c2));
    }
    if (n % 2 == 1) {  // unpaired last slot: mutated copy
      Individual c{pop[pool[n - 1]].genome, std::nullopt};
      mutate_bits(c.genome.bits, mrate, rng);
      cands.push_back(std::move(c));
    }
  } else {
    // rand/1/bin per slot with base and donors drawn from the pool.
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t s1, s2, s3;
      do s1 = rng.next_below(n); while (s1 == k);
      do s2 = rng.next_below(n); while (s2 == k || s2 == s1);
      do s3 = rng.next_below(n); while (s3 == k || s3 == s1 || s3 == s2);
      const std::size_t jrand = rng.next_below(L);
      Individual trial{pop[pool[k]].genome, std::nullopt};
      const auto& b1 = pop[pool[s1]].genome.bits;
      const auto& b2 = pop[pool[s2]].genome.bits;
      const auto& b3 = pop[pool[s3]].genome.bits;
      for (std::size_t j = 0; j < L; ++j) {
        const bool cross = rng.next_real01() < params.inner.de_CR || j == jrand;
        if (!cross) continue;
        const double v = static_cast<double>(b1[j]) +
                         params.inner.de_F * (static_cast<double>(b2[j]) -
                                              static_cast<double>(b3[j]));
        trial.genome.bits[j] = v >= 0.5 ? 1u : 0u;
      }
      cands.push_back(std::move(trial));
    }
  }

  for (auto& c : cands) c.fitness = model.predict(c.genome);
  return cands;
}

}  // namespace detail

// --- beta phase ---------------------------------------------------------------

// Runs the baseline's variation+selection loop for beta generations with the
// surrogate as fitness. Zero true evaluations; beta = 0 returns the seed
// candidates unchanged.
inline std::vector<Individual> beta_phase(std::vector<Individual> candidates,
                                          const SurrogateModel& model,
                                          const PsafParams& params, Rng& rng) {
  const FitnessFn predict = [&model](const InstructionVector& g) {
    return model.predict(g);
  };
  EAParams ea = params.inner;
  ea.population_size = static_cast<int>(candidates.size());
  for (int b = 0; b < params.beta; ++b) {
    if (params.baseline == Algorithm::ga)
      ga_generation_with(candidates, ea, predict, rng);
    else
      de_generation_with(candidates, ea, predict, rng, b);
  }
  return candidates;
}

// --- one PSAF generation ------------------------------------------------------

inline void psaf_generation(PsafState& st, const PsafParams& params,
                            TrueEvaluator& eval, Rng& rng) {
  const std::size_t n = st.population.size();
  const double horizon = eval.problem().horizon_hours;

  // Cached predictions of current members feed the alpha tournaments.
  std::vector<double> preds(n);
  for (std::size_t i = 0; i < n; ++i)
    preds[i] = st.model.predict(st.population[i].genome);

  std::vector<std::size_t> pool = alpha_phase(preds, params.alpha, n, rng);
  std::vector<Individual> cands =
      detail::vary_candidates(st.population, pool, params, st.model, rng);
  cands = beta_phase(std::move(cands), st.model, params, rng);

  // Rank candidates by prediction (descending, ties to lower index).
  std::vector<std::size_t> order(cands.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&cands](std::size_t a, std::size_t b) {
                     return fitness_of(cands[a]) > fitness_of(cands[b]);
                   });

  // Top n_infills distinct genomes not already archived; top up with fresh
  // random genomes so exactly n_infills true evaluations happen.
  std::vector<Individual> infills;
  std::unordered_set<std::string> chosen;
  for (std::size_t idx : order) {
    if (static_cast<int>(infills.size()) >= params.n_infills) break;
    std::string key = cands[idx].genome.bit_line();
    if (st.archive.contains(cands[idx].genome) || chosen.count(key)) continue;
    chosen.insert(std::move(key));
    infills.push_back(std::move(cands[idx]));
  }
  while (static_cast<int>(infills.size()) < params.n_infills) {
    InstructionVector g = random_init(horizon, rng);
    for (int attempt = 0;
         attempt < 64 && (st.archive.contains(g) || chosen.count(g.bit_line()));
         ++attempt)
      g = random_init(horizon, rng);
    chosen.insert(g.bit_line());
    infills.push_back({std::move(g), std::nullopt});
  }

  for (auto& ind : infills) ind.fitness = eval.evaluate(ind.genome);

  truncate_population(st.population, infills, n);
  st.model = SurrogateModel::fit(st.archive);
}

// --- full run -----------------------------------------------------------------

// Same trace contract as the baseline run(): initial population = generation
// 1 with population_size evaluations; each generation afterwards adds exactly
// n_infills true evaluations (n_offspring for the delegated baseline path).
inline PsafResult run_psaf(const Problem& problem, const PsafParams& params) {
  params.validate();
  problem.config.validate();
  const EAParams& ea = params.inner;

  PsafState st;
  Rng rng(ea.seed);
  TrueEvaluator eval(problem, [&st](const InstructionVector& g, double y) {
    st.archive.insert(g, y);
  });

  st.population = init_population(problem, ea, eval, rng);
  st.best = st.population[best_index(st.population)];
  st.trace.entries.push_back({1, fitness_of(st.best), eval.count()});

  for (int s = 0; s < ea.n_generations; ++s) {
    if (!params.use_surrogate) {
      // Baseline delegation: identical step code, identical random stream.
      if (params.baseline == Algorithm::ga)
        ga_generation(st.population, ea, eval, rng);
      else
        de_generation(st.population, ea, eval, rng, s);
    } else {
      if (s == 0) st.model = SurrogateModel::fit(st.archive);
      psaf_generation(st, params, eval, rng);
    }
    const Individual& gen_best = st.population[best_index(st.population)];
    if (fitness_of(gen_best) > fitness_of(st.best)) st.best = gen_best;
    st.trace.entries.push_back({s + 2, fitness_of(st.best), eval.count()});
  }

  return {std::move(st.best), std::move(st.trace), std::move(st.archive)};
}

}  // namespace flowbatch
