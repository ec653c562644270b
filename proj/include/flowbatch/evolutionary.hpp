#pragma once
// Baseline population metaheuristics over binary instruction vectors:
// a genetic algorithm (binary tournament, two-point crossover, per-bit
// mutation, (mu+lambda) truncation) and differential evolution
// (rand/1/bin on a [0,1] relaxation, thresholded back to bits, one-to-one
// greedy replacement over round-robin targets).
//
// Determinism contract: every random draw goes through the portable Rng in
// a frozen order, so a (params, seed) pair reproduces the identical run on
// any platform. The generation-step functions are exposed (not just run())
// so the surrogate-assisted wrapper can delegate to the exact same code
// path when its surrogate is disabled.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "flowbatch/encoding.hpp"
#include "flowbatch/plant.hpp"
#include "flowbatch/rng.hpp"
#include "flowbatch/sim.hpp"

namespace flowbatch {

struct Problem {
  PlantConfig config;
  double horizon_hours = 12.0;
};

// Counts true simulator evaluations and notifies an optional observer
// (used by the surrogate archive). Evaluation consumes no randomness.
class TrueEvaluator {
 public:
  using Observer = std::function<void(const InstructionVector&, double)>;

  explicit TrueEvaluator(Problem problem, Observer observer = {})
      : problem_(std::move(problem)), observer_(std::move(observer)) {}

  double evaluate(const InstructionVector& genome) {
    const double y =
        simulate(problem_.config, genome, problem_.horizon_hours).yield_amount;
    ++count_;
    if (observer_) observer_(genome, y);
    return y;
  }

  long long count() const { return count_; }
  const Problem& problem() const { return problem_; }

 private:
  Problem problem_;
  Observer observer_;
  long long count_ = 0;
};

struct Individual {
  InstructionVector genome;
  std::optional<double> fitness;  // set once truly evaluated
};

inline double fitness_of(const Individual& ind) {
  if (!ind.fitness) throw std::logic_error("individual not evaluated");
  return *ind.fitness;
}

struct EAParams {
  int population_size = 30;
  int n_offspring = 10;
  int n_generations = 20;
  double crossover_rate = 0.9;
  std::optional<double> mutation_rate;  // default: 1/genome_length
  double de_F = 0.5;
  double de_CR = 0.9;
  std::uint64_t seed = 1;

  double effective_mutation_rate(std::size_t genome_length) const {
    return mutation_rate ? *mutation_rate
                         : 1.0 / static_cast<double>(genome_length);
  }
  void validate() const {
    if (population_size < 2) throw std::invalid_argument("population_size >= 2");
    if (n_offspring < 1) throw std::invalid_argument("n_offspring >= 1");
    if (n_generations < 0) throw std::invalid_argument("n_generations >= 0");
  }
};

struct TraceEntry {
  int generation = 0;        // initial population = generation 1
  double best = 0.0;         // best objective so far (non-decreasing)
  long long evaluations = 0; // cumulative true evaluations
};

struct RunTrace {
  std::vector<TraceEntry> entries;

  // Plot-data serialization: x=gens, y=OV, fixed two decimals.
  void write_csv(std::ostream& os) const {
    os << "gens,OV\n";
    char buf[32];
    for (const auto& e : entries) {
      std::snprintf(buf, sizeof buf, "%.2f", e.best);
      os << e.generation << ',' << buf << '\n';
    }
  }
};

enum class Algorithm { ga, de };

inline const char* to_string(Algorithm a) {
  return a == Algorithm::ga ? "GA" : "DE";
}

// --- shared helpers ---------------------------------------------------------

// Index of the best individual; ties go to the lower index.
inline std::size_t best_index(const std::vector<Individual>& pop) {
  std::size_t b = 0;
  for (std::size_t i = 1; i < pop.size(); ++i)
    if (fitness_of(pop[i]) > fitness_of(pop[b])) b = i;
  return b;
}

// Binary tournament on true fitness; ties go to the lower population index.
inline std::size_t tournament_pick(const std::vector<Individual>& pop,
                                   Rng& rng) {
  const std::size_t i = rng.next_below(pop.size());
  const std::size_t j = rng.next_below(pop.size());
  const double fi = fitness_of(pop[i]);
  const double fj = fitness_of(pop[j]);
  if (fi > fj) return i;
  if (fj > fi) return j;
  return std::min(i, j);
}

// Copies [cut1, cut2) of `donor` into `bits` (two-point crossover, one child).
inline void two_point_cross(std::vector<std::uint8_t>& bits,
                            const std::vector<std::uint8_t>& donor, Rng& rng) {
  std::size_t a = rng.next_below(bits.size() + 1);
  std::size_t b = rng.next_below(bits.size() + 1);
  if (a > b) std::swap(a, b);
  for (std::size_t k = a; k < b; ++k) bits[k] = donor[k];
}

inline void mutate_bits(std::vector<std::uint8_t>& bits, double rate,
                        Rng& rng) {
  for (auto& b : bits)
    if (rng.next_real01() < rate) b ^= 1u;
}

// (mu+lambda) truncation: parents then offspring, stable-sorted by fitness
// descending, so ties keep the lower combined index (parents first).
inline void truncate_population(std::vector<Individual>& pop,
                                std::vector<Individual>& offspring,
                                std::size_t mu) {
  for (auto& c : offspring) pop.push_back(std::move(c));
  offspring.clear();
  std::stable_sort(pop.begin(), pop.end(),
                   [](const Individual& x, const Individual& y) {
                     return fitness_of(x) > fitness_of(y);
                   });
  if (pop.size() > mu) pop.resize(mu);
}

inline std::vector<Individual> init_population(const Problem& problem,
                                               const EAParams& params,
                                               TrueEvaluator& eval, Rng& rng) {
  std::vector<Individual> pop;
  pop.reserve(static_cast<std::size_t>(params.population_size));
  for (int i = 0; i < params.population_size; ++i) {
    Individual ind{random_init(problem.horizon_hours, rng), std::nullopt};
    ind.fitness = eval.evaluate(ind.genome);
    pop.push_back(std::move(ind));
  }
  return pop;
}

// Fitness source for a generation step: the true simulator for baseline
// runs, a surrogate's predict for the surrogate-only refinement loop. The
// random stream consumed by a step never depends on which source is used.
using FitnessFn = std::function<double(const InstructionVector&)>;

// --- GA ----------------------------------------------------------------------

// One GA generation: n_offspring children, each from two tournament parents
// via two-point crossover (probability crossover_rate) and per-bit mutation;
// children are scored by `fitness`; (mu+lambda) truncation survival.
inline void ga_generation_with(std::vector<Individual>& pop,
                               const EAParams& params,
                               const FitnessFn& fitness, Rng& rng) {
  const std::size_t L = pop.front().genome.bits.size();
  const double mrate = params.effective_mutation_rate(L);
  std::vector<Individual> children;
  children.reserve(static_cast<std::size_t>(params.n_offspring));
  for (int k = 0; k < params.n_offspring; ++k) {
    const std::size_t p1 = tournament_pick(pop, rng);
    const std::size_t p2 = tournament_pick(pop, rng);
    Individual child{pop[p1].genome, std::nullopt};
    if (rng.next_real01() < params.crossover_rate)
      two_point_cross(child.genome.bits, pop[p2].genome.bits, rng);
    mutate_bits(child.genome.bits, mrate, rng);
    child.fitness = fitness(child.genome);
    children.push_back(std::move(child));
  }
  truncate_population(pop, children,
                      static_cast<std::size_t>(params.population_size));
}

inline void ga_generation(std::vector<Individual>& pop, const EAParams& params,
                          TrueEvaluator& eval, Rng& rng) {
  ga_generation_with(
      pop, params,
      [&eval](const InstructionVector& g) { return eval.evaluate(g); }, rng);
}

// --- DE ----------------------------------------------------------------------

// One DE generation: n_offspring rand/1/bin trials against round-robin
// targets (step s covers indices s*n_offspring .. s*n_offspring+n_offspring-1,
// mod population size). Bits are relaxed to {0.0, 1.0}, mutated with weight F,
// binomially crossed with rate CR (one guaranteed donor position), and
// thresholded at 0.5. A trial replaces its target when its fitness is
// greater or equal.
inline void de_generation_with(std::vector<Individual>& pop,
                               const EAParams& params,
                               const FitnessFn& fitness, Rng& rng,
                               int step_index) {
  const std::size_t n = pop.size();
  const std::size_t L = pop.front().genome.bits.size();
  for (int k = 0; k < params.n_offspring; ++k) {
    const std::size_t target =
        (static_cast<std::size_t>(step_index) *
             static_cast<std::size_t>(params.n_offspring) +
         static_cast<std::size_t>(k)) %
        n;
    std::size_t r1, r2, r3;
    do r1 = rng.next_below(n); while (r1 == target);
    do r2 = rng.next_below(n); while (r2 == target || r2 == r1);
    do r3 = rng.next_below(n); while (r3 == target || r3 == r1 || r3 == r2);
    const std::size_t jrand = rng.next_below(L);

    Individual trial{pop[target].genome, std::nullopt};
    const auto& b1 = pop[r1].genome.bits;
    const auto& b2 = pop[r2].genome.bits;
    const auto& b3 = pop[r3].genome.bits;
    for (std::size_t j = 0; j < L; ++j) {
      const bool cross = rng.next_real01() < params.de_CR || j == jrand;
      if (!cross) continue;
      const double v = static_cast<double>(b1[j]) +
                       params.de_F * (static_cast<double>(b2[j]) -
                                      static_cast<double>(b3[j]));
      trial.genome.bits[j] = v >= 0.5 ? 1u : 0u;
    }
    trial.fitness = fitness(trial.genome);
    if (fitness_of(trial) >= fitness_of(pop[target]))
      pop[target] = std::move(trial);
  }
}

inline void de_generation(std::vector<Individual>& pop, const EAParams& params,
                          TrueEvaluator& eval, Rng& rng, int step_index) {
  de_generation_with(
      pop, params,
      [&eval](const InstructionVector& g) { return eval.evaluate(g); }, rng,
      step_index);
}

// --- full run ----------------------------------------------------------------

struct RunResult {
  Individual best;
  RunTrace trace;
};

// Runs n_generations steps from a random initial population. The initial
// population counts as generation 1 in the trace (population_size
// evaluations); each step appends one entry, so cumulative evaluations are
// population_size + step * n_offspring exactly.
inline RunResult run(Algorithm algo, const Problem& problem,
                     const EAParams& params) {
  params.validate();
  problem.config.validate();
  Rng rng(params.seed);
  TrueEvaluator eval(problem);

  std::vector<Individual> pop = init_population(problem, params, eval, rng);
  Individual best = pop[best_index(pop)];
  RunTrace trace;
  trace.entries.push_back({1, fitness_of(best), eval.count()});

  for (int s = 0; s < params.n_generations; ++s) {
    if (algo == Algorithm::ga)
      ga_generation(pop, params, eval, rng);
    else
      de_generation(pop, params, eval, rng, s);
    const Individual& gen_best = pop[best_index(pop)];
    if (fitness_of(gen_best) > fitness_of(best)) best = gen_best;
    trace.entries.push_back({s + 2, fitness_of(best), eval.count()});
  }
  return {std::move(best), std::move(trace)};
}

}  // namespace flowbatch
