// Command-line front end for the batch-plant scheduling experiments.
//
//   flowbatch run   --preset P --horizon H --algo A --trials N --seed S --out DIR
//   flowbatch bench --preset P --out DIR            (full algorithm x horizon table)
//   flowbatch trace --preset P --out DIR            (gens,OV median aggregates)
//
// An optional --config JSON file overrides any optimizer parameter field.
// Exit code 0 on success, nonzero on structural errors (unknown preset or
// algorithm, malformed config, unwritable output path).

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "flowbatch/flowbatch.hpp"

namespace {

using flowbatch::AlgoKind;
using flowbatch::ExperimentSpec;

// Applies a JSON object whose keys name optimizer parameter fields. Every
// field of the evolutionary and surrogate-framework parameter sets is
// addressable; unknown keys are structural errors.
void apply_config(const nlohmann::json& j, ExperimentSpec& spec) {
  if (!j.is_object())
    throw std::invalid_argument("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "population_size")
      spec.ea.population_size = value.get<int>();
    else if (key == "n_offspring")
      spec.ea.n_offspring = value.get<int>();
    else if (key == "n_generations")
      spec.generations_override = value.get<int>();
    else if (key == "crossover_rate")
      spec.ea.crossover_rate = value.get<double>();
    else if (key == "mutation_rate")
      spec.ea.mutation_rate = value.get<double>();
    else if (key == "de_F")
      spec.ea.de_F = value.get<double>();
    else if (key == "de_CR")
      spec.ea.de_CR = value.get<double>();
    else if (key == "alpha")
      spec.psaf.alpha = value.get<int>();
    else if (key == "beta")
      spec.psaf.beta = value.get<int>();
    else if (key == "n_infills")
      spec.psaf.n_infills = value.get<int>();
    else if (key == "use_surrogate")
      spec.psaf.use_surrogate = value.get<bool>();
    else
      throw std::invalid_argument("unknown config key: " + key);
  }
}

void load_config(const std::string& path, ExperimentSpec& spec) {
  if (path.empty()) return;
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read config file: " + path);
  nlohmann::json j;
  is >> j;
  apply_config(j, spec);
}

int run_spec(ExperimentSpec spec, bool aggregates_only) {
  // Fail fast on unknown preset/horizon combinations.
  for (double h : spec.horizons)
    flowbatch::OptimaTable::optimum_for(spec.preset, h);

  if (aggregates_only) {
    const std::string out = spec.out_dir;
    spec.out_dir.clear();  // keep per-trial files in memory
    const auto result = flowbatch::run_experiment(spec);
    flowbatch::write_trace_aggregates(result, out);
    std::printf("wrote %zu gens,OV aggregate files to %s\n",
                result.cells.size(), out.c_str());
    return 0;
  }

  const auto result = flowbatch::run_experiment(spec);
  flowbatch::emit_summary(result.reports(), std::cout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"three-stage batch plant scheduling: simulator, optimizers, "
               "experiment harness"};
  app.require_subcommand(1);

  const auto preset_check = CLI::IsMember({"primary", "variant"});

  std::string preset = "primary", algo = "ga", out_dir, config_path;
  double horizon = 12.0;
  int trials = 30, jobs = 1;
  std::uint64_t seed = 1;
  std::vector<double> horizons;
  std::vector<std::string> algos;

  CLI::App* cmd_run = app.add_subcommand(
      "run", "one algorithm on one horizon, with per-trial traces");
  cmd_run->add_option("--preset", preset)->check(preset_check);
  cmd_run->add_option("--horizon", horizon, "time horizon in hours")
      ->required();
  cmd_run->add_option("--algo", algo, "ga | de | psaf-ga | psaf-de")
      ->required();
  cmd_run->add_option("--trials", trials);
  cmd_run->add_option("--seed", seed);
  cmd_run->add_option("--out", out_dir)->required();
  cmd_run->add_option("--config", config_path, "JSON parameter overrides");
  cmd_run->add_option("--jobs", jobs, "worker pool width");

  CLI::App* cmd_bench = app.add_subcommand(
      "bench", "the full algorithm x horizon table for a preset");
  cmd_bench->add_option("--preset", preset)->check(preset_check);
  cmd_bench->add_option("--trials", trials);
  cmd_bench->add_option("--seed", seed);
  cmd_bench->add_option("--out", out_dir)->required();
  cmd_bench->add_option("--config", config_path, "JSON parameter overrides");
  cmd_bench->add_option("--jobs", jobs, "worker pool width");

  CLI::App* cmd_trace = app.add_subcommand(
      "trace", "per-generation median best-so-far aggregates (gens,OV)");
  cmd_trace->add_option("--preset", preset)->check(preset_check);
  cmd_trace->add_option("--horizon", horizons,
                        "horizons to aggregate (default: all)");
  cmd_trace->add_option("--algo", algos, "algorithms (default: all)");
  cmd_trace->add_option("--trials", trials);
  cmd_trace->add_option("--seed", seed);
  cmd_trace->add_option("--out", out_dir)->required();
  cmd_trace->add_option("--config", config_path, "JSON parameter overrides");
  cmd_trace->add_option("--jobs", jobs, "worker pool width");

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentSpec spec;
    spec.preset = preset;
    spec.n_trials = trials;
    spec.base_seed = seed;
    spec.out_dir = out_dir;
    spec.jobs = jobs;
    load_config(config_path, spec);

    if (cmd_run->parsed()) {
      spec.horizons = {horizon};
      spec.algorithms = {flowbatch::parse_algo(algo)};
      return run_spec(std::move(spec), false);
    }
    if (cmd_bench->parsed()) {
      return run_spec(std::move(spec), false);
    }
    // trace
    if (!horizons.empty()) spec.horizons = horizons;
    if (!algos.empty()) {
      spec.algorithms.clear();
      for (const auto& a : algos)
        spec.algorithms.push_back(flowbatch::parse_algo(a));
    }
    return run_spec(std::move(spec), true);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
