#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <vector>

#include "flowbatch/rng.hpp"
#include "flowbatch/plant.hpp"
#include "flowbatch/sim.hpp"
#include "flowbatch/surrogate.hpp"

using namespace flowbatch;

namespace {
InstructionVector with_bits(double horizon, std::initializer_list<int> ones) {
  auto v = InstructionVector::zeros(horizon);
  for (int i : ones) v.bits[static_cast<std::size_t>(i)] = 1;
  return v;
}
}  // namespace

TEST_CASE("packed genomes reproduce Hamming distances") {
  const auto a = with_bits(12, {0, 5, 70});
  const auto b = with_bits(12, {0, 6, 70, 71});
  REQUIRE(hamming_distance(pack_genome(a), pack_genome(a)) == 0);
  REQUIRE(hamming_distance(pack_genome(a), pack_genome(b)) == 3);
  REQUIRE(normalized_distance(pack_genome(a), pack_genome(b)) ==
          Catch::Approx(3.0 / 72.0));
  const auto c = InstructionVector::zeros(24);
  REQUIRE_THROWS_AS(hamming_distance(pack_genome(a), pack_genome(c)),
                    std::invalid_argument);
}

TEST_CASE("archive insertion is idempotent and keyed by genome") {
  EvalArchive arch;
  const auto g = with_bits(12, {2, 9});
  REQUIRE(arch.insert(g, 50.0));
  REQUIRE_FALSE(arch.insert(g, 999.0));  // same genome: no-op
  REQUIRE(arch.size() == 1);
  REQUIRE(arch[0].objective == 50.0);    // first value wins
  REQUIRE(arch.contains(g));
  REQUIRE_FALSE(arch.contains(with_bits(12, {2})));

  REQUIRE(arch.insert(with_bits(12, {3}), 25.0));
  REQUIRE(arch.size() == 2);

  std::ostringstream os;
  arch.write_csv(os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  REQUIRE(line == "genome,objective");
  std::getline(is, line);
  REQUIRE(line == g.bit_line() + ",50.00");
}

TEST_CASE("fitting requires at least two archive entries") {
  EvalArchive arch;
  REQUIRE_THROWS_AS(SurrogateModel::fit(arch), std::invalid_argument);
  arch.insert(with_bits(12, {0}), 1.0);
  REQUIRE_THROWS_AS(SurrogateModel::fit(arch), std::invalid_argument);
  arch.insert(with_bits(12, {1}), 2.0);
  REQUIRE_NOTHROW(SurrogateModel::fit(arch));
}

TEST_CASE("prediction requires a fitted model") {
  SurrogateModel m;
  REQUIRE_FALSE(m.fitted());
  REQUIRE_THROWS_AS(m.predict(with_bits(12, {0})), std::logic_error);
}

TEST_CASE("zero-ridge fit interpolates the training data") {
  const PlantConfig cfg = PlantConfig::primary();
  Rng rng(42);
  EvalArchive arch;
  while (arch.size() < 12) {
    const auto g = random_init(12.0, rng);
    arch.insert(g, simulate(cfg, g, 12.0).yield_amount);
  }
  const auto model = SurrogateModel::fit(arch, 0.0);
  REQUIRE(model.regularization() == 0.0);
  for (std::size_t i = 0; i < arch.size(); ++i) {
    const double truth = arch[i].objective;
    const double pred = model.predict(arch[i].genome);
    const double scale = std::max(1.0, std::abs(truth));
    REQUIRE(std::abs(pred - truth) / scale < 1e-6);
  }
}

TEST_CASE("default ridge keeps training predictions close to the archive") {
  const PlantConfig cfg = PlantConfig::primary();
  Rng rng(7);
  EvalArchive arch;
  while (arch.size() < 30) {
    const auto g = random_init(24.0, rng);
    arch.insert(g, simulate(cfg, g, 24.0).yield_amount);
  }
  const auto model = SurrogateModel::fit(arch);
  REQUIRE(model.training_size() == 30);
  for (std::size_t i = 0; i < arch.size(); ++i)
    REQUIRE(model.predict(arch[i].genome) ==
            Catch::Approx(arch[i].objective).margin(1e-3));
}

TEST_CASE("constant archive gives an exactly constant predictor") {
  EvalArchive arch;
  arch.insert(with_bits(12, {0}), 300.0);
  arch.insert(with_bits(12, {1, 2}), 300.0);
  arch.insert(with_bits(12, {40}), 300.0);
  arch.insert(with_bits(12, {9, 33, 61}), 300.0);
  const auto model = SurrogateModel::fit(arch);
  Rng rng(3);
  for (int i = 0; i < 20; ++i)
    REQUIRE(model.predict(random_init(12.0, rng)) == 300.0);
}

TEST_CASE("two-point model: equidistant query predicts the midpoint") {
  EvalArchive arch;
  const auto a = with_bits(12, {});      // zeros
  const auto b = with_bits(12, {0, 1});  // distance 2 from a
  arch.insert(a, 100.0);
  arch.insert(b, 0.0);
  const auto model = SurrogateModel::fit(arch);

  const auto q = with_bits(12, {0});  // distance 1 from both
  REQUIRE(model.predict(q) == Catch::Approx(50.0).margin(1e-9));
}

TEST_CASE("two-point model: asymmetric query lands strictly between, "
          "closer to the nearer point") {
  EvalArchive arch;
  const auto a = with_bits(12, {});
  const auto b = with_bits(12, {0, 1, 2, 3});
  arch.insert(a, 100.0);
  arch.insert(b, 0.0);
  const auto model = SurrogateModel::fit(arch);

  const auto q = with_bits(12, {0});  // d(q,a)=1, d(q,b)=3
  const double pred = model.predict(q);
  REQUIRE(pred > 50.0);   // pulled toward a's value
  REQUIRE(pred < 100.0);  // but strictly between the two
}

TEST_CASE("bandwidth is the median pairwise normalized distance") {
  EvalArchive arch;
  arch.insert(with_bits(12, {}), 1.0);
  arch.insert(with_bits(12, {0}), 2.0);          // d = 1
  arch.insert(with_bits(12, {0, 1, 2}), 3.0);    // d = 3, 2
  // pairwise distances {1, 3, 2} -> sorted {1, 2, 3}, median 2
  const auto model = SurrogateModel::fit(arch);
  REQUIRE(model.bandwidth() == Catch::Approx(2.0 / 72.0));
}

TEST_CASE("leave-one-out predictions rank schedules better than chance") {
  const PlantConfig cfg = PlantConfig::primary();
  Rng rng(2024);
  EvalArchive full;
  while (full.size() < 100) {
    const auto g = random_init(12.0, rng);
    full.insert(g, simulate(cfg, g, 12.0).yield_amount);
  }

  std::vector<double> truth, pred;
  for (std::size_t held = 0; held < full.size(); ++held) {
    EvalArchive train;
    for (std::size_t i = 0; i < full.size(); ++i)
      if (i != held) train.insert(full[i].genome, full[i].objective);
    const auto model = SurrogateModel::fit(train);
    truth.push_back(full[held].objective);
    pred.push_back(model.predict(full[held].genome));
  }

  // Kendall tau over all pairs (ties contribute zero).
  long long concordant = 0, discordant = 0;
  const std::size_t n = truth.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dt = truth[i] - truth[j];
      const double dp = pred[i] - pred[j];
      if (dt * dp > 0) ++concordant;
      if (dt * dp < 0) ++discordant;
    }
  const double tau = static_cast<double>(concordant - discordant) /
                     (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
  INFO("LOO Kendall tau = " << tau);
  REQUIRE(tau > 0.0);
}

TEST_CASE("fitting is deterministic") {
  const PlantConfig cfg = PlantConfig::primary();
  Rng rng(5);
  EvalArchive arch;
  while (arch.size() < 20) {
    const auto g = random_init(12.0, rng);
    arch.insert(g, simulate(cfg, g, 12.0).yield_amount);
  }
  const auto m1 = SurrogateModel::fit(arch);
  const auto m2 = SurrogateModel::fit(arch);
  Rng probe(77);
  for (int i = 0; i < 25; ++i) {
    const auto q = random_init(12.0, probe);
    REQUIRE(m1.predict(q) == m2.predict(q));
  }
}
