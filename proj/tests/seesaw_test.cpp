#include <cmath>
#include <stdexcept>

#include "dimcert/errors.hpp"
#include "dimcert/seesaw.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace dimcert;

namespace {

bool values_monotone(const std::vector<double>& values, double slack) {
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] < values[i - 1] - slack) return false;
  return true;
}

}  // namespace

TEST_CASE("preparation step reproduces both canonical optima") {
  const InequalityFunctional f = cglmp4_functional();
  const std::vector<Povm> measurements = canonical_cglmp4_entangled().measurements;

  PreparationOptimum plain = optimize_preparations(f, measurements, false);
  CHECK(plain.value == doctest::Approx(0.3647618502).epsilon(1e-5));
  CHECK_NOTHROW(plain.preparations.validate(1e-7));

  PreparationOptimum ppt = optimize_preparations(f, measurements, true);
  CHECK(ppt.value == doctest::Approx(0.3360912069).epsilon(1e-5));
  for (const auto& row : ppt.preparations.states)
    for (const CMatrix& sigma : row)
      CHECK(min_eigenvalue(partial_transpose_first(sigma, 2, 2)) > -1e-7);
}

TEST_CASE("measurement step is optimal at the canonical fixed point") {
  const InequalityFunctional f = cglmp4_functional();
  CanonicalSetup setup = canonical_cglmp4_entangled();
  MeasurementOptimum opt = optimize_measurements(f, setup.preparations);
  CHECK(opt.value == doctest::Approx(0.3647618502).epsilon(1e-6));
  for (const Povm& povm : opt.measurements) CHECK_NOTHROW(povm.validate(1e-7));
}

TEST_CASE("preparation step on the correlator functional") {
  const InequalityFunctional f = chsh_functional();
  PreparationOptimum opt = optimize_preparations(f, canonical_chsh().measurements, false);
  CHECK(opt.value == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-5));
}

TEST_CASE("alternation from the canonical start converges immediately") {
  const InequalityFunctional f = cglmp4_functional();
  SeesawConfig config;
  config.restarts = 1;
  config.convergence_window = 2;
  config.initial_measurements = canonical_cglmp4_entangled().measurements;
  SeesawResult result = run_seesaw(f, config, false);
  REQUIRE(result.records.size() == 1);
  const SeesawRecord& record = result.best();
  CHECK(record.termination == "converged");
  CHECK(record.alternations <= 3);
  CHECK(record.final_value == doctest::Approx(0.3647618502).epsilon(1e-6));
}

TEST_CASE("random restarts find the separable optimum region") {
  const InequalityFunctional f = cglmp4_functional();
  SeesawConfig config;
  config.restarts = 3;
  config.master_seed = 7;
  SeesawResult result = run_seesaw(f, config, true);
  REQUIRE(result.records.size() == 3);
  REQUIRE(result.best_restart >= 0);

  for (const SeesawRecord& record : result.records) {
    CHECK(values_monotone(record.values, 1e-7));
    CHECK(record.final_value <= 0.33609121 + 1e-5);
    for (const auto& row : record.preparations.states)
      for (const CMatrix& sigma : row)
        CHECK(min_eigenvalue(partial_transpose_first(sigma, 2, 2)) > -1e-7);
  }
  CHECK(result.best().final_value >= 0.30);

  SUBCASE("same seed replays bit for bit") {
    SeesawResult again = run_seesaw(f, config, true);
    REQUIRE(again.records.size() == result.records.size());
    for (std::size_t r = 0; r < again.records.size(); ++r) {
      CHECK(again.records[r].seed == result.records[r].seed);
      CHECK(again.records[r].final_value == result.records[r].final_value);
      REQUIRE(again.records[r].values.size() == result.records[r].values.size());
      for (std::size_t i = 0; i < again.records[r].values.size(); ++i)
        CHECK(again.records[r].values[i] == result.records[r].values[i]);
    }
  }
}

TEST_CASE("qubit alternation reaches the correlator maximum") {
  const InequalityFunctional f = chsh_functional();
  SeesawConfig config;
  config.dim = 2;
  config.restarts = 2;
  config.master_seed = 3;
  SeesawResult result = run_seesaw(f, config, false);
  CHECK(result.best().final_value == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-5));
}

TEST_CASE("ppt restriction requires the four dimensional split") {
  const InequalityFunctional f = cglmp4_functional();
  Rng rng(11);
  std::vector<Povm> measurements;
  for (int y = 0; y < f.n_meas_settings; ++y)
    measurements.push_back(testing::random_povm(3, f.n_meas_outcomes, rng));
  CHECK_THROWS_AS(optimize_preparations(f, measurements, true),
                  std::invalid_argument);

  // Inside the driver the same misuse poisons every restart instead.
  SeesawConfig config;
  config.dim = 3;
  config.restarts = 1;
  CHECK_THROWS_AS(run_seesaw(f, config, true), NumericalError);
}
