#include <cmath>

#include "dimcert/photonics.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace dimcert;

namespace {

constexpr double kPi = 3.14159265358979323846;

double behavior_distance(const Behavior& lhs, const Behavior& rhs) {
  double worst = 0.0;
  for (int x = 0; x < lhs.n_prep_settings; ++x)
    for (int a = 0; a < lhs.n_prep_outcomes; ++a)
      for (int y = 0; y < lhs.n_meas_settings; ++y)
        for (int b = 0; b < lhs.n_meas_outcomes; ++b)
          worst = std::max(worst,
                           std::abs(lhs.at(a, x, b, y) - rhs.at(a, x, b, y)));
  return worst;
}

}  // namespace

TEST_CASE("wave plate matrices") {
  const CMatrix h0 = jones(PlateKind::half, 0.0);
  CHECK(std::abs(h0(0, 0) - 1.0) < 1e-15);
  CHECK(std::abs(h0(1, 1) + 1.0) < 1e-15);
  CHECK(std::abs(h0(0, 1)) < 1e-15);

  const double r = 1.0 / std::sqrt(2.0);
  const CMatrix h22 = jones(PlateKind::half, kPi / 8.0);
  CHECK(std::abs(h22(0, 0) - r) < 1e-12);
  CHECK(std::abs(h22(0, 1) - r) < 1e-12);
  CHECK(std::abs(h22(1, 1) + r) < 1e-12);

  const CMatrix q0 = jones(PlateKind::quarter, 0.0);
  CHECK(std::abs(q0(0, 0) - 1.0) < 1e-15);
  CHECK(std::abs(q0(1, 1) - Complex(0.0, 1.0)) < 1e-15);

  const CMatrix q45 = jones(PlateKind::quarter, kPi / 4.0);
  CHECK(std::abs(q45(0, 0) - r) < 1e-12);
  CHECK(std::abs(q45(0, 1) - Complex(0.0, -r)) < 1e-12);
  CHECK(std::abs(q45(1, 0) - Complex(0.0, -r)) < 1e-12);

  for (double deg : {-30.0, 0.0, 17.0, 45.0, 80.0}) {
    const double t = deg * kPi / 180.0;
    for (PlateKind kind : {PlateKind::half, PlateKind::quarter}) {
      const CMatrix m = jones(kind, t);
      CHECK(max_abs(CMatrix(m.adjoint() * m) - CMatrix(CMatrix::Identity(2, 2)))
            < 1e-14);
    }
    // A half-wave plate is its own inverse in this phase convention.
    const CMatrix h = jones(PlateKind::half, t);
    CHECK(max_abs(CMatrix(h * h) - CMatrix(CMatrix::Identity(2, 2))) < 1e-14);
  }
}

TEST_CASE("source ket structure") {
  PreparationParams p;
  p.alpha_deg = 15.0;
  p.beta_deg = -40.0;
  p.phi1 = 0.7;
  p.phi2 = -1.3;
  p.path_phase = 2.1;
  const CVector ket = sagnac_prepare(p);
  REQUIRE(ket.size() == 4);
  CHECK(std::abs(ket.norm() - 1.0) < 1e-14);
  // Both paths always carry half the weight.
  CHECK(std::abs(std::norm(ket(0)) + std::norm(ket(1)) - 0.5) < 1e-14);

  PreparationParams wrapped = p;
  wrapped.path_phase += 2.0 * kPi;
  CHECK((sagnac_prepare(wrapped) - ket).norm() < 1e-12);
}

TEST_CASE("preparation fits invert the source model") {
  Rng rng(4242);
  double worst = 0.0;
  for (int trial = 0; trial < 40; ++trial) {
    PreparationParams p;
    p.alpha_deg = 90.0 * (rng.uniform() - 0.5);
    p.beta_deg = 90.0 * (rng.uniform() - 0.5);
    p.phi1 = 2.0 * kPi * rng.uniform();
    p.phi2 = 2.0 * kPi * rng.uniform();
    p.path_phase = 2.0 * kPi * rng.uniform();
    const CVector target = sagnac_prepare(p);
    const FitResult fit = fit_preparation(target);
    CHECK(fit.reachable);
    worst = std::max(worst, fit.residual);
    // Refitting the fitted ket must land on the same state.
    CHECK(std::abs(std::norm((target.adjoint() *
                              sagnac_prepare(fit.params))(0)) -
                   1.0) < 1e-8);
  }
  CHECK(worst < 1e-9);

  SUBCASE("global phase does not matter") {
    const CVector target = sagnac_prepare({10.0, 20.0, 0.4, 0.9, 1.5});
    const CVector rotated = std::exp(Complex(0.0, 0.3)) * target;
    CHECK(fit_preparation(rotated).residual < 1e-9);
  }

  SUBCASE("unbalanced path weight is out of reach") {
    CVector target = CVector::Zero(4);
    target(0) = 1.0;
    const FitResult fit = fit_preparation(target);
    CHECK(!fit.reachable);
    CHECK(fit.residual == doctest::Approx(0.5).epsilon(1e-6));
  }
}

TEST_CASE("analysis stations realize the canonical measurements") {
  const CglmpSetup setup = entangled_cglmp_setup();
  const std::vector<Povm> canonical = canonical_cglmp4_entangled().measurements;
  REQUIRE(setup.stations.size() == canonical.size());
  for (std::size_t y = 0; y < setup.stations.size(); ++y) {
    const Povm povm = station_povm(setup.stations[y]);
    CHECK_NOTHROW(povm.validate(1e-10));
    for (int b = 0; b < povm.outcomes(); ++b) {
      // Rank-one projective analysis.
      CHECK(max_abs(CMatrix(povm.effects[b] * povm.effects[b]) -
                    povm.effects[b]) < 1e-12);
      CHECK(max_abs(povm.effects[b] - canonical[y].effects[b]) < 1e-9);
    }
  }
}

TEST_CASE("predicted tables match the canonical setups") {
  const InequalityFunctional f = cglmp4_functional();

  const Behavior entangled = predict_behavior(entangled_cglmp_setup());
  const CanonicalSetup canonical_ent = canonical_cglmp4_entangled();
  CHECK(behavior_distance(entangled, behavior_from(canonical_ent.preparations,
                                                   canonical_ent.measurements))
        < 1e-4);
  CHECK(f.value(entangled) == doctest::Approx(0.3647618502).epsilon(1e-4));

  const Behavior separable = predict_behavior(separable_cglmp_setup());
  const CanonicalSetup canonical_sep = canonical_cglmp4_separable();
  CHECK(behavior_distance(separable, behavior_from(canonical_sep.preparations,
                                                   canonical_sep.measurements))
        < 1e-4);
  CHECK(f.value(separable) == doctest::Approx(0.3360912069).epsilon(1e-4));

  const Behavior chsh = predict_behavior(canonical_chsh_setup());
  CHECK(chsh_functional().value(chsh) ==
        doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));

  SUBCASE("states enter only as rays") {
    const CglmpSetup setup = entangled_cglmp_setup();
    std::vector<std::vector<CVector>> states(setup.preparations.size());
    for (std::size_t x = 0; x < setup.preparations.size(); ++x)
      for (const PreparationParams& p : setup.preparations[x])
        states[x].push_back(sagnac_prepare(p));
    const Behavior base = predict_behavior(states, setup.stations);
    states[1][2] *= std::exp(Complex(0.0, 0.3));
    CHECK(behavior_distance(base, predict_behavior(states, setup.stations)) <
          1e-14);
  }
}

TEST_CASE("noise model sigmas follow the device class") {
  NoiseModel noise;
  CHECK(noise.sigma_deg(DeviceClass::manual) == 0.5);
  CHECK(noise.sigma_deg(DeviceClass::motorized) == 0.1);
}

TEST_CASE("monte carlo error budget") {
  const CglmpSetup setup = entangled_cglmp_setup();

  SUBCASE("zero noise collapses the spread") {
    NoiseModel silent;
    silent.manual_sigma_deg = 0.0;
    silent.motorized_sigma_deg = 0.0;
    silent.counts_per_setting = 0.0;
    const MonteCarloReport report = monte_carlo(setup, silent, 64, 5);
    CHECK(report.std_dev == 0.0);
    CHECK(report.min == report.max);
    CHECK(report.min == report.noiseless_value);
    CHECK(report.noiseless_value ==
          doctest::Approx(0.3647618502).epsilon(1e-4));
  }

  SUBCASE("angle jitter dominates counting noise") {
    NoiseModel angles;  // defaults: manual 0.5 degree jitter, no counts
    const MonteCarloReport jitter = monte_carlo(setup, angles, 400, 17);
    CHECK(jitter.std_dev > 0.004);
    CHECK(jitter.std_dev < 0.025);
    CHECK(jitter.values.size() == 400);

    NoiseModel counting;
    counting.manual_sigma_deg = 0.0;
    counting.motorized_sigma_deg = 0.0;
    counting.counts_per_setting = 1.8e6;
    const MonteCarloReport poisson = monte_carlo(setup, counting, 400, 17);
    CHECK(poisson.std_dev > 0.0);
    CHECK(poisson.std_dev * 5.0 < jitter.std_dev);
  }

  SUBCASE("reports replay bit for bit") {
    NoiseModel noise;
    noise.counts_per_setting = 5000.0;
    const MonteCarloReport first = monte_carlo(setup, noise, 50, 99);
    const MonteCarloReport second = monte_carlo(setup, noise, 50, 99);
    REQUIRE(first.values.size() == second.values.size());
    for (std::size_t i = 0; i < first.values.size(); ++i)
      CHECK(first.values[i] == second.values[i]);
    CHECK(first.std_dev == second.std_dev);
    CHECK(first.mean == second.mean);

    const MonteCarloReport other = monte_carlo(setup, noise, 50, 100);
    CHECK(other.mean != first.mean);
  }

  SUBCASE("percentiles interpolate the sample set") {
    NoiseModel noise;
    const MonteCarloReport report = monte_carlo(setup, noise, 101, 3);
    CHECK(report.percentile(0.0) == report.min);
    CHECK(report.percentile(100.0) == report.max);
    CHECK(report.percentile(25.0) <= report.percentile(75.0));
    CHECK(report.percentile(50.0) >= report.min);
    CHECK(report.percentile(50.0) <= report.max);
  }

  SUBCASE("qubit experiment band") {
    NoiseModel noise;  // motorized plates at 0.1 degrees
    const MonteCarloReport report =
        monte_carlo(canonical_chsh_setup(), noise, 400, 21);
    CHECK(report.noiseless_value ==
          doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-9));
    CHECK(report.std_dev > 0.002);
    CHECK(report.std_dev < 0.025);
  }
}
