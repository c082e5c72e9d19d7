#include <cmath>
#include <stdexcept>

#include "dimcert/inequalities.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace dimcert;
using dimcert::testing::random_noncontextual_behavior;

TEST_CASE("behavior storage and completeness") {
  Behavior b = Behavior::empty(2, 4, 2, 4);
  CHECK_FALSE(b.complete());
  CHECK_FALSE(b.has(0, 0, 0, 0));
  b.at(3, 1, 2, 0) = 0.25;
  CHECK(b.has(3, 1, 2, 0));
  CHECK(b.at(3, 1, 2, 0) == 0.25);
  CHECK_FALSE(b.has(2, 1, 3, 0));
  CHECK_THROWS_AS((void)b.at(4, 0, 0, 0), std::out_of_range);
}

TEST_CASE("behavior validation") {
  Behavior b = Behavior::empty(2, 2, 1, 2);
  for (int x = 0; x < 2; ++x)
    for (int a = 0; a < 2; ++a) {
      b.at(a, x, 0, 0) = 0.5 + (a == 0 ? 0.2 : -0.2);
      b.at(a, x, 1, 0) = 0.5 - (a == 0 ? 0.2 : -0.2);
    }
  CHECK_NOTHROW(b.validate());

  SUBCASE("normalization failure") {
    b.at(0, 0, 0, 0) = 0.9;
    CHECK_THROWS_AS(b.validate(), std::invalid_argument);
  }
  SUBCASE("signaling marginal failure") {
    // Keep each group normalized but skew the x=1 average over a.
    b.at(0, 1, 0, 0) = 0.9;
    b.at(0, 1, 1, 0) = 0.1;
    b.at(1, 1, 0, 0) = 0.9;
    b.at(1, 1, 1, 0) = 0.1;
    CHECK_THROWS_AS(b.validate(), std::invalid_argument);
  }
  SUBCASE("missing entries only pass when allowed") {
    b.at(1, 1, 0, 0) = Behavior::missing;
    b.at(1, 1, 1, 0) = Behavior::missing;
    CHECK_THROWS_AS(b.validate(), std::invalid_argument);
    CHECK_NOTHROW(b.validate(1e-8, true));
  }
  SUBCASE("out of range probability") {
    b.at(0, 0, 0, 0) = 1.3;
    b.at(0, 0, 1, 0) = -0.3;
    CHECK_THROWS_AS(b.validate(), std::invalid_argument);
  }
}

TEST_CASE("four outcome functional on the canonical setups") {
  const InequalityFunctional f = cglmp4_functional();
  CHECK(f.n_prep_outcomes == 4);
  CHECK(f.offset == 2.0);

  CanonicalSetup entangled = canonical_cglmp4_entangled();
  Behavior be = behavior_from(entangled.preparations, entangled.measurements);
  CHECK(f.value(be) == doctest::Approx(0.3647618501633416).epsilon(1e-12));

  CanonicalSetup separable = canonical_cglmp4_separable();
  Behavior bs = behavior_from(separable.preparations, separable.measurements);
  CHECK(f.value(bs) == doctest::Approx(0.33609120692).epsilon(1e-9));

  // Split states are path x polarization products, so their partial
  // transpose stays positive.
  for (const auto& row : separable.preparations.states)
    for (const CMatrix& sigma : row)
      CHECK(min_eigenvalue(partial_transpose_first(sigma, 2, 2)) > -1e-12);
}

TEST_CASE("value errors on missing needed cells") {
  const InequalityFunctional f = cglmp4_functional();
  Behavior b = Behavior::empty(2, 4, 2, 4);
  CHECK_THROWS_AS(f.value(b), std::invalid_argument);
}

TEST_CASE("correlator functional on the canonical qubit setup") {
  const InequalityFunctional f = chsh_functional();
  CHECK(f.use_absolute_value);
  CanonicalSetup setup = canonical_chsh();
  Behavior b = behavior_from(setup.preparations, setup.measurements);
  CHECK(f.value(b) == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("deterministic strategy enumeration") {
  ClassicalMax cglmp = classical_maximum(cglmp4_functional());
  CHECK(cglmp.value == 0.0);
  ClassicalMax chsh = classical_maximum(chsh_functional());
  CHECK(chsh.value == 2.0);

  const InequalityFunctional f = chsh_functional();
  CHECK(f.strategy_value(chsh.prep_strategy, chsh.meas_strategy) ==
        doctest::Approx(2.0));
}

TEST_CASE("random noncontextual mixtures respect the classical bounds") {
  const InequalityFunctional cglmp = cglmp4_functional();
  const InequalityFunctional chsh = chsh_functional();
  for (int trial = 0; trial < 100; ++trial) {
    Behavior bc = random_noncontextual_behavior(cglmp, 4000 + trial);
    CHECK_NOTHROW(bc.validate(1e-9));
    CHECK(cglmp.value(bc) <= 1e-12);
    Behavior bh = random_noncontextual_behavior(chsh, 8000 + trial);
    CHECK_NOTHROW(bh.validate(1e-9));
    CHECK(chsh.value(bh) <= 2.0 + 1e-12);
  }
}

TEST_CASE("functional registry and bounds") {
  CHECK(functional_by_name("cglmp4").name == "cglmp4");
  CHECK(functional_by_name("chsh").name == "chsh");
  CHECK_THROWS_AS(functional_by_name("nope"), std::invalid_argument);
  CHECK(registered_functionals().size() == 2);

  const FunctionalBounds& fb = bounds_for("cglmp4");
  CHECK(fb.noncontextual_bound == 0.0);
  REQUIRE(fb.thresholds.size() == 2);
  CHECK(fb.thresholds[0].value ==
        doctest::Approx(1.0 / std::sqrt(2.0) - 0.5).epsilon(1e-12));
  CHECK(fb.thresholds[0].min_dimension_if_exceeded == 3);
  CHECK(fb.thresholds[1].value == doctest::Approx(0.315));
  CHECK(fb.thresholds[1].min_dimension_if_exceeded == 4);
  CHECK(fb.quantum_maximum == doctest::Approx(0.36476).epsilon(1e-4));

  const FunctionalBounds& cb = bounds_for("chsh");
  CHECK(cb.noncontextual_bound == 2.0);
  CHECK(cb.quantum_maximum == doctest::Approx(2.0 * std::sqrt(2.0)));
}

TEST_CASE("certification verdicts") {
  SUBCASE("above both thresholds") {
    CertificationVerdict v = certify("cglmp4", 0.34, 0.008, 1.0);
    CHECK(v.adjusted == doctest::Approx(0.332));
    CHECK(v.contextual);
    CHECK(v.certified_min_dimension == 4);
    CHECK(v.crossed.size() == 3);  // classical bound plus two thresholds
  }
  SUBCASE("between thresholds") {
    CertificationVerdict v = certify("cglmp4", 0.30, 0.01, 2.0);
    CHECK(v.adjusted == doctest::Approx(0.28));
    CHECK(v.contextual);
    CHECK(v.certified_min_dimension == 3);
  }
  SUBCASE("threshold crossings are strict") {
    CertificationVerdict v = certify("cglmp4", 1.0 / std::sqrt(2.0) - 0.5, 0.0);
    CHECK(v.contextual);
    CHECK(v.certified_min_dimension == 2);
  }
  SUBCASE("no violation") {
    CertificationVerdict v = certify("cglmp4", -0.05, 0.01);
    CHECK_FALSE(v.contextual);
    CHECK(v.certified_min_dimension == 1);
    CHECK(v.crossed.empty());
  }
  SUBCASE("correlator verdict") {
    CertificationVerdict v = certify("chsh", 2.8, 0.01, 1.0);
    CHECK(v.contextual);
    CHECK(v.certified_min_dimension == 2);
  }
}
