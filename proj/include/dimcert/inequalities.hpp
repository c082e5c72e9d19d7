#pragma once

#include <limits>
#include <string>
#include <vector>

#include "dimcert/quantum.hpp"

namespace dimcert {

// Conditional outcome table p(b | a, x, y): preparation setting x announced
// outcome a, measurement setting y produced outcome b. Preparations are
// assumed to be emitted uniformly over a for fixed x, which is the convention
// of every data source in this toolkit. Entries may be missing (NaN) when a
// dataset only publishes the cells a functional actually uses.
struct Behavior {
  int n_prep_settings = 0;
  int n_prep_outcomes = 0;
  int n_meas_settings = 0;
  int n_meas_outcomes = 0;
  std::vector<double> p;

  static constexpr double missing = std::numeric_limits<double>::quiet_NaN();

  static Behavior empty(int n_x, int n_a, int n_y, int n_b);

  double& at(int a, int x, int b, int y);
  double at(int a, int x, int b, int y) const;
  bool has(int a, int x, int b, int y) const;
  bool complete() const;

  // Checks ranges, normalization over b for each (a, x, y), and that the
  // marginal p(b|y) = avg_a p(b|a,x,y) does not depend on x. Groups with a
  // missing entry are skipped when allow_missing is set, otherwise missing
  // entries are an error.
  void validate(double tol = 1e-8, bool allow_missing = false) const;
};

// Linear functional sum_{a,x,b,y} c(a,x,b,y) P(a,b|x,y) - offset, evaluated
// on behaviors via P(a,b|x,y) = p(b|a,x,y) / n_prep_outcomes.
struct InequalityFunctional {
  std::string name;
  int n_prep_settings = 0;
  int n_prep_outcomes = 0;
  int n_meas_settings = 0;
  int n_meas_outcomes = 0;
  std::vector<double> coeff;
  double offset = 0.0;
  bool use_absolute_value = false;  // report |value|, as for correlator sums

  double coefficient(int a, int x, int b, int y) const;
  void set_coefficient(int a, int x, int b, int y, double c);

  // Errors if a cell with a nonzero coefficient is missing from the table.
  double value(const Behavior& behavior) const;

  // Value of the deterministic strategy a = a_of_x[x], b = b_of_y[y].
  double strategy_value(const std::vector<int>& a_of_x,
                        const std::vector<int>& b_of_y) const;
};

// The two functionals this toolkit certifies with. The four-outcome one is
// bounded by 0 for noncontextual models; the correlator one by 2.
InequalityFunctional cglmp4_functional();
InequalityFunctional chsh_functional();
InequalityFunctional functional_by_name(const std::string& name);

struct ClassicalMax {
  double value = 0.0;
  std::vector<int> prep_strategy;  // lexicographically smallest maximizer
  std::vector<int> meas_strategy;
};

// Exhaustive maximum over deterministic strategies. Refuses searches beyond
// 1e6 strategy pairs; both functionals here are far below that.
ClassicalMax classical_maximum(const InequalityFunctional& f);

Behavior behavior_from(const Assemblage& preparations,
                       const std::vector<Povm>& measurements);

// Reference states and measurements that reach the values the certification
// thresholds are calibrated against.
struct CanonicalSetup {
  Assemblage preparations;
  std::vector<Povm> measurements;
};

// Preparation mixing angle for the entangled four-outcome setup, chosen so
// the functional value is stationary and maximal over this family.
double canonical_mixing_angle();

// Two-ququart-outcome family reaching 0.36476 on the four-outcome functional.
CanonicalSetup canonical_cglmp4_entangled();
// Product (path x polarization) family reaching 0.33609.
CanonicalSetup canonical_cglmp4_separable();
// Qubit pair family reaching 2*sqrt(2) on the correlator functional.
CanonicalSetup canonical_chsh();

struct DimensionThreshold {
  int min_dimension_if_exceeded = 0;
  double value = 0.0;
  std::string provenance;
};

struct FunctionalBounds {
  std::string functional;
  double noncontextual_bound = 0.0;
  std::string noncontextual_provenance;
  std::vector<DimensionThreshold> thresholds;  // strictly increasing values
  double quantum_maximum = 0.0;
  std::string quantum_provenance;
};

const FunctionalBounds& bounds_for(const std::string& functional_name);
std::vector<std::string> registered_functionals();

struct CertificationVerdict {
  std::string functional;
  double value = 0.0;
  double std_error = 0.0;
  double k_sigma = 1.0;
  double adjusted = 0.0;  // value - k_sigma * std_error
  bool contextual = false;
  int certified_min_dimension = 1;
  std::vector<std::string> crossed;
};

// A bound counts as crossed only when adjusted exceeds it strictly; the
// certified dimension is the largest one all lower thresholds support.
CertificationVerdict certify(const std::string& functional, double value,
                             double std_error, double k_sigma = 1.0);

}  // namespace dimcert
