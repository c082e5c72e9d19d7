#include "dimcert/inequalities.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dimcert {

namespace {

std::size_t table_size(int n_x, int n_a, int n_y, int n_b) {
  return static_cast<std::size_t>(n_x) * n_a * n_y * n_b;
}

std::size_t flat_index(const Behavior& t, int a, int x, int b, int y) {
  if (a < 0 || a >= t.n_prep_outcomes || x < 0 || x >= t.n_prep_settings ||
      b < 0 || b >= t.n_meas_outcomes || y < 0 || y >= t.n_meas_settings)
    throw std::out_of_range("behavior index out of range");
  return ((static_cast<std::size_t>(x) * t.n_meas_settings + y) * t.n_prep_outcomes + a) *
             t.n_meas_outcomes +
         b;
}

}  // namespace

Behavior Behavior::empty(int n_x, int n_a, int n_y, int n_b) {
  if (n_x < 1 || n_a < 1 || n_y < 1 || n_b < 1)
    throw std::invalid_argument("behavior shape must be positive");
  Behavior t;
  t.n_prep_settings = n_x;
  t.n_prep_outcomes = n_a;
  t.n_meas_settings = n_y;
  t.n_meas_outcomes = n_b;
  t.p.assign(table_size(n_x, n_a, n_y, n_b), missing);
  return t;
}

double& Behavior::at(int a, int x, int b, int y) {
  return p[flat_index(*this, a, x, b, y)];
}

double Behavior::at(int a, int x, int b, int y) const {
  return p[flat_index(*this, a, x, b, y)];
}

bool Behavior::has(int a, int x, int b, int y) const {
  return !std::isnan(at(a, x, b, y));
}

bool Behavior::complete() const {
  for (double v : p)
    if (std::isnan(v)) return false;
  return true;
}

void Behavior::validate(double tol, bool allow_missing) const {
  if (p.size() != table_size(n_prep_settings, n_prep_outcomes, n_meas_settings,
                             n_meas_outcomes))
    throw std::invalid_argument("behavior storage does not match its shape");
  for (double v : p) {
    if (std::isnan(v)) {
      if (!allow_missing)
        throw std::invalid_argument("behavior has missing entries");
      continue;
    }
    if (!std::isfinite(v) || v < -1e-9 || v > 1.0 + 1e-9)
      throw std::invalid_argument("behavior entry outside [0, 1]");
  }

  for (int x = 0; x < n_prep_settings; ++x) {
    for (int a = 0; a < n_prep_outcomes; ++a) {
      for (int y = 0; y < n_meas_settings; ++y) {
        double sum = 0.0;
        bool incomplete = false;
        for (int b = 0; b < n_meas_outcomes; ++b) {
          double v = at(a, x, b, y);
          if (std::isnan(v)) {
            incomplete = true;
            break;
          }
          sum += v;
        }
        if (incomplete) continue;
        if (std::abs(sum - 1.0) > tol)
          throw std::invalid_argument("behavior outcomes do not normalize for a setting");
      }
    }
  }

  // The marginal seen by the measurement side must not depend on which
  // preparation setting was used, otherwise the table encodes signaling.
  for (int y = 0; y < n_meas_settings; ++y) {
    for (int b = 0; b < n_meas_outcomes; ++b) {
      double reference = 0.0;
      bool have_reference = false;
      for (int x = 0; x < n_prep_settings; ++x) {
        double m = 0.0;
        bool incomplete = false;
        for (int a = 0; a < n_prep_outcomes; ++a) {
          double v = at(a, x, b, y);
          if (std::isnan(v)) {
            incomplete = true;
            break;
          }
          m += v / n_prep_outcomes;
        }
        if (incomplete) continue;
        if (!have_reference) {
          reference = m;
          have_reference = true;
        } else if (std::abs(m - reference) > tol) {
          throw std::invalid_argument("behavior marginals depend on the preparation setting");
        }
      }
    }
  }
}

double InequalityFunctional::coefficient(int a, int x, int b, int y) const {
  Behavior shape;
  shape.n_prep_settings = n_prep_settings;
  shape.n_prep_outcomes = n_prep_outcomes;
  shape.n_meas_settings = n_meas_settings;
  shape.n_meas_outcomes = n_meas_outcomes;
  return coeff[flat_index(shape, a, x, b, y)];
}

void InequalityFunctional::set_coefficient(int a, int x, int b, int y, double c) {
  Behavior shape;
  shape.n_prep_settings = n_prep_settings;
  shape.n_prep_outcomes = n_prep_outcomes;
  shape.n_meas_settings = n_meas_settings;
  shape.n_meas_outcomes = n_meas_outcomes;
  coeff[flat_index(shape, a, x, b, y)] = c;
}

double InequalityFunctional::value(const Behavior& behavior) const {
  if (behavior.n_prep_settings != n_prep_settings ||
      behavior.n_prep_outcomes != n_prep_outcomes ||
      behavior.n_meas_settings != n_meas_settings ||
      behavior.n_meas_outcomes != n_meas_outcomes)
    throw std::invalid_argument("behavior shape does not match the functional");
  double acc = 0.0;
  for (int x = 0; x < n_prep_settings; ++x)
    for (int a = 0; a < n_prep_outcomes; ++a)
      for (int y = 0; y < n_meas_settings; ++y)
        for (int b = 0; b < n_meas_outcomes; ++b) {
          double c = coefficient(a, x, b, y);
          if (c == 0.0) continue;
          double v = behavior.at(a, x, b, y);
          if (std::isnan(v))
            throw std::invalid_argument("behavior is missing an entry the functional needs");
          acc += c * v / n_prep_outcomes;
        }
  double out = acc - offset;
  return use_absolute_value ? std::abs(out) : out;
}

double InequalityFunctional::strategy_value(const std::vector<int>& a_of_x,
                                            const std::vector<int>& b_of_y) const {
  if (static_cast<int>(a_of_x.size()) != n_prep_settings ||
      static_cast<int>(b_of_y.size()) != n_meas_settings)
    throw std::invalid_argument("strategy length does not match the functional");
  double acc = 0.0;
  for (int x = 0; x < n_prep_settings; ++x)
    for (int y = 0; y < n_meas_settings; ++y)
      acc += coefficient(a_of_x[x], x, b_of_y[y], y);
  double out = acc - offset;
  return use_absolute_value ? std::abs(out) : out;
}

InequalityFunctional cglmp4_functional() {
  InequalityFunctional f;
  f.name = "cglmp4";
  f.n_prep_settings = 2;
  f.n_prep_outcomes = 4;
  f.n_meas_settings = 2;
  f.n_meas_outcomes = 4;
  f.coeff.assign(table_size(2, 4, 2, 4), 0.0);
  f.offset = 2.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      if (a <= b) f.set_coefficient(a, 0, b, 0, 1.0);
      if (a >= b) {
        f.set_coefficient(a, 0, b, 1, 1.0);
        f.set_coefficient(a, 1, b, 0, 1.0);
        f.set_coefficient(a, 1, b, 1, -1.0);
      }
    }
  return f;
}

InequalityFunctional chsh_functional() {
  InequalityFunctional f;
  f.name = "chsh";
  f.n_prep_settings = 2;
  f.n_prep_outcomes = 2;
  f.n_meas_settings = 2;
  f.n_meas_outcomes = 2;
  f.coeff.assign(table_size(2, 2, 2, 2), 0.0);
  f.offset = 0.0;
  f.use_absolute_value = true;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          f.set_coefficient(a, x, b, y, ((a + b + x * y) % 2 == 0) ? 1.0 : -1.0);
  return f;
}

InequalityFunctional functional_by_name(const std::string& name) {
  if (name == "cglmp4") return cglmp4_functional();
  if (name == "chsh") return chsh_functional();
  throw std::invalid_argument("unknown functional: " + name);
}

ClassicalMax classical_maximum(const InequalityFunctional& f) {
  double n_prep = std::pow(static_cast<double>(f.n_prep_outcomes), f.n_prep_settings);
  double n_meas = std::pow(static_cast<double>(f.n_meas_outcomes), f.n_meas_settings);
  if (n_prep * n_meas > 1e6)
    throw std::invalid_argument("deterministic strategy enumeration too large");

  auto advance = [](std::vector<int>& digits, int base) {
    for (std::size_t i = digits.size(); i-- > 0;) {
      if (++digits[i] < base) return true;
      digits[i] = 0;
    }
    return false;
  };

  ClassicalMax best;
  bool first = true;
  std::vector<int> a_of_x(f.n_prep_settings, 0);
  do {
    std::vector<int> b_of_y(f.n_meas_settings, 0);
    do {
      double v = f.strategy_value(a_of_x, b_of_y);
      if (first || v > best.value) {
        best.value = v;
        best.prep_strategy = a_of_x;
        best.meas_strategy = b_of_y;
        first = false;
      }
    } while (advance(b_of_y, f.n_meas_outcomes));
  } while (advance(a_of_x, f.n_prep_outcomes));
  return best;
}

Behavior behavior_from(const Assemblage& preparations,
                       const std::vector<Povm>& measurements) {
  preparations.validate();
  if (measurements.empty()) throw std::invalid_argument("no measurements given");
  int n_x = preparations.inputs();
  int n_a = preparations.outcomes();
  int n_y = static_cast<int>(measurements.size());
  int n_b = measurements.front().outcomes();
  for (const Povm& m : measurements) {
    m.validate();
    if (m.dim() != preparations.dim())
      throw std::invalid_argument("measurement dimension does not match preparations");
    if (m.outcomes() != n_b)
      throw std::invalid_argument("measurements have mismatched outcome counts");
  }

  Behavior out = Behavior::empty(n_x, n_a, n_y, n_b);
  for (int x = 0; x < n_x; ++x) {
    for (int a = 0; a < n_a; ++a) {
      const CMatrix& sigma = preparations.states[x][a];
      double weight = sigma.trace().real();
      // The conditional table presumes uniform emission; reject assemblages
      // that would silently break that convention.
      if (std::abs(weight - 1.0 / n_a) > 1e-6)
        throw std::invalid_argument("preparation weights are not uniform");
      for (int y = 0; y < n_y; ++y)
        for (int b = 0; b < n_b; ++b)
          out.at(a, x, b, y) =
              born_probability(sigma, measurements[y].effects[b]) / weight;
    }
  }
  out.validate();
  return out;
}

double canonical_mixing_angle() {
  double s = std::sin(M_PI / 8.0);
  return 0.5 * std::asin((1.0 + 2.0 * s) / std::sqrt(6.0 * s * s + 4.0 * s + 1.0));
}

namespace {

std::vector<Povm> canonical_cglmp4_measurements() {
  std::vector<Povm> out;
  for (int y = 0; y < 2; ++y) {
    double phi = (y == 0) ? 0.0 : M_PI / 4.0;
    Povm povm;
    for (int b = 0; b < 4; ++b) {
      CVector psi(4);
      for (int k = 0; k < 4; ++k)
        psi(k) = 0.5 * std::polar(1.0, (0.5 * M_PI * b - phi) * k);
      povm.effects.push_back(projector(psi));
    }
    povm.validate();
    out.push_back(std::move(povm));
  }
  return out;
}

}  // namespace

CanonicalSetup canonical_cglmp4_entangled() {
  double theta = canonical_mixing_angle();
  double amp[4] = {std::cos(theta), std::sin(theta), std::sin(theta), std::cos(theta)};
  CanonicalSetup setup;
  setup.preparations.states.resize(2);
  for (int x = 0; x < 2; ++x) {
    double phase_x = (x == 0) ? -M_PI / 8.0 : M_PI / 8.0;
    for (int a = 0; a < 4; ++a) {
      CVector ket(4);
      for (int k = 0; k < 4; ++k)
        ket(k) = amp[k] / std::sqrt(2.0) *
                 std::polar(1.0, (0.5 * M_PI * a + phase_x) * k);
      setup.preparations.states[x].push_back(0.25 * projector(ket));
    }
  }
  setup.measurements = canonical_cglmp4_measurements();
  setup.preparations.validate();
  return setup;
}

CanonicalSetup canonical_cglmp4_separable() {
  CanonicalSetup setup;
  setup.preparations.states.resize(2);
  for (int x = 0; x < 2; ++x) {
    double sx = (x == 0) ? -1.0 : 1.0;
    for (int a = 0; a < 4; ++a) {
      CVector u(2), v(2);
      u(0) = std::polar(1.0 / std::sqrt(2.0), sx * M_PI / 8.0 + 0.5 * M_PI * a);
      u(1) = std::polar(1.0 / std::sqrt(2.0), sx * 3.0 * M_PI / 8.0 - 0.5 * M_PI * a);
      v(0) = std::polar(1.0 / std::sqrt(2.0), -(sx * M_PI / 8.0 + 0.5 * M_PI * a));
      v(1) = 1.0 / std::sqrt(2.0);
      CVector ket = CVector(4);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) ket(2 * i + j) = u(i) * v(j);
      setup.preparations.states[x].push_back(0.25 * projector(ket));
    }
  }
  setup.measurements = canonical_cglmp4_measurements();
  setup.preparations.validate();
  return setup;
}

CanonicalSetup canonical_chsh() {
  // Wave-plate conventions: a half-wave plate at angle t maps horizontal
  // polarization to (cos 2t, sin 2t).
  auto rotated_ket = [](double degrees) {
    double r = 2.0 * degrees * M_PI / 180.0;
    CVector ket(2);
    ket(0) = std::cos(r);
    ket(1) = std::sin(r);
    return ket;
  };
  // Orthogonal pairs per setting: diagonal/antidiagonal for x = 0,
  // horizontal/vertical for x = 1.
  const double prep_angle[2][2] = {{22.5, -22.5}, {0.0, 45.0}};
  const double meas_angle[2] = {-78.75, 33.75};

  CanonicalSetup setup;
  setup.preparations.states.resize(2);
  for (int x = 0; x < 2; ++x)
    for (int a = 0; a < 2; ++a)
      setup.preparations.states[x].push_back(0.5 * projector(rotated_ket(prep_angle[x][a])));
  for (int y = 0; y < 2; ++y) {
    Povm povm;
    CMatrix first = projector(rotated_ket(meas_angle[y]));
    povm.effects.push_back(first);
    povm.effects.push_back(CMatrix::Identity(2, 2) - first);
    povm.validate();
    setup.measurements.push_back(std::move(povm));
  }
  setup.preparations.validate();
  return setup;
}

namespace {

std::vector<FunctionalBounds> build_registry() {
  std::vector<FunctionalBounds> reg;

  FunctionalBounds cglmp;
  cglmp.functional = "cglmp4";
  cglmp.noncontextual_bound = 0.0;
  cglmp.noncontextual_provenance =
      "exact maximum over deterministic strategies (classical_maximum)";
  cglmp.thresholds.push_back(
      {3, 1.0 / std::sqrt(2.0) - 0.5,
       "largest value reachable with two-dimensional preparations, closed form "
       "1/sqrt(2) - 1/2"});
  cglmp.thresholds.push_back(
      {4, 0.315,
       "largest value reachable with three-dimensional preparations, numerical "
       "sweep"});
  cglmp.quantum_maximum = 0.36476;
  cglmp.quantum_provenance =
      "four-dimensional see-saw optimum over the canonical measurement family";
  reg.push_back(std::move(cglmp));

  FunctionalBounds chsh;
  chsh.functional = "chsh";
  chsh.noncontextual_bound = 2.0;
  chsh.noncontextual_provenance =
      "exact maximum over deterministic strategies (classical_maximum)";
  chsh.quantum_maximum = 2.0 * std::sqrt(2.0);
  chsh.quantum_provenance = "qubit maximum 2*sqrt(2) with projective measurements";
  reg.push_back(std::move(chsh));

  return reg;
}

}  // namespace

const FunctionalBounds& bounds_for(const std::string& functional_name) {
  static const std::vector<FunctionalBounds> registry = build_registry();
  for (const FunctionalBounds& fb : registry)
    if (fb.functional == functional_name) return fb;
  throw std::invalid_argument("no bounds registered for: " + functional_name);
}

std::vector<std::string> registered_functionals() {
  static const std::vector<FunctionalBounds> registry = build_registry();
  std::vector<std::string> names;
  for (const FunctionalBounds& fb : registry) names.push_back(fb.functional);
  return names;
}

CertificationVerdict certify(const std::string& functional, double value,
                             double std_error, double k_sigma) {
  if (std_error < 0.0) throw std::invalid_argument("standard error must be >= 0");
  if (k_sigma < 0.0) throw std::invalid_argument("k_sigma must be >= 0");
  const FunctionalBounds& fb = bounds_for(functional);

  CertificationVerdict verdict;
  verdict.functional = functional;
  verdict.value = value;
  verdict.std_error = std_error;
  verdict.k_sigma = k_sigma;
  verdict.adjusted = value - k_sigma * std_error;
  verdict.contextual = verdict.adjusted > fb.noncontextual_bound;
  verdict.certified_min_dimension = 1;

  auto describe = [](const std::string& label, double bound) {
    std::ostringstream os;
    os << label << " (" << bound << ")";
    return os.str();
  };

  if (!verdict.contextual) return verdict;
  verdict.certified_min_dimension = 2;
  verdict.crossed.push_back(describe("noncontextual bound", fb.noncontextual_bound));
  for (const DimensionThreshold& t : fb.thresholds) {
    if (verdict.adjusted > t.value) {
      verdict.certified_min_dimension =
          std::max(verdict.certified_min_dimension, t.min_dimension_if_exceeded);
      std::ostringstream label;
      label << "dimension-" << (t.min_dimension_if_exceeded - 1) << " ceiling";
      verdict.crossed.push_back(describe(label.str(), t.value));
    } else {
      break;  // thresholds increase, nothing further can be crossed
    }
  }
  return verdict;
}

}  // namespace dimcert
