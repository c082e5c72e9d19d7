#include "dimcert/seesaw.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "dimcert/errors.hpp"
#include "dimcert/rng.hpp"

namespace dimcert {

namespace {

CMatrix symmetrized(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

std::string outcome_block(const char* prefix, int outcome, int setting) {
  return std::string(prefix) + "_" + std::to_string(outcome) + "|" +
         std::to_string(setting);
}

void check_measurements(const InequalityFunctional& f,
                        const std::vector<Povm>& measurements) {
  if (static_cast<int>(measurements.size()) != f.n_meas_settings)
    throw std::invalid_argument("seesaw: expected one POVM per setting");
  const int dim = measurements.front().dim();
  for (const Povm& povm : measurements) {
    if (povm.outcomes() != f.n_meas_outcomes)
      throw std::invalid_argument("seesaw: POVM outcome count mismatch");
    if (povm.dim() != dim)
      throw std::invalid_argument("seesaw: POVM dimensions differ");
    povm.validate(1e-6);
  }
}

// Maximum over the last `window` entries minus their minimum, the "same
// result n times in a row" test.
bool window_stable(const std::vector<double>& values, int window, double tol) {
  if (static_cast<int>(values.size()) < window) return false;
  double lo = values.back();
  double hi = values.back();
  for (int i = 0; i < window; ++i) {
    const double v = values[values.size() - 1 - i];
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi - lo <= tol;
}

double solved_objective(const SdpProblem& problem, const SdpOptions& options,
                        const char* stage, SdpSolution* solution) {
  *solution = solve_sdp(problem, options);
  if (solution->status != SdpStatus::optimal)
    throw NumericalError(std::string("seesaw ") + stage + " solve ended " +
                         to_string(solution->status));
  return solution->objective;
}

}  // namespace

const SeesawRecord& SeesawResult::best() const {
  if (best_restart < 0 || best_restart >= static_cast<int>(records.size()))
    throw std::logic_error("seesaw result has no best record");
  return records[best_restart];
}

SdpOptions seesaw_sdp_options() {
  SdpOptions options;  // default tolerances land ~1e-9 on these problems
  options.record_iterations = false;
  return options;
}

PreparationOptimum optimize_preparations(const InequalityFunctional& f,
                                         const std::vector<Povm>& measurements,
                                         bool ppt, const SdpOptions& options) {
  check_measurements(f, measurements);
  const int n_x = f.n_prep_settings;
  const int n_a = f.n_prep_outcomes;
  const int dim = measurements.front().dim();
  if (ppt && dim != 4)
    throw std::invalid_argument(
        "ppt preparations need a 4-dimensional (2x2) space");

  SdpProblem problem;
  auto state_block = [n_a](int a, int x) { return x * n_a + a; };
  for (int x = 0; x < n_x; ++x)
    for (int a = 0; a < n_a; ++a)
      problem.add_block(outcome_block("sigma", a, x), dim);
  const int partner_base = n_x * n_a;
  if (ppt)
    for (int x = 0; x < n_x; ++x)
      for (int a = 0; a < n_a; ++a)
        problem.add_block(outcome_block("sigma_pt", a, x), dim);

  for (int x = 0; x < n_x; ++x)
    for (int a = 0; a < n_a; ++a) {
      CMatrix c = CMatrix::Zero(dim, dim);
      for (int y = 0; y < f.n_meas_settings; ++y)
        for (int b = 0; b < f.n_meas_outcomes; ++b)
          c += f.coefficient(a, x, b, y) * measurements[y].effects[b];
      problem.set_objective(state_block(a, x), symmetrized(c));
    }

  const std::vector<CMatrix> basis = hermitian_basis(dim);

  // Every preparation setting steers the same reduced state.
  for (int x = 1; x < n_x; ++x)
    for (const CMatrix& e : basis) {
      SdpConstraint row;
      for (int a = 0; a < n_a; ++a) {
        row.terms.emplace_back(state_block(a, x), e);
        row.terms.emplace_back(state_block(a, 0), -e);
      }
      problem.add_constraint(std::move(row));
    }

  {
    SdpConstraint row;
    for (int a = 0; a < n_a; ++a)
      row.terms.emplace_back(state_block(a, 0), CMatrix::Identity(dim, dim));
    row.rhs = 1.0;
    problem.add_constraint(std::move(row));
  }

  // The partner block pins down the partial transpose entry by entry; its
  // positivity is then exactly the PPT requirement.
  if (ppt)
    for (int x = 0; x < n_x; ++x)
      for (int a = 0; a < n_a; ++a)
        for (const CMatrix& e : basis) {
          SdpConstraint row;
          row.terms.emplace_back(partner_base + state_block(a, x), e);
          row.terms.emplace_back(state_block(a, x),
                                 -partial_transpose_first(e, 2, 2));
          problem.add_constraint(std::move(row));
        }

  SdpSolution solution;
  const double objective =
      solved_objective(problem, options, "preparation", &solution);

  PreparationOptimum out;
  out.preparations.states.resize(n_x);
  for (int x = 0; x < n_x; ++x) {
    out.preparations.states[x].resize(n_a);
    for (int a = 0; a < n_a; ++a)
      out.preparations.states[x][a] = symmetrized(solution.X[state_block(a, x)]);
  }
  out.value = objective - f.offset;
  return out;
}

MeasurementOptimum optimize_measurements(const InequalityFunctional& f,
                                         const Assemblage& preparations,
                                         const SdpOptions& options) {
  if (preparations.inputs() != f.n_prep_settings ||
      preparations.outcomes() != f.n_prep_outcomes)
    throw std::invalid_argument("seesaw: assemblage shape mismatch");
  preparations.validate(1e-6);
  const int n_y = f.n_meas_settings;
  const int n_b = f.n_meas_outcomes;
  const int dim = preparations.dim();

  SdpProblem problem;
  auto effect_block = [n_b](int b, int y) { return y * n_b + b; };
  for (int y = 0; y < n_y; ++y)
    for (int b = 0; b < n_b; ++b)
      problem.add_block(outcome_block("m", b, y), dim);

  for (int y = 0; y < n_y; ++y)
    for (int b = 0; b < n_b; ++b) {
      CMatrix c = CMatrix::Zero(dim, dim);
      for (int x = 0; x < f.n_prep_settings; ++x)
        for (int a = 0; a < f.n_prep_outcomes; ++a)
          c += f.coefficient(a, x, b, y) * preparations.states[x][a];
      problem.set_objective(effect_block(b, y), symmetrized(c));
    }

  const std::vector<CMatrix> basis = hermitian_basis(dim);
  for (int y = 0; y < n_y; ++y)
    for (const CMatrix& e : basis) {
      SdpConstraint row;
      for (int b = 0; b < n_b; ++b) row.terms.emplace_back(effect_block(b, y), e);
      row.rhs = e.trace().real();
      problem.add_constraint(std::move(row));
    }

  SdpSolution solution;
  const double objective =
      solved_objective(problem, options, "measurement", &solution);

  MeasurementOptimum out;
  out.measurements.resize(n_y);
  for (int y = 0; y < n_y; ++y) {
    out.measurements[y].effects.resize(n_b);
    for (int b = 0; b < n_b; ++b)
      out.measurements[y].effects[b] = symmetrized(solution.X[effect_block(b, y)]);
  }
  out.value = objective - f.offset;
  return out;
}

SeesawResult run_seesaw(const InequalityFunctional& f,
                        const SeesawConfig& config, bool ppt) {
  if (config.restarts < 1)
    throw std::invalid_argument("seesaw: restarts must be >= 1");
  if (config.convergence_window < 2)
    throw std::invalid_argument("seesaw: convergence window must be >= 2");
  if (config.max_alternations < 1)
    throw std::invalid_argument("seesaw: max_alternations must be >= 1");
  if (!config.initial_measurements.empty())
    check_measurements(f, config.initial_measurements);

  const SdpOptions options = seesaw_sdp_options();
  SeesawResult result;
  result.records.reserve(config.restarts);

  for (int r = 0; r < config.restarts; ++r) {
    SeesawRecord record;
    record.restart = r;
    record.seed = derive_seed(config.master_seed, r);
    try {
      std::vector<Povm> current = config.initial_measurements;
      if (current.empty())
        for (int y = 0; y < f.n_meas_settings; ++y)
          current.push_back(random_projective_povm(
              config.dim, f.n_meas_outcomes, derive_seed(record.seed, y)));

      bool converged = false;
      for (int alt = 1; alt <= config.max_alternations && !converged; ++alt) {
        PreparationOptimum prep =
            optimize_preparations(f, current, ppt, options);
        record.values.push_back(prep.value);
        record.preparations = std::move(prep.preparations);

        MeasurementOptimum meas =
            optimize_measurements(f, record.preparations, options);
        record.values.push_back(meas.value);
        current = std::move(meas.measurements);

        record.alternations = alt;
        converged = window_stable(record.values, config.convergence_window,
                                  config.value_tol);
      }
      record.measurements = std::move(current);
      record.final_value = record.values.back();
      record.termination = converged ? "converged" : "alternation-limit";
    } catch (const std::exception& error) {
      record.final_value = -std::numeric_limits<double>::infinity();
      record.termination = std::string("failed: ") + error.what();
    }

    if (result.best_restart < 0 ||
        record.final_value >
            result.records[result.best_restart].final_value)
      result.best_restart = r;
    result.records.push_back(std::move(record));
  }

  if (!std::isfinite(result.best().final_value))
    throw NumericalError("seesaw: every restart failed");
  return result;
}

}  // namespace dimcert
