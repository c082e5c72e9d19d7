#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dimcert/linalg.hpp"

namespace dimcert {

// One linear equality sum_i Tr(A_{block,i} X_i) = rhs over the problem's
// blocks. Coefficient matrices must be Hermitian.
struct SdpConstraint {
  std::vector<std::pair<int, CMatrix>> terms;
  double rhs = 0.0;
};

// maximize   sum_i Tr(C_i X_i)
// subject to sum_i Tr(A_{j,i} X_i) = b_j  for each constraint j,
//            X_i Hermitian positive semidefinite.
struct SdpProblem {
  std::vector<std::string> block_names;
  std::vector<int> block_dims;
  std::vector<CMatrix> objective;
  std::vector<SdpConstraint> constraints;

  int add_block(const std::string& name, int dim);
  void set_objective(int block, CMatrix c);
  void add_constraint(SdpConstraint c);
  int n_blocks() const { return static_cast<int>(block_dims.size()); }
  void validate() const;

  // Lossless plain-text round trip, independent of this process. The loader
  // reports the offending line on malformed input.
  std::string dump() const;
  static SdpProblem load(const std::string& text,
                         const std::string& origin = "sdp");
};

enum class SdpStatus { optimal, infeasible, unbounded, max_iterations };

std::string to_string(SdpStatus status);

// Scalars recorded once per interior-point iteration, used by the audit
// tests to confirm weak duality along the path. Residuals are relative.
struct SdpIterationRecord {
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double mu = 0.0;
  double tau = 0.0;
  double kappa = 0.0;
};

struct SdpOptions {
  int max_iterations = 200;
  double gap_tol = 1e-8;
  double feas_tol = 1e-8;
  bool record_iterations = true;
};

struct SdpSolution {
  SdpStatus status = SdpStatus::max_iterations;
  std::vector<CMatrix> X;  // primal blocks
  std::vector<CMatrix> S;  // dual slacks, near sum_j y_j A_{j,i} - C_i
  RVector y;               // multiplier per constraint, 0 for redundant rows
  double objective = 0.0;
  double dual_objective = 0.0;
  double gap = 0.0;              // dual_objective - objective
  double primal_residual = 0.0;  // max_j |Tr(A_j X) - b_j|
  double dual_residual = 0.0;    // max_i || sum_j y_j A_{j,i} - C_i - S_i ||
  int iterations = 0;
  std::vector<SdpIterationRecord> trace;
  // status == infeasible: y certifies sum_j y_j A_{j,i} <= 0 with b'y > 0.
  // status == unbounded:  X is a ray with A(X) = 0, X >= 0, Tr(C X) > 0.
};

SdpSolution solve_sdp(const SdpProblem& problem, const SdpOptions& options = {});

// Everything here is recomputed from (problem, solution); nothing is taken
// from solver internals, so a wrong solver cannot vouch for itself.
struct SdpValidation {
  double max_equality_residual = 0.0;
  double min_primal_eigenvalue = 0.0;
  double min_dual_eigenvalue = 0.0;
  double max_complementarity = 0.0;  // max_i |Tr(X_i S_i)|
  double duality_gap = 0.0;          // b'y - objective
  bool certificate_valid = false;    // infeasible/unbounded statuses only
  double certificate_margin = 0.0;
};

SdpValidation validate_solution(const SdpProblem& problem,
                                const SdpSolution& solution);

}  // namespace dimcert
