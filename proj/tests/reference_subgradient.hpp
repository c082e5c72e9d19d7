#pragma once

// Independent cross-check for the interior-point module. The optimum of
//   maximize sum_i Tr(C_i X_i)  s.t.  sum_i Tr(A_{j,i} X_i) = b_j, X >= 0
// is bracketed from above by minimizing the penalized dual
//   f(y) = b.y + cap * max(0, max_{i,k} lambda_k(C_i - sum_j y_j A_{j,i}))
// whose minimum equals the optimum whenever cap dominates the trace of every
// feasible primal point; all problems checked this way carry a total-trace
// row, so the caller knows such a bound. Plain subgradient steps crawl once
// the leading eigenvalue becomes degenerate at the optimum, so the max is
// relaxed to a softmax with smoothing mu driven to zero; each stage runs
// projected first-order descent with a backtracking step. The relaxation
// only ever sits above f, so the best value found converges to the optimum
// from above. Nothing here calls solve_sdp or shares code with it beyond
// Eigen itself.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dimcert/rng.hpp"
#include "dimcert/sdp.hpp"
#include "support.hpp"

namespace dimcert::testing {

struct RandomSdp {
  SdpProblem problem;
  double trace_cap = 0.0;  // valid upper bound on the feasible total trace
};

// Feasible and bounded by construction: a strictly positive interior point
// fixes every right-hand side and the first row pins the total trace.
inline RandomSdp make_random_feasible_problem(std::uint64_t seed) {
  Rng rng(seed);
  RandomSdp out;
  const int n_blocks = 1 + static_cast<int>(rng.next_u64() % 2);
  std::vector<CMatrix> interior;
  double total_trace = 0.0;
  for (int i = 0; i < n_blocks; ++i) {
    const int dim = 2 + static_cast<int>(rng.next_u64() % 7);
    out.problem.add_block("b" + std::to_string(i), dim);
    CMatrix x0 = random_ginibre_state(dim, dim, rng) * (0.5 + rng.uniform());
    interior.push_back(x0);
    total_trace += x0.trace().real();
  }
  for (int i = 0; i < n_blocks; ++i)
    out.problem.set_objective(i, random_hermitian(out.problem.block_dims[i], rng));

  SdpConstraint trace_row;
  for (int i = 0; i < n_blocks; ++i) {
    const int d = out.problem.block_dims[i];
    trace_row.terms.emplace_back(i, CMatrix::Identity(d, d));
  }
  trace_row.rhs = total_trace;
  out.problem.add_constraint(trace_row);

  const int extra = 2 + static_cast<int>(rng.next_u64() % 12);
  for (int j = 0; j < extra; ++j) {
    SdpConstraint row;
    for (int i = 0; i < n_blocks; ++i) {
      CMatrix a = random_hermitian(out.problem.block_dims[i], rng);
      row.rhs += (a * interior[i]).trace().real();
      row.terms.emplace_back(i, std::move(a));
    }
    out.problem.add_constraint(row);
  }
  out.trace_cap = 2.0 * total_trace;
  return out;
}

struct ReferenceValue {
  double value = 0.0;
  int evaluations = 0;
};

inline ReferenceValue subgradient_reference(const SdpProblem& problem,
                                            double trace_cap,
                                            int stage_iterations = 32000) {
  const int m = static_cast<int>(problem.constraints.size());
  const int nb = problem.n_blocks();

  RVector b(m);
  for (int j = 0; j < m; ++j) b(j) = problem.constraints[j].rhs;

  int n_total = 0;
  for (int d : problem.block_dims) n_total += d;
  const double log_terms = std::log1p(static_cast<double>(n_total));

  ReferenceValue out;
  std::vector<CMatrix> d(nb);
  std::vector<Eigen::SelfAdjointEigenSolver<CMatrix>> es(nb);

  // Smoothed value and gradient; the zero channel inside log1p realizes the
  // max with 0, so f_mu >= f everywhere and f_mu <= f + mu * log_terms.
  auto evaluate = [&](const RVector& y, double mu, RVector* grad) {
    ++out.evaluations;
    for (int i = 0; i < nb; ++i) {
      d[i] = problem.objective[i];
    }
    for (int j = 0; j < m; ++j)
      for (const auto& [block, a] : problem.constraints[j].terms)
        d[block] -= y(j) * a;
    double lead = 0.0;  // never below the zero channel
    for (int i = 0; i < nb; ++i) {
      es[i].compute(d[i]);
      lead = std::max(lead, es[i].eigenvalues()(problem.block_dims[i] - 1));
    }
    double mass = std::exp(-lead / mu);  // zero channel
    for (int i = 0; i < nb; ++i)
      for (int k = 0; k < problem.block_dims[i]; ++k)
        mass += std::exp((es[i].eigenvalues()(k) - lead) / mu);
    const double smooth = lead + mu * std::log(mass);
    if (grad) {
      *grad = b;
      for (int i = 0; i < nb; ++i)
        for (int k = 0; k < problem.block_dims[i]; ++k) {
          const double w =
              std::exp((es[i].eigenvalues()(k) - lead) / mu) / mass;
          if (w < 1e-14) continue;
          const CVector v = es[i].eigenvectors().col(k);
          for (int j = 0; j < m; ++j)
            for (const auto& [block, a] : problem.constraints[j].terms)
              if (block == i) (*grad)(j) -= trace_cap * w * v.dot(a * v).real();
        }
    }
    return b.dot(y) + trace_cap * smooth;
  };

  RVector y = RVector::Zero(m), grad(m), trial(m);
  double scale = 1.0 + std::abs(evaluate(y, 1.0, nullptr));
  for (double mu = 0.25 * scale; mu > 1e-8 * scale / log_terms; mu *= 0.25) {
    double f = evaluate(y, mu, &grad);
    double step = mu / (trace_cap * (1.0 + grad.squaredNorm()));
    double checkpoint = f;
    for (int it = 0; it < stage_iterations; ++it) {
      if (grad.norm() * step < 1e-15 * scale && it > 8) break;
      if (it % 64 == 63) {  // stage converged, move on to smaller smoothing
        if (checkpoint - f < 1e-13 * scale) break;
        checkpoint = f;
      }
      trial = y - step * grad;
      for (int j = 0; j < m; ++j) trial(j) = std::clamp(trial(j), -1e6, 1e6);
      const double ft = evaluate(trial, mu, nullptr);
      if (ft < f) {
        y = trial;
        f = evaluate(y, mu, &grad);
        step *= 1.7;
      } else {
        step *= 0.4;
      }
    }
  }
  // The smoothing overhang is gone at mu -> 0; report the exact penalty.
  double lead = 0.0;
  for (int i = 0; i < nb; ++i) {
    d[i] = problem.objective[i];
  }
  for (int j = 0; j < m; ++j)
    for (const auto& [block, a] : problem.constraints[j].terms)
      d[block] -= y(j) * a;
  for (int i = 0; i < nb; ++i) {
    es[i].compute(d[i]);
    lead = std::max(lead, es[i].eigenvalues()(problem.block_dims[i] - 1));
  }
  out.value = b.dot(y) + trace_cap * lead;
  return out;
}

}  // namespace dimcert::testing
