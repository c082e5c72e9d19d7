#pragma once

// Generators shared by the unit and acceptance suites. Everything is seeded
// through Rng so both suites replay identically.

#include <cstdint>
#include <numeric>
#include <vector>

#include "dimcert/inequalities.hpp"
#include "dimcert/quantum.hpp"
#include "dimcert/rng.hpp"

namespace dimcert::testing {

inline CMatrix random_ginibre_state(int dim, int rank, Rng& rng) {
  CMatrix g(dim, rank);
  for (int j = 0; j < rank; ++j)
    for (int i = 0; i < dim; ++i) g(i, j) = Complex(rng.normal(), rng.normal());
  CMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return (rho + rho.adjoint()) / 2.0;
}

inline CMatrix random_hermitian(int dim, Rng& rng) {
  CMatrix m(dim, dim);
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < dim; ++i) m(i, j) = Complex(rng.normal(), rng.normal());
  return (m + m.adjoint()) / 2.0;
}

// General (not necessarily projective) POVM: Gram pieces whitened by the
// inverse square root of their sum.
inline Povm random_povm(int dim, int outcomes, Rng& rng) {
  std::vector<CMatrix> pieces(outcomes);
  CMatrix total = CMatrix::Zero(dim, dim);
  for (int b = 0; b < outcomes; ++b) {
    CMatrix w(dim, dim);
    for (int j = 0; j < dim; ++j)
      for (int i = 0; i < dim; ++i) w(i, j) = Complex(rng.normal(), rng.normal());
    pieces[b] = w * w.adjoint();
    total += pieces[b];
  }
  const EigenSystem es = hermitian_eigensystem(total);
  CMatrix root_inv = CMatrix::Zero(dim, dim);
  for (int k = 0; k < dim; ++k)
    root_inv += es.vectors.col(k) * es.vectors.col(k).adjoint() /
                std::sqrt(es.values(k));
  Povm povm;
  povm.effects.reserve(outcomes);
  for (int b = 0; b < outcomes; ++b) {
    CMatrix e = root_inv * pieces[b] * root_inv;
    povm.effects.push_back((e + e.adjoint()) / 2.0);
  }
  return povm;
}

// Consistent random assemblage by steering one joint state; joint_rank below
// n_a*dim yields rank-deficient members.
inline Assemblage random_assemblage(int n_x, int n_a, int dim,
                                    std::uint64_t seed, int joint_rank) {
  Rng rng(seed);
  CMatrix joint = random_ginibre_state(n_a * dim, joint_rank, rng);
  std::vector<Povm> povms;
  povms.reserve(n_x);
  for (int x = 0; x < n_x; ++x)
    povms.push_back(random_projective_povm(n_a, n_a, rng.next_u64()));
  return steer(joint, n_a, dim, povms);
}

// Assemblage with exactly uniform emission probabilities, as behavior_from
// requires: a classical register of n_a random states steered by rank-one
// projective measurements, so every member has trace 1/n_a.
inline Assemblage random_uniform_assemblage(int n_x, int n_a, int dim,
                                            std::uint64_t seed) {
  Rng rng(seed);
  std::vector<CMatrix> register_states;
  register_states.reserve(n_a);
  for (int i = 0; i < n_a; ++i)
    register_states.push_back(random_ginibre_state(dim, dim, rng));
  Assemblage assemblage;
  assemblage.states.assign(n_x, std::vector<CMatrix>(n_a, CMatrix::Zero(dim, dim)));
  for (int x = 0; x < n_x; ++x) {
    Povm povm = random_projective_povm(n_a, n_a, rng.next_u64());
    for (int a = 0; a < n_a; ++a) {
      CMatrix sigma = CMatrix::Zero(dim, dim);
      for (int i = 0; i < n_a; ++i)
        sigma += povm.effects[a](i, i).real() * register_states[i];
      assemblage.states[x][a] = sigma / static_cast<double>(n_a);
    }
  }
  return assemblage;
}

// Random mixture of deterministic noncontextual strategies. The hidden
// variable is (k, u) with u uniform; preparation outcomes are permuted by u
// so the ensemble average over a is exactly uniform for every x, which is
// the preparation-noncontextuality constraint.
inline Behavior random_noncontextual_behavior(const InequalityFunctional& f,
                                              std::uint64_t seed) {
  Rng rng(seed);
  const int n_x = f.n_prep_settings, n_a = f.n_prep_outcomes;
  const int n_y = f.n_meas_settings, n_b = f.n_meas_outcomes;
  const int atoms = 1 + static_cast<int>(rng.next_u64() % 6);

  std::vector<double> weights(atoms);
  double total = 0.0;
  for (double& w : weights) {
    w = rng.uniform() + 1e-3;
    total += w;
  }
  for (double& w : weights) w /= total;

  Behavior behavior = Behavior::empty(n_x, n_a, n_y, n_b);
  for (double& cell : behavior.p) cell = 0.0;

  std::vector<int> perm(n_a);
  for (int k = 0; k < atoms; ++k) {
    std::vector<std::vector<int>> prep_perm(n_x, std::vector<int>(n_a));
    for (int x = 0; x < n_x; ++x) {
      std::iota(perm.begin(), perm.end(), 0);
      for (int i = n_a - 1; i > 0; --i)
        std::swap(perm[i], perm[rng.next_u64() % (i + 1)]);
      prep_perm[x] = perm;
    }
    std::vector<std::vector<int>> response(n_y, std::vector<int>(n_a));
    for (int y = 0; y < n_y; ++y)
      for (int u = 0; u < n_a; ++u)
        response[y][u] = static_cast<int>(rng.next_u64() % n_b);

    for (int x = 0; x < n_x; ++x)
      for (int u = 0; u < n_a; ++u) {
        const int a = prep_perm[x][u];
        for (int y = 0; y < n_y; ++y)
          behavior.at(a, x, response[y][u], y) += weights[k];
      }
  }
  return behavior;
}

}  // namespace dimcert::testing
