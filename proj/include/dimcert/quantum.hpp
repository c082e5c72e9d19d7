#pragma once

#include <vector>

#include "dimcert/linalg.hpp"

namespace dimcert {

// Validators throw std::invalid_argument naming the violated property.
// `trace` is the expected trace; preparations in this toolkit are stored
// subnormalized (trace = outcome probability), so callers pass what they mean.
void check_density_matrix(const CMatrix& rho, double trace = 1.0,
                          double tol = kTraceTol);
void check_effect(const CMatrix& effect);

CMatrix projector(const CVector& ket);

// Measurement with positive effects summing to the identity.
struct Povm {
  std::vector<CMatrix> effects;

  int dim() const;
  int outcomes() const { return static_cast<int>(effects.size()); }
  void validate(double tol = kPsdTol) const;
};

// Subnormalized conditional preparations sigma[x][a]. Each state carries its
// outcome weight in the trace; summing over a at fixed x gives the same
// reduced state for every x, with unit trace.
struct Assemblage {
  std::vector<std::vector<CMatrix>> states;

  int dim() const;
  int inputs() const { return static_cast<int>(states.size()); }
  int outcomes() const;
  CMatrix reduced_state() const;
  void validate(double tol = kPsdTol) const;
};

// Re Tr(state * effect); complains if the product's trace has an imaginary
// part above 1e-10, which indicates non-Hermitian inputs.
double born_probability(const CMatrix& state, const CMatrix& effect);

// Conditional states on the second factor after measuring the first factor
// of `joint` with `measurements`: sigma[x][a] = Tr_1(joint (N_{a|x} (x) I)).
Assemblage steer(const CMatrix& joint, int dim_first, int dim_second,
                 const std::vector<Povm>& measurements);

// A joint state plus first-factor measurements that steer to a given
// assemblage. The purifier lives on the support of the reduced state, so
// the measurements sum to the identity exactly.
struct Dilation {
  CMatrix joint_state;
  int dim_purifier = 0;
  int dim_system = 0;
  std::vector<Povm> measurements;
};

Dilation ghjw_dilation(const Assemblage& assemblage);

// Projective POVM from a Haar-random unitary: the first outcomes-1 effects
// are rank-1 column projectors, the last absorbs the remaining subspace.
Povm random_projective_povm(int dim, int outcomes, std::uint64_t seed);

}  // namespace dimcert
