#include "dimcert/quantum.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "dimcert/rng.hpp"

namespace dimcert {

void check_density_matrix(const CMatrix& rho, double trace, double tol) {
  if (rho.rows() != rho.cols())
    throw std::invalid_argument("density matrix must be square");
  if (!is_finite(rho))
    throw std::invalid_argument("density matrix has non-finite entries");
  if (!is_hermitian(rho))
    throw std::invalid_argument("density matrix is not Hermitian");
  if (!is_psd(rho))
    throw std::invalid_argument("density matrix is not positive semidefinite");
  double tr = rho.trace().real();
  if (std::abs(tr - trace) > tol)
    throw std::invalid_argument("density matrix trace is " + std::to_string(tr) +
                                ", expected " + std::to_string(trace));
}

void check_effect(const CMatrix& effect) {
  if (effect.rows() != effect.cols())
    throw std::invalid_argument("effect must be square");
  if (!is_finite(effect))
    throw std::invalid_argument("effect has non-finite entries");
  if (!is_hermitian(effect))
    throw std::invalid_argument("effect is not Hermitian");
  EigenSystem es = hermitian_eigensystem(effect);
  if (es.values.minCoeff() < -kPsdTol)
    throw std::invalid_argument("effect is not positive semidefinite");
  if (es.values.maxCoeff() > 1.0 + kPsdTol)
    throw std::invalid_argument("effect exceeds the identity");
}

CMatrix projector(const CVector& ket) {
  return ket * ket.adjoint();
}

int Povm::dim() const {
  return effects.empty() ? 0 : static_cast<int>(effects.front().rows());
}

void Povm::validate(double tol) const {
  if (effects.empty()) throw std::invalid_argument("POVM has no effects");
  int d = dim();
  CMatrix sum = CMatrix::Zero(d, d);
  for (const CMatrix& e : effects) {
    if (e.rows() != d || e.cols() != d)
      throw std::invalid_argument("POVM effects have mismatched dimensions");
    if (!is_finite(e) || !is_hermitian(e))
      throw std::invalid_argument("POVM effect is not Hermitian");
    if (min_eigenvalue(e) < -tol)
      throw std::invalid_argument("POVM effect is not positive semidefinite");
    sum += e;
  }
  if (max_abs(sum - CMatrix::Identity(d, d)) > std::max(tol, kHermitianTol))
    throw std::invalid_argument("POVM effects do not sum to the identity");
}

int Assemblage::dim() const {
  if (states.empty() || states.front().empty()) return 0;
  return static_cast<int>(states.front().front().rows());
}

int Assemblage::outcomes() const {
  return states.empty() ? 0 : static_cast<int>(states.front().size());
}

CMatrix Assemblage::reduced_state() const {
  if (states.empty() || states.front().empty())
    throw std::invalid_argument("assemblage is empty");
  CMatrix sum = CMatrix::Zero(dim(), dim());
  for (const CMatrix& s : states.front()) sum += s;
  return sum;
}

void Assemblage::validate(double tol) const {
  if (states.empty() || states.front().empty())
    throw std::invalid_argument("assemblage is empty");
  int d = dim();
  std::size_t n_out = states.front().size();
  for (const auto& row : states) {
    if (row.size() != n_out)
      throw std::invalid_argument("assemblage rows have mismatched outcome counts");
    for (const CMatrix& s : row) {
      if (s.rows() != d || s.cols() != d)
        throw std::invalid_argument("assemblage states have mismatched dimensions");
      if (!is_finite(s) || !is_hermitian(s))
        throw std::invalid_argument("assemblage state is not Hermitian");
      if (min_eigenvalue(s) < -tol)
        throw std::invalid_argument("assemblage state is not positive semidefinite");
    }
  }
  CMatrix reduced = reduced_state();
  if (std::abs(reduced.trace().real() - 1.0) > std::max(tol, kTraceTol))
    throw std::invalid_argument("assemblage reduced state is not normalized");
  for (std::size_t x = 1; x < states.size(); ++x) {
    CMatrix sum = CMatrix::Zero(d, d);
    for (const CMatrix& s : states[x]) sum += s;
    if (max_abs(sum - reduced) > tol)
      throw std::invalid_argument(
          "assemblage inputs steer to different reduced states (signaling)");
  }
}

double born_probability(const CMatrix& state, const CMatrix& effect) {
  if (state.rows() != effect.rows() || state.cols() != effect.cols() ||
      state.rows() != state.cols())
    throw std::invalid_argument("state and effect dimensions do not match");
  Complex tr = (state * effect).trace();
  if (std::abs(tr.imag()) > 1e-10)
    throw std::invalid_argument("probability has imaginary part " +
                                std::to_string(tr.imag()));
  return tr.real();
}

Assemblage steer(const CMatrix& joint, int dim_first, int dim_second,
                 const std::vector<Povm>& measurements) {
  Eigen::Index d = static_cast<Eigen::Index>(dim_first) * dim_second;
  if (joint.rows() != d || joint.cols() != d)
    throw std::invalid_argument("joint state does not match the factor split");
  CMatrix id = CMatrix::Identity(dim_second, dim_second);
  Assemblage out;
  out.states.reserve(measurements.size());
  for (const Povm& povm : measurements) {
    if (povm.dim() != dim_first)
      throw std::invalid_argument("steering measurement acts on the wrong factor");
    std::vector<CMatrix> row;
    row.reserve(povm.effects.size());
    for (const CMatrix& effect : povm.effects) {
      CMatrix s = partial_trace_first(joint * tensor_product(effect, id),
                                      dim_first, dim_second);
      row.push_back(0.5 * (s + s.adjoint()));
    }
    out.states.push_back(std::move(row));
  }
  return out;
}

Dilation ghjw_dilation(const Assemblage& assemblage) {
  assemblage.validate();
  int d = assemblage.dim();
  CMatrix reduced = assemblage.reduced_state();
  EigenSystem es = hermitian_eigensystem(reduced);

  // Keep only the support of the reduced state; every conditional state is
  // dominated by it, so nothing is lost and completeness comes out exact.
  std::vector<int> support;
  for (int i = 0; i < d; ++i)
    if (es.values(i) > 1e-12) support.push_back(i);
  int r = static_cast<int>(support.size());
  if (r == 0) throw std::invalid_argument("reduced state has empty support");

  CMatrix basis(d, r);  // columns e_i spanning the support
  RVector weights(r);
  for (int i = 0; i < r; ++i) {
    basis.col(i) = es.vectors.col(support[i]);
    weights(i) = es.values(support[i]);
  }

  CVector omega = CVector::Zero(static_cast<Eigen::Index>(r) * d);
  for (int i = 0; i < r; ++i)
    omega.segment(static_cast<Eigen::Index>(i) * d, d) =
        std::sqrt(weights(i)) * basis.col(i);

  Dilation out;
  out.joint_state = projector(omega);
  out.dim_purifier = r;
  out.dim_system = d;
  out.measurements.reserve(assemblage.states.size());
  for (const auto& row : assemblage.states) {
    Povm povm;
    povm.effects.reserve(row.size());
    for (const CMatrix& sigma : row) {
      CMatrix s = basis.adjoint() * sigma * basis;  // support-basis components
      CMatrix effect(r, r);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j)
          effect(j, i) = s(i, j) / std::sqrt(weights(i) * weights(j));
      povm.effects.push_back(0.5 * (effect + effect.adjoint()));
    }
    povm.validate(1e-8);
    out.measurements.push_back(std::move(povm));
  }
  return out;
}

Povm random_projective_povm(int dim, int outcomes, std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("POVM dimension must be positive");
  if (outcomes < 1 || outcomes > dim)
    throw std::invalid_argument("projective POVM needs 1 <= outcomes <= dim");
  Rng rng(seed);
  CMatrix g(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j)
    for (Eigen::Index i = 0; i < dim; ++i)
      g(i, j) = Complex(rng.normal(), rng.normal());
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ();
  CMatrix rmat = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix the phase ambiguity of QR so the distribution is Haar.
  for (int k = 0; k < dim; ++k) {
    Complex rkk = rmat(k, k);
    double mag = std::abs(rkk);
    q.col(k) *= (mag > 1e-300) ? rkk / mag : Complex(1.0, 0.0);
  }
  Povm out;
  out.effects.reserve(outcomes);
  CMatrix partial = CMatrix::Zero(dim, dim);
  for (int k = 0; k + 1 < outcomes; ++k) {
    CMatrix e = projector(q.col(k));
    partial += e;
    out.effects.push_back(std::move(e));
  }
  out.effects.push_back(CMatrix::Identity(dim, dim) - partial);
  return out;
}

}  // namespace dimcert
