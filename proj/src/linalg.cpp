#include "dimcert/linalg.hpp"

#include <cmath>
#include <stdexcept>

#include "dimcert/errors.hpp"

namespace dimcert {

double max_abs(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

bool is_finite(const CMatrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag()))
        return false;
  return true;
}

bool is_hermitian(const CMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return max_abs(m - m.adjoint()) <= tol;
}

CMatrix tensor_product(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

namespace {

void check_bipartite(const CMatrix& m, int dim_first, int dim_second) {
  if (dim_first <= 0 || dim_second <= 0)
    throw std::invalid_argument("bipartite split needs positive dimensions");
  Eigen::Index d = static_cast<Eigen::Index>(dim_first) * dim_second;
  if (m.rows() != d || m.cols() != d)
    throw std::invalid_argument("matrix size does not match bipartite split");
}

}  // namespace

CMatrix partial_trace_first(const CMatrix& m, int dim_first, int dim_second) {
  check_bipartite(m, dim_first, dim_second);
  CMatrix out = CMatrix::Zero(dim_second, dim_second);
  for (int a = 0; a < dim_first; ++a)
    out += m.block(a * dim_second, a * dim_second, dim_second, dim_second);
  return out;
}

CMatrix partial_trace_second(const CMatrix& m, int dim_first, int dim_second) {
  check_bipartite(m, dim_first, dim_second);
  CMatrix out = CMatrix::Zero(dim_first, dim_first);
  for (int i = 0; i < dim_first; ++i)
    for (int j = 0; j < dim_first; ++j)
      out(i, j) = m.block(i * dim_second, j * dim_second, dim_second, dim_second).trace();
  return out;
}

CMatrix partial_transpose_first(const CMatrix& m, int dim_first, int dim_second) {
  check_bipartite(m, dim_first, dim_second);
  CMatrix out(m.rows(), m.cols());
  for (int a = 0; a < dim_first; ++a)
    for (int c = 0; c < dim_first; ++c)
      out.block(a * dim_second, c * dim_second, dim_second, dim_second) =
          m.block(c * dim_second, a * dim_second, dim_second, dim_second);
  return out;
}

EigenSystem hermitian_eigensystem(const CMatrix& m) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("eigensystem requires a square matrix");
  if (!is_finite(m))
    throw std::invalid_argument("eigensystem requires finite entries");
  CMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h);
  if (solver.info() != Eigen::Success)
    throw NumericalError("hermitian eigensolver did not converge");
  EigenSystem out{solver.eigenvalues(), solver.eigenvectors()};
  double scale = max_abs(h);
  double residual =
      max_abs(h * out.vectors - out.vectors * out.values.asDiagonal().toDenseMatrix().cast<Complex>());
  if (residual > 1e-10 * std::max(1.0, scale))
    throw NumericalError("hermitian eigensolver residual out of tolerance");
  return out;
}

double min_eigenvalue(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  return hermitian_eigensystem(m).values.minCoeff();
}

bool is_psd(const CMatrix& m, double tol) {
  if (!is_hermitian(m, kHermitianTol)) return false;
  return min_eigenvalue(m) >= -tol;
}

CMatrix psd_sqrt(const CMatrix& m) {
  EigenSystem es = hermitian_eigensystem(m);
  RVector roots = es.values.cwiseMax(0.0).cwiseSqrt();
  return es.vectors * roots.asDiagonal() * es.vectors.adjoint();
}

std::vector<CMatrix> hermitian_basis(int dim) {
  if (dim <= 0) throw std::invalid_argument("hermitian_basis needs dim >= 1");
  std::vector<CMatrix> basis;
  basis.reserve(static_cast<std::size_t>(dim) * dim);
  for (int j = 0; j < dim; ++j) {
    CMatrix e = CMatrix::Zero(dim, dim);
    e(j, j) = 1.0;
    basis.push_back(e);
  }
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < dim; ++j) {
    for (int k = j + 1; k < dim; ++k) {
      CMatrix s = CMatrix::Zero(dim, dim);
      s(j, k) = inv_sqrt2;
      s(k, j) = inv_sqrt2;
      basis.push_back(s);
      CMatrix t = CMatrix::Zero(dim, dim);
      t(j, k) = Complex(0.0, -inv_sqrt2);
      t(k, j) = Complex(0.0, inv_sqrt2);
      basis.push_back(t);
    }
  }
  return basis;
}

}  // namespace dimcert
