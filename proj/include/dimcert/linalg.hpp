#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace dimcert {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

// Shared numerical tolerances. Hermiticity and unitarity checks compare
// entries, PSD and trace checks compare eigenvalue and trace sums.
inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kPsdTol = 1e-9;
inline constexpr double kTraceTol = 1e-9;

double max_abs(const CMatrix& m);
bool is_finite(const CMatrix& m);
bool is_hermitian(const CMatrix& m, double tol = kHermitianTol);

CMatrix tensor_product(const CMatrix& a, const CMatrix& b);

// For m acting on C^{dim_first} (x) C^{dim_second} with the first factor as
// the slow index: entry (i*dim_second + p, j*dim_second + q) couples |i,p>
// to |j,q>.
CMatrix partial_trace_first(const CMatrix& m, int dim_first, int dim_second);
CMatrix partial_trace_second(const CMatrix& m, int dim_first, int dim_second);
CMatrix partial_transpose_first(const CMatrix& m, int dim_first, int dim_second);

struct EigenSystem {
  RVector values;   // ascending
  CMatrix vectors;  // columns match values
};

// Eigendecomposition of a Hermitian matrix. The input is symmetrized first;
// the residual ||m V - V diag|| is checked against 1e-10 * ||m|| so silent
// solver degradation surfaces as an error instead of bad downstream data.
EigenSystem hermitian_eigensystem(const CMatrix& m);

double min_eigenvalue(const CMatrix& m);
bool is_psd(const CMatrix& m, double tol = kPsdTol);

// Matrix square root of a PSD Hermitian matrix, eigenvalues clipped at zero.
CMatrix psd_sqrt(const CMatrix& m);

// Orthonormal Hermitian basis of d x d matrices under <A,B> = Tr(A B), in a
// fixed order: diagonal units, then for each pair j < k the symmetric and
// the antisymmetric combination.
std::vector<CMatrix> hermitian_basis(int dim);

}  // namespace dimcert
