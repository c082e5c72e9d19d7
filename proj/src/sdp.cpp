#include "dimcert/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "dimcert/errors.hpp"

namespace dimcert {

int SdpProblem::add_block(const std::string& name, int dim) {
  if (dim < 1) throw std::invalid_argument("SDP block dimension must be positive");
  block_names.push_back(name);
  block_dims.push_back(dim);
  objective.push_back(CMatrix::Zero(dim, dim));
  return static_cast<int>(block_dims.size()) - 1;
}

void SdpProblem::set_objective(int block, CMatrix c) {
  if (block < 0 || block >= n_blocks())
    throw std::invalid_argument("objective block index out of range");
  if (c.rows() != block_dims[block] || c.cols() != block_dims[block])
    throw std::invalid_argument("objective matrix does not match block dimension");
  if (!is_hermitian(c)) throw std::invalid_argument("objective matrix is not Hermitian");
  objective[block] = std::move(c);
}

void SdpProblem::add_constraint(SdpConstraint c) {
  if (c.terms.empty()) throw std::invalid_argument("constraint has no terms");
  for (const auto& [block, mat] : c.terms) {
    if (block < 0 || block >= n_blocks())
      throw std::invalid_argument("constraint block index out of range");
    if (mat.rows() != block_dims[block] || mat.cols() != block_dims[block])
      throw std::invalid_argument("constraint matrix does not match block dimension");
    if (!is_hermitian(mat))
      throw std::invalid_argument("constraint matrix is not Hermitian");
  }
  if (!std::isfinite(c.rhs)) throw std::invalid_argument("constraint rhs is not finite");
  constraints.push_back(std::move(c));
}

void SdpProblem::validate() const {
  if (n_blocks() == 0) throw std::invalid_argument("SDP has no blocks");
  if (objective.size() != block_dims.size() || block_names.size() != block_dims.size())
    throw std::invalid_argument("SDP block bookkeeping is inconsistent");
  for (int i = 0; i < n_blocks(); ++i) {
    if (block_dims[i] < 1) throw std::invalid_argument("SDP block dimension must be positive");
    if (objective[i].rows() != block_dims[i] || objective[i].cols() != block_dims[i] ||
        !is_hermitian(objective[i]))
      throw std::invalid_argument("SDP objective is not a Hermitian block match");
  }
  for (const SdpConstraint& c : constraints) {
    if (c.terms.empty()) throw std::invalid_argument("constraint has no terms");
    for (const auto& [block, mat] : c.terms) {
      if (block < 0 || block >= n_blocks())
        throw std::invalid_argument("constraint block index out of range");
      if (mat.rows() != block_dims[block] || mat.cols() != block_dims[block] ||
          !is_hermitian(mat))
        throw std::invalid_argument("constraint matrix is not a Hermitian block match");
    }
  }
}

namespace {

// ---- plain-text serialization ----

void dump_matrix(std::ostream& os, const CMatrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i; j < m.cols(); ++j)
      os << " " << m(i, j).real() << " " << m(i, j).imag();
  os << "\n";
}

class LineReader {
 public:
  LineReader(const std::string& text, std::string origin)
      : stream_(text), origin_(std::move(origin)) {}

  // Next non-empty line as a token stream; throws when input ends early.
  std::istringstream next(const std::string& what) {
    std::string line;
    while (std::getline(stream_, line)) {
      ++line_;
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        return std::istringstream(line);
    }
    throw ParseError(origin_, line_, "unexpected end of input, expected " + what);
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(origin_, line_, message);
  }

  int line() const { return line_; }

 private:
  std::istringstream stream_;
  std::string origin_;
  int line_ = 0;
};

CMatrix load_matrix(LineReader& reader, int dim, const std::string& what) {
  std::istringstream is = reader.next(what);
  CMatrix m(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) {
      double re, im;
      if (!(is >> re >> im)) reader.fail("truncated matrix entries for " + what);
      m(i, j) = Complex(re, im);
      if (j > i) m(j, i) = Complex(re, -im);
    }
  double trailing;
  if (is >> trailing) reader.fail("trailing matrix entries for " + what);
  return m;
}

// ---- real embedding of the Hermitian problem ----

RMatrix embed(const CMatrix& h) {
  Eigen::Index d = h.rows();
  RMatrix out(2 * d, 2 * d);
  out.topLeftCorner(d, d) = h.real();
  out.bottomRightCorner(d, d) = h.real();
  out.topRightCorner(d, d) = -h.imag();
  out.bottomLeftCorner(d, d) = h.imag();
  return 0.5 * (out + out.transpose());
}

CMatrix readout(const RMatrix& m) {
  Eigen::Index d = m.rows() / 2;
  RMatrix re = 0.5 * (m.topLeftCorner(d, d) + m.bottomRightCorner(d, d));
  RMatrix im = 0.5 * (m.bottomLeftCorner(d, d) - m.topRightCorner(d, d));
  CMatrix out = re.cast<Complex>() + Complex(0.0, 1.0) * im.cast<Complex>();
  return 0.5 * (out + out.adjoint());
}

// Averaging with the conjugation that commutes with embed() keeps iterates
// inside the embedded image, so the complex readout stays exact.
RMatrix commutant_project(const RMatrix& m) {
  Eigen::Index d = m.rows() / 2;
  RMatrix diag = 0.5 * (m.topLeftCorner(d, d) + m.bottomRightCorner(d, d));
  RMatrix off = 0.5 * (m.topRightCorner(d, d) - m.bottomLeftCorner(d, d));
  RMatrix out(2 * d, 2 * d);
  out.topLeftCorner(d, d) = diag;
  out.bottomRightCorner(d, d) = diag;
  out.topRightCorner(d, d) = off;
  out.bottomLeftCorner(d, d) = -off;
  return 0.5 * (out + out.transpose());
}

double frob_inner(const RMatrix& a, const RMatrix& b) {
  return (a.cwiseProduct(b)).sum();
}

double herm_inner(const CMatrix& a, const CMatrix& b) {
  return (a * b).trace().real();
}

struct ScaledRow {
  std::vector<std::pair<int, RMatrix>> terms;
  double rhs = 0.0;
  int orig = -1;
  double scale = 1.0;  // Frobenius norm divided out of the original row
};

struct Internal {
  int nb = 0;
  std::vector<int> dims;  // embedded (doubled) dimensions
  std::vector<RMatrix> C;
  std::vector<ScaledRow> rows;
  std::vector<std::vector<int>> rows_of_block;
  int n_total = 0;
};

RVector apply_A(const Internal& in, const std::vector<RMatrix>& X) {
  RVector out(static_cast<Eigen::Index>(in.rows.size()));
  for (std::size_t j = 0; j < in.rows.size(); ++j) {
    double acc = 0.0;
    for (const auto& [i, a] : in.rows[j].terms) acc += frob_inner(a, X[i]);
    out(static_cast<Eigen::Index>(j)) = acc;
  }
  return out;
}

std::vector<RMatrix> apply_At(const Internal& in, const RVector& y) {
  std::vector<RMatrix> out;
  out.reserve(in.nb);
  for (int i = 0; i < in.nb; ++i) out.push_back(RMatrix::Zero(in.dims[i], in.dims[i]));
  for (std::size_t j = 0; j < in.rows.size(); ++j)
    for (const auto& [i, a] : in.rows[j].terms)
      out[i] += y(static_cast<Eigen::Index>(j)) * a;
  return out;
}

// Cholesky with a one-shot eigenvalue floor; interior iterates should always
// be positive definite, this only rescues marginal roundoff.
Eigen::LLT<RMatrix> chol_or_repair(RMatrix& m) {
  Eigen::LLT<RMatrix> llt(m);
  if (llt.info() == Eigen::Success) return llt;
  Eigen::SelfAdjointEigenSolver<RMatrix> es(m);
  double lift = std::max(0.0, -es.eigenvalues().minCoeff()) + 1e-14;
  m += lift * RMatrix::Identity(m.rows(), m.cols());
  llt.compute(m);
  if (llt.info() != Eigen::Success)
    throw NumericalError("interior-point iterate lost positive definiteness");
  return llt;
}

double min_eig_sym(const RMatrix& m) {
  Eigen::SelfAdjointEigenSolver<RMatrix> es(0.5 * (m + m.transpose()),
                                            Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Largest step keeping m + alpha * dm positive semidefinite, via the
// Cholesky factor of m.
double psd_step_bound(const Eigen::LLT<RMatrix>& llt, const RMatrix& dm) {
  RMatrix half = llt.matrixL().solve(dm);
  RMatrix b = llt.matrixL().solve(half.transpose()).transpose();
  double lo = min_eig_sym(b);
  if (lo >= -1e-14) return std::numeric_limits<double>::infinity();
  return -1.0 / lo;
}

struct Extractor {
  const SdpProblem* problem = nullptr;
  const Internal* in = nullptr;
  std::vector<int> kept_orig;   // original constraint index per surviving row
  std::vector<double> kept_scale;
};

void fill_public_point(const Extractor& ex, const std::vector<RMatrix>& X,
                       const std::vector<RMatrix>& S, const RVector& y, double tau,
                       SdpSolution& sol) {
  const SdpProblem& p = *ex.problem;
  double invtau = 1.0 / tau;
  sol.X.clear();
  sol.S.clear();
  for (int i = 0; i < p.n_blocks(); ++i) {
    sol.X.push_back(readout(invtau * X[i]));
    sol.S.push_back(readout(2.0 * invtau * S[i]));
  }
  sol.y = RVector::Zero(static_cast<Eigen::Index>(p.constraints.size()));
  for (std::size_t k = 0; k < ex.kept_orig.size(); ++k)
    sol.y(ex.kept_orig[k]) =
        -y(static_cast<Eigen::Index>(k)) * invtau / ex.kept_scale[k];

  sol.objective = 0.0;
  for (int i = 0; i < p.n_blocks(); ++i)
    sol.objective += herm_inner(p.objective[i], sol.X[i]);
  sol.dual_objective = 0.0;
  for (std::size_t j = 0; j < p.constraints.size(); ++j)
    sol.dual_objective += p.constraints[j].rhs * sol.y(static_cast<Eigen::Index>(j));
  sol.gap = sol.dual_objective - sol.objective;

  sol.primal_residual = 0.0;
  for (const SdpConstraint& c : p.constraints) {
    double acc = -c.rhs;
    for (const auto& [i, a] : c.terms) acc += herm_inner(a, sol.X[i]);
    sol.primal_residual = std::max(sol.primal_residual, std::abs(acc));
  }
  sol.dual_residual = 0.0;
  for (int i = 0; i < p.n_blocks(); ++i) {
    CMatrix slack = -p.objective[i] - sol.S[i];
    for (std::size_t j = 0; j < p.constraints.size(); ++j)
      for (const auto& [bi, a] : p.constraints[j].terms)
        if (bi == i) slack += sol.y(static_cast<Eigen::Index>(j)) * a;
    sol.dual_residual = std::max(sol.dual_residual, max_abs(slack));
  }
}

}  // namespace

std::string to_string(SdpStatus status) {
  switch (status) {
    case SdpStatus::optimal: return "optimal";
    case SdpStatus::infeasible: return "infeasible";
    case SdpStatus::unbounded: return "unbounded";
    case SdpStatus::max_iterations: return "max-iterations";
  }
  return "unknown";
}

std::string SdpProblem::dump() const {
  validate();
  std::ostringstream os;
  os << std::setprecision(17);
  os << "sdp/1\n";
  os << "blocks " << n_blocks() << "\n";
  for (int i = 0; i < n_blocks(); ++i)
    os << "block " << (block_names[i].empty() ? "_" : block_names[i]) << " "
       << block_dims[i] << "\n";
  for (int i = 0; i < n_blocks(); ++i) {
    os << "objective " << i << "\n";
    dump_matrix(os, objective[i]);
  }
  os << "constraints " << constraints.size() << "\n";
  for (const SdpConstraint& c : constraints) {
    os << "constraint " << c.rhs << " terms " << c.terms.size() << "\n";
    for (const auto& [block, mat] : c.terms) {
      os << "term " << block << "\n";
      dump_matrix(os, mat);
    }
  }
  os << "end\n";
  return os.str();
}

SdpProblem SdpProblem::load(const std::string& text, const std::string& origin) {
  LineReader reader(text, origin);
  std::string word;

  std::istringstream is = reader.next("header");
  if (!(is >> word) || word != "sdp/1") reader.fail("expected header sdp/1");

  is = reader.next("block count");
  int nb = 0;
  if (!(is >> word >> nb) || word != "blocks" || nb < 1)
    reader.fail("expected 'blocks <count>'");

  SdpProblem p;
  for (int i = 0; i < nb; ++i) {
    is = reader.next("block declaration");
    std::string name;
    int dim = 0;
    if (!(is >> word >> name >> dim) || word != "block" || dim < 1)
      reader.fail("expected 'block <name> <dim>'");
    p.add_block(name == "_" ? "" : name, dim);
  }
  for (int i = 0; i < nb; ++i) {
    is = reader.next("objective declaration");
    int idx = -1;
    if (!(is >> word >> idx) || word != "objective" || idx != i)
      reader.fail("expected 'objective " + std::to_string(i) + "'");
    p.set_objective(i, load_matrix(reader, p.block_dims[i], "objective matrix"));
  }

  is = reader.next("constraint count");
  long long nc = -1;
  if (!(is >> word >> nc) || word != "constraints" || nc < 0)
    reader.fail("expected 'constraints <count>'");
  for (long long j = 0; j < nc; ++j) {
    is = reader.next("constraint declaration");
    SdpConstraint c;
    std::string terms_word;
    int nterms = 0;
    if (!(is >> word >> c.rhs >> terms_word >> nterms) || word != "constraint" ||
        terms_word != "terms" || nterms < 1)
      reader.fail("expected 'constraint <rhs> terms <count>'");
    for (int t = 0; t < nterms; ++t) {
      is = reader.next("term declaration");
      int block = -1;
      if (!(is >> word >> block) || word != "term" || block < 0 || block >= nb)
        reader.fail("expected 'term <block>'");
      c.terms.emplace_back(block, load_matrix(reader, p.block_dims[block], "term matrix"));
    }
    p.add_constraint(std::move(c));
  }

  is = reader.next("end marker");
  if (!(is >> word) || word != "end") reader.fail("expected 'end'");
  p.validate();
  return p;
}

SdpSolution solve_sdp(const SdpProblem& problem, const SdpOptions& options) {
  problem.validate();
  const int nb = problem.n_blocks();
  const std::size_t m_orig = problem.constraints.size();

  Internal in;
  in.nb = nb;
  for (int i = 0; i < nb; ++i) {
    in.dims.push_back(2 * problem.block_dims[i]);
    in.C.push_back(-0.5 * embed(problem.objective[i]));
    in.n_total += in.dims.back();
  }

  SdpSolution sol;
  Extractor ex;
  ex.problem = &problem;
  ex.in = &in;

  // Scale every row to unit Frobenius norm so tolerances mean the same thing
  // regardless of how a caller normalized the data.
  std::vector<ScaledRow> candidate;
  for (std::size_t j = 0; j < m_orig; ++j) {
    const SdpConstraint& c = problem.constraints[j];
    ScaledRow row;
    row.orig = static_cast<int>(j);
    double norm2 = 0.0;
    for (const auto& [i, a] : c.terms) {
      RMatrix e = 0.5 * embed(a);
      norm2 += e.squaredNorm();
      row.terms.emplace_back(i, std::move(e));
    }
    double norm = std::sqrt(norm2);
    if (norm <= 1e-12) {
      if (std::abs(c.rhs) <= 1e-8 * (1.0 + std::abs(c.rhs))) continue;  // vacuous row
      // A zero row with nonzero right-hand side cannot be satisfied.
      sol.status = SdpStatus::infeasible;
      sol.y = RVector::Zero(static_cast<Eigen::Index>(m_orig));
      sol.y(static_cast<Eigen::Index>(j)) = c.rhs > 0.0 ? 1.0 : -1.0;
      for (int i = 0; i < nb; ++i) {
        sol.X.push_back(CMatrix::Zero(problem.block_dims[i], problem.block_dims[i]));
        sol.S.push_back(CMatrix::Zero(problem.block_dims[i], problem.block_dims[i]));
      }
      return sol;
    }
    row.scale = norm;
    for (auto& [i, a] : row.terms) a /= norm;
    row.rhs = c.rhs / norm;
    candidate.push_back(std::move(row));
  }

  // Rank-filter the rows; redundant but consistent equalities are dropped,
  // inconsistent ones make the problem infeasible outright.
  std::vector<int> entry_offset(nb + 1, 0);
  for (int i = 0; i < nb; ++i)
    entry_offset[i + 1] = entry_offset[i] + in.dims[i] * in.dims[i];
  const int n_entries = entry_offset[nb];

  if (!candidate.empty()) {
    RMatrix g = RMatrix::Zero(n_entries, static_cast<Eigen::Index>(candidate.size()));
    for (std::size_t j = 0; j < candidate.size(); ++j)
      for (const auto& [i, a] : candidate[j].terms)
        g.col(static_cast<Eigen::Index>(j)).segment(entry_offset[i], a.size()) =
            Eigen::Map<const RVector>(a.data(), a.size());

    Eigen::ColPivHouseholderQR<RMatrix> qr(g);
    qr.setThreshold(1e-10);
    int rank = static_cast<int>(qr.rank());
    std::vector<char> keep(candidate.size(), 0);
    const auto& perm = qr.colsPermutation().indices();
    for (int k = 0; k < rank; ++k) keep[static_cast<std::size_t>(perm(k))] = 1;

    for (std::size_t j = 0; j < candidate.size(); ++j) {
      if (keep[j]) continue;
      RVector w = qr.solve(g.col(static_cast<Eigen::Index>(j)));
      double predicted = 0.0;
      for (std::size_t k = 0; k < candidate.size(); ++k)
        predicted += w(static_cast<Eigen::Index>(k)) * candidate[k].rhs;
      if (std::abs(predicted - candidate[j].rhs) <=
          1e-8 * (1.0 + std::abs(candidate[j].rhs)))
        continue;
      // Dependent row with a conflicting right-hand side: report the exact
      // linear combination as a Farkas certificate.
      sol.status = SdpStatus::infeasible;
      sol.y = RVector::Zero(static_cast<Eigen::Index>(m_orig));
      double flip = (predicted - candidate[j].rhs > 0.0) ? 1.0 : -1.0;
      for (std::size_t k = 0; k < candidate.size(); ++k)
        sol.y(candidate[k].orig) +=
            flip * w(static_cast<Eigen::Index>(k)) / candidate[k].scale;
      sol.y(candidate[j].orig) += -flip / candidate[j].scale;
      for (int i = 0; i < nb; ++i) {
        sol.X.push_back(CMatrix::Zero(problem.block_dims[i], problem.block_dims[i]));
        sol.S.push_back(CMatrix::Zero(problem.block_dims[i], problem.block_dims[i]));
      }
      return sol;
    }
    for (std::size_t j = 0; j < candidate.size(); ++j)
      if (keep[j]) in.rows.push_back(std::move(candidate[j]));
  }

  const std::size_t m = in.rows.size();
  in.rows_of_block.assign(nb, {});
  for (std::size_t j = 0; j < m; ++j)
    for (const auto& [i, a] : in.rows[j].terms)
      in.rows_of_block[i].push_back(static_cast<int>(j));
  for (std::size_t k = 0; k < m; ++k) {
    ex.kept_orig.push_back(in.rows[k].orig);
    ex.kept_scale.push_back(in.rows[k].scale);
  }

  // Without constraints the optimum is X = 0 when the objective points
  // nowhere positive, otherwise any positive direction is an improving ray.
  if (m == 0) {
    for (int i = 0; i < nb; ++i) {
      EigenSystem es = hermitian_eigensystem(problem.objective[i]);
      if (es.values.maxCoeff() > 1e-12) {
        sol.status = SdpStatus::unbounded;
        for (int k = 0; k < nb; ++k)
          sol.X.push_back(CMatrix::Zero(problem.block_dims[k], problem.block_dims[k]));
        Eigen::Index top;
        es.values.maxCoeff(&top);
        CVector ray = es.vectors.col(top);
        sol.X[i] = ray * ray.adjoint();
        for (int k = 0; k < nb; ++k)
          sol.S.push_back(CMatrix::Zero(problem.block_dims[k], problem.block_dims[k]));
        sol.y = RVector::Zero(static_cast<Eigen::Index>(m_orig));
        return sol;
      }
    }
    sol.status = SdpStatus::optimal;
    for (int i = 0; i < nb; ++i) {
      sol.X.push_back(CMatrix::Zero(problem.block_dims[i], problem.block_dims[i]));
      sol.S.push_back(-problem.objective[i]);
    }
    sol.y = RVector::Zero(static_cast<Eigen::Index>(m_orig));
    sol.objective = sol.dual_objective = sol.gap = 0.0;
    return sol;
  }

  RVector b(static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < m; ++j) b(static_cast<Eigen::Index>(j)) = in.rows[j].rhs;
  double b_norm = b.norm();
  double c_norm = 0.0;
  for (const RMatrix& c : in.C) c_norm += c.squaredNorm();
  c_norm = std::sqrt(c_norm);

  // Homogeneous self-dual start: identity matrices, unit tau and kappa.
  std::vector<RMatrix> X, S;
  for (int i = 0; i < nb; ++i) {
    X.push_back(RMatrix::Identity(in.dims[i], in.dims[i]));
    S.push_back(RMatrix::Identity(in.dims[i], in.dims[i]));
  }
  RVector y = RVector::Zero(static_cast<Eigen::Index>(m));
  double tau = 1.0, kappa = 1.0;

  auto inner_all = [&](const std::vector<RMatrix>& a, const std::vector<RMatrix>& v) {
    double acc = 0.0;
    for (int i = 0; i < nb; ++i) acc += frob_inner(a[i], v[i]);
    return acc;
  };

  sol.status = SdpStatus::max_iterations;
  bool decided = false;

  for (int iter = 0; iter < options.max_iterations && !decided; ++iter) {
    RVector f1 = apply_A(in, X) - b * tau;
    std::vector<RMatrix> aty = apply_At(in, y);
    std::vector<RMatrix> f2(nb);
    for (int i = 0; i < nb; ++i) f2[i] = in.C[i] * tau - aty[i] - S[i];
    double cx = inner_all(in.C, X);
    double f3 = b.dot(y) - cx - kappa;
    double mu = (inner_all(X, S) + tau * kappa) / (in.n_total + 1);

    double p_int = cx / tau;
    double d_int = b.dot(y) / tau;
    double pinf = (apply_A(in, X) / tau - b).norm() / (1.0 + b_norm);
    double dinf2 = 0.0;
    for (int i = 0; i < nb; ++i)
      dinf2 += (in.C[i] - aty[i] / tau - S[i] / tau).squaredNorm();
    double dinf = std::sqrt(dinf2) / (1.0 + c_norm);
    double gap_rel = std::abs(p_int - d_int) / (1.0 + std::abs(p_int) + std::abs(d_int));

    if (options.record_iterations)
      sol.trace.push_back({-p_int, -d_int, pinf, dinf, mu, tau, kappa});
    sol.iterations = iter;

    if (pinf <= options.feas_tol && dinf <= options.feas_tol &&
        gap_rel <= options.gap_tol) {
      sol.status = SdpStatus::optimal;
      fill_public_point(ex, X, S, y, tau, sol);
      decided = true;
      break;
    }

    // tau collapsing with kappa bounded away from zero signals a ray; read
    // off which side is infeasible from the homogeneous objective values.
    if (tau < 1e-10 * std::max(1.0, kappa) && mu < 1e-12) {
      double by = b.dot(y);
      if (by > 1e-10) {
        sol.status = SdpStatus::infeasible;
        sol.y = RVector::Zero(static_cast<Eigen::Index>(m_orig));
        for (std::size_t k = 0; k < m; ++k)
          sol.y(ex.kept_orig[k]) = y(static_cast<Eigen::Index>(k)) / ex.kept_scale[k];
        sol.X.assign(nb, CMatrix());
        sol.S.assign(nb, CMatrix());
        for (int i = 0; i < nb; ++i) {
          sol.X[i] = CMatrix::Zero(problem.block_dims[i], problem.block_dims[i]);
          sol.S[i] = CMatrix::Zero(problem.block_dims[i], problem.block_dims[i]);
        }
        decided = true;
        break;
      }
      if (cx < -1e-10) {
        sol.status = SdpStatus::unbounded;
        double total = 0.0;
        for (int i = 0; i < nb; ++i) total += X[i].trace();
        sol.X.clear();
        sol.S.clear();
        for (int i = 0; i < nb; ++i) {
          sol.X.push_back(readout(X[i] / total));
          sol.S.push_back(CMatrix::Zero(problem.block_dims[i], problem.block_dims[i]));
        }
        sol.y = RVector::Zero(static_cast<Eigen::Index>(m_orig));
        decided = true;
        break;
      }
    }

    // Nesterov-Todd scaling per block.
    std::vector<Eigen::LLT<RMatrix>> lltX(nb), lltS(nb);
    std::vector<RMatrix> R(nb), Rinv(nb), W(nb), Winv(nb);
    std::vector<RVector> lambda(nb);
    for (int i = 0; i < nb; ++i) {
      lltX[i] = chol_or_repair(X[i]);
      lltS[i] = chol_or_repair(S[i]);
      RMatrix lx = lltX[i].matrixL();
      RMatrix ls = lltS[i].matrixL();
      Eigen::JacobiSVD<RMatrix> svd(ls.transpose() * lx,
                                    Eigen::ComputeFullU | Eigen::ComputeFullV);
      RVector sv = svd.singularValues().cwiseMax(1e-150);
      RVector inv_sqrt = sv.cwiseSqrt().cwiseInverse();
      R[i] = lx * svd.matrixV() * inv_sqrt.asDiagonal();
      Rinv[i] = inv_sqrt.asDiagonal() * svd.matrixU().transpose() * ls.transpose();
      W[i] = R[i] * R[i].transpose();
      W[i] = 0.5 * (W[i] + W[i].transpose());
      Winv[i] = Rinv[i].transpose() * Rinv[i];
      Winv[i] = 0.5 * (Winv[i] + Winv[i].transpose());
      lambda[i] = sv;
    }

    // Schur complement over the surviving rows.
    std::vector<std::vector<RMatrix>> waw(nb);
    for (int i = 0; i < nb; ++i) {
      waw[i].reserve(in.rows_of_block[i].size());
      for (std::size_t t = 0; t < in.rows_of_block[i].size(); ++t) {
        int j = in.rows_of_block[i][t];
        const RMatrix* a = nullptr;
        for (const auto& [bi, mat] : in.rows[j].terms)
          if (bi == i) a = &mat;
        waw[i].push_back(W[i] * (*a) * W[i]);
      }
    }
    RMatrix schur = RMatrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (int i = 0; i < nb; ++i) {
      const auto& touching = in.rows_of_block[i];
      for (std::size_t tj = 0; tj < touching.size(); ++tj) {
        const RMatrix* aj = nullptr;
        for (const auto& [bi, mat] : in.rows[touching[tj]].terms)
          if (bi == i) aj = &mat;
        for (std::size_t tk = tj; tk < touching.size(); ++tk) {
          double v = frob_inner(*aj, waw[i][tk]);
          schur(touching[tj], touching[tk]) += v;
          if (tk != tj) schur(touching[tk], touching[tj]) += v;
        }
      }
    }

    std::vector<RMatrix> wcw(nb);
    double wc = 0.0;
    RVector u(static_cast<Eigen::Index>(m));
    for (int i = 0; i < nb; ++i) {
      wcw[i] = W[i] * in.C[i] * W[i];
      wc += frob_inner(in.C[i], wcw[i]);
    }
    for (std::size_t j = 0; j < m; ++j) {
      double acc = 0.0;
      for (const auto& [i, a] : in.rows[j].terms) acc += frob_inner(a, wcw[i]);
      u(static_cast<Eigen::Index>(j)) = acc;
    }

    Eigen::LLT<RMatrix> schur_llt(schur);
    Eigen::LDLT<RMatrix> schur_ldlt;
    bool use_ldlt = false;
    if (schur_llt.info() != Eigen::Success) {
      // Near convergence the Schur matrix can lose definiteness to rounding;
      // an escalating ridge keeps the direction usable, and the step-size
      // safeguard absorbs the perturbation.
      const double scale = std::max(schur.diagonal().mean(), 1e-300);
      bool factored = false;
      for (double ridge = 1e-14; ridge <= 1e-6; ridge *= 100.0) {
        RMatrix damped = schur;
        damped.diagonal().array() += ridge * scale;
        schur_ldlt.compute(damped);
        if (schur_ldlt.info() == Eigen::Success &&
            schur_ldlt.isPositive()) {
          factored = true;
          break;
        }
      }
      if (!factored) throw NumericalError("Schur complement factorization failed");
      use_ldlt = true;
    }
    auto schur_solve = [&](const RVector& r) {
      return use_ldlt ? RVector(schur_ldlt.solve(r)) : RVector(schur_llt.solve(r));
    };

    RVector g2 = schur_solve(u + b);

    struct Direction {
      std::vector<RMatrix> dX, dS;
      RVector dy;
      double dtau = 0.0, dkappa = 0.0;
    };
    auto solve_direction = [&](const std::vector<RMatrix>& d_blocks, double rtk) {
      Direction dir;
      std::vector<RMatrix> wgw(nb);
      double h0 = 0.0;
      RVector rhs1 = -f1;
      for (int i = 0; i < nb; ++i) {
        RMatrix g = d_blocks[i] - f2[i];
        wgw[i] = W[i] * g * W[i];
        h0 += frob_inner(in.C[i], wgw[i]);
      }
      for (std::size_t j = 0; j < m; ++j) {
        double acc = 0.0;
        for (const auto& [i, a] : in.rows[j].terms) acc += frob_inner(a, wgw[i]);
        rhs1(static_cast<Eigen::Index>(j)) -= acc;
      }
      RVector g1 = schur_solve(rhs1);
      double num = -f3 - (b - u).dot(g1) + h0 + rtk / tau;
      double den = (b - u).dot(g2) + wc + kappa / tau;
      dir.dtau = std::abs(den) > 1e-14 ? num / den : 0.0;
      dir.dy = g1 + dir.dtau * g2;
      std::vector<RMatrix> atdy = apply_At(in, dir.dy);
      dir.dX.resize(nb);
      dir.dS.resize(nb);
      for (int i = 0; i < nb; ++i) {
        RMatrix dx = wgw[i] + W[i] * atdy[i] * W[i] - wcw[i] * dir.dtau;
        dir.dX[i] = commutant_project(0.5 * (dx + dx.transpose()));
        RMatrix ds = in.C[i] * dir.dtau - atdy[i] + f2[i];
        dir.dS[i] = commutant_project(0.5 * (ds + ds.transpose()));
      }
      dir.dkappa = (rtk - kappa * dir.dtau) / tau;
      return dir;
    };

    auto step_bound = [&](const Direction& d) {
      double bound = std::numeric_limits<double>::infinity();
      for (int i = 0; i < nb; ++i) {
        bound = std::min(bound, psd_step_bound(lltX[i], d.dX[i]));
        bound = std::min(bound, psd_step_bound(lltS[i], d.dS[i]));
      }
      if (d.dtau < 0.0) bound = std::min(bound, -tau / d.dtau);
      if (d.dkappa < 0.0) bound = std::min(bound, -kappa / d.dkappa);
      return bound;
    };

    // Predictor.
    std::vector<RMatrix> d_aff(nb);
    for (int i = 0; i < nb; ++i) d_aff[i] = -S[i];
    Direction aff = solve_direction(d_aff, -tau * kappa);
    double alpha_aff = std::min(1.0, step_bound(aff));

    double mu_aff =
        (inner_all(X, S) + alpha_aff * inner_all(aff.dX, S) +
              alpha_aff * inner_all(X, aff.dS) +
         alpha_aff * alpha_aff * inner_all(aff.dX, aff.dS) +
         (tau + alpha_aff * aff.dtau) * (kappa + alpha_aff * aff.dkappa)) /
        (in.n_total + 1);
    double sigma = std::pow(std::max(0.0, std::min(1.0, mu_aff / mu)), 3);
    sigma = std::min(std::max(sigma, 1e-8), 1.0 - 1e-8);

    // Corrector with the standard second-order term in the scaled space.
    std::vector<RMatrix> d_corr(nb);
    for (int i = 0; i < nb; ++i) {
      RMatrix dxhat = Rinv[i] * aff.dX[i] * Rinv[i].transpose();
      RMatrix dshat = R[i].transpose() * aff.dS[i] * R[i];
      RMatrix gc = 0.5 * (dxhat * dshat + dshat * dxhat);
      int d = in.dims[i];
      RMatrix hcc(d, d);
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) {
          double denom = lambda[i](r) + lambda[i](c);
          double numer = -2.0 * gc(r, c);
          if (r == c) numer += 2.0 * sigma * mu - 2.0 * lambda[i](r) * lambda[i](r);
          hcc(r, c) = numer / denom;
        }
      RMatrix dmat = Rinv[i].transpose() * hcc * Rinv[i];
      d_corr[i] = 0.5 * (dmat + dmat.transpose());
    }
    double rtk = sigma * mu - tau * kappa - aff.dtau * aff.dkappa;
    Direction dir = solve_direction(d_corr, rtk);
    double alpha = std::min(1.0, 0.98 * step_bound(dir));

    if (!(alpha > 1e-9)) {
      // No progress is possible; stop with the best feasible readout so far.
      fill_public_point(ex, X, S, y, tau, sol);
      decided = true;
      break;
    }

    for (int i = 0; i < nb; ++i) {
      X[i] = commutant_project(X[i] + alpha * dir.dX[i]);
      S[i] = commutant_project(S[i] + alpha * dir.dS[i]);
    }
    y += alpha * dir.dy;
    tau += alpha * dir.dtau;
    kappa += alpha * dir.dkappa;
  }

  if (!decided) {
    // Iteration budget exhausted; report the current scaled-back point.
    fill_public_point(ex, X, S, y, tau, sol);
  }
  return sol;
}

SdpValidation validate_solution(const SdpProblem& problem, const SdpSolution& sol) {
  problem.validate();
  SdpValidation v;
  const int nb = problem.n_blocks();
  if (static_cast<int>(sol.X.size()) != nb || static_cast<int>(sol.S.size()) != nb ||
      sol.y.size() != static_cast<Eigen::Index>(problem.constraints.size()))
    throw std::invalid_argument("solution shape does not match the problem");

  if (sol.status == SdpStatus::infeasible) {
    // Certificate: sum_j y_j A_{j,i} <= 0 for every block and b'y > 0.
    double max_eig = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < nb; ++i) {
      CMatrix acc = CMatrix::Zero(problem.block_dims[i], problem.block_dims[i]);
      for (std::size_t j = 0; j < problem.constraints.size(); ++j)
        for (const auto& [bi, a] : problem.constraints[j].terms)
          if (bi == i) acc += sol.y(static_cast<Eigen::Index>(j)) * a;
      max_eig = std::max(max_eig, hermitian_eigensystem(acc).values.maxCoeff());
    }
    double by = 0.0;
    for (std::size_t j = 0; j < problem.constraints.size(); ++j)
      by += problem.constraints[j].rhs * sol.y(static_cast<Eigen::Index>(j));
    v.certificate_margin = by;
    v.certificate_valid = by > 0.0 && max_eig <= 1e-6 * (1.0 + std::abs(by));
    return v;
  }
  if (sol.status == SdpStatus::unbounded) {
    // Certificate: an improving PSD ray in the constraint null space.
    double max_resid = 0.0;
    for (const SdpConstraint& c : problem.constraints) {
      double acc = 0.0;
      for (const auto& [i, a] : c.terms) acc += herm_inner(a, sol.X[i]);
      max_resid = std::max(max_resid, std::abs(acc));
    }
    double min_eig = 0.0, cx = 0.0;
    for (int i = 0; i < nb; ++i) {
      min_eig = std::min(min_eig, min_eigenvalue(sol.X[i]));
      cx += herm_inner(problem.objective[i], sol.X[i]);
    }
    v.certificate_margin = cx;
    v.certificate_valid = cx > 0.0 && max_resid <= 1e-6 * (1.0 + cx) && min_eig >= -1e-8;
    return v;
  }

  for (const SdpConstraint& c : problem.constraints) {
    double acc = -c.rhs;
    for (const auto& [i, a] : c.terms) acc += herm_inner(a, sol.X[i]);
    v.max_equality_residual = std::max(v.max_equality_residual, std::abs(acc));
  }
  v.min_primal_eigenvalue = std::numeric_limits<double>::infinity();
  v.min_dual_eigenvalue = std::numeric_limits<double>::infinity();
  double objective = 0.0, by = 0.0;
  for (int i = 0; i < nb; ++i) {
    v.min_primal_eigenvalue = std::min(v.min_primal_eigenvalue, min_eigenvalue(sol.X[i]));
    CMatrix s = -problem.objective[i];
    for (std::size_t j = 0; j < problem.constraints.size(); ++j)
      for (const auto& [bi, a] : problem.constraints[j].terms)
        if (bi == i) s += sol.y(static_cast<Eigen::Index>(j)) * a;
    v.min_dual_eigenvalue = std::min(v.min_dual_eigenvalue, min_eigenvalue(s));
    v.max_complementarity =
        std::max(v.max_complementarity, std::abs(herm_inner(sol.X[i], s)));
    objective += herm_inner(problem.objective[i], sol.X[i]);
  }
  for (std::size_t j = 0; j < problem.constraints.size(); ++j)
    by += problem.constraints[j].rhs * sol.y(static_cast<Eigen::Index>(j));
  v.duality_gap = by - objective;
  return v;
}

}  // namespace dimcert
