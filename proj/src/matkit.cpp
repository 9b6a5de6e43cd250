#include "rsmlqr/matkit.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "rsmlqr/error.hpp"

namespace rsmlqr {
namespace {

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::NonSquare,
                std::string(what) + ": matrix is " + std::to_string(m.rows()) +
                    "x" + std::to_string(m.cols()) + ", expected square");
  }
}

std::size_t count_above(const Vector& sv, double tol, double* margin) {
  std::size_t r = 0;
  double smallest = 0.0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > tol) {
      ++r;
      smallest = sv[i];  // singular values are sorted descending
    }
  }
  if (margin != nullptr) *margin = smallest;
  return r;
}

double default_rank_tol(Eigen::Index rows, Eigen::Index cols, double sigma_max) {
  return static_cast<double>(std::max(rows, cols)) * sigma_max *
         std::numeric_limits<double>::epsilon();
}

template <typename Derived>
RankTest full_rank_test(const Eigen::MatrixBase<Derived>& m, Eigen::Index target,
                        std::optional<double> tol) {
  RankTest out;
  if (m.size() == 0) {
    out.full_rank = target == 0;
    return out;
  }
  Eigen::JacobiSVD<typename Derived::PlainObject> svd(m);
  const auto sv = svd.singularValues().real().eval();
  const double t = tol.value_or(default_rank_tol(m.rows(), m.cols(), sv[0]));
  out.rank = count_above(sv, t, &out.margin);
  out.full_rank = static_cast<Eigen::Index>(out.rank) == target;
  return out;
}

// PBH test over the eigenvalues of `a` with nonnegative real part:
// rank [a - lambda I, b] must equal n for each of them.
bool hautus_unstable_modes(const Matrix& a, const Matrix& b) {
  const Eigen::Index n = a.rows();
  if (n == 0) return true;
  Eigen::EigenSolver<Matrix> es(a, false);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::NumericalFailure, "eigenvalue iteration failed");
  }
  using CMatrix = Eigen::MatrixXcd;
  const double scale = std::max(1.0, a.norm());
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::complex<double> lambda = es.eigenvalues()[i];
    if (lambda.real() < -1e-12 * scale) continue;
    CMatrix pbh(n, n + b.cols());
    pbh.leftCols(n) = a.cast<std::complex<double>>() -
                      lambda * CMatrix::Identity(n, n);
    pbh.rightCols(b.cols()) = b.cast<std::complex<double>>();
    if (!full_rank_test(pbh, n, std::nullopt).full_rank) return false;
  }
  return true;
}

}  // namespace

double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

double asymmetry(const Matrix& m) {
  return m.size() == 0 ? 0.0 : (m - m.transpose()).cwiseAbs().maxCoeff();
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

Matrix block_diag(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

SymEig sym_eig(const Matrix& m, double sym_tol) {
  require_square(m, "sym_eig");
  if (asymmetry(m) > sym_tol * max_abs(m)) {
    throw Error(ErrorCode::NotSymmetric,
                "sym_eig: asymmetry " + std::to_string(asymmetry(m)) +
                    " exceeds tolerance");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m));
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::NumericalFailure, "sym_eig: iteration did not converge");
  }
  return {es.eigenvalues(), es.eigenvectors()};
}

std::size_t rank_svd(const Matrix& m, std::optional<double> tol) {
  if (!all_finite(m)) {
    throw Error(ErrorCode::NumericalFailure, "rank_svd: non-finite entries");
  }
  return full_rank_test(m, 0, tol).rank;
}

HurwitzTest is_hurwitz(const Matrix& m, double margin) {
  require_square(m, "is_hurwitz");
  if (m.rows() == 0) return {true, -std::numeric_limits<double>::infinity()};
  Eigen::EigenSolver<Matrix> es(m, false);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::NumericalFailure, "is_hurwitz: eigenvalue iteration failed");
  }
  const double max_re = es.eigenvalues().real().maxCoeff();
  return {max_re < -margin, max_re};
}

Definiteness definiteness(const Matrix& m, double tol, std::optional<double> eig_tol) {
  require_square(m, "definiteness");
  Definiteness out;
  if (m.rows() == 0) {
    out.symmetric = out.psd = out.pd = true;
    return out;
  }
  out.symmetric = asymmetry(m) <= tol * (1.0 + max_abs(m));
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m), Eigen::EigenvaluesOnly);
  out.min_eigenvalue = es.eigenvalues()[0];
  const double et = eig_tol.value_or(tol);
  if (out.symmetric) {
    out.psd = out.min_eigenvalue >= -et;
    out.pd = out.min_eigenvalue > et;
  }
  return out;
}

Matrix psd_sqrt_factor(const Matrix& m, double tol) {
  require_square(m, "psd_sqrt_factor");
  const SymEig eig = sym_eig(m);
  const Eigen::Index n = m.rows();
  if (n > 0 && eig.eigenvalues[0] < -tol) {
    throw Error(ErrorCode::NotPSD, "psd_sqrt_factor: eigenvalue " +
                                       std::to_string(eig.eigenvalues[0]) +
                                       " below -tol");
  }
  Eigen::Index keep = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (eig.eigenvalues[i] > tol) ++keep;
  }
  // Ascending order: the retained eigenpairs are the trailing `keep` ones.
  Matrix delta(keep, n);
  for (Eigen::Index r = 0; r < keep; ++r) {
    const Eigen::Index i = n - keep + r;
    delta.row(r) = std::sqrt(eig.eigenvalues[i]) * eig.eigenvectors.col(i).transpose();
  }
  return delta;
}

RankTest is_controllable(const Matrix& a, const Matrix& b, std::optional<double> tol) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || b.rows() != n) {
    throw Error(ErrorCode::ShapeMismatch, "is_controllable: A must be n x n and B n x m");
  }
  const Eigen::Index m = b.cols();
  // Scaling every power by 1/max(1, |A|) keeps the Krylov blocks bounded.
  const double scale = 1.0 / std::max(1.0, a.norm());
  Matrix krylov(n, n * m);
  Matrix block = b;
  for (Eigen::Index j = 0; j < n; ++j) {
    krylov.middleCols(j * m, m) = block;
    block = scale * (a * block);
  }
  return full_rank_test(krylov, n, tol);
}

RankTest is_observable(const Matrix& a, const Matrix& c, std::optional<double> tol) {
  if (a.rows() != a.cols() || c.cols() != a.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "is_observable: A must be n x n and C r x n");
  }
  return is_controllable(a.transpose(), c.transpose(), tol);
}

bool is_stabilizable(const Matrix& a, const Matrix& b) {
  if (a.rows() != a.cols() || b.rows() != a.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "is_stabilizable: incompatible shapes");
  }
  return hautus_unstable_modes(a, b);
}

bool is_detectable(const Matrix& a, const Matrix& c) {
  if (a.rows() != a.cols() || c.cols() != a.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "is_detectable: incompatible shapes");
  }
  return hautus_unstable_modes(a.transpose(), c.transpose());
}

}  // namespace rsmlqr
