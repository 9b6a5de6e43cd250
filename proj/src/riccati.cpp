#include "rsmlqr/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "rsmlqr/error.hpp"

namespace rsmlqr {
namespace {

constexpr int kMaxNewtonSweeps = 5;
constexpr double kNewtonTarget = 1e-12;
constexpr double kStepContraction = 0.5;
constexpr double kResidualGrowth = 10.0;
constexpr double kStepFloor = 1e-15;
constexpr double kCareHardFail = 1e-6;
constexpr double kLyapunovTol = 1e-10;
constexpr Eigen::Index kKroneckerLimit = 60;

lapack_logical select_open_left_half(const double* re, const double* /*im*/) {
  return *re < 0.0 ? 1 : 0;
}

void expect_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols,
                  const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw Error(ErrorCode::ShapeMismatch,
                std::string(what) + " is " + std::to_string(m.rows()) + "x" +
                    std::to_string(m.cols()) + ", expected " +
                    std::to_string(rows) + "x" + std::to_string(cols));
  }
}

// R^-1 applied on the left; R must be nonsingular.
Matrix r_inverse_times(const Matrix& r, const Matrix& rhs) {
  Eigen::FullPivLU<Matrix> lu(r);
  if (!lu.isInvertible()) {
    throw Error(ErrorCode::RSingular, "input weight R is singular");
  }
  return lu.solve(rhs);
}

double care_scale(const Matrix& p, const Matrix& a) {
  return 1.0 + p.norm() * a.norm();
}

Matrix lyapunov_kronecker(const Matrix& acl, const Matrix& w) {
  const Eigen::Index n = acl.rows();
  const Matrix id = Matrix::Identity(n, n);
  // vec(A^T X + X A) = (I (x) A^T + A^T (x) I) vec(X), column-major vec.
  Matrix op = Matrix::Zero(n * n, n * n);
  const Matrix at = acl.transpose();
  for (Eigen::Index j = 0; j < n; ++j) {
    op.block(j * n, j * n, n, n) += at;
    for (Eigen::Index i = 0; i < n; ++i) {
      op.block(j * n, i * n, n, n) += at(j, i) * id;
    }
  }
  const Vector rhs = -Eigen::Map<const Vector>(w.data(), n * n);
  Eigen::PartialPivLU<Matrix> lu(op);
  Vector x = lu.solve(rhs);
  x += lu.solve(rhs - op * x);  // one step of iterative refinement
  return Eigen::Map<const Matrix>(x.data(), n, n);
}

Matrix lyapunov_bartels_stewart(const Matrix& acl, const Matrix& w) {
  using CMatrix = Eigen::MatrixXcd;
  using CVector = Eigen::VectorXcd;
  const Eigen::Index n = acl.rows();
  Eigen::ComplexSchur<Matrix> schur(acl);
  if (schur.info() != Eigen::Success) {
    throw Error(ErrorCode::NumericalFailure, "solve_lyapunov: Schur iteration failed");
  }
  const CMatrix& u = schur.matrixU();
  const CMatrix& t = schur.matrixT();
  // With Acl = U T U^H and Y = U^H X U:  T^H Y + Y T = -U^H W U.
  const CMatrix c = -(u.adjoint() * w.cast<std::complex<double>>() * u);
  const CMatrix th = t.adjoint();
  CMatrix y = CMatrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    CVector rhs = c.col(j);
    for (Eigen::Index k = 0; k < j; ++k) rhs -= t(k, j) * y.col(k);
    CMatrix lhs = th;
    lhs.diagonal().array() += t(j, j);
    y.col(j) = lhs.triangularView<Eigen::Lower>().solve(rhs);
  }
  return (u * y * u.adjoint()).real();
}

double lyapunov_relative_residual(const Matrix& acl, const Matrix& w, const Matrix& x) {
  const double res = (acl.transpose() * x + x * acl + w).norm();
  const double scale = w.norm() + 2.0 * acl.norm() * x.norm();
  return scale > 0.0 ? res / scale : res;
}

}  // namespace

Residual care_residual(const Matrix& a, const Matrix& b, const Matrix& q,
                       const Matrix& r, const Matrix& p) {
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.cols();
  expect_shape(a, n, n, "A");
  expect_shape(b, n, m, "B");
  expect_shape(q, n, n, "Q");
  expect_shape(r, m, m, "R");
  expect_shape(p, n, n, "P");
  const Matrix pb = p * b;
  Residual out;
  out.value = -p * a - a.transpose() * p - q + pb * r_inverse_times(r, pb.transpose());
  out.norm = out.value.norm();
  return out;
}

RiccatiSolution solve_care(const Matrix& a, const Matrix& b, const Matrix& q,
                           const Matrix& r) {
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.cols();
  expect_shape(a, n, n, "A");
  expect_shape(b, n, m, "B");
  expect_shape(q, n, n, "Q");
  expect_shape(r, m, m, "R");
  if (!(a.allFinite() && b.allFinite() && q.allFinite() && r.allFinite())) {
    throw Error(ErrorCode::NumericalFailure, "solve_care: non-finite input");
  }
  const Definiteness rdef = definiteness(r, kSymmetryTol, 0.0);
  if (!rdef.symmetric || !rdef.pd) {
    throw Error(ErrorCode::RNotPD, "solve_care: R must be symmetric positive definite");
  }
  const Definiteness qdef = definiteness(q, kSymmetryTol, kPsdTol * (1.0 + max_abs(q)));
  if (!qdef.symmetric || !qdef.psd) {
    throw Error(ErrorCode::NotPSD, "solve_care: Q must be symmetric positive semidefinite");
  }
  const Matrix rs = symmetrize(r);
  const Matrix qs = symmetrize(q);

  RiccatiSolution sol;
  if (n == 0) {
    sol.P = Matrix(0, 0);
    sol.closed_loop_max_re = 0.0;
    return sol;
  }

  Eigen::LLT<Matrix> rchol(rs);
  const Matrix s = symmetrize(b * rchol.solve(b.transpose()));

  Matrix h(2 * n, 2 * n);
  h << a, -s, -qs, -a.transpose();

  const lapack_int dim = static_cast<lapack_int>(2 * n);
  lapack_int sdim = 0;
  std::vector<double> wr(2 * n), wi(2 * n);
  Matrix z(2 * n, 2 * n);
  const lapack_int info = LAPACKE_dgees(LAPACK_COL_MAJOR, 'V', 'S', select_open_left_half,
                                        dim, h.data(), dim, &sdim, wr.data(), wi.data(),
                                        z.data(), dim);
  if (info != 0) {
    throw Error(ErrorCode::NumericalFailure,
                "solve_care: ordered Schur decomposition failed (info " +
                    std::to_string(info) + ")");
  }
  // Eigenvalues too close to the imaginary axis mean the stable subspace is
  // not well defined (uncontrollable or unobservable mode on the axis).
  const double axis_tol = 1e-10 * std::max(1.0, h.cwiseAbs().maxCoeff());
  for (double re : wr) {
    if (std::abs(re) <= axis_tol) {
      throw Error(ErrorCode::NotStabilizable,
                  "solve_care: Hamiltonian has eigenvalues on the imaginary axis");
    }
  }
  if (sdim != dim / 2) {
    throw Error(ErrorCode::NotStabilizable,
                "solve_care: stable invariant subspace has dimension " +
                    std::to_string(sdim) + ", expected " + std::to_string(n));
  }
  const Matrix u1 = z.topLeftCorner(n, n);
  const Matrix u2 = z.bottomLeftCorner(n, n);
  // P = U2 U1^-1  <=>  U1^T P^T = U2^T
  Eigen::FullPivLU<Matrix> u1t(u1.transpose());
  if (!u1t.isInvertible() || u1t.rcond() < 1e-13) {
    throw Error(ErrorCode::NotStabilizable, "solve_care: U1 is singular");
  }
  Matrix p = symmetrize(u1t.solve(u2.transpose()).transpose());

  // Newton-Kleinman in defect-correction form: Acl^T D + D Acl = -Res(P).
  // The residual sits at its rounding floor long before P stops improving,
  // so sweeps are accepted while the correction keeps shrinking.
  Residual cur = care_residual(a, b, qs, rs, p);
  double last_step = std::numeric_limits<double>::infinity();
  for (int sweep = 0; sweep < kMaxNewtonSweeps; ++sweep) {
    const Matrix gain = rchol.solve(b.transpose() * p);
    const Matrix acl = a - b * gain;
    if (!is_hurwitz(acl).hurwitz) break;
    Matrix step;
    try {
      step = solve_lyapunov(acl, symmetrize(-cur.value));
    } catch (const Error&) {
      break;
    }
    const double step_size = max_abs(step);
    if (!(step_size < kStepContraction * last_step)) break;
    Matrix next = symmetrize(p + step);
    Residual next_res = care_residual(a, b, qs, rs, next);
    if (!(next_res.norm <= kResidualGrowth * cur.norm + kNewtonTarget * care_scale(next, a))) {
      break;
    }
    p = std::move(next);
    cur = std::move(next_res);
    last_step = step_size;
    ++sol.newton_sweeps;
    if (step_size <= kStepFloor * max_abs(p)) break;
  }
  const double res = cur.norm;
  if (!(res <= kCareHardFail * care_scale(p, a))) {
    throw Error(ErrorCode::NumericalFailure,
                "solve_care: residual " + std::to_string(res) + " not reducible");
  }
  sol.P = std::move(p);
  sol.residual_norm = res;
  sol.closed_loop_max_re = is_hurwitz(a - s * sol.P).max_real_part;
  if (!(sol.closed_loop_max_re < 0.0)) {
    throw Error(ErrorCode::NotStabilizable,
                "solve_care: computed solution is not stabilizing");
  }
  return sol;
}

Matrix solve_lyapunov(const Matrix& acl, const Matrix& w, LyapunovMethod method) {
  const Eigen::Index n = acl.rows();
  if (acl.cols() != n) {
    throw Error(ErrorCode::NonSquare, "solve_lyapunov: Acl must be square");
  }
  expect_shape(w, n, n, "W");
  if (asymmetry(w) > kSymmetryTol * (1.0 + max_abs(w))) {
    throw Error(ErrorCode::NotSymmetric, "solve_lyapunov: W must be symmetric");
  }
  if (n == 0) return Matrix(0, 0);
  const HurwitzTest hw = is_hurwitz(acl);
  if (!hw.hurwitz) {
    throw Error(ErrorCode::NotHurwitz, "solve_lyapunov: Acl has max real part " +
                                           std::to_string(hw.max_real_part));
  }
  const Matrix ws = symmetrize(w);
  if (method == LyapunovMethod::Automatic) {
    method = n <= kKroneckerLimit ? LyapunovMethod::Kronecker
                                  : LyapunovMethod::BartelsStewart;
  }
  Matrix x = method == LyapunovMethod::Kronecker ? lyapunov_kronecker(acl, ws)
                                                 : lyapunov_bartels_stewart(acl, ws);
  x = symmetrize(x);
  if (!x.allFinite() || lyapunov_relative_residual(acl, ws, x) > kLyapunovTol) {
    throw Error(ErrorCode::NumericalFailure, "solve_lyapunov: residual above tolerance");
  }
  return x;
}

Residual gare_residual(const Matrix& abar, const Matrix& bbar, const Matrix& k,
                       const Matrix& qcal, const Matrix& rbar, const Matrix& x) {
  const Eigen::Index big = abar.rows();
  const Eigen::Index small = k.cols();
  const Eigen::Index m = bbar.cols();
  expect_shape(abar, big, big, "Abar");
  expect_shape(bbar, big, m, "Bbar");
  expect_shape(k, big, small, "K");
  expect_shape(qcal, small, small, "Qcal");
  expect_shape(rbar, m, m, "Rbar");
  expect_shape(x, big, small, "X");
  const Matrix xtab = x.transpose() * abar * k;
  const Matrix btx = bbar.transpose() * x;
  Residual out;
  out.value = -xtab - xtab.transpose() - qcal + btx.transpose() * r_inverse_times(rbar, btx);
  out.norm = out.value.norm();
  return out;
}

Residual constructed_are_residual(const Matrix& abar, const Matrix& bbar,
                                  const Matrix& k, const Matrix& qcal,
                                  const Matrix& rbar, const Matrix& x, double sym_tol) {
  const Eigen::Index big = abar.rows();
  const Eigen::Index small = k.cols();
  const Eigen::Index m = bbar.cols();
  expect_shape(abar, big, big, "Abar");
  expect_shape(bbar, big, m, "Bbar");
  expect_shape(k, big, small, "K");
  expect_shape(qcal, small, small, "Qcal");
  expect_shape(rbar, m, m, "Rbar");
  expect_shape(x, big, big, "X");
  if (asymmetry(x) > sym_tol * (1.0 + max_abs(x))) {
    throw Error(ErrorCode::NotSymmetric,
                "constructed_are_residual: X must be symmetric");
  }
  const Matrix xs = symmetrize(x);
  const Matrix akk = abar * k * k.transpose();
  const Matrix btx = bbar.transpose() * xs;
  Residual out;
  out.value = -xs * akk - akk.transpose() * xs - k * qcal * k.transpose() +
              btx.transpose() * r_inverse_times(rbar, btx);
  out.norm = out.value.norm();
  return out;
}

}  // namespace rsmlqr
