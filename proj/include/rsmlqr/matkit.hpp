#pragma once

// Dense real-matrix helpers shared by the Riccati, composition and LQR code.
// All functions are pure; matrices are Eigen dynamic-size doubles.

#include <cstddef>
#include <optional>

#include <Eigen/Dense>

namespace rsmlqr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kSymmetryTol = 1e-10;  // relative
inline constexpr double kPsdTol = 1e-9;         // absolute

/// Eigenpairs of a symmetric matrix, eigenvalues ascending.
struct SymEig {
  Vector eigenvalues;
  Matrix eigenvectors;
};

struct HurwitzTest {
  bool hurwitz = false;
  double max_real_part = 0.0;
};

struct Definiteness {
  bool symmetric = false;
  bool psd = false;
  bool pd = false;
  double min_eigenvalue = 0.0;
};

/// Outcome of a Kalman rank test. `margin` is the smallest singular value
/// that was counted towards the rank (0 when the rank is 0), so callers can
/// judge how close to the rank boundary an instance sits.
struct RankTest {
  bool full_rank = false;
  std::size_t rank = 0;
  double margin = 0.0;
};

double max_abs(const Matrix& m);
double asymmetry(const Matrix& m);  // max |M - M^T|
bool all_finite(const Matrix& m);
Matrix symmetrize(const Matrix& m);
Matrix block_diag(const Matrix& a, const Matrix& b);

/// Symmetric eigendecomposition. The input is symmetrized first; asymmetry
/// above `sym_tol * max|M|` is rejected with NotSymmetric.
SymEig sym_eig(const Matrix& m, double sym_tol = kSymmetryTol);

/// Number of singular values above `tol`. The default threshold is
/// max(rows, cols) * sigma_max * machine epsilon.
std::size_t rank_svd(const Matrix& m, std::optional<double> tol = {});

HurwitzTest is_hurwitz(const Matrix& m, double margin = 0.0);

/// Symmetry is judged relative to (1 + max|M|); the PSD/PD decisions use the
/// eigenvalues of (M + M^T)/2 against +-eig_tol (defaults to `tol`).
/// Non-symmetric input reports psd = pd = false.
Definiteness definiteness(const Matrix& m, double tol = kPsdTol,
                          std::optional<double> eig_tol = {});

/// Returns Delta (r x n, r = number of eigenvalues above tol) with
/// Delta^T Delta = M.
Matrix psd_sqrt_factor(const Matrix& m, double tol = kPsdTol);

RankTest is_controllable(const Matrix& a, const Matrix& b,
                         std::optional<double> tol = {});
RankTest is_observable(const Matrix& a, const Matrix& c,
                       std::optional<double> tol = {});

// Hautus tests restricted to eigenvalues with Re(lambda) >= 0.
bool is_stabilizable(const Matrix& a, const Matrix& b);
bool is_detectable(const Matrix& a, const Matrix& c);

}  // namespace rsmlqr
