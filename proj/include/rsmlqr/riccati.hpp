#pragma once

// Continuous-time algebraic Riccati and Lyapunov equations, plus residual
// evaluators for the generalized (rectangular-unknown) Riccati equation that
// links subsystem and composite LQR designs.

#include "rsmlqr/matkit.hpp"

namespace rsmlqr {

struct RiccatiSolution {
  Matrix P;
  double residual_norm = 0.0;       // Frobenius norm of the CARE residual
  double closed_loop_max_re = 0.0;  // max Re eig(A - B R^-1 B^T P)
  int newton_sweeps = 0;
};

struct Residual {
  Matrix value;
  double norm = 0.0;  // Frobenius
};

/// Stabilizing solution of A^T P + P A - P B R^-1 B^T P + Q = 0.
///
/// The stable invariant subspace [U1; U2] of the Hamiltonian
/// [[A, -B R^-1 B^T], [-Q, -A^T]] is taken from an ordered real Schur form
/// and P = U2 U1^-1 is polished by at most five Newton-Kleinman sweeps.
/// Throws NotStabilizable when no n-dimensional stable subspace exists or U1
/// is singular, RNotPD for an indefinite R, and NumericalFailure when the
/// residual cannot be brought below 1e-6 (1 + |P| |A|).
RiccatiSolution solve_care(const Matrix& a, const Matrix& b, const Matrix& q,
                           const Matrix& r);

/// -P A - A^T P - Q + P B R^-1 B^T P, evaluated term by term.
Residual care_residual(const Matrix& a, const Matrix& b, const Matrix& q,
                       const Matrix& r, const Matrix& p);

enum class LyapunovMethod { Automatic, Kronecker, BartelsStewart };

/// Solves Acl^T X + X Acl + W = 0 for Hurwitz Acl. Automatic uses the
/// Kronecker-vectorized system up to n = 60 and Bartels-Stewart beyond.
Matrix solve_lyapunov(const Matrix& acl, const Matrix& w,
                      LyapunovMethod method = LyapunovMethod::Automatic);

/// -X^T Abar K - K^T Abar^T X - Qcal + X^T Bbar Rbar^-1 Bbar^T X for a
/// rectangular X of shape (n1+n2) x (n1+n2-k).
Residual gare_residual(const Matrix& abar, const Matrix& bbar, const Matrix& k,
                       const Matrix& qcal, const Matrix& rbar, const Matrix& x);

/// -X (Abar K K^T) - (Abar K K^T)^T X - K Qcal K^T + X Bbar Rbar^-1 Bbar^T X
/// for a symmetric (n1+n2)-square X. Asymmetric X is rejected.
Residual constructed_are_residual(const Matrix& abar, const Matrix& bbar,
                                  const Matrix& k, const Matrix& qcal,
                                  const Matrix& rbar, const Matrix& x,
                                  double sym_tol = 1e-9);

}  // namespace rsmlqr
