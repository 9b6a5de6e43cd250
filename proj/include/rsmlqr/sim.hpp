#pragma once

// Closed-loop simulation and infinite-horizon quadratic cost.

#include <limits>
#include <string>
#include <vector>

#include "rsmlqr/lqr.hpp"
#include "rsmlqr/rsm.hpp"

namespace rsmlqr {

struct Trajectory {
  std::vector<double> times;  // uniform grid starting at 0
  Matrix states;              // one row per sample
  bool blew_up = false;       // |x| passed 1e12; samples stop there
};

/// Fixed-step classical RK4 for x' = Acl x. The step is shortened when needed
/// so that the last sample lands exactly on `horizon`.
Trajectory simulate(const Matrix& acl, const Vector& x0, double horizon, double step);

/// CSV with header `t,x0,x1,...`, 17 significant digits.
std::string trajectory_csv(const Trajectory& traj);

struct CostResult {
  double value = std::numeric_limits<double>::infinity();
  Matrix gram;  // W with value = x0^T W x0; empty when unstable
  bool stable = false;
};

/// Cost of u = F x from x0: W solves Acl^T W + W Acl + Q + F^T R F = 0 with
/// Acl = A + B F. An unstable closed loop yields value = +inf, stable = false.
CostResult closed_loop_cost(const Matrix& a, const Matrix& b, const Matrix& f,
                            const Matrix& q, const Matrix& r, const Vector& x0);

struct GapResult {
  CostResult composed;
  CostResult direct;
  // composed - direct, solved from the Lyapunov equation of the cost
  // difference; +inf if the composed loop is unstable
  double gap = 0.0;
};

GapResult optimality_gap(const CompositeSystem& sys, const CompositeCost& cost,
                         const Matrix& f_composed, const Matrix& f_direct,
                         const Vector& x0);

}  // namespace rsmlqr
