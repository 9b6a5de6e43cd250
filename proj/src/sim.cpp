#include "rsmlqr/sim.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "rsmlqr/error.hpp"
#include "rsmlqr/riccati.hpp"

namespace rsmlqr {
namespace {

constexpr double kOverflowGuard = 1e12;

void append_number(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

}  // namespace

Trajectory simulate(const Matrix& acl, const Vector& x0, double horizon, double step) {
  if (acl.rows() != acl.cols() || acl.rows() != x0.size()) {
    throw Error(ErrorCode::DimensionMismatch, "simulate: Acl must be square and match x0");
  }
  if (!(step > 0.0) || !(horizon >= step) || !std::isfinite(horizon)) {
    throw Error(ErrorCode::InvalidArgument, "simulate: need step > 0 and horizon >= step");
  }
  const auto steps = static_cast<Eigen::Index>(std::ceil(horizon / step - 1e-9));
  const double h = horizon / static_cast<double>(steps);

  Trajectory traj;
  traj.times.reserve(steps + 1);
  Matrix rows(steps + 1, x0.size());
  Vector x = x0;
  rows.row(0) = x.transpose();
  traj.times.push_back(0.0);
  Eigen::Index filled = 1;
  for (Eigen::Index i = 1; i <= steps; ++i) {
    const Vector k1 = acl * x;
    const Vector k2 = acl * (x + 0.5 * h * k1);
    const Vector k3 = acl * (x + 0.5 * h * k2);
    const Vector k4 = acl * (x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite() || (x.size() > 0 && x.cwiseAbs().maxCoeff() > kOverflowGuard)) {
      traj.blew_up = true;
      break;
    }
    rows.row(i) = x.transpose();
    traj.times.push_back(static_cast<double>(i) * h);
    ++filled;
  }
  traj.states = rows.topRows(filled);
  return traj;
}

std::string trajectory_csv(const Trajectory& traj) {
  std::string out = "t";
  for (Eigen::Index j = 0; j < traj.states.cols(); ++j) out += ",x" + std::to_string(j);
  out += '\n';
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    append_number(out, traj.times[i]);
    for (Eigen::Index j = 0; j < traj.states.cols(); ++j) {
      out += ',';
      append_number(out, traj.states(static_cast<Eigen::Index>(i), j));
    }
    out += '\n';
  }
  return out;
}

CostResult closed_loop_cost(const Matrix& a, const Matrix& b, const Matrix& f,
                            const Matrix& q, const Matrix& r, const Vector& x0) {
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.cols();
  if (a.cols() != n || b.rows() != n || f.rows() != m || f.cols() != n || q.rows() != n ||
      q.cols() != n || r.rows() != m || r.cols() != m || x0.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "closed_loop_cost: inconsistent shapes");
  }
  const Matrix acl = a + b * f;
  CostResult out;
  if (!is_hurwitz(acl).hurwitz) return out;
  out.gram = solve_lyapunov(acl, symmetrize(q + f.transpose() * r * f));
  out.value = x0.dot(out.gram * x0);
  out.stable = true;
  return out;
}

GapResult optimality_gap(const CompositeSystem& sys, const CompositeCost& cost,
                         const Matrix& f_composed, const Matrix& f_direct,
                         const Vector& x0) {
  GapResult out;
  out.composed = closed_loop_cost(sys.Acal, sys.Bcal, f_composed, cost.Qcal, cost.Rbar, x0);
  out.direct = closed_loop_cost(sys.Acal, sys.Bcal, f_direct, cost.Qcal, cost.Rbar, x0);
  if (!out.composed.stable || !out.direct.stable) {
    out.gap = out.composed.stable ? -std::numeric_limits<double>::infinity()
                                  : std::numeric_limits<double>::infinity();
    if (!out.composed.stable && !out.direct.stable) {
      out.gap = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
  }
  // Z = W_composed - W_direct solves Acl_c^T Z + Z Acl_c + G = 0 with
  // G = D^T R D + D^T E + E^T D, D = F_c - F_d, E = R F_d + B^T W_d.
  // Solving for Z directly avoids subtracting two large costs.
  const Matrix d = f_composed - f_direct;
  const Matrix e = cost.Rbar * f_direct + sys.Bcal.transpose() * out.direct.gram;
  const Matrix cross = d.transpose() * e;
  const Matrix g = symmetrize(d.transpose() * cost.Rbar * d + cross + cross.transpose());
  const Matrix z = solve_lyapunov(sys.Acal + sys.Bcal * f_composed, g);
  out.gap = x0.dot(z * x0);
  return out;
}

}  // namespace rsmlqr
