#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "random_instances.hpp"
#include "rsmlqr/sim.hpp"
#include "test_util.hpp"

namespace rsmlqr {
namespace {

using testing::expect_error;

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }
Vector vec1(double v) { return Vector::Constant(1, v); }

// Composite Simpson rule on a uniform grid with an even number of intervals.
double simpson(const std::vector<double>& y, double h) {
  const std::size_t n = y.size() - 1;
  double s = y.front() + y.back();
  for (std::size_t i = 1; i < n; ++i) s += (i % 2 == 1 ? 4.0 : 2.0) * y[i];
  return s * h / 3.0;
}

double quadrature_cost(const Trajectory& traj, const Matrix& weight) {
  std::vector<double> integrand;
  for (Index i = 0; i < traj.states.rows(); ++i) {
    const Vector x = traj.states.row(i).transpose();
    integrand.push_back(x.dot(weight * x));
  }
  return simpson(integrand, traj.times[1] - traj.times[0]);
}

TEST(Simulate, ScalarDecay) {
  const Trajectory t = simulate(scalar(-1), vec1(1), 1.0, 0.01);
  ASSERT_EQ(t.times.size(), 101u);
  EXPECT_DOUBLE_EQ(t.times.back(), 1.0);
  EXPECT_NEAR(t.states(100, 0), std::exp(-1.0), 1e-10);
  EXPECT_FALSE(t.blew_up);
}

TEST(Simulate, ZeroInitialState) {
  const Trajectory t = simulate(-Matrix::Identity(3, 3), Vector::Zero(3), 2.0, 0.1);
  EXPECT_TRUE(t.states.isZero(0.0));
}

TEST(Simulate, RotationReturnsAfterOnePeriod) {
  const Matrix a = (Matrix(2, 2) << 0, 1, -1, 0).finished();
  const Trajectory t = simulate(a, Vector::Unit(2, 0), 2.0 * std::numbers::pi, 0.01);
  const Vector end = t.states.bottomRows(1).transpose();
  EXPECT_NEAR(end[0], 1.0, 1e-8);
  EXPECT_NEAR(end[1], 0.0, 1e-8);
}

TEST(Simulate, StepShortenedToLandOnHorizon) {
  const Trajectory t = simulate(scalar(-1), vec1(1), 1.0, 0.3);
  ASSERT_EQ(t.times.size(), 5u);
  EXPECT_DOUBLE_EQ(t.times[1], 0.25);
  EXPECT_DOUBLE_EQ(t.times.back(), 1.0);
}

TEST(Simulate, BlowUpStopsEarly) {
  const Trajectory t = simulate(scalar(50), vec1(1), 10.0, 0.01);
  EXPECT_TRUE(t.blew_up);
  EXPECT_LT(t.times.size(), 1001u);
  EXPECT_EQ(static_cast<Index>(t.times.size()), t.states.rows());
}

TEST(Simulate, InvalidArguments) {
  expect_error([] { simulate(scalar(-1), vec1(1), 1.0, 0.0); }, ErrorCode::InvalidArgument);
  expect_error([] { simulate(scalar(-1), vec1(1), 0.0, 0.1); }, ErrorCode::InvalidArgument);
  expect_error([] { simulate(scalar(-1), Vector::Ones(2), 1.0, 0.1); },
               ErrorCode::DimensionMismatch);
}

TEST(TrajectoryCsv, Format) {
  const Trajectory t = simulate(-Matrix::Identity(2, 2), Vector::Ones(2), 1.0, 0.5);
  const std::string csv = trajectory_csv(t);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,x0,x1");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_NE(csv.find("\n0,1,1\n"), std::string::npos);
  EXPECT_NE(csv.find("\n0.5,0.60677083333333337,0.60677083333333337\n"), std::string::npos);
}

TEST(ClosedLoopCost, ScalarOptimalCost) {
  const double p = std::sqrt(2.0) - 1.0;
  const CostResult c =
      closed_loop_cost(scalar(-1), scalar(1), scalar(-p), scalar(1), scalar(1), vec1(1));
  EXPECT_TRUE(c.stable);
  EXPECT_NEAR(c.value, p, 1e-12);
  const CostResult scaled =
      closed_loop_cost(scalar(-1), scalar(1), scalar(-p), scalar(1), scalar(1), vec1(3));
  EXPECT_NEAR(scaled.value, 9.0 * p, 1e-11);
}

TEST(ClosedLoopCost, UnstableAndZero) {
  const CostResult u =
      closed_loop_cost(scalar(1), scalar(1), scalar(0), scalar(1), scalar(1), vec1(1));
  EXPECT_FALSE(u.stable);
  EXPECT_TRUE(std::isinf(u.value));
  const CostResult z =
      closed_loop_cost(scalar(-1), scalar(1), scalar(0), scalar(1), scalar(1), vec1(0));
  EXPECT_EQ(z.value, 0.0);
  expect_error(
      [] { closed_loop_cost(scalar(-1), scalar(1), Matrix::Zero(1, 2), scalar(1), scalar(1), vec1(1)); },
      ErrorCode::DimensionMismatch);
}

TEST(OptimalityGap, ScalarCounterexample) {
  const CompositeSystem sys = compose_open_loop({"S1", scalar(-1), scalar(1)},
                                                {"S2", scalar(-2), scalar(1)}, {1, 1, {{0, 0}}});
  const CompositeCost cost = compose_cost({scalar(1), scalar(1)}, {scalar(1), scalar(1)}, sys.K);
  const double f1 = -(std::sqrt(2.0) - 1.0), f2 = -(std::sqrt(5.0) - 2.0);
  const double pc = (std::sqrt(13.0) - 3.0) / 2.0;
  const Matrix fc = (Matrix(2, 1) << f1, f2).finished();
  const Matrix fd = (Matrix(2, 1) << -pc, -pc).finished();

  const double acl = -3.0 + f1 + f2;
  const double composed = (2.0 + f1 * f1 + f2 * f2) / (-2.0 * acl);
  const double direct = (2.0 + 2.0 * pc * pc) / (-2.0 * (-3.0 - 2.0 * pc));
  EXPECT_NEAR(direct, pc, 1e-14);

  const GapResult g = optimality_gap(sys, cost, fc, fd, vec1(1));
  EXPECT_NEAR(g.composed.value, composed, 1e-12);
  EXPECT_NEAR(g.direct.value, direct, 1e-12);
  EXPECT_NEAR(g.gap, composed - direct, 1e-12);
  EXPECT_NEAR(g.composed.value, 0.305086189, 1e-9);
  EXPECT_NEAR(g.direct.value, 0.302775638, 1e-9);
  EXPECT_GT(g.gap, 0.0);

  const GapResult unstable = optimality_gap(sys, cost, Matrix::Constant(2, 1, 5.0), fd, vec1(1));
  EXPECT_TRUE(std::isinf(unstable.gap) && unstable.gap > 0);
}

TEST(ClosedLoopCost, MatchesQuadratureOfSimulation) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = testing::random_index(rng, 1, 4), m = testing::random_index(rng, 1, 2);
    const Matrix b = testing::random_matrix(rng, n, m);
    const Matrix f = testing::random_matrix(rng, m, n, -0.5, 0.5);
    const Matrix acl = testing::random_hurwitz(rng, n, 0.5, 2.0);
    const Matrix a = acl - b * f;
    const Matrix q = testing::random_gram(rng, n), r = testing::random_gram(rng, m);
    const Vector x0 = testing::random_matrix(rng, n, 1);
    const CostResult c = closed_loop_cost(a, b, f, q, r, x0);
    ASSERT_TRUE(c.stable);
    // Slowest mode decays at least like exp(-0.5 t); the tail past t = 40 is negligible.
    const Trajectory t = simulate(a + b * f, x0, 40.0, 0.01);
    const double quad = quadrature_cost(t, q + f.transpose() * r * f);
    EXPECT_NEAR(quad, c.value, 1e-4 * (1.0 + c.value)) << "trial " << trial;
  }
}

TEST(OptimalityGap, DirectDesignIsNeverBeaten) {
  SearchConfig config;
  config.seed = 5;
  std::mt19937_64 rng(5);
  int evaluated = 0;
  for (std::size_t trial = 0; trial < 200; ++trial) {
    const Problem p = sample_problem(config, trial);
    CompositionalityReport r;
    try {
      r = analyze(p, kCompositionalityTol, {true, false, false});
    } catch (const Error&) {
      continue;
    }
    const Vector x0 = testing::random_matrix(rng, r.composite.states(), 1);
    const GapResult g = optimality_gap(r.composite, r.cost, r.F_composed, r.direct->F, x0);
    ASSERT_TRUE(g.direct.stable);
    if (!g.composed.stable) continue;
    EXPECT_GE(g.gap, -1e-8 * (1.0 + g.direct.value)) << "trial " << trial;
    ++evaluated;
  }
  EXPECT_GT(evaluated, 100);
}

}  // namespace
}  // namespace rsmlqr
