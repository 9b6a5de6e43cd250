// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "random_instances.hpp"
#include "rsmlqr/error.hpp"
#include "rsmlqr/io.hpp"
#include "rsmlqr/lqr.hpp"
#include "rsmlqr/riccati.hpp"
#include "rsmlqr/rsm.hpp"
#include "rsmlqr/sim.hpp"

namespace {

using namespace rsmlqr;
using Clock = std::chrono::steady_clock;

constexpr std::size_t kSuiteSize = 1000;
constexpr std::uint64_t kSuiteSeed = 20240601;

struct Outcome {
  bool pass = false;
  std::string detail;
};

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

struct CliResult {
  int exit_code = -1;
  std::string out;
};

CliResult run_cli(const std::string& args) {
  const std::string cmd = "\"" RSMLQR_CLI_PATH "\" " + args + " 2>/dev/null";
  CliResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string problem_path(const char* name) {
  return std::string(RSMLQR_PROBLEMS_DIR) + "/" + name;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Shared random suite: every instance where both pipelines succeed.
struct SuiteEntry {
  std::size_t trial;
  Problem problem;
  CompositionalityReport report;
};

struct Suite {
  std::vector<SuiteEntry> entries;
  std::size_t skipped = 0;
  double build_ms = 0.0;
};

const Suite& suite() {
  static const Suite s = [] {
    Suite out;
    SearchConfig config;
    config.seed = kSuiteSeed;
    const auto t0 = Clock::now();
    for (std::size_t trial = 0; trial < kSuiteSize; ++trial) {
      Problem p = sample_problem(config, trial);
      try {
        CompositionalityReport r = analyze(p);
        out.entries.push_back({trial, std::move(p), std::move(r)});
      } catch (const Error&) {
        ++out.skipped;
      }
    }
    out.build_ms = ms_since(t0);
    return out;
  }();
  return s;
}

void write_violation(const std::string& tag, const SuiteEntry& e) {
  const std::filesystem::path dir = "acceptance_violations";
  std::filesystem::create_directories(dir);
  const auto file = dir / (tag + "_trial_" + std::to_string(e.trial) + ".json");
  std::ofstream(file, std::ios::binary) << dump(problem_to_json(e.problem));
  std::cerr << "  violation written to " << file.string() << "\n";
}

Outcome criterion1() {
  const auto t0 = Clock::now();
  const CompositionMatrix k = build_composition_matrix({2, 2, {{1, 0}}});
  const double ms = ms_since(t0);
  const Eigen::MatrixXi expected =
      (Eigen::MatrixXi(4, 3) << 1, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 1).finished();
  const bool exact = k.K.rows() == 4 && k.K.cols() == 3 && k.K.cast<int>() == expected;
  return {exact && ms < 1.0, "K exact=" + std::string(exact ? "yes" : "no") + ", " + fmt(ms) + " ms"};
}

Outcome criterion2() {
  const auto t0 = Clock::now();
  const double p1 = solve_care(scalar(-1), scalar(1), scalar(1), scalar(1)).P(0, 0);
  const double p2 = solve_care(scalar(-2), scalar(1), scalar(1), scalar(1)).P(0, 0);
  const double pc =
      solve_care(scalar(-3), Matrix::Ones(1, 2), scalar(2), Matrix::Identity(2, 2)).P(0, 0);
  const double ms = ms_since(t0);
  const double err = std::max({std::abs(p1 - (std::sqrt(2.0) - 1.0)),
                               std::abs(p2 - (std::sqrt(5.0) - 2.0)),
                               std::abs(pc - (std::sqrt(13.0) - 3.0) / 2.0)});
  return {err <= 1e-10 && ms < 10.0, "max error " + fmt(err) + ", " + fmt(ms) + " ms"};
}

Outcome criterion3() {
  const LoadedProblem lp = load_problem(problem_path("counterexample.json"));
  const double dev = analyze(lp.problem).theorem3->deviation;
  const double oracle = std::abs((std::sqrt(2.0) - 1.0) - (std::sqrt(13.0) - 3.0) / 2.0);
  const int code = run_cli("check \"" + problem_path("counterexample.json") + "\"").exit_code;
  const bool ok = std::abs(dev - 0.11144) <= 1e-4 && std::abs(dev - oracle) <= 1e-10 && code == 3;
  return {ok, "deviation " + fmt(dev) + " (oracle " + fmt(oracle) + "), exit " +
                  std::to_string(code)};
}

Outcome criterion4() {
  const LoadedProblem lp = load_problem(problem_path("symmetric.json"));
  const double dev = analyze(lp.problem).theorem3->deviation;
  const int code = run_cli("check \"" + problem_path("symmetric.json") + "\"").exit_code;
  return {dev <= 1e-9 && code == 0, "deviation " + fmt(dev) + ", exit " + std::to_string(code)};
}

Outcome criterion5() {
  const Suite& s = suite();
  std::size_t fails = 0;
  const auto t0 = Clock::now();
  for (const SuiteEntry& e : s.entries) {
    const CompositeSystem& c = e.report.composite;
    const Matrix& k = c.K.K;
    const double bnorm = c.Bbar.norm();
    for (const Matrix* x : {&e.report.theorem3->PbarK, &e.report.theorem3->KP}) {
      const double res = gare_residual(c.Abar, c.Bbar, k, e.report.cost.Qcal, e.report.cost.Rbar, *x).norm;
      const double xn = x->norm();
      if (!(res <= 1e-8 * (1.0 + xn * xn * bnorm * bnorm))) ++fails;
    }
  }
  const double total_ms = s.build_ms + ms_since(t0);
  const bool ok = s.entries.size() >= 1000 && fails == 0 && total_ms < 60000.0;
  return {ok, std::to_string(s.entries.size()) + " instances (" + std::to_string(s.skipped) +
                  " skipped), " + std::to_string(fails) + " residual failures, " +
                  fmt(total_ms / 1000.0) + " s"};
}

Outcome criterion6() {
  std::mt19937_64 rng(606);
  std::size_t unstable = 0;
  const std::size_t trials = 1000;
  for (std::size_t t = 0; t < trials; ++t) {
    const Index n1 = testing::random_index(rng, 1, 5), n2 = testing::random_index(rng, 1, 5);
    const Index m1 = testing::random_index(rng, 1, 3), m2 = testing::random_index(rng, 1, 3);
    auto sub = [&](Index n, Index m, Matrix& f) {
      const Matrix target = -testing::random_gram(rng, n, 0.05);
      const Matrix b = testing::random_matrix(rng, n, m);
      f = testing::random_matrix(rng, m, n);
      return LinearSystem{"S", target - b * f, b};
    };
    Matrix f1, f2;
    const LinearSystem s1 = sub(n1, m1, f1), s2 = sub(n2, m2, f2);
    CompositionPattern pat{n1, n2, {}};
    std::vector<Index> perm(n2);
    for (Index i = 0; i < n2; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    const Index k = testing::random_index(rng, 0, std::min<Index>({n1, n2, 2}));
    for (Index i = 0; i < k; ++i) pat.pairs.emplace_back(i, perm[i]);
    const CompositeSystem sys = compose_open_loop(s1, s2, pat);
    if (!is_hurwitz(closed_loop_matrix(sys, compose_gains(f1, f2, sys.K))).hurwitz) ++unstable;
  }
  return {unstable == 0, std::to_string(trials) + " instances, " + std::to_string(unstable) +
                             " non-Hurwitz composites"};
}

Outcome criterion7() {
  std::mt19937_64 rng(707);
  double worst = 0.0;
  std::size_t count = 0;
  for (const SuiteEntry& e : suite().entries) {
    const CompositeSystem& c = e.report.composite;
    const Matrix& k = c.K.K;
    for (int rep = 0; rep < 2; ++rep) {
      const Matrix fbar = rep == 0 ? block_diag(e.report.sub1.F, e.report.sub2.F)
                                   : testing::random_matrix(rng, c.Bbar.cols(), c.Abar.rows(), -3, 3);
      const Matrix lhs = c.Acal + c.Bcal * fbar * k;
      const Matrix rhs = k.transpose() * (c.Abar + c.Bbar * fbar) * k;
      const double scale = 1.0 + c.Abar.norm() + c.Bbar.norm() * fbar.norm();
      worst = std::max(worst, (lhs - rhs).norm() / scale);
      ++count;
    }
  }
  return {worst <= 1e-12, std::to_string(count) + " instances, worst scaled error " + fmt(worst)};
}

Outcome criterion8() {
  std::size_t violations = 0, equivalent = 0;
  for (const SuiteEntry& e : suite().entries) {
    if (!e.report.theorem3->equivalent) continue;
    ++equivalent;
    if (!e.report.corollary1->passes()) {
      ++violations;
      write_violation("corollary1", e);
    }
  }
  return {violations == 0, std::to_string(equivalent) + " compositional instances, " +
                               std::to_string(violations) + " violations"};
}

Outcome criterion9() {
  std::size_t violations = 0, predicted = 0;
  for (const SuiteEntry& e : suite().entries) {
    if (!e.report.theorem5->predicts_compositional) continue;
    ++predicted;
    const Theorem3Check& t = *e.report.theorem3;
    const double scale = 1.0 + std::max(max_abs(t.PbarK), max_abs(t.KP));
    if (!(t.deviation <= 1e-6 * scale)) {
      ++violations;
      write_violation("theorem5", e);
    }
  }
  return {violations == 0, std::to_string(predicted) + " predicted compositional, " +
                               std::to_string(violations) + " violations"};
}

Outcome criterion10() {
  const Problem p = load_problem(problem_path("counterexample.json")).problem;
  const CompositionalityReport r = analyze(p);
  const double gap =
      optimality_gap(r.composite, r.cost, r.F_composed, r.direct->F, Vector::Ones(1)).gap;
  const double f1 = std::sqrt(2.0) - 1.0, f2 = std::sqrt(5.0) - 2.0;
  const double pc = (std::sqrt(13.0) - 3.0) / 2.0;
  const double oracle = (2.0 + f1 * f1 + f2 * f2) / (2.0 * (3.0 + f1 + f2)) - pc;

  std::mt19937_64 rng(1010);
  double worst = 0.0;
  std::size_t evaluated = 0, bad = 0;
  for (const SuiteEntry& e : suite().entries) {
    for (int i = 0; i < 10; ++i) {
      const Vector x0 = testing::random_matrix(rng, e.report.composite.states(), 1);
      const GapResult g = optimality_gap(e.report.composite, e.report.cost, e.report.F_composed,
                                         e.report.direct->F, x0);
      ++evaluated;
      const double floor = -1e-8 * (1.0 + g.direct.value);
      if (!(g.gap >= floor)) ++bad;
      if (std::isfinite(g.gap)) worst = std::min(worst, g.gap / (1.0 + g.direct.value));
    }
  }
  const bool ok = std::abs(gap - 0.0023105) <= 1e-6 && std::abs(gap - oracle) <= 1e-12 && bad == 0;
  return {ok, "gap " + fmt(gap) + " (oracle " + fmt(oracle) + "); " + std::to_string(evaluated) +
                  " random gaps, " + std::to_string(bad) + " below floor, worst scaled " +
                  fmt(worst)};
}

double simpson(const std::vector<double>& y, double h) {
  double s = y.front() + y.back();
  for (std::size_t i = 1; i + 1 < y.size(); ++i) s += (i % 2 ? 4.0 : 2.0) * y[i];
  return s * h / 3.0;
}

Outcome criterion11() {
  std::mt19937_64 rng(1111);
  double worst = 0.0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    const Index n = testing::random_index(rng, 1, 6), m = testing::random_index(rng, 1, 3);
    const Matrix acl = testing::random_hurwitz(rng, n, 0.3, 3.0);
    const Matrix b = testing::random_matrix(rng, n, m);
    const Matrix f = testing::random_matrix(rng, m, n, -0.5, 0.5);
    const Matrix a = acl - b * f;
    const Matrix q = testing::random_gram(rng, n), r = testing::random_gram(rng, m);
    const Vector x0 = testing::random_matrix(rng, n, 1);
    const CostResult c = closed_loop_cost(a, b, f, q, r, x0);
    const Trajectory traj = simulate(a + b * f, x0, 60.0, 0.005);
    const Matrix w = q + f.transpose() * r * f;
    std::vector<double> y;
    for (Index i = 0; i < traj.states.rows(); ++i) {
      const Vector x = traj.states.row(i).transpose();
      y.push_back(x.dot(w * x));
    }
    const double quad = simpson(y, traj.times[1] - traj.times[0]);
    worst = std::max(worst, std::abs(quad - c.value) / std::max(c.value, 1e-300));
  }
  return {worst <= 1e-4, std::to_string(trials) + " instances, worst relative error " + fmt(worst)};
}

Outcome criterion12() {
  const CliResult a = run_cli("search --seed 7 --trials 200");
  const CliResult b = run_cli("search --seed 7 --trials 200");
  const bool ok = a.exit_code == 0 && b.exit_code == 0 && !a.out.empty() && a.out == b.out;
  return {ok, std::to_string(a.out.size()) + " bytes, identical=" +
                  std::string(a.out == b.out ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"composition matrix golden", criterion1},
      {"scalar CARE oracles", criterion2},
      {"non-compositional witness", criterion3},
      {"compositional witness", criterion4},
      {"GARE residual audit", criterion5},
      {"symmetric closed-loop stability audit", criterion6},
      {"feedback/composition identity", criterion7},
      {"necessary-condition audit", criterion8},
      {"sufficient-condition soundness audit", criterion9},
      {"optimality gap oracle and sign", criterion10},
      {"Lyapunov cost vs quadrature", criterion11},
      {"search determinism", criterion12},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first
              << ": " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
