#pragma once

// LQR synthesis for subsystems and composites, and the checks that decide
// whether composing subsystem LQR gains reproduces the composite LQR gain.
//
// Gains follow the u = F x convention throughout, so a synthesized gain is
// F = -R^-1 B^T P.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rsmlqr/problem.hpp"
#include "rsmlqr/riccati.hpp"
#include "rsmlqr/rsm.hpp"

namespace rsmlqr {

inline constexpr double kCompositionalityTol = 1e-8;

struct LQRDesign {
  RiccatiSolution riccati;
  Matrix F;
  bool detectable = true;  // (A, Q^{1/2}); solved anyway when false
};

LQRDesign lqr_design(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r);
LQRDesign lqr_subsystem(const LinearSystem& sys, const CostWeights& w);
LQRDesign lqr_composite(const CompositeSystem& sys, const CompositeCost& cost);

/// Exact test: compositional iff Pbar K == K Pcal.
struct Theorem3Check {
  Matrix PbarK;
  Matrix KP;
  double deviation = 0.0;           // max |Pbar K - K Pcal|
  double relative_deviation = 0.0;  // deviation / (1 + max(|Pbar K|, |K Pcal|))
  bool equivalent = false;
};

/// Necessary test: Pbar K K^T must be symmetric PSD. A failure rules
/// compositionality out; a pass is inconclusive.
struct Corollary1Check {
  Matrix PbarKKt;
  double asymmetry = 0.0;
  double min_eigenvalue = 0.0;
  bool symmetric = false;
  bool psd = false;

  bool passes() const { return symmetric && psd; }
};

/// Sufficient test built from the constructed Riccati equation with system
/// matrix Abar K K^T. A pass proves compositionality; a failure is
/// inconclusive.
struct Theorem5Check {
  bool hypothesis_ok = false;  // Pbar K K^T symmetric PSD
  RankTest controllable;       // (Abar K K^T, Bbar Sigma Lambda^-1/2)
  RankTest observable;         // (Abar K K^T, Delta), K Qcal K^T = Delta^T Delta
  bool predicts_compositional = false;
};

struct GainComparison {
  double deviation = 0.0;  // max |Fhat - F|
  bool equivalent = false;
};

Theorem3Check check_theorem3(const Matrix& pbar, const Matrix& k, const Matrix& pcal,
                             double tol = kCompositionalityTol);

/// `tol` is the Theorem-3 tolerance; the symmetry and eigenvalue thresholds
/// are widened from it so that any instance passing Theorem 3 also passes
/// here.
Corollary1Check check_corollary1(const Matrix& pbar, const Matrix& k,
                                 double tol = kCompositionalityTol);

Theorem5Check check_theorem5(const Matrix& abar, const Matrix& bbar, const Matrix& k,
                             const Matrix& qcal, const Matrix& rbar, const Matrix& pbar,
                             double tol = kCompositionalityTol);

GainComparison compare_gains(const Matrix& f_direct, const Matrix& f_composed,
                             double tol = kCompositionalityTol);

enum class Verdict { Compositional, NotCompositional, Inconclusive };

struct CheckSelection {
  bool theorem3 = true;
  bool corollary1 = true;
  bool theorem5 = true;
};

struct CompositionalityReport {
  double tol = kCompositionalityTol;
  CompositeSystem composite;
  CompositeCost cost;
  LQRDesign sub1;
  LQRDesign sub2;
  Matrix Pbar;
  Matrix F_composed;  // blockdiag(F1, F2) K

  // Present only when the composite Riccati equation was solved.
  std::optional<LQRDesign> direct;
  std::optional<Theorem3Check> theorem3;
  std::optional<GainComparison> gains;
  std::optional<double> gare_residual_PbarK;
  std::optional<double> gare_residual_KP;
  std::optional<double> constructed_residual_KPKt;

  std::optional<Corollary1Check> corollary1;
  std::optional<Theorem5Check> theorem5;

  std::vector<std::string> warnings;
  // Violations of the implications between the checks. Never expected;
  // non-empty means a numerical or theoretical problem worth reporting.
  std::vector<std::string> inconsistencies;

  Verdict verdict() const;
};

/// Full pipeline: compose, synthesize subsystem LQRs, and run the selected
/// checks. The composite Riccati equation is only solved when Theorem 3 is
/// selected.
CompositionalityReport analyze(const Problem& problem, double tol = kCompositionalityTol,
                               CheckSelection selection = {});

struct SearchConfig {
  Index n_min = 1, n_max = 5;
  Index m_min = 1, m_max = 3;
  Index k_min = 0, k_max = 2;
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  double threshold = 1e-2;
  double tol = kCompositionalityTol;
  unsigned threads = 1;
};

struct SearchHit {
  std::size_t trial = 0;
  Problem problem;
  CompositionalityReport report;
};

struct SearchResult {
  std::vector<SearchHit> hits;  // ordered by trial index
  std::size_t evaluated = 0;
  std::size_t skipped = 0;      // solver preconditions failed
};

/// Draws the problem for one trial. Deterministic in (seed, trial).
Problem sample_problem(const SearchConfig& config, std::size_t trial);

/// Runs `trials` random instances and keeps those whose Theorem-3 deviation
/// exceeds the threshold. The output depends only on the config, regardless
/// of the thread count.
SearchResult counterexample_search(const SearchConfig& config);

}  // namespace rsmlqr
