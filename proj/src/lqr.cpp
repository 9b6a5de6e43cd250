#include "rsmlqr/lqr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "rsmlqr/error.hpp"

namespace rsmlqr {
namespace {

// Scale-aware threshold: tol * (1 + size).
bool within(double deviation, double tol, double size) {
  return deviation <= tol * (1.0 + size);
}

void require_cols(const Matrix& m, Index rows, Index cols, const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream os;
    os << what << " is " << m.rows() << "x" << m.cols() << ", expected " << rows << "x"
       << cols;
    throw Error(ErrorCode::DimensionMismatch, os.str());
  }
}

std::string format_deviation(double d) {
  std::ostringstream os;
  os.precision(6);
  os << d;
  return os.str();
}

}  // namespace

LQRDesign lqr_design(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r) {
  LQRDesign out;
  out.riccati = solve_care(a, b, q, r);
  out.F = -Eigen::LLT<Matrix>(symmetrize(r)).solve(b.transpose() * out.riccati.P);
  const Matrix delta = psd_sqrt_factor(symmetrize(q), kPsdTol * (1.0 + max_abs(q)));
  out.detectable = is_detectable(a, delta);
  return out;
}

LQRDesign lqr_subsystem(const LinearSystem& sys, const CostWeights& w) {
  sys.validate();
  validate_weights(w, sys.states(), sys.inputs());
  return lqr_design(sys.A, sys.B, w.Q, w.R);
}

LQRDesign lqr_composite(const CompositeSystem& sys, const CompositeCost& cost) {
  require_cols(cost.Qcal, sys.states(), sys.states(), "Qcal");
  require_cols(cost.Rbar, sys.inputs(), sys.inputs(), "Rbar");
  return lqr_design(sys.Acal, sys.Bcal, cost.Qcal, cost.Rbar);
}

Theorem3Check check_theorem3(const Matrix& pbar, const Matrix& k, const Matrix& pcal,
                             double tol) {
  require_cols(pbar, k.rows(), k.rows(), "Pbar");
  require_cols(pcal, k.cols(), k.cols(), "Pcal");
  Theorem3Check out;
  out.PbarK = pbar * k;
  out.KP = k * pcal;
  out.deviation = max_abs(out.PbarK - out.KP);
  const double size = std::max(max_abs(out.PbarK), max_abs(out.KP));
  out.relative_deviation = out.deviation / (1.0 + size);
  out.equivalent = within(out.deviation, tol, size);
  return out;
}

Corollary1Check check_corollary1(const Matrix& pbar, const Matrix& k, double tol) {
  require_cols(pbar, k.rows(), k.rows(), "Pbar");
  Corollary1Check out;
  out.PbarKKt = pbar * k * k.transpose();
  // Entries of Pbar K K^T are entries of Pbar K, so Pbar K = K Pcal up to d
  // leaves an asymmetry of at most 2d and moves eigenvalues by at most N d.
  const double sym_tol = 10.0 * tol;
  const double n = static_cast<double>(std::max<Index>(1, k.rows()));
  const double eig_tol = sym_tol * n * (1.0 + max_abs(out.PbarKKt));
  const Definiteness d = definiteness(out.PbarKKt, sym_tol, eig_tol);
  out.asymmetry = asymmetry(out.PbarKKt);
  out.min_eigenvalue = d.min_eigenvalue;
  out.symmetric = d.symmetric;
  out.psd = d.psd;
  return out;
}

Theorem5Check check_theorem5(const Matrix& abar, const Matrix& bbar, const Matrix& k,
                             const Matrix& qcal, const Matrix& rbar, const Matrix& pbar,
                             double tol) {
  const Index big = k.rows();
  require_cols(abar, big, big, "Abar");
  require_cols(bbar, big, rbar.rows(), "Bbar");
  require_cols(qcal, k.cols(), k.cols(), "Qcal");
  const Definiteness rdef = definiteness(rbar, kSymmetryTol, 0.0);
  if (!rdef.symmetric || !rdef.pd) {
    throw Error(ErrorCode::RNotPD, "check_theorem5: Rbar must be symmetric positive definite");
  }
  Theorem5Check out;
  out.hypothesis_ok = check_corollary1(pbar, k, tol).passes();

  const Matrix akk = abar * k * k.transpose();
  const SymEig reig = sym_eig(rbar);
  const Matrix input = bbar * reig.eigenvectors *
                       reig.eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal();
  out.controllable = is_controllable(akk, input);

  const Matrix kqk = symmetrize(k * qcal * k.transpose());
  const Matrix delta = psd_sqrt_factor(kqk, kPsdTol * (1.0 + max_abs(kqk)));
  out.observable = is_observable(akk, delta);

  out.predicts_compositional =
      out.hypothesis_ok && out.controllable.full_rank && out.observable.full_rank;
  return out;
}

GainComparison compare_gains(const Matrix& f_direct, const Matrix& f_composed, double tol) {
  if (f_direct.rows() != f_composed.rows() || f_direct.cols() != f_composed.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "compare_gains: gains differ in shape");
  }
  GainComparison out;
  out.deviation = max_abs(f_direct - f_composed);
  out.equivalent =
      within(out.deviation, tol, std::max(max_abs(f_direct), max_abs(f_composed)));
  return out;
}

Verdict CompositionalityReport::verdict() const {
  if (theorem3) {
    return theorem3->equivalent ? Verdict::Compositional : Verdict::NotCompositional;
  }
  if (corollary1 && !corollary1->passes()) return Verdict::NotCompositional;
  if (theorem5 && theorem5->predicts_compositional) return Verdict::Compositional;
  return Verdict::Inconclusive;
}

CompositionalityReport analyze(const Problem& problem, double tol, CheckSelection selection) {
  if (!(tol > 0.0) || !std::isfinite(tol)) {
    throw Error(ErrorCode::InvalidArgument, "tolerance must be a positive finite number");
  }
  CompositionalityReport rep;
  rep.tol = tol;
  rep.composite = compose_open_loop(problem.s1, problem.s2, problem.pattern);
  validate_weights(problem.w1, problem.s1.states(), problem.s1.inputs());
  validate_weights(problem.w2, problem.s2.states(), problem.s2.inputs());
  rep.cost = compose_cost(problem.w1, problem.w2, rep.composite.K);

  rep.sub1 = lqr_subsystem(problem.s1, problem.w1);
  rep.sub2 = lqr_subsystem(problem.s2, problem.w2);
  rep.Pbar = block_diag(rep.sub1.riccati.P, rep.sub2.riccati.P);
  const Matrix& k = rep.composite.K.K;
  rep.F_composed = compose_gains(rep.sub1.F, rep.sub2.F, rep.composite.K);

  if (!rep.sub1.detectable) {
    rep.warnings.push_back("NotDetectable: (A, Q^1/2) of " + problem.s1.name +
                           " is not detectable; stabilizing solution used");
  }
  if (!rep.sub2.detectable) {
    rep.warnings.push_back("NotDetectable: (A, Q^1/2) of " + problem.s2.name +
                           " is not detectable; stabilizing solution used");
  }

  if (selection.theorem3) {
    rep.direct = lqr_composite(rep.composite, rep.cost);
    if (!rep.direct->detectable) {
      rep.warnings.push_back(
          "NotDetectable: composite (A, Q^1/2) is not detectable; stabilizing solution used");
    }
    const Matrix& pcal = rep.direct->riccati.P;
    rep.theorem3 = check_theorem3(rep.Pbar, k, pcal, tol);
    rep.gains = compare_gains(rep.direct->F, rep.F_composed, tol);
    const Matrix& abar = rep.composite.Abar;
    const Matrix& bbar = rep.composite.Bbar;
    rep.gare_residual_PbarK =
        gare_residual(abar, bbar, k, rep.cost.Qcal, rep.cost.Rbar, rep.theorem3->PbarK).norm;
    rep.gare_residual_KP =
        gare_residual(abar, bbar, k, rep.cost.Qcal, rep.cost.Rbar, rep.theorem3->KP).norm;
    rep.constructed_residual_KPKt =
        constructed_are_residual(abar, bbar, k, rep.cost.Qcal, rep.cost.Rbar,
                                 symmetrize(k * pcal * k.transpose()))
            .norm;
    if (rep.theorem3->equivalent != rep.gains->equivalent) {
      rep.inconsistencies.push_back(
          "theorem3 and gain comparison disagree (deviation " +
          format_deviation(rep.theorem3->deviation) + ", gain deviation " +
          format_deviation(rep.gains->deviation) + ")");
    }
  }
  if (selection.corollary1) {
    rep.corollary1 = check_corollary1(rep.Pbar, k, tol);
  }
  if (selection.theorem5) {
    rep.theorem5 = check_theorem5(rep.composite.Abar, rep.composite.Bbar, k, rep.cost.Qcal,
                                  rep.cost.Rbar, rep.Pbar, tol);
  }

  if (rep.theorem3 && rep.theorem3->equivalent && rep.corollary1 &&
      !rep.corollary1->passes()) {
    rep.inconsistencies.push_back(
        "corollary1 fails on an instance that theorem3 finds compositional");
  }
  if (rep.theorem3 && !rep.theorem3->equivalent && rep.theorem5 &&
      rep.theorem5->predicts_compositional) {
    rep.inconsistencies.push_back(
        "theorem5 predicts compositional but theorem3 deviation is " +
        format_deviation(rep.theorem3->deviation));
  }
  return rep;
}

Problem sample_problem(const SearchConfig& config, std::size_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(config.seed),
                    static_cast<std::uint32_t>(config.seed >> 32),
                    static_cast<std::uint32_t>(trial),
                    static_cast<std::uint32_t>(static_cast<std::uint64_t>(trial) >> 32)};
  std::mt19937_64 rng(seq);
  auto pick = [&rng](Index lo, Index hi) {
    return std::uniform_int_distribution<Index>(lo, std::max(lo, hi))(rng);
  };
  auto uniform = [&rng](Index rows, Index cols, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
    return m;
  };
  auto gram = [&](Index n) {
    const Matrix g = uniform(n, n, -1.0, 1.0);
    return Matrix(g.transpose() * g + 0.1 * Matrix::Identity(n, n));
  };
  auto subsystem = [&](const char* name) {
    const Index n = pick(config.n_min, config.n_max);
    const Index m = pick(config.m_min, config.m_max);
    LinearSystem sys{name, uniform(n, n, -2.0, 2.0), uniform(n, m, -1.0, 1.0)};
    for (Index j = 0; j < m; ++j) {
      while (sys.B.col(j).isZero(0.0)) sys.B.col(j) = uniform(n, 1, -1.0, 1.0);
    }
    if (!is_stabilizable(sys.A, sys.B)) {
      const double shift = is_hurwitz(sys.A).max_real_part + 0.5;
      sys.A -= shift * Matrix::Identity(n, n);
    }
    CostWeights w{gram(n), gram(m)};
    return std::make_pair(std::move(sys), std::move(w));
  };

  Problem p;
  std::tie(p.s1, p.w1) = subsystem("S1");
  std::tie(p.s2, p.w2) = subsystem("S2");
  p.pattern.n1 = p.s1.states();
  p.pattern.n2 = p.s2.states();
  const Index kmax = std::min({config.k_max, p.pattern.n1, p.pattern.n2});
  const Index shared = std::min(pick(config.k_min, kmax), kmax);
  std::vector<Index> idx1(p.pattern.n1), idx2(p.pattern.n2);
  std::iota(idx1.begin(), idx1.end(), Index{0});
  std::iota(idx2.begin(), idx2.end(), Index{0});
  std::shuffle(idx1.begin(), idx1.end(), rng);
  std::shuffle(idx2.begin(), idx2.end(), rng);
  for (Index s = 0; s < shared; ++s) p.pattern.pairs.emplace_back(idx1[s], idx2[s]);
  return p;
}

SearchResult counterexample_search(const SearchConfig& config) {
  struct Slot {
    bool skipped = false;
    std::optional<SearchHit> hit;
  };
  std::vector<Slot> slots(config.trials);
  auto run = [&](std::size_t first, std::size_t stride) {
    for (std::size_t t = first; t < config.trials; t += stride) {
      Problem p = sample_problem(config, t);
      try {
        CompositionalityReport rep = analyze(p, config.tol);
        if (rep.theorem3->deviation > config.threshold) {
          slots[t].hit = SearchHit{t, std::move(p), std::move(rep)};
        }
      } catch (const Error&) {
        slots[t].skipped = true;
      }
    }
  };
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(config.threads, config.trials));
  if (workers == 1) {
    run(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w, workers);
  }

  SearchResult out;
  out.evaluated = config.trials;
  for (Slot& s : slots) {
    if (s.skipped) ++out.skipped;
    if (s.hit) out.hits.push_back(std::move(*s.hit));
  }
  return out;
}

}  // namespace rsmlqr
