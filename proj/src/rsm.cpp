#include "rsmlqr/rsm.hpp"

#include <algorithm>
#include <string>

#include "rsmlqr/error.hpp"

namespace rsmlqr {
namespace {

std::string dims(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

[[noreturn]] void mismatch(const std::string& what) {
  throw Error(ErrorCode::DimensionMismatch, what);
}

}  // namespace

void LinearSystem::validate() const {
  if (A.rows() != A.cols()) mismatch(name + ": A must be square, got " + dims(A));
  if (B.rows() != A.rows()) {
    mismatch(name + ": B must have " + std::to_string(A.rows()) + " rows, got " + dims(B));
  }
  if (B.cols() < 1) mismatch(name + ": B needs at least one column");
  if (!A.allFinite() || !B.allFinite()) mismatch(name + ": non-finite entries");
}

void CompositionPattern::validate() const {
  std::vector<bool> used1(static_cast<std::size_t>(std::max<Index>(n1, 0)), false);
  std::vector<bool> used2(static_cast<std::size_t>(std::max<Index>(n2, 0)), false);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [j, k] = pairs[p];
    const std::string where = "pair " + std::to_string(p);
    if (j < 0 || j >= n1) {
      throw Error(ErrorCode::IndexOutOfRange,
                  where + ": subsystem-1 index " + std::to_string(j) + " out of range");
    }
    if (k < 0 || k >= n2) {
      throw Error(ErrorCode::IndexOutOfRange,
                  where + ": subsystem-2 index " + std::to_string(k) + " out of range");
    }
    if (used1[j]) {
      throw Error(ErrorCode::DuplicateSharedIndex,
                  where + ": duplicate subsystem-1 index " + std::to_string(j));
    }
    if (used2[k]) {
      throw Error(ErrorCode::DuplicateSharedIndex,
                  where + ": duplicate subsystem-2 index " + std::to_string(k));
    }
    used1[j] = used2[k] = true;
  }
}

CompositionMatrix build_composition_matrix(const CompositionPattern& pattern) {
  pattern.validate();
  CompositionMatrix out;
  out.n1 = pattern.n1;
  out.n2 = pattern.n2;
  out.shared = pattern.shared();

  std::vector<Index> partner_of1(pattern.n1, -1);
  std::vector<bool> shared2(pattern.n2, false);
  for (const auto& [j, k] : pattern.pairs) {
    partner_of1[j] = k;
    shared2[k] = true;
  }

  out.K = Matrix::Zero(pattern.n1 + pattern.n2, out.composite_dim());
  Index col = 0;
  for (Index j = 0; j < pattern.n1; ++j, ++col) {
    out.K(j, col) = 1.0;
    if (partner_of1[j] >= 0) {
      out.K(pattern.n1 + partner_of1[j], col) = 1.0;
      out.index_map.push_back({StateOrigin::Shared, j, partner_of1[j]});
    } else {
      out.index_map.push_back({StateOrigin::Subsystem1, j, -1});
    }
  }
  for (Index k = 0; k < pattern.n2; ++k) {
    if (shared2[k]) continue;
    out.K(pattern.n1 + k, col) = 1.0;
    out.index_map.push_back({StateOrigin::Subsystem2, -1, k});
    ++col;
  }
  return out;
}

CompositeSystem compose_open_loop(const LinearSystem& s1, const LinearSystem& s2,
                                  const CompositionPattern& pattern) {
  s1.validate();
  s2.validate();
  if (pattern.n1 != s1.states() || pattern.n2 != s2.states()) {
    mismatch("pattern is for " + std::to_string(pattern.n1) + "+" +
             std::to_string(pattern.n2) + " states, systems have " +
             std::to_string(s1.states()) + "+" + std::to_string(s2.states()));
  }
  CompositeSystem sys;
  sys.K = build_composition_matrix(pattern);
  sys.Abar = block_diag(s1.A, s2.A);
  sys.Bbar = block_diag(s1.B, s2.B);
  const Matrix& k = sys.K.K;
  sys.Acal = k.transpose() * sys.Abar * k;
  sys.Bcal = k.transpose() * sys.Bbar;
  sys.m1 = s1.inputs();
  sys.m2 = s2.inputs();
  return sys;
}

void validate_weights(const CostWeights& w, Index n, Index m) {
  if (w.Q.rows() != n || w.Q.cols() != n) {
    mismatch("Q must be " + std::to_string(n) + "x" + std::to_string(n) + ", got " + dims(w.Q));
  }
  if (w.R.rows() != m || w.R.cols() != m) {
    mismatch("R must be " + std::to_string(m) + "x" + std::to_string(m) + ", got " + dims(w.R));
  }
  if (!w.Q.allFinite() || !w.R.allFinite()) mismatch("weights contain non-finite entries");
  const Definiteness dq = definiteness(w.Q, kSymmetryTol, kPsdTol * (1.0 + max_abs(w.Q)));
  if (!dq.symmetric || !dq.psd) {
    throw Error(ErrorCode::WeightNotPSD, "Q must be symmetric positive semidefinite");
  }
  const Definiteness dr = definiteness(w.R, kSymmetryTol, 0.0);
  if (!dr.symmetric || !dr.pd) {
    throw Error(ErrorCode::WeightNotPD, "R must be symmetric positive definite");
  }
}

CompositeCost compose_cost(const CostWeights& w1, const CostWeights& w2,
                           const CompositionMatrix& k) {
  if (w1.Q.rows() != k.n1 || w2.Q.rows() != k.n2) {
    mismatch("state weights do not match the composition matrix");
  }
  validate_weights(w1, k.n1, w1.R.rows());
  validate_weights(w2, k.n2, w2.R.rows());
  CompositeCost out;
  out.Qcal = symmetrize(k.K.transpose() * block_diag(w1.Q, w2.Q) * k.K);
  out.Rbar = block_diag(w1.R, w2.R);
  return out;
}

Matrix compose_gains(const Matrix& f1, const Matrix& f2, const CompositionMatrix& k) {
  if (f1.cols() != k.n1 || f2.cols() != k.n2) {
    mismatch("gains are " + dims(f1) + " and " + dims(f2) + ", composition expects " +
             std::to_string(k.n1) + " and " + std::to_string(k.n2) + " columns");
  }
  return block_diag(f1, f2) * k.K;
}

Matrix closed_loop_matrix(const CompositeSystem& sys, const Matrix& f) {
  if (f.rows() != sys.inputs() || f.cols() != sys.states()) {
    mismatch("composite gain must be " + std::to_string(sys.inputs()) + "x" +
             std::to_string(sys.states()) + ", got " + dims(f));
  }
  return sys.Acal + sys.Bcal * f;
}

}  // namespace rsmlqr
