#pragma once

// Resource-sharing composition of two linear subsystems.
//
// Two subsystems x1' = A1 x1 + B1 u1 and x2' = A2 x2 + B2 u2 are glued along
// k shared states. The 0/1 composition matrix K maps the composite state
// onto the stacked subsystem states (duplicating shared entries); K^T sums the
// subsystem dynamics back onto the composite state. Control inputs are never
// shared.

#include <string>
#include <utility>
#include <vector>

#include "rsmlqr/matkit.hpp"

namespace rsmlqr {

using Index = Eigen::Index;

struct LinearSystem {
  std::string name;
  Matrix A;
  Matrix B;

  Index states() const { return A.rows(); }
  Index inputs() const { return B.cols(); }
  /// Throws DimensionMismatch unless A is square, B has A's row count and at
  /// least one column, and every entry is finite.
  void validate() const;
};

struct CostWeights {
  Matrix Q;  // state penalty, symmetric PSD
  Matrix R;  // input penalty, symmetric PD
};

/// Zero-based (subsystem-1 state, subsystem-2 state) identifications.
struct CompositionPattern {
  Index n1 = 0;
  Index n2 = 0;
  std::vector<std::pair<Index, Index>> pairs;

  Index shared() const { return static_cast<Index>(pairs.size()); }
  /// Throws IndexOutOfRange or DuplicateSharedIndex.
  void validate() const;
};

enum class StateOrigin { Subsystem1, Subsystem2, Shared };

/// Where a composite state comes from; -1 marks "not present".
struct CompositeIndex {
  StateOrigin origin = StateOrigin::Subsystem1;
  Index sub1 = -1;
  Index sub2 = -1;
};

struct CompositionMatrix {
  Matrix K;  // (n1+n2) x (n1+n2-k)
  std::vector<CompositeIndex> index_map;
  Index n1 = 0;
  Index n2 = 0;
  Index shared = 0;

  Index composite_dim() const { return n1 + n2 - shared; }
};

struct CompositeSystem {
  Matrix Acal;  // K^T Abar K
  Matrix Bcal;  // K^T Bbar
  Matrix Abar;  // blockdiag(A1, A2)
  Matrix Bbar;  // blockdiag(B1, B2)
  CompositionMatrix K;
  Index m1 = 0;
  Index m2 = 0;

  Index n1() const { return K.n1; }
  Index n2() const { return K.n2; }
  Index shared() const { return K.shared; }
  Index states() const { return K.composite_dim(); }
  Index inputs() const { return m1 + m2; }
};

struct CompositeCost {
  Matrix Qcal;  // K^T blockdiag(Q1, Q2) K
  Matrix Rbar;  // blockdiag(R1, R2)
};

/// Composite states are numbered by walking subsystem 1 in order (a shared
/// state takes its number here), followed by subsystem 2's non-shared states.
CompositionMatrix build_composition_matrix(const CompositionPattern& pattern);

CompositeSystem compose_open_loop(const LinearSystem& s1, const LinearSystem& s2,
                                  const CompositionPattern& pattern);

CompositeCost compose_cost(const CostWeights& w1, const CostWeights& w2,
                           const CompositionMatrix& k);

/// blockdiag(F1, F2) K. Gains follow the u = F x convention.
Matrix compose_gains(const Matrix& f1, const Matrix& f2, const CompositionMatrix& k);

/// Acal + Bcal F
Matrix closed_loop_matrix(const CompositeSystem& sys, const Matrix& f);

/// Throws WeightNotPSD / WeightNotPD / DimensionMismatch.
void validate_weights(const CostWeights& w, Index n, Index m);

}  // namespace rsmlqr
