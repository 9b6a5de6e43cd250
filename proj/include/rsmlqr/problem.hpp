#pragma once

#include "rsmlqr/rsm.hpp"

namespace rsmlqr {

/// Two subsystems with their LQR weights and the pattern that glues them.
struct Problem {
  LinearSystem s1;
  LinearSystem s2;
  CostWeights w1;
  CostWeights w2;
  CompositionPattern pattern;
};

}  // namespace rsmlqr
