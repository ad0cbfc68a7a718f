#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace nearopt {

// Inputs of the closed-form large-deviations bounds on the near-optimality of
// the empirical success rule: balanced design, n subjects in each of L arms,
// outcomes with welfare range V.
struct BoundInput {
  double outcome_range = 1.0;  // V
  int arms = 2;                // L
  int per_arm = 1;             // n

  void validate() const {
    if (!(outcome_range >= 0.0)) throw std::invalid_argument("BoundInput: V must be >= 0");
    if (arms < 2) throw std::invalid_argument("BoundInput: L must be >= 2");
    if (per_arm < 1) throw std::invalid_argument("BoundInput: n must be >= 1");
  }
};

// (2e)^(-1/2) V (L-1) n^(-1/2)
inline double bound_prop1(const BoundInput& input) {
  input.validate();
  return input.outcome_range * (input.arms - 1) /
         std::sqrt(2.0 * M_E * static_cast<double>(input.per_arm));
}

// V sqrt(ln L) n^(-1/2)
inline double bound_prop2(const BoundInput& input) {
  input.validate();
  return input.outcome_range * std::sqrt(std::log(static_cast<double>(input.arms)) /
                                         static_cast<double>(input.per_arm));
}

struct BestBound {
  double value = 0.0;
  const char* which = "";  // "prop1" or "prop2"
  double prop1 = 0.0;
  double prop2 = 0.0;
};

inline BestBound bound_best(const BoundInput& input) {
  BestBound out;
  out.prop1 = bound_prop1(input);
  out.prop2 = bound_prop2(input);
  if (out.prop1 <= out.prop2) {
    out.value = out.prop1;
    out.which = "prop1";
  } else {
    out.value = out.prop2;
    out.which = "prop2";
  }
  return out;
}

}  // namespace nearopt
