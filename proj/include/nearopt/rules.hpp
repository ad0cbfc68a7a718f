#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "nearopt/critical_values.hpp"
#include "nearopt/rational.hpp"
#include "nearopt/trial.hpp"

namespace nearopt {

// Treatment allocation produced by a decision rule for one sample: equal mass
// on each winning arm. Stored as the winner set so the distribution is exact.
struct AllocationDist {
  int arms = 0;
  std::vector<int> winners;  // sorted, nonempty

  Rational prob_exact(int t) const {
    const bool in = std::binary_search(winners.begin(), winners.end(), t);
    return in ? Rational(1, static_cast<std::int64_t>(winners.size())) : Rational(0);
  }

  std::vector<double> probs() const {
    std::vector<double> p(static_cast<std::size_t>(arms), 0.0);
    const double share = 1.0 / static_cast<double>(winners.size());
    for (int t : winners) p[static_cast<std::size_t>(t)] = share;
    return p;
  }
};

namespace detail {

// Arms attaining max_t score_t / n_t, compared by exact integer cross
// products. Scores may be welfare totals scaled by a common denominator.
inline std::vector<int> ratio_argmax(const std::vector<std::int64_t>& scores,
                                     const std::vector<int>& sizes) {
  std::vector<int> best{0};
  for (int t = 1; t < static_cast<int>(scores.size()); ++t) {
    const auto lhs = static_cast<__int128>(scores[static_cast<std::size_t>(t)]) *
                     sizes[static_cast<std::size_t>(best.front())];
    const auto rhs = static_cast<__int128>(scores[static_cast<std::size_t>(best.front())]) *
                     sizes[static_cast<std::size_t>(t)];
    if (lhs > rhs) {
      best.assign(1, t);
    } else if (lhs == rhs) {
      best.push_back(t);
    }
  }
  return best;
}

}  // namespace detail

// Empirical success rule: prescribe the arm with the largest observed mean
// welfare, splitting ties equally. Tie detection is exact.
inline AllocationDist empirical_success(const SampleCounts& sample, const TrialDesign& design,
                                        const WelfareSpec& welfare) {
  if (sample.arms() != design.arms()) {
    throw std::invalid_argument("empirical_success: sample and design arm counts differ");
  }
  const auto scores = welfare_scores(sample, welfare);
  return AllocationDist{design.arms(), detail::ratio_argmax(scores, design.arm_sizes())};
}

// Pooled estimator of common variance with divisor N - L. For binary outcomes
// the within-arm sum of squares is m_t (n_t - m_t) / n_t.
inline double pooled_variance(const SampleCounts& sample, const TrialDesign& design) {
  if (sample.categories() != 2) {
    throw std::invalid_argument("pooled_variance: binary outcomes required");
  }
  const int df = design.total() - design.arms();
  if (df < 1) throw std::invalid_argument("pooled_variance: N - L must be >= 1");
  double ss = 0.0;
  for (int t = 0; t < design.arms(); ++t) {
    const std::int64_t m = sample.successes(t);
    const std::int64_t n = design.size(t);
    ss += static_cast<double>(m * (n - m)) / static_cast<double>(n);
  }
  return ss / df;
}

// t-statistics comparing each arm t >= 2 with standard care. When the pooled
// variance degenerates to zero: tau = 0 on equal means, +/-inf otherwise.
inline std::vector<double> t_statistics(const SampleCounts& sample, const TrialDesign& design) {
  if (sample.categories() != 2) {
    throw std::invalid_argument("t_statistics: binary outcomes required");
  }
  const double inf = std::numeric_limits<double>::infinity();
  const double sigma2 = pooled_variance(sample, design);
  const double sigma = std::sqrt(sigma2);
  const std::int64_t m0 = sample.successes(0);
  const std::int64_t n0 = design.size(0);
  const double ybar0 = static_cast<double>(m0) / static_cast<double>(n0);
  std::vector<double> tau(static_cast<std::size_t>(design.arms() - 1));
  for (int t = 1; t < design.arms(); ++t) {
    const std::int64_t m = sample.successes(t);
    const std::int64_t n = design.size(t);
    const double d = static_cast<double>(m) / static_cast<double>(n) - ybar0;
    if (sigma2 == 0.0) {
      const std::int64_t cross = m * n0 - m0 * n;
      tau[static_cast<std::size_t>(t - 1)] = cross == 0 ? 0.0 : (cross > 0 ? inf : -inf);
    } else {
      tau[static_cast<std::size_t>(t - 1)] =
          d / (sigma * std::sqrt(1.0 / static_cast<double>(n) + 1.0 / static_cast<double>(n0)));
    }
  }
  return tau;
}

// Critical-value configuration for hypothesis-test rules. df is N - L, the
// divisor of the pooled variance estimator; L = 2 uses Student's t and L > 2
// the two-sided Dunnett value for the design's contrast correlations.
struct TestConfig {
  double alpha = 0.05;
  int df = 0;
  int comparisons = 0;
  double correlation = 0.0;
  double critical_value = 0.0;

  static TestConfig for_design(const TrialDesign& design, double alpha = 0.05) {
    TestConfig config;
    config.alpha = alpha;
    config.df = design.total() - design.arms();
    if (config.df < 1) throw std::invalid_argument("TestConfig: N - L must be >= 1");
    config.comparisons = design.arms() - 1;
    if (design.arms() == 2) {
      config.correlation =
          static_cast<double>(design.size(1)) / (design.size(1) + design.size(0));
      config.critical_value = student_t_critical(alpha, config.df);
    } else {
      if (!design.equal_new_arm_sizes()) {
        throw std::invalid_argument(
            "TestConfig: multi-arm tests require equal sample sizes in all non-control arms");
      }
      config.correlation =
          static_cast<double>(design.size(1)) / (design.size(1) + design.size(0));
      const std::vector<double> rho(static_cast<std::size_t>(config.comparisons),
                                    config.correlation);
      config.critical_value = dunnett_critical(alpha, config.comparisons, rho, config.df);
    }
    return config;
  }
};

// Hypothesis-test rule: standard care unless some new arm is significantly
// better (tau_t > c, positive direction only); then the significant arm with
// the largest observed mean, ties split equally.
inline AllocationDist hypothesis_test_rule(const SampleCounts& sample, const TrialDesign& design,
                                           const TestConfig& config) {
  if (sample.categories() != 2) {
    throw std::invalid_argument("hypothesis_test_rule: binary outcomes required");
  }
  const auto tau = t_statistics(sample, design);
  std::vector<std::int64_t> scores;
  std::vector<int> sizes;
  std::vector<int> ids;
  for (int t = 1; t < design.arms(); ++t) {
    if (tau[static_cast<std::size_t>(t - 1)] > config.critical_value) {
      scores.push_back(sample.successes(t));
      sizes.push_back(design.size(t));
      ids.push_back(t);
    }
  }
  if (ids.empty()) return AllocationDist{design.arms(), {0}};
  std::vector<int> winners;
  for (int local : detail::ratio_argmax(scores, sizes)) {
    winners.push_back(ids[static_cast<std::size_t>(local)]);
  }
  std::sort(winners.begin(), winners.end());
  return AllocationDist{design.arms(), std::move(winners)};
}

// ---------------------------------------------------------------------------
// Count-level rule evaluators for the exact and Monte Carlo engines. These
// decide winner sets straight from per-arm success counts with no allocation,
// built once per (design, config).

class EsCountRule {
 public:
  explicit EsCountRule(const TrialDesign& design) : n_(design.arm_sizes()) {}

  int arms() const { return static_cast<int>(n_.size()); }

  // Writes winning arm indices to out, returns their count.
  int winners(const int* m, int* out) const {
    int k = 1;
    out[0] = 0;
    for (int t = 1; t < arms(); ++t) {
      const std::int64_t lhs = static_cast<std::int64_t>(m[t]) * n_[static_cast<std::size_t>(out[0])];
      const std::int64_t rhs = static_cast<std::int64_t>(m[out[0]]) * n_[static_cast<std::size_t>(t)];
      if (lhs > rhs) {
        out[0] = t;
        k = 1;
      } else if (lhs == rhs) {
        out[k++] = t;
      }
    }
    return k;
  }

 private:
  std::vector<int> n_;
};

class TestCountRule {
 public:
  TestCountRule(const TrialDesign& design, const TestConfig& config) : n_(design.arm_sizes()) {
    inv_n_.resize(n_.size());
    c2s_.resize(n_.size());
    const double c2 = config.critical_value * config.critical_value;
    for (std::size_t t = 0; t < n_.size(); ++t) {
      inv_n_[t] = 1.0 / static_cast<double>(n_[t]);
      c2s_[t] = c2 * (inv_n_[t] + inv_n_[0]) / static_cast<double>(config.df);
    }
  }

  int arms() const { return static_cast<int>(n_.size()); }

  int winners(const int* m, int* out) const {
    // Pooled within-arm variation; exact zero detection via integers.
    double ss = 0.0;
    std::int64_t nonzero = 0;
    for (int t = 0; t < arms(); ++t) {
      const std::int64_t v =
          static_cast<std::int64_t>(m[t]) * (n_[static_cast<std::size_t>(t)] - m[t]);
      nonzero |= v;
      ss += static_cast<double>(v) * inv_n_[static_cast<std::size_t>(t)];
    }
    const double ybar0 = m[0] * inv_n_[0];
    int k = 0;
    for (int t = 1; t < arms(); ++t) {
      // Degenerate variance: tau is +/-inf by the sign of the exact mean
      // difference, so compare integer cross products — the rounded products
      // m * (1/n) can split true ties. With positive variance the magnitude
      // test already dominates any rounding in d.
      bool significant;
      if (nonzero == 0) {
        significant = static_cast<std::int64_t>(m[t]) * n_[0] >
                      static_cast<std::int64_t>(m[0]) * n_[static_cast<std::size_t>(t)];
      } else {
        const double d = m[t] * inv_n_[static_cast<std::size_t>(t)] - ybar0;
        significant = d > 0.0 && d * d > c2s_[static_cast<std::size_t>(t)] * ss;
      }
      if (!significant) continue;
      if (k == 0) {
        out[k++] = t;
        continue;
      }
      const std::int64_t lhs =
          static_cast<std::int64_t>(m[t]) * n_[static_cast<std::size_t>(out[0])];
      const std::int64_t rhs =
          static_cast<std::int64_t>(m[out[0]]) * n_[static_cast<std::size_t>(t)];
      if (lhs > rhs) {
        out[0] = t;
        k = 1;
      } else if (lhs == rhs) {
        out[k++] = t;
      }
    }
    if (k == 0) {
      out[0] = 0;
      k = 1;
    }
    return k;
  }

 private:
  std::vector<int> n_;
  std::vector<double> inv_n_;
  std::vector<double> c2s_;
};

enum class RuleKind { empirical_success, hypothesis_test };

inline const char* rule_name(RuleKind kind) {
  return kind == RuleKind::empirical_success ? "empirical-success" : "hypothesis-test";
}

}  // namespace nearopt
