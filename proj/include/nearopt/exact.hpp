#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "nearopt/binomial.hpp"
#include "nearopt/prescription.hpp"
#include "nearopt/rules.hpp"
#include "nearopt/trial.hpp"

namespace nearopt {

// ---------------------------------------------------------------------------
// Two-arm decision structures. Both rules partition the (m1, m2) lattice in a
// way that does not depend on the state of nature, so the partition is built
// once per design and every state evaluation is a single O(n) convolution.

// Empirical success: arm 2 wins strictly when m1/n1 < m2/n2, ties split.
// Boundaries are exact integer comparisons.
struct EsTwoArmThresholds {
  std::vector<int> lt;  // per m2: largest m1 with m1 n2 < m2 n1, or -1
  std::vector<int> eq;  // per m2: the m1 tied with m2, or -1

  static EsTwoArmThresholds build(const TrialDesign& design) {
    const std::int64_t n1 = design.size(0);
    const std::int64_t n2 = design.size(1);
    EsTwoArmThresholds out;
    out.lt.resize(static_cast<std::size_t>(n2) + 1);
    out.eq.resize(static_cast<std::size_t>(n2) + 1);
    for (std::int64_t m2 = 0; m2 <= n2; ++m2) {
      const std::int64_t q = m2 * n1;
      const bool exact = q % n2 == 0;
      out.lt[static_cast<std::size_t>(m2)] =
          static_cast<int>(exact ? q / n2 - 1 : q / n2);
      out.eq[static_cast<std::size_t>(m2)] = exact ? static_cast<int>(q / n2) : -1;
    }
    return out;
  }
};

// Hypothesis test: rejection region {(m1, m2) : tau > c}. For each m2 the
// region is expected to be a prefix in m1 (low standard-care success counts);
// this is verified cell by cell at build time and rows that fail the check
// fall back to explicit cell lists, so correctness never rests on the
// monotonicity assumption.
struct TestTwoArmRegion {
  std::vector<int> prefix;                // per m2: largest rejected m1, or -1
  std::vector<std::vector<int>> explicit_cells;  // per m2, only for irregular rows
  bool all_prefix = true;

  static TestTwoArmRegion build(const TrialDesign& design, const TestConfig& config) {
    const int n1 = design.size(0);
    const int n2 = design.size(1);
    const TestCountRule rule(design, config);
    TestTwoArmRegion out;
    out.prefix.assign(static_cast<std::size_t>(n2) + 1, -1);
    out.explicit_cells.resize(static_cast<std::size_t>(n2) + 1);
    int winners[2];
    int m[2];
    for (int m2 = 0; m2 <= n2; ++m2) {
      m[1] = m2;
      int last_reject = -1;
      bool prefix_ok = true;
      std::vector<int> cells;
      for (int m1 = 0; m1 <= n1; ++m1) {
        m[0] = m1;
        rule.winners(m, winners);
        const bool reject = winners[0] == 1;
        if (reject) {
          cells.push_back(m1);
          if (m1 != last_reject + 1) prefix_ok = false;
          last_reject = m1;
        }
      }
      if (prefix_ok) {
        out.prefix[static_cast<std::size_t>(m2)] = last_reject;
      } else {
        out.all_prefix = false;
        out.explicit_cells[static_cast<std::size_t>(m2)] = std::move(cells);
      }
    }
    return out;
  }
};

namespace detail {

// Weight of arm-2 success count m2 under the ES rule: probability over m1
// that arm 2 wins plus half the exact-tie mass.
inline void es_weights(const EsTwoArmThresholds& thresholds, const std::vector<double>& pmf1,
                       const std::vector<double>& cdf1, std::vector<double>& out) {
  out.resize(thresholds.lt.size());
  for (std::size_t m2 = 0; m2 < thresholds.lt.size(); ++m2) {
    const int lt = thresholds.lt[m2];
    const int eq = thresholds.eq[m2];
    double w = lt >= 0 ? cdf1[static_cast<std::size_t>(lt)] : 0.0;
    if (eq >= 0) w += 0.5 * pmf1[static_cast<std::size_t>(eq)];
    out[m2] = w;
  }
}

inline void test_weights(const TestTwoArmRegion& region, const std::vector<double>& pmf1,
                         const std::vector<double>& cdf1, std::vector<double>& out) {
  out.resize(region.prefix.size());
  for (std::size_t m2 = 0; m2 < region.prefix.size(); ++m2) {
    if (!region.explicit_cells[m2].empty()) {
      double w = 0.0;
      for (int m1 : region.explicit_cells[m2]) w += pmf1[static_cast<std::size_t>(m1)];
      out[m2] = w;
    } else {
      const int r = region.prefix[m2];
      out[m2] = r >= 0 ? cdf1[static_cast<std::size_t>(r)] : 0.0;
    }
  }
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline PrescriptionProbs two_arm_exact(double prob_new) {
  PrescriptionProbs out;
  out.method = PrescriptionProbs::Method::exact;
  out.probs = {1.0 - prob_new, prob_new};
  return out;
}

}  // namespace detail

// Exact E_s[delta] for the empirical success rule in a two-arm binary trial.
// One pass over the arm-2 counts against precomputed arm-1 pmf/cdf.
inline PrescriptionProbs exact_probs_two_arm_es(const TrialDesign& design,
                                                const BinaryState& state) {
  if (design.arms() != 2 || state.arms() != 2) {
    throw std::invalid_argument("exact_probs_two_arm_es: two-arm design required");
  }
  const auto thresholds = EsTwoArmThresholds::build(design);
  const auto pmf1 = binomial_pmf(design.size(0), state.success_probs[0]);
  const auto pmf2 = binomial_pmf(design.size(1), state.success_probs[1]);
  std::vector<double> cdf1, weights;
  inclusive_cdf(pmf1, cdf1);
  detail::es_weights(thresholds, pmf1, cdf1, weights);
  return detail::two_arm_exact(detail::dot(weights, pmf2));
}

// Exact E_s[delta] for the hypothesis-test rule in a two-arm binary trial.
inline PrescriptionProbs exact_probs_two_arm_test(const TrialDesign& design,
                                                  const BinaryState& state,
                                                  const TestConfig& config) {
  if (design.arms() != 2 || state.arms() != 2) {
    throw std::invalid_argument("exact_probs_two_arm_test: two-arm design required");
  }
  const auto region = TestTwoArmRegion::build(design, config);
  const auto pmf1 = binomial_pmf(design.size(0), state.success_probs[0]);
  const auto pmf2 = binomial_pmf(design.size(1), state.success_probs[1]);
  std::vector<double> cdf1, weights;
  inclusive_cdf(pmf1, cdf1);
  detail::test_weights(region, pmf1, cdf1, weights);
  return detail::two_arm_exact(detail::dot(weights, pmf2));
}

// Brute-force oracle: exact E_s[delta] for any rule and any number of arms by
// enumerating the full product sample space. Feasible only while the product
// of (n_t + 1) stays within the cell budget.
inline PrescriptionProbs enumerate_probs_exact(
    const std::function<AllocationDist(const SampleCounts&)>& rule, const TrialDesign& design,
    const BinaryState& state, std::uint64_t cell_budget = 10000000) {
  if (state.arms() != design.arms()) {
    throw std::invalid_argument("enumerate_probs_exact: state and design arm counts differ");
  }
  std::uint64_t cells = 1;
  for (int t = 0; t < design.arms(); ++t) {
    const std::uint64_t width = static_cast<std::uint64_t>(design.size(t)) + 1;
    if (cells > cell_budget / width) {
      throw BudgetExceeded("enumerate_probs_exact: sample space exceeds the cell budget");
    }
    cells *= width;
  }
  std::vector<std::vector<double>> pmf(static_cast<std::size_t>(design.arms()));
  for (int t = 0; t < design.arms(); ++t) {
    binomial_pmf(design.size(t), state.success_probs[static_cast<std::size_t>(t)],
                 pmf[static_cast<std::size_t>(t)]);
  }
  std::vector<int> m(static_cast<std::size_t>(design.arms()), 0);
  std::vector<double> probs(static_cast<std::size_t>(design.arms()), 0.0);
  for (std::uint64_t cell = 0; cell < cells; ++cell) {
    double mass = 1.0;
    for (int t = 0; t < design.arms(); ++t) {
      mass *= pmf[static_cast<std::size_t>(t)][static_cast<std::size_t>(m[static_cast<std::size_t>(t)])];
    }
    if (mass > 0.0) {
      const auto alloc = rule(SampleCounts::binary(design, m));
      const double share = mass / static_cast<double>(alloc.winners.size());
      for (int w : alloc.winners) probs[static_cast<std::size_t>(w)] += share;
    }
    for (int t = design.arms() - 1; t >= 0; --t) {
      auto& v = m[static_cast<std::size_t>(t)];
      if (++v <= design.size(t)) break;
      v = 0;
    }
  }
  PrescriptionProbs out;
  out.method = PrescriptionProbs::Method::exact;
  out.probs = std::move(probs);
  return out;
}

// Exact E_s[delta] for the empirical success rule with bivariate outcomes in
// a two-arm trial: enumerate each arm's multinomial cell-count space, rank
// the exact rational welfare means, and convolve with tie-splitting.
inline PrescriptionProbs exact_probs_two_arm_bivariate_es(const TrialDesign& design,
                                                          const BivariateState& state,
                                                          std::uint64_t composition_budget =
                                                              10000000) {
  if (design.arms() != 2 || state.arms() != 2) {
    throw std::invalid_argument("exact_probs_two_arm_bivariate_es: two-arm design required");
  }
  const auto compositions = [](int n) {
    return static_cast<std::uint64_t>(n + 1) * static_cast<std::uint64_t>(n + 2) *
           static_cast<std::uint64_t>(n + 3) / 6;
  };
  if (compositions(design.size(0)) + compositions(design.size(1)) > composition_budget) {
    throw BudgetExceeded(
        "exact_probs_two_arm_bivariate_es: composition space exceeds the budget; "
        "use Monte Carlo evaluation instead");
  }
  const auto welfare = WelfareSpec::bivariate_weighted(state.harm);
  const auto [weights, den] = welfare.integer_weights();
  (void)den;

  struct Outcome {
    __int128 key;  // welfare total scaled for cross-arm comparison
    double prob;
  };
  // Enumerates all 4-cell compositions of n with their multinomial mass and
  // the welfare total scaled by the opposite arm size.
  const auto enumerate_arm = [&](int arm, std::int64_t other_n) {
    const int n = design.size(arm);
    const auto& p = state.cell_probs[static_cast<std::size_t>(arm)];
    double logp[4];
    for (int c = 0; c < 4; ++c) logp[c] = p[c] > 0.0 ? std::log(p[c]) : 0.0;
    std::vector<double> lg(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) lg[static_cast<std::size_t>(i)] = std::lgamma(i + 1.0);
    std::vector<Outcome> outcomes;
    outcomes.reserve(compositions(n));
    for (int c0 = 0; c0 <= n; ++c0) {
      for (int c1 = 0; c1 + c0 <= n; ++c1) {
        for (int c2 = 0; c2 + c1 + c0 <= n; ++c2) {
          const int c3 = n - c0 - c1 - c2;
          const int counts[4] = {c0, c1, c2, c3};
          bool impossible = false;
          double log_mass = lg[static_cast<std::size_t>(n)];
          std::int64_t score = 0;
          for (int c = 0; c < 4; ++c) {
            if (counts[c] > 0 && p[c] == 0.0) {
              impossible = true;
              break;
            }
            log_mass += counts[c] * logp[c] - lg[static_cast<std::size_t>(counts[c])];
            score += counts[c] * weights[static_cast<std::size_t>(c)];
          }
          if (impossible) continue;
          outcomes.push_back({static_cast<__int128>(score) * other_n, std::exp(log_mass)});
        }
      }
    }
    return outcomes;
  };

  auto arm1 = enumerate_arm(0, design.size(1));
  auto arm2 = enumerate_arm(1, design.size(0));
  std::sort(arm1.begin(), arm1.end(), [](const Outcome& a, const Outcome& b) {
    return a.key < b.key;
  });
  // Collapse arm 1 to unique keys with cumulative mass below each key.
  std::vector<__int128> keys;
  std::vector<double> mass_at, mass_below;
  double below = 0.0;
  for (std::size_t i = 0; i < arm1.size();) {
    std::size_t j = i;
    double mass = 0.0;
    while (j < arm1.size() && arm1[j].key == arm1[i].key) mass += arm1[j++].prob;
    keys.push_back(arm1[i].key);
    mass_below.push_back(below);
    mass_at.push_back(mass);
    below += mass;
    i = j;
  }
  double prob_new = 0.0;
  for (const Outcome& o : arm2) {
    const auto it = std::lower_bound(keys.begin(), keys.end(), o.key);
    const std::size_t idx = static_cast<std::size_t>(it - keys.begin());
    double w = idx < keys.size() ? mass_below[idx] : below;
    if (idx < keys.size() && keys[idx] == o.key) w += 0.5 * mass_at[idx];
    prob_new += o.prob * w;
  }
  return detail::two_arm_exact(prob_new);
}

}  // namespace nearopt
