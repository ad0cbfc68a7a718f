#pragma once

#include <array>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nearopt/rational.hpp"

namespace nearopt {

// Randomized trial design: one sample size per arm. Arm 0 is standard care by
// convention; hypothesis-test rules compare every other arm against it.
class TrialDesign {
 public:
  TrialDesign(std::vector<int> arm_sizes, std::vector<std::string> labels = {})
      : arm_sizes_(std::move(arm_sizes)), labels_(std::move(labels)) {
    if (arm_sizes_.size() < 2) {
      throw std::invalid_argument("TrialDesign: need at least two arms");
    }
    for (int n : arm_sizes_) {
      if (n < 1) throw std::invalid_argument("TrialDesign: every arm needs at least one subject");
    }
    if (!labels_.empty() && labels_.size() != arm_sizes_.size()) {
      throw std::invalid_argument("TrialDesign: label count does not match arm count");
    }
    total_ = std::accumulate(arm_sizes_.begin(), arm_sizes_.end(), 0);
  }

  int arms() const { return static_cast<int>(arm_sizes_.size()); }
  int size(int arm) const { return arm_sizes_[static_cast<std::size_t>(arm)]; }
  int total() const { return total_; }
  const std::vector<int>& arm_sizes() const { return arm_sizes_; }

  std::string label(int arm) const {
    if (!labels_.empty()) return labels_[static_cast<std::size_t>(arm)];
    if (arm == 0) return "standard care";
    return std::string("treatment ") + static_cast<char>('A' + arm - 1);
  }

  bool equal_new_arm_sizes() const {
    for (int t = 2; t < arms(); ++t) {
      if (size(t) != size(1)) return false;
    }
    return true;
  }

 private:
  std::vector<int> arm_sizes_;
  std::vector<std::string> labels_;
  int total_;
};

inline TrialDesign make_design(std::vector<int> arm_sizes, std::vector<std::string> labels = {}) {
  return TrialDesign(std::move(arm_sizes), std::move(labels));
}

// State of nature for binary outcomes: per-arm probability of the good
// outcome. The engine always works in higher-is-better orientation.
struct BinaryState {
  std::vector<double> success_probs;

  explicit BinaryState(std::vector<double> probs) : success_probs(std::move(probs)) {
    for (double p : success_probs) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("BinaryState: probability outside [0,1]");
      }
    }
  }

  int arms() const { return static_cast<int>(success_probs.size()); }
};

// Mortality rates are the user-facing orientation; conversion happens once at
// the boundary so everything downstream maximizes welfare.
inline BinaryState mortality_to_state(const std::vector<double>& mortality_rates) {
  std::vector<double> success(mortality_rates.size());
  for (std::size_t t = 0; t < mortality_rates.size(); ++t) {
    const double m = mortality_rates[t];
    if (!(m >= 0.0 && m <= 1.0)) {
      throw std::invalid_argument("mortality_to_state: rate outside [0,1]");
    }
    success[t] = 1.0 - m;
  }
  return BinaryState(std::move(success));
}

// Joint distribution of (primary, side effect) outcomes, both binary.
// Cell index = 2*y_p + y_se: 0 -> (0,0), 1 -> (0,1), 2 -> (1,0), 3 -> (1,1).
struct BivariateState {
  static constexpr double kCellSumTolerance = 1e-12;

  std::vector<std::array<double, 4>> cell_probs;  // one entry per arm
  Rational harm{0, 1};

  BivariateState(std::vector<std::array<double, 4>> cells, Rational h)
      : cell_probs(std::move(cells)), harm(h) {
    if (harm.num < 0) throw std::invalid_argument("BivariateState: harm must be >= 0");
    for (const auto& arm : cell_probs) {
      double sum = 0.0;
      for (double c : arm) {
        if (!(c >= 0.0)) throw std::invalid_argument("BivariateState: negative cell probability");
        sum += c;
      }
      if (std::abs(sum - 1.0) > kCellSumTolerance) {
        throw std::invalid_argument(
            "BivariateState: cell probabilities of an arm do not sum to 1; "
            "renormalize explicitly if the input is only approximately scaled");
      }
    }
  }

  int arms() const { return static_cast<int>(cell_probs.size()); }

  // Explicit opt-in; inputs are never silently rescaled.
  static BivariateState renormalized(std::vector<std::array<double, 4>> cells, Rational h) {
    for (auto& arm : cells) {
      double sum = 0.0;
      for (double c : arm) sum += c;
      if (!(sum > 0.0)) throw std::invalid_argument("BivariateState: arm has zero total mass");
      for (double& c : arm) c /= sum;
    }
    return BivariateState(std::move(cells), h);
  }
};

// Patient welfare as a function of the outcome category. Values are exact
// rationals so sample-mean ties can be detected exactly.
struct WelfareSpec {
  enum class Kind { binary_identity, bivariate_weighted };

  Kind kind = Kind::binary_identity;
  Rational harm{0, 1};

  static WelfareSpec binary_identity() { return WelfareSpec{Kind::binary_identity, Rational(0)}; }
  static WelfareSpec bivariate_weighted(Rational h) {
    if (h.num < 0) throw std::invalid_argument("WelfareSpec: harm must be >= 0");
    return WelfareSpec{Kind::bivariate_weighted, h};
  }

  int categories() const { return kind == Kind::binary_identity ? 2 : 4; }

  // Welfare of each outcome category, as exact rationals.
  std::vector<Rational> category_values() const {
    if (kind == Kind::binary_identity) return {Rational(0), Rational(1)};
    const Rational one(1);
    return {Rational(0), Rational(0) - harm, one, one - harm};
  }

  // Integer weights w_c with common denominator D such that the welfare of
  // category c equals w_c / D. Arm comparisons use these exactly.
  std::pair<std::vector<std::int64_t>, std::int64_t> integer_weights() const {
    const auto values = category_values();
    std::int64_t d = 1;
    for (const auto& v : values) d = std::lcm(d, v.den);
    std::vector<std::int64_t> w(values.size());
    for (std::size_t c = 0; c < values.size(); ++c) w[c] = values[c].num * (d / values[c].den);
    return {std::move(w), d};
  }
};

// Sufficient statistic of one realized trial: per-arm outcome category
// counts. Binary outcomes use categories {0 = failure, 1 = success}.
class SampleCounts {
 public:
  static SampleCounts binary(const TrialDesign& design, std::vector<int> successes) {
    if (static_cast<int>(successes.size()) != design.arms()) {
      throw std::invalid_argument("SampleCounts: success count per arm required");
    }
    std::vector<std::vector<int>> cells(successes.size());
    for (std::size_t t = 0; t < successes.size(); ++t) {
      const int n = design.size(static_cast<int>(t));
      const int m = successes[t];
      if (m < 0 || m > n) throw std::invalid_argument("SampleCounts: successes outside [0, n_t]");
      cells[t] = {n - m, m};
    }
    return SampleCounts(std::move(cells));
  }

  static SampleCounts categorical(const TrialDesign& design,
                                  std::vector<std::vector<int>> cells) {
    if (static_cast<int>(cells.size()) != design.arms()) {
      throw std::invalid_argument("SampleCounts: one cell-count vector per arm required");
    }
    const std::size_t categories = cells.front().size();
    for (std::size_t t = 0; t < cells.size(); ++t) {
      if (cells[t].size() != categories) {
        throw std::invalid_argument("SampleCounts: ragged category counts");
      }
      int sum = 0;
      for (int c : cells[t]) {
        if (c < 0) throw std::invalid_argument("SampleCounts: negative count");
        sum += c;
      }
      if (sum != design.size(static_cast<int>(t))) {
        throw std::invalid_argument("SampleCounts: counts of an arm do not sum to n_t");
      }
    }
    return SampleCounts(std::move(cells));
  }

  int arms() const { return static_cast<int>(cells_.size()); }
  int categories() const { return static_cast<int>(cells_.front().size()); }
  const std::vector<int>& counts(int arm) const { return cells_[static_cast<std::size_t>(arm)]; }

  int successes(int arm) const {
    if (categories() != 2) throw std::logic_error("SampleCounts: not a binary sample");
    return cells_[static_cast<std::size_t>(arm)][1];
  }

 private:
  explicit SampleCounts(std::vector<std::vector<int>> cells) : cells_(std::move(cells)) {}

  std::vector<std::vector<int>> cells_;
};

// Exact integer welfare totals (scaled by the common denominator D) per arm.
inline std::vector<std::int64_t> welfare_scores(const SampleCounts& sample,
                                                const WelfareSpec& welfare) {
  if (sample.categories() != welfare.categories()) {
    throw std::invalid_argument("welfare_scores: sample and welfare variants do not match");
  }
  const auto [weights, d] = welfare.integer_weights();
  (void)d;
  std::vector<std::int64_t> scores(static_cast<std::size_t>(sample.arms()), 0);
  for (int t = 0; t < sample.arms(); ++t) {
    const auto& counts = sample.counts(t);
    std::int64_t s = 0;
    for (std::size_t c = 0; c < counts.size(); ++c) s += counts[c] * weights[c];
    scores[static_cast<std::size_t>(t)] = s;
  }
  return scores;
}

inline std::vector<double> mean_welfare(const BinaryState& state, const WelfareSpec& welfare) {
  if (welfare.kind != WelfareSpec::Kind::binary_identity) {
    throw std::invalid_argument("mean_welfare: binary state requires binary-identity welfare");
  }
  return state.success_probs;
}

inline std::vector<double> mean_welfare(const BivariateState& state, const WelfareSpec& welfare) {
  if (welfare.kind != WelfareSpec::Kind::bivariate_weighted || !(welfare.harm == state.harm)) {
    throw std::invalid_argument("mean_welfare: state and welfare variants do not match");
  }
  const double h = state.harm.value();
  std::vector<double> mu(static_cast<std::size_t>(state.arms()));
  for (int t = 0; t < state.arms(); ++t) {
    const auto& cells = state.cell_probs[static_cast<std::size_t>(t)];
    mu[static_cast<std::size_t>(t)] = (cells[2] + cells[3]) - h * (cells[1] + cells[3]);
  }
  return mu;
}

// Observed mean welfare per arm.
inline std::vector<double> sample_welfare_means(const SampleCounts& sample,
                                                const TrialDesign& design,
                                                const WelfareSpec& welfare) {
  if (sample.arms() != design.arms()) {
    throw std::invalid_argument("sample_welfare_means: sample and design arm counts differ");
  }
  const auto scores = welfare_scores(sample, welfare);
  const auto [weights, d] = welfare.integer_weights();
  (void)weights;
  std::vector<double> means(scores.size());
  for (std::size_t t = 0; t < scores.size(); ++t) {
    means[t] = static_cast<double>(scores[t]) /
               (static_cast<double>(d) * design.size(static_cast<int>(t)));
  }
  return means;
}

}  // namespace nearopt
