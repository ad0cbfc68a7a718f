#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "nearopt/exact.hpp"
#include "nearopt/mc.hpp"
#include "nearopt/parallel.hpp"
#include "nearopt/prescription.hpp"
#include "nearopt/rules.hpp"
#include "nearopt/trial.hpp"

namespace nearopt {

// ---------------------------------------------------------------------------
// Regret at one state of nature.

struct RegretReport {
  std::vector<double> mean_welfare;
  std::vector<double> per_arm_loss;  // max_t mu_t - mu_t
  double expected_loss = 0.0;
  PrescriptionProbs probs;
};

inline RegretReport regret_at_state(PrescriptionProbs probs, std::vector<double> means) {
  if (probs.arms() != static_cast<int>(means.size())) {
    throw std::invalid_argument("regret_at_state: probs and means arm counts differ");
  }
  RegretReport report;
  const double best = *std::max_element(means.begin(), means.end());
  report.per_arm_loss.resize(means.size());
  double loss = 0.0;
  for (std::size_t t = 0; t < means.size(); ++t) {
    report.per_arm_loss[t] = best - means[t];
    loss += report.per_arm_loss[t] * probs.probs[t];
  }
  report.expected_loss = std::max(0.0, loss);
  report.mean_welfare = std::move(means);
  report.probs = std::move(probs);
  return report;
}

inline RegretReport regret_at_state(PrescriptionProbs probs, const BinaryState& state) {
  return regret_at_state(std::move(probs), state.success_probs);
}

inline RegretReport regret_at_state(PrescriptionProbs probs, const BivariateState& state,
                                    const WelfareSpec& welfare) {
  return regret_at_state(std::move(probs), mean_welfare(state, welfare));
}

// ---------------------------------------------------------------------------
// State grids.

struct GridSpec {
  enum class Family {
    full_product,       // every arm on the point list
    control_vs_rest,    // p1 = a, all other arms = b
    control_best_rest,  // p1 = a, p2 = b, remaining arms = c
  };

  Family family = Family::full_product;
  std::vector<double> points;
  bool constrained = true;  // apply the family's search constraints (a > b; b > a, b > c)

  // k cell midpoints of (0,1): {0.5/k, 1.5/k, ...}.
  static std::vector<double> midpoints(int cells) {
    std::vector<double> p(static_cast<std::size_t>(cells));
    for (int i = 0; i < cells; ++i) p[static_cast<std::size_t>(i)] = (i + 0.5) / cells;
    return p;
  }

  // count evenly spaced values on [0, 1] including both endpoints.
  static std::vector<double> closed(int count) {
    if (count < 2) throw std::invalid_argument("GridSpec::closed: need at least two points");
    std::vector<double> p(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      p[static_cast<std::size_t>(i)] = static_cast<double>(i) / (count - 1);
    }
    return p;
  }

  static GridSpec two_arm_default() { return GridSpec{Family::full_product, midpoints(1000), true}; }
};

namespace detail {

inline std::uint64_t binomial_coefficient(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t result = 1;
  for (std::uint64_t i = 0; i < k; ++i) result = result * (n - i) / (i + 1);
  return result;
}

inline std::uint64_t multiset_count(int values, int slots) {
  return binomial_coefficient(static_cast<std::uint64_t>(values + slots - 1),
                              static_cast<std::uint64_t>(slots));
}

// index-th non-decreasing tuple of `slots` values from {0, ..., values-1}.
inline void unrank_multiset(std::uint64_t index, int values, int slots, std::vector<int>& out) {
  out.resize(static_cast<std::size_t>(slots));
  int low = 0;
  for (int pos = 0; pos < slots; ++pos) {
    for (int v = low; v < values; ++v) {
      const std::uint64_t block = multiset_count(values - v, slots - pos - 1);
      if (index < block) {
        out[static_cast<std::size_t>(pos)] = v;
        low = v;
        break;
      }
      index -= block;
    }
  }
}

inline std::uint64_t permutation_multiplicity(const std::vector<int>& sorted_values) {
  std::uint64_t numerator = 1;
  for (std::uint64_t i = 2; i <= sorted_values.size(); ++i) numerator *= i;
  std::uint64_t run = 1;
  for (std::size_t i = 1; i <= sorted_values.size(); ++i) {
    if (i < sorted_values.size() && sorted_values[i] == sorted_values[i - 1]) {
      ++run;
      continue;
    }
    for (std::uint64_t j = 2; j <= run; ++j) numerator /= j;
    run = 1;
  }
  return numerator;
}

}  // namespace detail

// Lazily indexable list of states for one (design, grid) pair. Full-product
// grids over designs whose non-control arms share a sample size are pruned to
// sorted new-arm profiles: those arms are exchangeable, so each sorted
// profile covers all its permutations (the multiplicity) without changing the
// maximum.
class FamilyStates {
 public:
  FamilyStates(const TrialDesign& design, const GridSpec& grid) : arms_(design.arms()), grid_(grid) {
    const int g = static_cast<int>(grid_.points.size());
    switch (grid_.family) {
      case GridSpec::Family::full_product:
        pruned_ = design.equal_new_arm_sizes();
        if (pruned_) {
          combos_ = detail::multiset_count(g, arms_ - 1);
          count_ = static_cast<std::uint64_t>(g) * combos_;
        } else {
          count_ = 1;
          for (int t = 0; t < arms_; ++t) count_ *= static_cast<std::uint64_t>(g);
        }
        break;
      case GridSpec::Family::control_vs_rest:
        for (int ia = 0; ia < g; ++ia) {
          for (int ib = 0; ib < g; ++ib) {
            if (grid_.constrained && !(grid_.points[static_cast<std::size_t>(ia)] >
                                       grid_.points[static_cast<std::size_t>(ib)])) {
              continue;
            }
            tuples_.push_back({ia, ib, 0});
          }
        }
        count_ = tuples_.size();
        break;
      case GridSpec::Family::control_best_rest:
        if (arms_ < 3) {
          throw std::invalid_argument("FamilyStates: control_best_rest needs at least 3 arms");
        }
        for (int ib = 0; ib < g; ++ib) {
          for (int ia = 0; ia < g; ++ia) {
            for (int ic = 0; ic < g; ++ic) {
              if (grid_.constrained) {
                const double a = grid_.points[static_cast<std::size_t>(ia)];
                const double b = grid_.points[static_cast<std::size_t>(ib)];
                const double c = grid_.points[static_cast<std::size_t>(ic)];
                if (!(b > a && b > c)) continue;
              }
              tuples_.push_back({ia, ib, ic});
            }
          }
        }
        count_ = tuples_.size();
        break;
    }
  }

  std::uint64_t count() const { return count_; }

  void state(std::uint64_t index, std::vector<double>& out) const {
    out.resize(static_cast<std::size_t>(arms_));
    const auto& pts = grid_.points;
    switch (grid_.family) {
      case GridSpec::Family::full_product:
        if (pruned_) {
          out[0] = pts[static_cast<std::size_t>(index / combos_)];
          std::vector<int> profile;
          detail::unrank_multiset(index % combos_, static_cast<int>(pts.size()), arms_ - 1,
                                  profile);
          for (int t = 1; t < arms_; ++t) {
            out[static_cast<std::size_t>(t)] = pts[static_cast<std::size_t>(profile[static_cast<std::size_t>(t - 1)])];
          }
        } else {
          std::uint64_t rest = index;
          for (int t = arms_ - 1; t >= 0; --t) {
            out[static_cast<std::size_t>(t)] = pts[static_cast<std::size_t>(rest % pts.size())];
            rest /= pts.size();
          }
        }
        break;
      case GridSpec::Family::control_vs_rest: {
        const auto& tup = tuples_[static_cast<std::size_t>(index)];
        out[0] = pts[static_cast<std::size_t>(tup[0])];
        for (int t = 1; t < arms_; ++t) out[static_cast<std::size_t>(t)] = pts[static_cast<std::size_t>(tup[1])];
        break;
      }
      case GridSpec::Family::control_best_rest: {
        const auto& tup = tuples_[static_cast<std::size_t>(index)];
        out[0] = pts[static_cast<std::size_t>(tup[0])];
        out[1] = pts[static_cast<std::size_t>(tup[1])];
        for (int t = 2; t < arms_; ++t) out[static_cast<std::size_t>(t)] = pts[static_cast<std::size_t>(tup[2])];
        break;
      }
    }
  }

  std::uint64_t multiplicity(std::uint64_t index) const {
    if (grid_.family != GridSpec::Family::full_product || !pruned_) return 1;
    std::vector<int> profile;
    detail::unrank_multiset(index % combos_, static_cast<int>(grid_.points.size()), arms_ - 1,
                            profile);
    return detail::permutation_multiplicity(profile);
  }

 private:
  int arms_;
  GridSpec grid_;
  bool pruned_ = false;
  std::uint64_t combos_ = 0;
  std::uint64_t count_ = 0;
  std::vector<std::array<int, 3>> tuples_;
};

// ---------------------------------------------------------------------------
// Search results.

struct EvaluatedState {
  std::vector<double> state;  // success probabilities
  double regret = 0.0;
  std::vector<double> probs;  // prescription probabilities
};

struct StageDiagnostics {
  std::string name;
  std::uint64_t states = 0;
  std::uint64_t n_sims_per_state = 0;  // 0 for exact evaluation
  double best_regret = 0.0;
  double seconds = 0.0;
};

struct MaxRegretResult {
  double value = 0.0;
  EvaluatedState argmax;
  std::vector<EvaluatedState> top;  // descending regret
  std::string method;
  std::vector<StageDiagnostics> stages;
};

namespace detail {

// Deterministic "better" order: higher regret first, then lexicographically
// smaller state, so reductions do not depend on evaluation order.
inline bool state_better(double regret_a, const std::vector<double>& state_a, double regret_b,
                         const std::vector<double>& state_b) {
  if (regret_a != regret_b) return regret_a > regret_b;
  return state_a < state_b;
}

struct TopK {
  std::size_t limit;
  std::vector<EvaluatedState> items;  // kept sorted best-first

  explicit TopK(std::size_t k) : limit(k) {}

  void offer(EvaluatedState entry) {
    if (items.size() >= limit &&
        !state_better(entry.regret, entry.state, items.back().regret, items.back().state)) {
      return;
    }
    // A state re-evaluated at a later refinement level replaces its earlier
    // entry instead of appearing twice.
    const auto dup = std::find_if(items.begin(), items.end(), [&](const EvaluatedState& e) {
      return e.state == entry.state;
    });
    if (dup != items.end()) {
      if (state_better(dup->regret, dup->state, entry.regret, entry.state)) return;
      items.erase(dup);
    }
    const auto pos = std::find_if(items.begin(), items.end(), [&](const EvaluatedState& e) {
      return state_better(entry.regret, entry.state, e.regret, e.state);
    });
    if (pos == items.end() && items.size() >= limit) return;
    items.insert(pos, std::move(entry));
    if (items.size() > limit) items.pop_back();
  }

  void merge(const TopK& other) {
    for (const auto& e : other.items) offer(e);
  }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Exact two-arm grid evaluation. The rule's decision structure on the
// (m1, m2) lattice is state independent, so a grid sweep reduces to one
// weight matrix (rows: standard-care success probabilities) times one pmf
// matrix (columns: new-arm success probabilities) — a dense matrix product.
class TwoArmGridEvaluator {
 public:
  TwoArmGridEvaluator(RuleKind kind, const TrialDesign& design, double alpha = 0.05)
      : design_(design), kind_(kind) {
    if (design.arms() != 2) {
      throw std::invalid_argument("TwoArmGridEvaluator: two-arm design required");
    }
    if (kind == RuleKind::empirical_success) {
      es_ = EsTwoArmThresholds::build(design);
    } else {
      config_ = TestConfig::for_design(design, alpha);
      region_ = TestTwoArmRegion::build(design, config_);
    }
  }

  const TestConfig& config() const { return config_; }

  double prob_new(const BinaryState& state) const {
    const auto pmf1 = binomial_pmf(design_.size(0), state.success_probs[0]);
    const auto pmf2 = binomial_pmf(design_.size(1), state.success_probs[1]);
    std::vector<double> cdf1, weights;
    inclusive_cdf(pmf1, cdf1);
    if (kind_ == RuleKind::empirical_success) {
      detail::es_weights(es_, pmf1, cdf1, weights);
    } else {
      detail::test_weights(region_, pmf1, cdf1, weights);
    }
    return detail::dot(weights, pmf2);
  }

  struct GridResult {
    double max_regret = 0.0;
    detail::TopK top{0};
    std::uint64_t states = 0;
  };

  GridResult evaluate(const std::vector<double>& p1s, const std::vector<double>& p2s, int top_k,
                      int threads) const {
    constexpr std::size_t kBlock = 256;
    const std::size_t rows = p1s.size();
    const std::size_t cols = p2s.size();
    const int n2 = design_.size(1);
    const std::size_t width = static_cast<std::size_t>(n2) + 1;
    const std::size_t row_blocks = (rows + kBlock - 1) / kBlock;

    GridResult result;
    result.top = detail::TopK(static_cast<std::size_t>(top_k));
    result.states = rows * cols;

    std::vector<detail::TopK> partial_tops(row_blocks, detail::TopK(static_cast<std::size_t>(top_k)));
    parallel_chunks(rows, kBlock, threads, [&](std::size_t block, std::size_t lo, std::size_t hi) {
      const std::size_t height = hi - lo;
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> weight_rows(
          height, width);
      std::vector<double> pmf1, cdf1, w;
      for (std::size_t i = lo; i < hi; ++i) {
        binomial_pmf(design_.size(0), p1s[i], pmf1);
        inclusive_cdf(pmf1, cdf1);
        if (kind_ == RuleKind::empirical_success) {
          detail::es_weights(es_, pmf1, cdf1, w);
        } else {
          detail::test_weights(region_, pmf1, cdf1, w);
        }
        for (std::size_t m2 = 0; m2 < width; ++m2) {
          weight_rows(static_cast<Eigen::Index>(i - lo), static_cast<Eigen::Index>(m2)) = w[m2];
        }
      }
      detail::TopK& top = partial_tops[block];
      Eigen::MatrixXd pmf_cols(width, std::min(kBlock, cols));
      std::vector<double> pmf2;
      for (std::size_t col_lo = 0; col_lo < cols; col_lo += kBlock) {
        const std::size_t col_hi = std::min(cols, col_lo + kBlock);
        const std::size_t block_cols = col_hi - col_lo;
        for (std::size_t j = col_lo; j < col_hi; ++j) {
          binomial_pmf(n2, p2s[j], pmf2);
          for (std::size_t m2 = 0; m2 < width; ++m2) {
            pmf_cols(static_cast<Eigen::Index>(m2), static_cast<Eigen::Index>(j - col_lo)) = pmf2[m2];
          }
        }
        const Eigen::MatrixXd block_probs =
            weight_rows * pmf_cols.leftCols(static_cast<Eigen::Index>(block_cols));
        for (std::size_t i = 0; i < height; ++i) {
          const double p1 = p1s[lo + i];
          for (std::size_t j = 0; j < block_cols; ++j) {
            const double p2 = p2s[col_lo + j];
            const double prob2 = block_probs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            const double diff = p2 - p1;
            const double regret = diff > 0.0 ? diff * (1.0 - prob2) : -diff * prob2;
            if (top.items.size() < top.limit || regret >= top.items.back().regret) {
              top.offer(EvaluatedState{{p1, p2}, std::max(0.0, regret), {1.0 - prob2, prob2}});
            }
          }
        }
      }
    });
    for (const auto& t : partial_tops) result.top.merge(t);
    if (!result.top.items.empty()) result.max_regret = result.top.items.front().regret;
    return result;
  }

 private:
  TrialDesign design_;
  RuleKind kind_;
  EsTwoArmThresholds es_;
  TestTwoArmRegion region_;
  TestConfig config_;
};

// ---------------------------------------------------------------------------
// Maximum regret over a grid of states.

struct ExactEvaluator {
  double alpha = 0.05;
};

struct McEvaluatorSpec {
  McOptions opts;
  double alpha = 0.05;
};

using Evaluator = std::variant<ExactEvaluator, McEvaluatorSpec>;

namespace detail {

inline MaxRegretResult finish_result(detail::TopK top, std::string method,
                                     std::vector<StageDiagnostics> stages) {
  MaxRegretResult result;
  result.top = std::move(top.items);
  if (!result.top.empty()) {
    result.argmax = result.top.front();
    result.value = result.argmax.regret;
  }
  result.method = std::move(method);
  result.stages = std::move(stages);
  return result;
}

}  // namespace detail

inline MaxRegretResult max_regret_grid(RuleKind kind, const TrialDesign& design,
                                       const GridSpec& grid, const Evaluator& evaluator,
                                       int top_k = 10, int threads = 0) {
  const auto start = std::chrono::steady_clock::now();
  if (const auto* exact = std::get_if<ExactEvaluator>(&evaluator)) {
    if (design.arms() != 2 || grid.family != GridSpec::Family::full_product) {
      throw std::invalid_argument(
          "max_regret_grid: exact evaluation covers two-arm full-product grids only; "
          "use the Monte Carlo evaluator");
    }
    const TwoArmGridEvaluator engine(kind, design, exact->alpha);
    auto grid_result = engine.evaluate(grid.points, grid.points, top_k, threads);
    StageDiagnostics stage{"exact-grid", grid_result.states, 0, grid_result.max_regret, 0.0};
    stage.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return detail::finish_result(std::move(grid_result.top), "exact-grid", {stage});
  }

  const auto& mc = std::get<McEvaluatorSpec>(evaluator);
  const FamilyStates states(design, grid);
  const std::uint64_t count = states.count();
  detail::TopK top(static_cast<std::size_t>(top_k));
  std::optional<TestConfig> config;
  if (kind == RuleKind::hypothesis_test) config = TestConfig::for_design(design, mc.alpha);
  const int workers = resolve_threads(mc.opts.threads > 0 ? mc.opts.threads : threads);
  auto merged = parallel_map_reduce(
      count, 8, workers, detail::TopK(static_cast<std::size_t>(top_k)),
      [&](std::uint64_t lo, std::uint64_t hi) {
        detail::TopK local(static_cast<std::size_t>(top_k));
        std::vector<double> probs_vec;
        for (std::uint64_t idx = lo; idx < hi; ++idx) {
          states.state(idx, probs_vec);
          const BinaryState state(probs_vec);
          McOptions opts = mc.opts;
          opts.stream = mc.opts.stream + idx;  // state index keys the RNG stream
          opts.threads = 1;
          PrescriptionProbs probs =
              kind == RuleKind::empirical_success
                  ? mc_probs(EsCountRule(design), design, state, opts)
                  : mc_probs(TestCountRule(design, *config), design, state, opts);
          auto report = regret_at_state(std::move(probs), state);
          local.offer(EvaluatedState{state.success_probs, report.expected_loss,
                                     std::move(report.probs.probs)});
        }
        return local;
      },
      [](detail::TopK acc, detail::TopK part) {
        acc.merge(part);
        return acc;
      });
  top.merge(merged);
  StageDiagnostics stage{"mc-grid", count, mc.opts.n_sims, 0.0, 0.0};
  if (!top.items.empty()) stage.best_regret = top.items.front().regret;
  stage.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return detail::finish_result(std::move(top), "mc-grid", {stage});
}

// ---------------------------------------------------------------------------
// Coarse-to-fine two-arm search: evaluate a strided sublattice, then refine
// windows around the best states down to the full lattice resolution. Must
// agree with the full grid wherever both are run.

struct RefineSchedule {
  std::vector<int> strides{10, 2, 1};
  int keep = 40;  // states carried between levels
};

inline MaxRegretResult coarse_to_fine_two_arm(RuleKind kind, const TrialDesign& design,
                                              const GridSpec& grid = GridSpec::two_arm_default(),
                                              const RefineSchedule& schedule = {},
                                              double alpha = 0.05, int threads = 0,
                                              int top_k = 10) {
  if (design.arms() != 2) {
    throw std::invalid_argument("coarse_to_fine_two_arm: two-arm design required");
  }
  if (schedule.strides.empty() || schedule.strides.back() != 1) {
    throw std::invalid_argument("coarse_to_fine_two_arm: schedule must end at stride 1");
  }
  for (std::size_t level = 1; level < schedule.strides.size(); ++level) {
    if (schedule.strides[level] <= 0 ||
        schedule.strides[level - 1] % schedule.strides[level] != 0) {
      throw std::invalid_argument(
          "coarse_to_fine_two_arm: each stride must divide the previous one");
    }
  }
  const TwoArmGridEvaluator engine(kind, design, alpha);
  const std::size_t g = grid.points.size();
  const auto index_of = [&](double value) {
    const auto it = std::lower_bound(grid.points.begin(), grid.points.end(), value - 1e-12);
    return static_cast<std::size_t>(it - grid.points.begin());
  };

  std::vector<StageDiagnostics> stages;
  detail::TopK global(static_cast<std::size_t>(std::max(top_k, schedule.keep)));
  std::vector<std::size_t> rows, cols;
  for (std::size_t level = 0; level < schedule.strides.size(); ++level) {
    const auto level_start = std::chrono::steady_clock::now();
    const int stride = schedule.strides[level];
    std::set<std::size_t> row_set, col_set;
    if (level == 0) {
      for (std::size_t i = 0; i < g; i += static_cast<std::size_t>(stride)) {
        row_set.insert(i);
        col_set.insert(i);
      }
      row_set.insert(g - 1);
      col_set.insert(g - 1);
    } else {
      const int window = schedule.strides[level - 1];
      for (const auto& entry : global.items) {
        const std::size_t ci = index_of(entry.state[0]);
        const std::size_t cj = index_of(entry.state[1]);
        for (int di = -window; di <= window; di += stride) {
          const std::ptrdiff_t i = static_cast<std::ptrdiff_t>(ci) + di;
          if (i >= 0 && i < static_cast<std::ptrdiff_t>(g)) row_set.insert(static_cast<std::size_t>(i));
        }
        for (int dj = -window; dj <= window; dj += stride) {
          const std::ptrdiff_t j = static_cast<std::ptrdiff_t>(cj) + dj;
          if (j >= 0 && j < static_cast<std::ptrdiff_t>(g)) col_set.insert(static_cast<std::size_t>(j));
        }
      }
    }
    rows.assign(row_set.begin(), row_set.end());
    cols.assign(col_set.begin(), col_set.end());
    std::vector<double> p1s, p2s;
    for (std::size_t i : rows) p1s.push_back(grid.points[i]);
    for (std::size_t j : cols) p2s.push_back(grid.points[j]);
    auto level_result = engine.evaluate(p1s, p2s, std::max(top_k, schedule.keep), threads);
    global.merge(level_result.top);
    StageDiagnostics stage{"refine-stride-" + std::to_string(stride), level_result.states, 0,
                           level_result.max_regret, 0.0};
    stage.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - level_start).count();
    stages.push_back(stage);
  }
  detail::TopK trimmed(static_cast<std::size_t>(top_k));
  trimmed.merge(global);
  return detail::finish_result(std::move(trimmed), "coarse-to-fine", std::move(stages));
}

}  // namespace nearopt
