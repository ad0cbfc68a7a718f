#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "nearopt/binomial.hpp"
#include "nearopt/parallel.hpp"
#include "nearopt/prescription.hpp"
#include "nearopt/rng.hpp"
#include "nearopt/rules.hpp"
#include "nearopt/trial.hpp"

namespace nearopt {

struct McOptions {
  std::uint64_t n_sims = 1000000;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;  // state index when running grid searches
  int threads = 0;           // 0 = hardware concurrency
  std::uint64_t chunk = 1 << 16;
};

namespace detail {

// Winner tallies per (arm, tie multiplicity). Integer accumulation makes the
// Monte Carlo reduction exact and therefore independent of the worker count.
struct WinnerTally {
  int arms = 0;
  std::vector<std::uint64_t> counts;  // arms x arms, [t * arms + (k-1)]

  explicit WinnerTally(int n_arms)
      : arms(n_arms),
        counts(static_cast<std::size_t>(n_arms) * static_cast<std::size_t>(n_arms), 0) {}

  void add(const int* winners, int k) {
    for (int i = 0; i < k; ++i) {
      ++counts[static_cast<std::size_t>(winners[i]) * arms + (k - 1)];
    }
  }

  WinnerTally& operator+=(const WinnerTally& other) {
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
    return *this;
  }
};

inline PrescriptionProbs tally_to_probs(const WinnerTally& tally, const McOptions& opts) {
  const int arms = tally.arms;
  if (arms > 20) {
    throw std::invalid_argument("mc_probs: more than 20 arms would overflow the tie denominators");
  }
  std::uint64_t lcm = 1;
  for (int k = 1; k <= arms; ++k) lcm = std::lcm<std::uint64_t>(lcm, static_cast<std::uint64_t>(k));
  PrescriptionProbs out;
  out.method = PrescriptionProbs::Method::monte_carlo;
  out.n_sims = opts.n_sims;
  out.seed = opts.seed;
  out.stream = opts.stream;
  out.den = lcm * opts.n_sims;
  out.num.resize(static_cast<std::size_t>(arms), 0);
  out.probs.resize(static_cast<std::size_t>(arms), 0.0);
  out.std_errors.resize(static_cast<std::size_t>(arms), 0.0);
  for (int t = 0; t < arms; ++t) {
    std::uint64_t num = 0;
    double first = 0.0, second = 0.0;
    for (int k = 1; k <= arms; ++k) {
      const std::uint64_t c = tally.counts[static_cast<std::size_t>(t) * arms + (k - 1)];
      num += c * (lcm / static_cast<std::uint64_t>(k));
      first += static_cast<double>(c) / k;
      second += static_cast<double>(c) / (static_cast<double>(k) * k);
    }
    out.num[static_cast<std::size_t>(t)] = num;
    const double n = static_cast<double>(opts.n_sims);
    const double mean = first / n;
    out.probs[static_cast<std::size_t>(t)] = static_cast<double>(num) / static_cast<double>(out.den);
    const double var = std::max(0.0, second / n - mean * mean);
    out.std_errors[static_cast<std::size_t>(t)] = std::sqrt(var / n);
  }
  return out;
}

}  // namespace detail

// Monte Carlo E_s[delta] for a count-level rule on a binary state. Simulation
// i of stream s is a pure function of (seed, s, i); results are bit-identical
// for any thread count.
template <class Rule>
PrescriptionProbs mc_probs(const Rule& rule, const TrialDesign& design, const BinaryState& state,
                           const McOptions& opts) {
  if (state.arms() != design.arms()) {
    throw std::invalid_argument("mc_probs: state and design arm counts differ");
  }
  if (opts.n_sims < 1) throw std::invalid_argument("mc_probs: n_sims must be >= 1");
  const int arms = design.arms();
  std::vector<AliasTable> samplers;
  samplers.reserve(static_cast<std::size_t>(arms));
  for (int t = 0; t < arms; ++t) {
    samplers.emplace_back(binomial_pmf(design.size(t), state.success_probs[static_cast<std::size_t>(t)]));
  }
  const Philox2x64 engine(opts.seed);
  auto tally = parallel_map_reduce(
      opts.n_sims, opts.chunk, opts.threads, detail::WinnerTally(arms),
      [&](std::uint64_t lo, std::uint64_t hi) {
        detail::WinnerTally local(arms);
        std::vector<int> m(static_cast<std::size_t>(arms));
        std::vector<int> winners(static_cast<std::size_t>(arms));
        for (std::uint64_t sim = lo; sim < hi; ++sim) {
          SimDraws draws(engine, opts.stream, sim);
          for (int t = 0; t < arms; ++t) {
            m[static_cast<std::size_t>(t)] = samplers[static_cast<std::size_t>(t)].sample(draws);
          }
          const int k = rule.winners(m.data(), winners.data());
          local.add(winners.data(), k);
        }
        return local;
      },
      [](detail::WinnerTally acc, detail::WinnerTally part) {
        acc += part;
        return acc;
      });
  return detail::tally_to_probs(tally, opts);
}

inline PrescriptionProbs mc_probs(RuleKind kind, const TrialDesign& design,
                                  const BinaryState& state, const McOptions& opts,
                                  double alpha = 0.05) {
  if (kind == RuleKind::empirical_success) {
    return mc_probs(EsCountRule(design), design, state, opts);
  }
  return mc_probs(TestCountRule(design, TestConfig::for_design(design, alpha)), design, state,
                  opts);
}

// Monte Carlo E_s[delta] for the empirical success rule on bivariate
// outcomes. Each subject's cell is drawn from the arm's alias table; winners
// are ranked by exact integer welfare totals.
inline PrescriptionProbs mc_probs_bivariate_es(const TrialDesign& design,
                                               const BivariateState& state,
                                               const McOptions& opts) {
  if (state.arms() != design.arms()) {
    throw std::invalid_argument("mc_probs_bivariate_es: state and design arm counts differ");
  }
  const int arms = design.arms();
  const auto welfare = WelfareSpec::bivariate_weighted(state.harm);
  const auto [weights, den] = welfare.integer_weights();
  const auto& w = weights;
  (void)den;
  std::vector<AliasTable> samplers;
  samplers.reserve(static_cast<std::size_t>(arms));
  for (int t = 0; t < arms; ++t) {
    const auto& cells = state.cell_probs[static_cast<std::size_t>(t)];
    samplers.emplace_back(std::vector<double>(cells.begin(), cells.end()));
  }
  const Philox2x64 engine(opts.seed);
  auto tally = parallel_map_reduce(
      opts.n_sims, opts.chunk, opts.threads, detail::WinnerTally(arms),
      [&](std::uint64_t lo, std::uint64_t hi) {
        detail::WinnerTally local(arms);
        std::vector<std::int64_t> scores(static_cast<std::size_t>(arms));
        std::vector<int> winners(static_cast<std::size_t>(arms));
        for (std::uint64_t sim = lo; sim < hi; ++sim) {
          SimDraws draws(engine, opts.stream, sim);
          for (int t = 0; t < arms; ++t) {
            std::int64_t score = 0;
            for (int i = 0; i < design.size(t); ++i) {
              score += w[static_cast<std::size_t>(samplers[static_cast<std::size_t>(t)].sample(draws))];
            }
            scores[static_cast<std::size_t>(t)] = score;
          }
          int k = 1;
          winners[0] = 0;
          for (int t = 1; t < arms; ++t) {
            const auto lhs = static_cast<__int128>(scores[static_cast<std::size_t>(t)]) *
                             design.size(winners[0]);
            const auto rhs = static_cast<__int128>(scores[static_cast<std::size_t>(winners[0])]) *
                             design.size(t);
            if (lhs > rhs) {
              winners[0] = t;
              k = 1;
            } else if (lhs == rhs) {
              winners[static_cast<std::size_t>(k++)] = t;
            }
          }
          local.add(winners.data(), k);
        }
        return local;
      },
      [](detail::WinnerTally acc, detail::WinnerTally part) {
        acc += part;
        return acc;
      });
  return detail::tally_to_probs(tally, opts);
}

}  // namespace nearopt
