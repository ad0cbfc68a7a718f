#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "nearopt/rng.hpp"

namespace nearopt {

// Full pmf of Binomial(n, p) on 0..n. Anchored at the mode via lgamma, then
// extended outward by the multiplicative recurrence; entries that underflow
// flush to zero, which is harmless for the absolute tolerances used here.
inline void binomial_pmf(int n, double p, std::vector<double>& out) {
  if (n < 0) throw std::invalid_argument("binomial_pmf: negative n");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binomial_pmf: p outside [0,1]");
  out.assign(static_cast<std::size_t>(n) + 1, 0.0);
  if (p == 0.0) {
    out[0] = 1.0;
    return;
  }
  if (p == 1.0) {
    out[static_cast<std::size_t>(n)] = 1.0;
    return;
  }
  const double q = 1.0 - p;
  int mode = static_cast<int>((n + 1) * p);
  if (mode > n) mode = n;
  const double log_mode = std::lgamma(n + 1.0) - std::lgamma(mode + 1.0) -
                          std::lgamma(n - mode + 1.0) + mode * std::log(p) +
                          (n - mode) * std::log1p(-p);
  out[static_cast<std::size_t>(mode)] = std::exp(log_mode);
  for (int k = mode; k < n; ++k) {
    out[static_cast<std::size_t>(k) + 1] =
        out[static_cast<std::size_t>(k)] * ((n - k) * p) / ((k + 1) * q);
  }
  for (int k = mode; k > 0; --k) {
    out[static_cast<std::size_t>(k) - 1] =
        out[static_cast<std::size_t>(k)] * (k * q) / ((n - k + 1) * p);
  }
}

inline std::vector<double> binomial_pmf(int n, double p) {
  std::vector<double> out;
  binomial_pmf(n, p, out);
  return out;
}

// Inclusive prefix sums: out[k] = P(X <= k).
inline void inclusive_cdf(const std::vector<double>& pmf, std::vector<double>& out) {
  out.resize(pmf.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < pmf.size(); ++k) {
    acc += pmf[k];
    out[k] = acc;
  }
}

// Walker/Vose alias table for O(1) sampling from a finite distribution.
class AliasTable {
 public:
  explicit AliasTable(const std::vector<double>& weights) {
    const std::size_t k = weights.size();
    if (k == 0) throw std::invalid_argument("AliasTable: empty weights");
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw std::invalid_argument("AliasTable: negative weight");
      total += w;
    }
    if (!(total > 0.0)) throw std::invalid_argument("AliasTable: zero total weight");
    prob_.assign(k, 0.0);
    alias_.assign(k, 0);
    std::vector<double> scaled(k);
    for (std::size_t i = 0; i < k; ++i) scaled[i] = weights[i] * static_cast<double>(k) / total;
    std::vector<std::uint32_t> small, large;
    small.reserve(k);
    large.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
      (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
      const std::uint32_t s = small.back();
      const std::uint32_t l = large.back();
      small.pop_back();
      large.pop_back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] = (scaled[l] + scaled[s]) - 1.0;
      (scaled[l] < 1.0 ? small : large).push_back(l);
    }
    for (std::uint32_t i : large) prob_[i] = 1.0;
    for (std::uint32_t i : small) prob_[i] = 1.0;
  }

  int sample(SimDraws& draws) const {
    const std::uint64_t r = draws.next_u64();
    const std::size_t i = static_cast<std::size_t>(
        (static_cast<unsigned __int128>(r) * prob_.size()) >> 64);
    return draws.next_unit() < prob_[i] ? static_cast<int>(i) : static_cast<int>(alias_[i]);
  }

  std::size_t size() const { return prob_.size(); }

 private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

}  // namespace nearopt
