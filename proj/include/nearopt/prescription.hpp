#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace nearopt {

// Thrown when an exact enumeration would exceed its configured cell budget.
struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Expected allocation E_s[delta(t, psi)] per arm under one state of nature.
// Monte Carlo results carry an exact rational backing (probs[t] = num[t]/den)
// because tie mass is split exactly, plus per-component standard errors.
struct PrescriptionProbs {
  enum class Method { exact, monte_carlo };

  Method method = Method::exact;
  std::vector<double> probs;
  std::vector<double> std_errors;    // Monte Carlo only
  std::vector<std::uint64_t> num;    // Monte Carlo only
  std::uint64_t den = 0;             // Monte Carlo only
  std::uint64_t n_sims = 0;          // Monte Carlo only
  std::uint64_t seed = 0;            // Monte Carlo only
  std::uint64_t stream = 0;          // Monte Carlo only

  int arms() const { return static_cast<int>(probs.size()); }

  std::string method_name() const {
    return method == Method::exact ? "exact" : "monte-carlo";
  }
};

}  // namespace nearopt
