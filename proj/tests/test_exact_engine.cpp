#include <catch2/catch.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "nearopt/exact.hpp"
#include "nearopt/mc.hpp"

using namespace nearopt;

namespace {

const WelfareSpec kBinary = WelfareSpec::binary_identity();
const auto kBenchmark = make_design({100, 99});

PrescriptionProbs enumerate_es(const TrialDesign& design, const BinaryState& state,
                               std::uint64_t budget = 10000000) {
  return enumerate_probs_exact(
      [&](const SampleCounts& s) { return empirical_success(s, design, kBinary); }, design, state,
      budget);
}

PrescriptionProbs enumerate_test(const TrialDesign& design, const BinaryState& state,
                                 const TestConfig& config) {
  return enumerate_probs_exact(
      [&](const SampleCounts& s) { return hypothesis_test_rule(s, design, config); }, design,
      state);
}

}  // namespace

TEST_CASE("two-arm test rule reproduces the benchmark scenario table", "[exact]") {
  const auto config = TestConfig::for_design(kBenchmark, 0.05);
  const auto at = [&](double new_mortality) {
    return exact_probs_two_arm_test(kBenchmark, mortality_to_state({0.25, new_mortality}), config);
  };
  // (new-arm mortality, probability standard care is prescribed)
  const std::vector<std::pair<double, double>> expected = {
      {0.40, 1.0000}, {0.35, 0.9998}, {0.30, 0.9970}, {0.25, 0.9750},
      {0.20, 0.8676}, {0.15, 0.5736}, {0.10, 0.1892},
  };
  for (const auto& [mortality, p_standard] : expected) {
    CHECK(at(mortality).probs[0] == Approx(p_standard).margin(5e-5 + 1e-12));
  }
}

TEST_CASE("two-arm empirical success reproduces the benchmark scenario table", "[exact]") {
  const auto at = [&](double new_mortality) {
    return exact_probs_two_arm_es(kBenchmark, mortality_to_state({0.25, new_mortality}));
  };
  const std::vector<std::pair<double, double>> expected = {
      {0.40, 0.0105}, {0.35, 0.0572}, {0.30, 0.2039}, {0.25, 0.4836},
      {0.20, 0.7882}, {0.15, 0.9578}, {0.10, 0.9974},
  };
  for (const auto& [mortality, p_new] : expected) {
    CHECK(at(mortality).probs[1] == Approx(p_new).margin(5e-5 + 1e-12));
  }
}

TEST_CASE("empirical success is symmetric for identical iid arms", "[exact]") {
  for (int n : {5, 40, 137}) {
    const auto design = make_design({n, n});
    for (double p : {0.0, 0.2, 0.5, 1.0}) {
      const auto probs = exact_probs_two_arm_es(design, BinaryState({p, p}));
      CHECK(probs.probs[0] == Approx(0.5).margin(1e-12));
      CHECK(probs.probs[1] == Approx(0.5).margin(1e-12));
    }
  }
}

TEST_CASE("enumeration matches a hand-written oracle on a 2x2 trial", "[exact]") {
  const auto design = make_design({2, 2});
  const double p1 = 0.3, p2 = 0.6;
  // Hand enumeration over the nine samples: binomial masses written out and
  // the ES allocation decided by comparing m1/2 with m2/2.
  const auto mass1 = [&](int m) {
    return m == 0 ? (1 - p1) * (1 - p1) : (m == 1 ? 2 * p1 * (1 - p1) : p1 * p1);
  };
  const auto mass2 = [&](int m) {
    return m == 0 ? (1 - p2) * (1 - p2) : (m == 1 ? 2 * p2 * (1 - p2) : p2 * p2);
  };
  double hand_new = 0.0;
  for (int m1 = 0; m1 <= 2; ++m1) {
    for (int m2 = 0; m2 <= 2; ++m2) {
      const double mass = mass1(m1) * mass2(m2);
      hand_new += mass * (m2 > m1 ? 1.0 : (m2 == m1 ? 0.5 : 0.0));
    }
  }
  const BinaryState state({p1, p2});
  CHECK(enumerate_es(design, state).probs[1] == Approx(hand_new).margin(1e-14));
  CHECK(exact_probs_two_arm_es(design, state).probs[1] == Approx(hand_new).margin(1e-14));
}

TEST_CASE("enumeration agrees with the closed-form two-arm engines", "[exact]") {
  const BinaryState cao_state = mortality_to_state({0.25, 0.20});
  CHECK(enumerate_es(kBenchmark, cao_state).probs[1] ==
        Approx(exact_probs_two_arm_es(kBenchmark, cao_state).probs[1]).margin(1e-12));

  std::mt19937_64 gen(41);
  std::uniform_int_distribution<int> size(1, 60);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int rep = 0; rep < 15; ++rep) {
    const auto design = make_design({size(gen), size(gen)});
    if (design.total() - 2 < 1) continue;
    const BinaryState state({unif(gen), unif(gen)});
    const auto config = TestConfig::for_design(design, 0.05);

    const auto es_fast = exact_probs_two_arm_es(design, state);
    const auto es_slow = enumerate_es(design, state);
    CHECK(es_fast.probs[1] == Approx(es_slow.probs[1]).margin(1e-12));

    const auto test_fast = exact_probs_two_arm_test(design, state, config);
    const auto test_slow = enumerate_test(design, state, config);
    CHECK(test_fast.probs[1] == Approx(test_slow.probs[1]).margin(1e-12));

    // Exact prescription probabilities are a distribution.
    for (const auto& probs : {es_fast, es_slow, test_fast, test_slow}) {
      CHECK(probs.probs[0] >= 0.0);
      CHECK(probs.probs[1] >= 0.0);
      CHECK(probs.probs[0] + probs.probs[1] == Approx(1.0).margin(1e-12));
    }
  }
}

TEST_CASE("closed forms match enumeration on every design up to n=60", "[exact][slow]") {
  // One pseudo-random interior state per design, plus the uniform state.
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> unif(0.01, 0.99);
  double worst = 0.0;
  for (int n1 = 1; n1 <= 60; ++n1) {
    for (int n2 = 1; n2 <= 60; ++n2) {
      const auto design = make_design({n1, n2});
      const BinaryState state({unif(gen), unif(gen)});
      const double es = exact_probs_two_arm_es(design, state).probs[1];
      const double es_oracle = enumerate_es(design, state).probs[1];
      worst = std::max(worst, std::abs(es - es_oracle));
      if (design.total() - 2 >= 1) {
        const auto config = TestConfig::for_design(design, 0.05);
        const double tt = exact_probs_two_arm_test(design, state, config).probs[1];
        const double tt_oracle = enumerate_test(design, state, config).probs[1];
        worst = std::max(worst, std::abs(tt - tt_oracle));
      }
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("enumeration enforces its cell budget", "[exact]") {
  const auto design = make_design({4000, 4000});
  CHECK_THROWS_AS(enumerate_es(design, BinaryState({0.5, 0.5}), 1000000), BudgetExceeded);
}

TEST_CASE("test-rule rejection regions verify as prefixes", "[exact]") {
  for (const auto& arm_sizes :
       {std::vector<int>{100, 99}, {20, 20}, {7, 31}, {150, 50}, {2, 2}}) {
    const auto design = make_design(arm_sizes);
    for (double alpha : {0.01, 0.05, 0.20}) {
      const auto region = TestTwoArmRegion::build(design, TestConfig::for_design(design, alpha));
      CHECK(region.all_prefix);
    }
  }
}

TEST_CASE("explicit-cell fallback weights match direct summation", "[exact]") {
  // Force the fallback path with a synthetic non-prefix region.
  TestTwoArmRegion region;
  region.all_prefix = false;
  region.prefix = {-1, -1, -1};
  region.explicit_cells = {{1, 3}, {}, {0, 2, 4}};
  const auto pmf1 = binomial_pmf(4, 0.37);
  std::vector<double> cdf1, weights;
  inclusive_cdf(pmf1, cdf1);
  detail::test_weights(region, pmf1, cdf1, weights);
  CHECK(weights[0] == Approx(pmf1[1] + pmf1[3]).margin(1e-15));
  CHECK(weights[1] == 0.0);
  CHECK(weights[2] == Approx(pmf1[0] + pmf1[2] + pmf1[4]).margin(1e-15));
}

TEST_CASE("bivariate ES with zero harm reduces to the marginal binary engine", "[exact]") {
  std::mt19937_64 gen(57);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int rep = 0; rep < 10; ++rep) {
    const auto design = make_design({4, 6});
    std::vector<std::array<double, 4>> cells;
    std::vector<double> marginal;
    for (int t = 0; t < 2; ++t) {
      std::array<double, 4> c{unif(gen), unif(gen), unif(gen), unif(gen)};
      const double sum = c[0] + c[1] + c[2] + c[3];
      for (double& x : c) x /= sum;
      marginal.push_back(c[2] + c[3]);
      cells.push_back(c);
    }
    const BivariateState state(cells, Rational(0));
    const auto joint = exact_probs_two_arm_bivariate_es(design, state);
    const auto binary = exact_probs_two_arm_es(design, BinaryState(marginal));
    CHECK(joint.probs[1] == Approx(binary.probs[1]).margin(1e-12));
  }
}

TEST_CASE("bivariate ES is symmetric for identical arms", "[exact]") {
  const auto design = make_design({3, 3});
  const std::array<double, 4> cells{0.1, 0.2, 0.3, 0.4};
  const BivariateState state({cells, cells}, Rational(1, 3));
  const auto probs = exact_probs_two_arm_bivariate_es(design, state);
  CHECK(probs.probs[0] == Approx(0.5).margin(1e-12));
}

TEST_CASE("bivariate ES agrees with Monte Carlo", "[exact][slow]") {
  const auto design = make_design({5, 5});
  const BivariateState state({{{0.15, 0.25, 0.40, 0.20}}, {{0.10, 0.20, 0.45, 0.25}}},
                             Rational(1, 2));
  const auto exact = exact_probs_two_arm_bivariate_es(design, state);
  McOptions opts;
  opts.n_sims = 10000000;
  opts.seed = 99;
  const auto mc = mc_probs_bivariate_es(design, state, opts);
  for (int t = 0; t < 2; ++t) {
    CHECK(std::abs(exact.probs[static_cast<std::size_t>(t)] -
                   mc.probs[static_cast<std::size_t>(t)]) <=
          4.0 * mc.std_errors[static_cast<std::size_t>(t)]);
  }
}

TEST_CASE("bivariate ES enforces its composition budget", "[exact]") {
  const auto design = make_design({500, 500});
  const std::array<double, 4> cells{0.25, 0.25, 0.25, 0.25};
  CHECK_THROWS_AS(
      exact_probs_two_arm_bivariate_es(design, BivariateState({cells, cells}, Rational(1, 2)),
                                       10000),
      BudgetExceeded);
}
