#include <catch2/catch.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "nearopt/trial.hpp"

using namespace nearopt;

namespace {

// One ulp at the unit binade: the complement 1 - m lives near 1, so the
// round-trip error is bounded by its spacing there, not by ulp(m).
bool within_one_unit_ulp(double a, double b) {
  return std::abs(a - b) <= 0x1.0p-53;
}

}  // namespace

TEST_CASE("make_design validates and derives totals", "[trial]") {
  const auto benchmark = make_design({100, 99});
  CHECK(benchmark.arms() == 2);
  CHECK(benchmark.total() == 199);
  CHECK(benchmark.label(0) == "standard care");

  const auto recovery = make_design({500, 250, 250, 250, 250});
  CHECK(recovery.arms() == 5);
  CHECK(recovery.total() == 1500);
  CHECK(recovery.equal_new_arm_sizes());

  CHECK_THROWS_AS(make_design({1}), std::invalid_argument);
  CHECK_THROWS_AS(make_design({}), std::invalid_argument);
  CHECK_THROWS_AS(make_design({10, 0}), std::invalid_argument);
  CHECK_THROWS_AS(make_design({10, -3}), std::invalid_argument);
}

TEST_CASE("mortality_to_state flips orientation", "[trial]") {
  const auto s = mortality_to_state({0.25, 0.20});
  CHECK(s.success_probs == std::vector<double>{0.75, 0.80});

  const auto boundary = mortality_to_state({0.0, 0.0});
  CHECK(boundary.success_probs == std::vector<double>{1.0, 1.0});

  const auto multi = mortality_to_state({0.25, 0.15, 0.20, 0.30, 0.35});
  CHECK(multi.success_probs == std::vector<double>{0.75, 0.85, 0.80, 0.70, 0.65});

  CHECK_THROWS_AS(mortality_to_state({1.2}), std::invalid_argument);
  CHECK_THROWS_AS(mortality_to_state({-0.1}), std::invalid_argument);
}

TEST_CASE("mortality_to_state round-trips within one ulp", "[trial]") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    const double m = unif(gen);
    const auto once = mortality_to_state({m});
    const auto twice = mortality_to_state(once.success_probs);
    CHECK(within_one_unit_ulp(twice.success_probs[0], m));
  }
}

TEST_CASE("mean_welfare on binary states is the identity", "[trial]") {
  const BinaryState state({0.75, 0.85});
  const auto mu = mean_welfare(state, WelfareSpec::binary_identity());
  CHECK(mu == state.success_probs);

  CHECK_THROWS_AS(mean_welfare(state, WelfareSpec::bivariate_weighted(Rational(1, 2))),
                  std::invalid_argument);
}

TEST_CASE("mean_welfare on bivariate states weights the side effect", "[trial]") {
  const Rational h(3, 10);
  // Survives with the side effect: welfare 1 - h.
  const BivariateState survive({{{0.0, 0.0, 0.0, 1.0}}}, h);
  const auto mu1 = mean_welfare(survive, WelfareSpec::bivariate_weighted(h));
  CHECK(mu1[0] == Approx(0.7).margin(1e-15));

  // Dies with the side effect: welfare -h.
  const BivariateState die({{{0.0, 1.0, 0.0, 0.0}}}, h);
  const auto mu2 = mean_welfare(die, WelfareSpec::bivariate_weighted(h));
  CHECK(mu2[0] == Approx(-0.3).margin(1e-15));

  CHECK_THROWS_AS(mean_welfare(die, WelfareSpec::bivariate_weighted(Rational(1, 2))),
                  std::invalid_argument);
}

TEST_CASE("bivariate mean welfare is linear in cell probabilities", "[trial]") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Rational h(2, 7);
  const double hval = h.value();
  const double values[4] = {0.0, -hval, 1.0, 1.0 - hval};
  for (int rep = 0; rep < 100; ++rep) {
    std::array<double, 4> cells{unif(gen), unif(gen), unif(gen), unif(gen)};
    double sum = cells[0] + cells[1] + cells[2] + cells[3];
    for (double& c : cells) c /= sum;
    const BivariateState state({cells}, h);
    const auto mu = mean_welfare(state, WelfareSpec::bivariate_weighted(h));
    double brute = 0.0;
    for (int c = 0; c < 4; ++c) brute += cells[static_cast<std::size_t>(c)] * values[c];
    CHECK(mu[0] == Approx(brute).margin(1e-12));
  }
}

TEST_CASE("bivariate states validate cell sums", "[trial]") {
  CHECK_THROWS_AS(BivariateState({{{0.5, 0.2, 0.2, 0.2}}}, Rational(0)), std::invalid_argument);
  CHECK_THROWS_AS(BivariateState({{{-0.1, 0.5, 0.3, 0.3}}}, Rational(0)), std::invalid_argument);
  CHECK_THROWS_AS(BivariateState({{{0.25, 0.25, 0.25, 0.25}}}, Rational(-1, 2)),
                  std::invalid_argument);

  const auto fixed = BivariateState::renormalized({{{1.0, 1.0, 1.0, 1.0}}}, Rational(0));
  CHECK(fixed.cell_probs[0][0] == Approx(0.25));
}

TEST_CASE("sample_welfare_means computes per-arm means", "[trial]") {
  const auto design = make_design({4, 4});
  const auto sample = SampleCounts::binary(design, {2, 3});
  const auto means = sample_welfare_means(sample, design, WelfareSpec::binary_identity());
  CHECK(means[0] == 0.5);
  CHECK(means[1] == 0.75);

  const auto benchmark = make_design({100, 99});
  const auto sample199 = SampleCounts::binary(benchmark, {75, 80});
  const auto means199 = sample_welfare_means(sample199, benchmark, WelfareSpec::binary_identity());
  CHECK(means199[0] == Approx(0.75).margin(1e-15));
  CHECK(means199[1] == Approx(80.0 / 99.0).margin(1e-15));
}

TEST_CASE("sample_welfare_means handles bivariate outcomes", "[trial]") {
  const auto design = make_design({2, 2});
  // Arm 1: one (1,0) and one (1,1) outcome; arm 2 irrelevant here.
  const auto sample = SampleCounts::categorical(design, {{0, 0, 1, 1}, {2, 0, 0, 0}});
  const auto means =
      sample_welfare_means(sample, design, WelfareSpec::bivariate_weighted(Rational(1, 2)));
  CHECK(means[0] == Approx(0.75).margin(1e-15));
  CHECK(means[1] == 0.0);
}

TEST_CASE("sample counts validate against the design", "[trial]") {
  const auto design = make_design({5, 5});
  CHECK_THROWS_AS(SampleCounts::binary(design, {6, 0}), std::invalid_argument);
  CHECK_THROWS_AS(SampleCounts::binary(design, {-1, 0}), std::invalid_argument);
  CHECK_THROWS_AS(SampleCounts::binary(design, {3}), std::invalid_argument);
  CHECK_THROWS_AS(SampleCounts::categorical(design, {{1, 2, 1, 0}, {1, 1, 1, 1}}),
                  std::invalid_argument);
}

TEST_CASE("counts are a sufficient aggregation of outcome order", "[trial]") {
  // Building counts from any permutation of individual outcomes gives the same
  // sample, hence the same means.
  std::mt19937_64 gen(23);
  const auto design = make_design({6, 3});
  std::vector<int> arm1{1, 0, 1, 1, 0, 1};
  std::vector<int> arm2{0, 1, 0};
  const auto count = [](const std::vector<int>& xs) {
    return static_cast<int>(std::count(xs.begin(), xs.end(), 1));
  };
  const auto base = sample_welfare_means(
      SampleCounts::binary(design, {count(arm1), count(arm2)}), design,
      WelfareSpec::binary_identity());
  for (int rep = 0; rep < 20; ++rep) {
    std::shuffle(arm1.begin(), arm1.end(), gen);
    std::shuffle(arm2.begin(), arm2.end(), gen);
    const auto shuffled = sample_welfare_means(
        SampleCounts::binary(design, {count(arm1), count(arm2)}), design,
        WelfareSpec::binary_identity());
    CHECK(shuffled == base);
  }
}
