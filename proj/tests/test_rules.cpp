#include <catch2/catch.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "nearopt/rules.hpp"

using namespace nearopt;

namespace {

const WelfareSpec kBinary = WelfareSpec::binary_identity();

AllocationDist es(const TrialDesign& design, std::vector<int> m) {
  return empirical_success(SampleCounts::binary(design, std::move(m)), design, kBinary);
}

// Every binary sample of a two- or three-arm design, for exhaustive checks.
template <class Fn>
void for_all_samples(const TrialDesign& design, Fn&& fn) {
  std::vector<int> m(static_cast<std::size_t>(design.arms()), 0);
  const auto recurse = [&](auto&& self, int arm) -> void {
    if (arm == design.arms()) {
      fn(m);
      return;
    }
    for (int v = 0; v <= design.size(arm); ++v) {
      m[static_cast<std::size_t>(arm)] = v;
      self(self, arm + 1);
    }
  };
  recurse(recurse, 0);
}

}  // namespace

TEST_CASE("empirical success splits ties and picks strict maxima", "[rules]") {
  const auto even = es(make_design({20, 20}), {10, 10});
  CHECK(even.winners == std::vector<int>{0, 1});
  CHECK(even.probs() == std::vector<double>{0.5, 0.5});

  const auto strict = es(make_design({3, 3}), {1, 2});
  CHECK(strict.winners == std::vector<int>{1});
  CHECK(strict.probs() == std::vector<double>{0.0, 1.0});

  // 1/2 > 1/3: the cross-product comparison must get this exactly.
  const auto uneven = es(make_design({2, 3}), {1, 1});
  CHECK(uneven.winners == std::vector<int>{0});
}

TEST_CASE("allocations sum to exactly one over full sample spaces", "[rules]") {
  for (const auto& design : {make_design({2, 3}), make_design({3, 3, 3})}) {
    const auto config = TestConfig::for_design(design, 0.05);
    for_all_samples(design, [&](const std::vector<int>& m) {
      const auto sample = SampleCounts::binary(design, m);
      for (const auto& alloc : {empirical_success(sample, design, kBinary),
                                hypothesis_test_rule(sample, design, config)}) {
        REQUIRE_FALSE(alloc.winners.empty());
        Rational total(0);
        for (int t = 0; t < design.arms(); ++t) {
          const Rational p = alloc.prob_exact(t);
          CHECK(p.num >= 0);
          total = total + p;
        }
        CHECK(total == Rational(1));
      }
    });
  }
}

TEST_CASE("empirical success is permutation-equivariant at equal arm sizes", "[rules]") {
  const auto design = make_design({4, 4});
  for_all_samples(design, [&](const std::vector<int>& m) {
    const auto base = es(design, m);
    const auto swapped = es(design, {m[1], m[0]});
    std::vector<int> expected;
    for (int w : base.winners) expected.push_back(1 - w);
    std::sort(expected.begin(), expected.end());
    CHECK(swapped.winners == expected);
  });
}

TEST_CASE("empirical success is invariant to increasing affine welfare maps", "[rules]") {
  // Mapping binary outcomes onto bivariate cells (success -> (1,0), failure ->
  // (0,1)) turns welfare {0,1} into {-h, 1}, an increasing affine transform.
  const auto design = make_design({3, 4});
  const auto bivariate = WelfareSpec::bivariate_weighted(Rational(2, 5));
  for_all_samples(design, [&](const std::vector<int>& m) {
    const auto binary_sample = SampleCounts::binary(design, m);
    std::vector<std::vector<int>> cells;
    for (int t = 0; t < design.arms(); ++t) {
      const int n = design.size(t);
      cells.push_back({0, n - m[static_cast<std::size_t>(t)], m[static_cast<std::size_t>(t)], 0});
    }
    const auto mapped = SampleCounts::categorical(design, cells);
    CHECK(empirical_success(binary_sample, design, kBinary).winners ==
          empirical_success(mapped, design, bivariate).winners);
  });
}

TEST_CASE("pooled variance matches the hand-evaluated formula", "[rules]") {
  const auto tiny = make_design({2, 2});
  CHECK(pooled_variance(SampleCounts::binary(tiny, {1, 2}), tiny) == Approx(0.25).margin(1e-15));

  const auto flat = make_design({10, 10});
  CHECK(pooled_variance(SampleCounts::binary(flat, {0, 10}), flat) == 0.0);

  const auto wide = make_design({100, 99});
  const double expected = (75.0 * 25.0 / 100.0 + 80.0 * 19.0 / 99.0) / 197.0;
  CHECK(pooled_variance(SampleCounts::binary(wide, {75, 80}), wide) ==
        Approx(expected).margin(1e-15));

  const auto degenerate = make_design({1, 1});
  CHECK_THROWS_AS(pooled_variance(SampleCounts::binary(degenerate, {0, 1}), degenerate),
                  std::invalid_argument);
}

TEST_CASE("t statistics follow the pooled formula with degenerate conventions", "[rules]") {
  const double inf = std::numeric_limits<double>::infinity();
  const auto tiny = make_design({2, 2});
  CHECK(t_statistics(SampleCounts::binary(tiny, {1, 2}), tiny)[0] == Approx(1.0).margin(1e-12));

  const auto flat = make_design({10, 10});
  CHECK(t_statistics(SampleCounts::binary(flat, {5, 5}), flat)[0] == 0.0);
  CHECK(t_statistics(SampleCounts::binary(flat, {0, 10}), flat)[0] == inf);
  CHECK(t_statistics(SampleCounts::binary(flat, {10, 0}), flat)[0] == -inf);
  CHECK(t_statistics(SampleCounts::binary(flat, {0, 0}), flat)[0] == 0.0);
}

TEST_CASE("t statistics are antisymmetric at equal arm sizes", "[rules]") {
  const auto design = make_design({5, 5});
  for_all_samples(design, [&](const std::vector<int>& m) {
    const auto forward = t_statistics(SampleCounts::binary(design, m), design);
    const auto backward = t_statistics(SampleCounts::binary(design, {m[1], m[0]}), design);
    if (std::isinf(forward[0])) {
      CHECK(backward[0] == -forward[0]);
    } else {
      CHECK(backward[0] == Approx(-forward[0]).margin(1e-12));
    }
  });
}

TEST_CASE("hypothesis test rule prescribes standard care without rejections", "[rules]") {
  const auto design = make_design({10, 10});
  const auto config = TestConfig::for_design(design, 0.05);
  const auto alloc = hypothesis_test_rule(SampleCounts::binary(design, {5, 6}), design, config);
  CHECK(alloc.winners == std::vector<int>{0});
}

TEST_CASE("hypothesis test rule splits ties among significant arms", "[rules]") {
  const auto design = make_design({500, 250, 250, 250, 250});
  const auto config = TestConfig::for_design(design, 0.05);
  // Arms A and B tie far above the critical value; C and D stay low.
  const auto alloc = hypothesis_test_rule(SampleCounts::binary(design, {250, 240, 240, 100, 100}),
                                          design, config);
  CHECK(alloc.winners == std::vector<int>{1, 2});
  CHECK(alloc.prob_exact(1) == Rational(1, 2));
  CHECK(alloc.prob_exact(0) == Rational(0));
}

TEST_CASE("hypothesis test rule never allocates inconsistently", "[rules]") {
  const auto design = make_design({4, 4});
  const auto config = TestConfig::for_design(design, 0.05);
  for_all_samples(design, [&](const std::vector<int>& m) {
    const auto sample = SampleCounts::binary(design, m);
    const auto tau = t_statistics(sample, design);
    const auto alloc = hypothesis_test_rule(sample, design, config);
    const bool any_significant = tau[0] > config.critical_value;
    for (int w : alloc.winners) {
      if (w == 0) {
        CHECK_FALSE(any_significant);
      } else {
        CHECK(tau[static_cast<std::size_t>(w - 1)] > config.critical_value);
      }
    }
  });
}

TEST_CASE("count-rule evaluators agree with the allocation API", "[rules]") {
  for (const auto& design : {make_design({3, 4}), make_design({4, 4, 4})}) {
    const auto config = TestConfig::for_design(design, 0.05);
    const EsCountRule es_rule(design);
    const TestCountRule test_rule(design, config);
    std::vector<int> buffer(static_cast<std::size_t>(design.arms()));
    for_all_samples(design, [&](const std::vector<int>& m) {
      const auto sample = SampleCounts::binary(design, m);

      int k = es_rule.winners(m.data(), buffer.data());
      std::vector<int> fast(buffer.begin(), buffer.begin() + k);
      std::sort(fast.begin(), fast.end());
      CHECK(fast == empirical_success(sample, design, kBinary).winners);

      k = test_rule.winners(m.data(), buffer.data());
      fast.assign(buffer.begin(), buffer.begin() + k);
      std::sort(fast.begin(), fast.end());
      CHECK(fast == hypothesis_test_rule(sample, design, config).winners);
    });
  }
}

TEST_CASE("test config rejects invalid inputs", "[rules]") {
  CHECK_THROWS_AS(TestConfig::for_design(make_design({1, 1}), 0.05), std::invalid_argument);
  CHECK_THROWS_AS(TestConfig::for_design(make_design({10, 10}), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(TestConfig::for_design(make_design({10, 10}), 1.0), std::invalid_argument);
  // Unequal non-control arms are unsupported for Dunnett configurations.
  CHECK_THROWS_AS(TestConfig::for_design(make_design({10, 10, 12}), 0.05), std::invalid_argument);
}
