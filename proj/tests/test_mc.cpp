#include <catch2/catch.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "nearopt/exact.hpp"
#include "nearopt/mc.hpp"

using namespace nearopt;

TEST_CASE("mc results are bit-identical across thread counts and chunkings", "[mc]") {
  const auto design = make_design({10, 10});
  const BinaryState state({0.3, 0.7});
  const EsCountRule rule(design);
  McOptions base;
  base.n_sims = 100000;
  base.seed = 7;
  base.stream = 3;

  McOptions reference = base;
  reference.threads = 1;
  const auto expected = mc_probs(rule, design, state, reference);

  for (int threads : {2, 3}) {
    for (std::uint64_t chunk : {std::uint64_t{512}, std::uint64_t{65536}}) {
      McOptions opts = base;
      opts.threads = threads;
      opts.chunk = chunk;
      const auto got = mc_probs(rule, design, state, opts);
      CHECK(got.probs == expected.probs);
      CHECK(got.std_errors == expected.std_errors);
      CHECK(got.num == expected.num);
    }
  }
}

TEST_CASE("mc tie mass is split exactly: rational parts sum to one", "[mc]") {
  const auto design = make_design({4, 4, 4});
  const BinaryState state({0.5, 0.5, 0.5});
  McOptions opts;
  opts.n_sims = 20000;
  opts.seed = 11;
  const auto probs = mc_probs(EsCountRule(design), design, state, opts);
  std::uint64_t total = 0;
  for (std::uint64_t n : probs.num) total += n;
  CHECK(total == probs.den);
}

TEST_CASE("degenerate states give constant allocations with zero error", "[mc]") {
  const auto design = make_design({8, 8});
  const BinaryState state({0.0, 1.0});
  McOptions opts;
  opts.n_sims = 5000;
  const auto probs = mc_probs(EsCountRule(design), design, state, opts);
  CHECK(probs.probs == std::vector<double>{0.0, 1.0});
  CHECK(probs.std_errors == std::vector<double>{0.0, 0.0});
}

TEST_CASE("mc agrees with exact evaluation within four standard errors", "[mc]") {
  std::mt19937_64 gen(83);
  std::uniform_int_distribution<int> size(2, 20);
  std::uniform_real_distribution<double> unif(0.05, 0.95);
  for (int rep = 0; rep < 8; ++rep) {
    const auto design = make_design({size(gen), size(gen)});
    const BinaryState state({unif(gen), unif(gen)});
    const auto config = TestConfig::for_design(design, 0.05);
    McOptions opts;
    opts.n_sims = 200000;
    opts.seed = 1000 + static_cast<std::uint64_t>(rep);

    const auto exact_es = exact_probs_two_arm_es(design, state);
    const auto mc_es = mc_probs(EsCountRule(design), design, state, opts);
    const auto exact_tt = exact_probs_two_arm_test(design, state, config);
    const auto mc_tt = mc_probs(TestCountRule(design, config), design, state, opts);
    // The 21/n term covers events never observed in n sims: their true
    // probability is below 21/n except with probability ~1e-9.
    const double tail = 21.0 / static_cast<double>(opts.n_sims);
    for (int t = 0; t < 2; ++t) {
      const auto u = static_cast<std::size_t>(t);
      CHECK(std::abs(exact_es.probs[u] - mc_es.probs[u]) <=
            4.0 * mc_es.std_errors[u] + tail);
      CHECK(std::abs(exact_tt.probs[u] - mc_tt.probs[u]) <=
            4.0 * mc_tt.std_errors[u] + tail);
    }
  }
}

TEST_CASE("different streams decorrelate", "[mc]") {
  const auto design = make_design({50, 50});
  const BinaryState state({0.4, 0.45});
  McOptions a;
  a.n_sims = 50000;
  a.stream = 0;
  McOptions b = a;
  b.stream = 1;
  const auto pa = mc_probs(EsCountRule(design), design, state, a);
  const auto pb = mc_probs(EsCountRule(design), design, state, b);
  CHECK(pa.probs != pb.probs);
}

TEST_CASE("five-arm scenario probabilities line up with the benchmark", "[mc][slow]") {
  const auto design = make_design({500, 250, 250, 250, 250});
  const auto state = mortality_to_state({0.25, 0.15, 0.20, 0.30, 0.35});
  McOptions opts;
  opts.n_sims = 100000;
  opts.seed = 5;

  const auto dunnett =
      mc_probs(TestCountRule(design, TestConfig::for_design(design, 0.05)), design, state, opts);
  const std::vector<double> dunnett_expected{0.2565, 0.7060, 0.0375, 0.0, 0.0};
  for (int t = 0; t < 5; ++t) {
    CHECK(std::abs(dunnett.probs[static_cast<std::size_t>(t)] -
                   dunnett_expected[static_cast<std::size_t>(t)]) < 0.01);
  }

  const auto es = mc_probs(EsCountRule(design), design, state, opts);
  const std::vector<double> es_expected{0.0002, 0.9295, 0.0703, 0.0, 0.0};
  for (int t = 0; t < 5; ++t) {
    CHECK(std::abs(es.probs[static_cast<std::size_t>(t)] -
                   es_expected[static_cast<std::size_t>(t)]) < 0.01);
  }
}
