#pragma once

#include <cassert>
#include <cstdint>

namespace nearopt {

// Counter-based RNG (Philox 2x64, 10 rounds). Every 128-bit block is a pure
// function of (seed, stream, sim, block index), so simulation i of stream s
// produces the same numbers no matter how work is scheduled across threads.
class Philox2x64 {
 public:
  explicit Philox2x64(std::uint64_t seed) : seed_(seed) {}

  struct Block {
    std::uint64_t x0, x1;
  };

  Block block(std::uint64_t ctr0, std::uint64_t ctr1) const {
    std::uint64_t k = seed_;
    for (int round = 0; round < 10; ++round) {
      const unsigned __int128 prod = static_cast<unsigned __int128>(kMul) * ctr0;
      const std::uint64_t hi = static_cast<std::uint64_t>(prod >> 64);
      const std::uint64_t lo = static_cast<std::uint64_t>(prod);
      ctr0 = hi ^ k ^ ctr1;
      ctr1 = lo;
      k += kWeyl;
    }
    return {ctr0, ctr1};
  }

  std::uint64_t seed() const { return seed_; }

 private:
  static constexpr std::uint64_t kMul = 0xD2B74407B1CE6E93ULL;
  static constexpr std::uint64_t kWeyl = 0x9E3779B97F4A7C15ULL;

  std::uint64_t seed_;
};

inline double to_unit_double(std::uint64_t bits) {
  // 53-bit mantissa, value in [0, 1).
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Draws from one logical (stream, sim) cell. Streams index states of nature,
// sims index trial replications; blocks within a cell are consumed in order.
class SimDraws {
 public:
  SimDraws(const Philox2x64& engine, std::uint64_t stream, std::uint64_t sim)
      : engine_(&engine), ctr0_(sim), stream_(stream) {
    assert(stream < (std::uint64_t{1} << 44));
  }

  std::uint64_t next_u64() {
    if (pending_ == 0) {
      assert(block_ < (std::uint64_t{1} << 20));
      cur_ = engine_->block(ctr0_, (stream_ << 20) | block_);
      ++block_;
      pending_ = 2;
    }
    --pending_;
    return pending_ == 1 ? cur_.x0 : cur_.x1;
  }

  double next_unit() { return to_unit_double(next_u64()); }

 private:
  const Philox2x64* engine_;
  std::uint64_t ctr0_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  Philox2x64::Block cur_{0, 0};
  int pending_ = 0;
};

}  // namespace nearopt
