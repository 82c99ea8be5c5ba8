#pragma once

#include <cstdint>
#include <random>

namespace mpadp {

// Seeded stream built on std::mt19937_64, whose output sequence is fixed by
// the C++ standard. The draws below are computed by hand rather than through
// <random> distributions, whose algorithms are implementation-defined, so a
// seed yields the same numbers on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on (0, 1], 53-bit resolution.
  double uniform_open_closed() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [lo, hi] by rejection sampling.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(next_u64());
    // 2^64 mod span values at the top of the range would bias the result.
    const std::uint64_t excess = (UINT64_MAX % span + 1) % span;
    std::uint64_t x = next_u64();
    while (x > UINT64_MAX - excess) x = next_u64();
    return lo + static_cast<std::int64_t>(x % span);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mpadp
