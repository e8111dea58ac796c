#pragma once

#include <cstdint>
#include <vector>

namespace wsqa {

// Deterministic 64-bit generator (splitmix64). The standard distributions
// are not pinned across implementations, so every stochastic choice in the
// project goes through this wrapper: fixed bit-for-bit output for a seed.
class DetRng {
 public:
  explicit DetRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97f4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_unit() { return (next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [0, n). Modulo bias is irrelevant here; reproducibility is.
  std::uint64_t next_below(std::uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

  std::int64_t next_in(std::int64_t lo, std::int64_t hi) {  // inclusive bounds
    return lo + static_cast<std::int64_t>(next_below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Independent substream for a labeled purpose (per-split seeds etc.).
  DetRng fork(std::uint64_t stream) const {
    DetRng r(state_ ^ (0xD6E8FEB86659FD93ULL * (stream + 1)));
    r.next_u64();
    return r;
  }

 private:
  std::uint64_t state_;
};

}  // namespace wsqa
