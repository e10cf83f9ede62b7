#pragma once

#include <cstdint>

namespace rdl {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;

// splitmix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// splitmix64 evaluated in counter mode: value of the stream keyed by `key`
// at position `counter`. Stateless, so any position can be computed without
// iterating, and fan-out across threads needs no shared state.
constexpr std::uint64_t counter_value(std::uint64_t key, std::uint64_t counter) noexcept {
  return mix64(key + kGoldenGamma * (counter + 1));
}

// Per-trajectory seed derivation: splitmix64 chaining over
// (master_seed, group_index, member_index).
constexpr std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t group,
                                    std::uint64_t member) noexcept {
  std::uint64_t s = mix64(master_seed ^ kGoldenGamma);
  s = mix64(s + kGoldenGamma * (group + 1));
  s = mix64(s + kGoldenGamma * (member + 1));
  return s;
}

class CounterRng {
public:
  explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(key) {}

  constexpr std::uint64_t next_u64() noexcept { return counter_value(key_, counter_++); }

  // Uniform on [0, 1) with 53 random mantissa bits.
  constexpr double next_unit() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  constexpr std::uint64_t key() const noexcept { return key_; }

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace rdl
