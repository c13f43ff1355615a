#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace eigenrec {

/// splitmix64 finalizer; also used as the index hash for sub-seeding.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Sub-seed for stream `index` of a run seeded with `seed`: seed ^ splitmix64(index + 1).
/// Independent of generation order, so parallel workers reproduce serial output.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

/// xoshiro256** 1.0 (Blackman & Vigna). State is expanded from a single
/// 64-bit seed with splitmix64. This is the pinned generator behind every
/// persisted artifact; the name stored in files is `kGeneratorName`.
class Rng {
 public:
  using result_type = std::uint64_t;
  static constexpr const char* kGeneratorName = "xoshiro256**/splitmix64";

  explicit Rng(std::uint64_t seed) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }
  result_type operator()() noexcept { return next(); }

  std::uint64_t next() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) noexcept;
  /// Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n) noexcept;
  /// Standard normal via Box-Muller; the spare deviate is cached.
  double normal() noexcept;

  template <class T>
  void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::array<std::uint64_t, 4> s_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace eigenrec
