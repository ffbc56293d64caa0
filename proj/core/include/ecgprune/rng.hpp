#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace ecgprune {

// xoshiro256** with hand-rolled distributions. The standard library's
// distributions are implementation-defined, which would make seeded runs
// differ between toolchains; everything random in this project goes through
// this class so results stay reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);

  // Uniform double in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);

  // Standard normal via Box-Muller; caches the spare value.
  double normal();

  // In-place Fisher-Yates.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_[4];
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Identity permutation 0..n-1 shuffled by rng.
std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng);

std::uint64_t fnv1a64(std::string_view bytes);

// Stable derivation of named sub-stream seeds, e.g. the split/SMOTE/strategy
// seeds all descend from one top-level seed.
std::uint64_t mix_seed(std::uint64_t seed, std::string_view tag);
std::uint64_t mix_seed(std::uint64_t seed, std::string_view tag, double value);

}  // namespace ecgprune
