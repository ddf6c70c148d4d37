#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace ukad {

// Seeded generator with a portable bounded draw. std::uniform_int_distribution
// is implementation-defined, so sampling goes through uniform_index() to keep
// outputs identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Derives an independent stream for one (dialogue, turn) from a base seed.
  static Rng for_turn(std::uint64_t seed, std::string_view dialogue_id,
                      int turn);

  // Uniform integer in [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n);

  // Uniform real in [0, 1) with 53 random bits.
  double uniform_real();

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  explicit Rng(std::seed_seq& seq) : engine_(seq) {}

  std::mt19937_64 engine_;
};

}  // namespace ukad
