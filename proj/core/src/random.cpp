#include "ukad/random.hpp"

#include <limits>
#include <stdexcept>
#include <vector>

namespace ukad {

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

Rng Rng::for_turn(std::uint64_t seed, std::string_view dialogue_id, int turn) {
  std::vector<std::uint32_t> material;
  material.reserve(dialogue_id.size() + 3);
  material.push_back(static_cast<std::uint32_t>(seed));
  material.push_back(static_cast<std::uint32_t>(seed >> 32));
  material.push_back(static_cast<std::uint32_t>(turn));
  for (unsigned char c : dialogue_id) material.push_back(c);
  std::seed_seq seq(material.begin(), material.end());
  return Rng(seq);
}

std::size_t Rng::uniform_index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
  const std::uint64_t bound = n;
  // Reject the top partial bucket so every residue is equally likely.
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

double Rng::uniform_real() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

}  // namespace ukad
