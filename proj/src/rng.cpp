#include "seqfdr/rng.hpp"

#include <array>

namespace seqfdr {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng make_rng(std::uint64_t seed, StreamPurpose purpose, std::uint64_t index) {
  const std::uint64_t p = static_cast<std::uint64_t>(purpose);
  const std::uint64_t a = mix64(seed);
  const std::uint64_t b = mix64(a ^ mix64(p));
  const std::uint64_t c = mix64(b ^ index);
  const std::array<std::uint32_t, 6> words{
      static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
      static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

}  // namespace seqfdr
