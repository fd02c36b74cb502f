#include "klpred/rng.hpp"

namespace klpred {

std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t hash64(std::string_view s) {
  // FNV-1a, then one splitmix round to spread low bits.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64_next(h);
}

std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index,
                             std::string_view tag) {
  std::uint64_t state = master;
  std::uint64_t a = splitmix64_next(state);
  state = index ^ 0x2545f4914f6cdd1dULL;
  std::uint64_t b = splitmix64_next(state);
  std::uint64_t mixed = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  std::uint64_t c = hash64(tag);
  std::uint64_t out = mixed ^ (c + 0x9e3779b97f4a7c15ULL + (mixed << 6) + (mixed >> 2));
  return splitmix64_next(out);
}

}  // namespace klpred
