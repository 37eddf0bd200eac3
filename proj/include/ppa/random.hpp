#pragma once

#include <cstdint>

#include <boost/random/mersenne_twister.hpp>

namespace ppa {

// Boost's engine and distributions produce the same sequences on every
// standard library, which the byte-identical output guarantees rely on.
using Rng = boost::random::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream seed for (run seed, stream id). Stream ids in use:
// 0 = environment rewards, 1 + rank = agent `rank`.
inline std::uint64_t derive_seed(std::uint64_t run_seed, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(run_seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

}  // namespace ppa
