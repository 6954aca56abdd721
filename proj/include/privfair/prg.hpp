#pragma once

#include <cstdint>
#include <cstdlib>
#include <random>
#include <string_view>

#include "privfair/ring.hpp"

namespace privfair {

// Deterministic counter-mode generator (splitmix64). Shares, zero-sharings
// and dealer randomness are all drawn from seeded instances of this, so a
// fixed master seed reproduces every transcript byte for byte. The seed is
// taken from a system entropy source unless PRIVFAIR_SEED pins it.
class Prg {
 public:
  explicit Prg(u64 seed) : state_(seed) {}

  u64 next_u64() {
    u64 z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  Ring next_ring() { return Ring(next_u64()); }

  u64 next_bit() { return next_u64() >> 63; }

  // Uniform in [0, bound) by rejection.
  u64 next_below(u64 bound) {
    const u64 threshold = (0 - bound) % bound;
    for (;;) {
      u64 x = next_u64();
      if (x >= threshold) return x % bound;
    }
  }

  double next_unit_double() {  // [0, 1)
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Independent child stream; used to hand each subsystem its own lane of
  // the master seed.
  Prg fork(u64 salt) { return Prg(next_u64() ^ (salt * 0x9e3779b97f4a7c15ULL)); }

 private:
  u64 state_;
};

// FNV-1a, for deriving stable salts from textual labels.
inline u64 hash_label(std::string_view s) {
  u64 h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<u8>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Master seed: PRIVFAIR_SEED if set (test-only determinism), otherwise
// system entropy.
inline u64 master_seed() {
  if (const char* env = std::getenv("PRIVFAIR_SEED")) {
    return std::strtoull(env, nullptr, 0);
  }
  std::random_device rd;
  return (static_cast<u64>(rd()) << 32) ^ rd();
}

}  // namespace privfair
