#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

#include "privfair/errors.hpp"

namespace privfair {

using u8 = std::uint8_t;
using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;

// Element of Z_2^64. All arithmetic wraps mod 2^64; the signed view reads
// residues in [2^63, 2^64) as value - 2^64 (two's complement).
struct Ring {
  u64 v = 0;

  constexpr Ring() = default;
  constexpr explicit Ring(u64 x) : v(x) {}

  static constexpr Ring from_signed(i64 x) { return Ring(static_cast<u64>(x)); }
  constexpr i64 to_signed() const { return static_cast<i64>(v); }

  friend constexpr Ring operator+(Ring a, Ring b) { return Ring(a.v + b.v); }
  friend constexpr Ring operator-(Ring a, Ring b) { return Ring(a.v - b.v); }
  friend constexpr Ring operator*(Ring a, Ring b) { return Ring(a.v * b.v); }
  friend constexpr Ring operator-(Ring a) { return Ring(~a.v + 1); }
  friend constexpr bool operator==(Ring a, Ring b) { return a.v == b.v; }
  friend constexpr bool operator!=(Ring a, Ring b) { return a.v != b.v; }

  Ring& operator+=(Ring b) { v += b.v; return *this; }
  Ring& operator-=(Ring b) { v -= b.v; return *this; }
  Ring& operator*=(Ring b) { v *= b.v; return *this; }
};

inline constexpr int kRingBits = 64;

// Bijection between fixed-point reals and ring elements: encode(r) is
// round(r * 2^a) embedded two's-complement, a = frac_bits. Total width is
// fixed at 64 bits.
struct FixedPointCodec {
  int frac_bits = 16;

  constexpr double scale() const { return static_cast<double>(u64(1) << frac_bits); }

  // Injective for |r| < 2^(64 - a - 1); larger inputs are refused rather
  // than silently wrapping the integer part. Rounding is half-away-from-zero.
  Ring encode(double r) const {
    const double limit = std::ldexp(1.0, kRingBits - frac_bits - 1);
    if (!std::isfinite(r) || !(std::fabs(r) < limit)) {
      throw RangeError("encode: value out of fixed-point range");
    }
    const double scaled = std::round(std::ldexp(r, frac_bits));
    return Ring::from_signed(static_cast<i64>(scaled));
  }

  double decode(Ring e) const {
    return std::ldexp(static_cast<double>(e.to_signed()), -frac_bits);
  }
};

// Wire representation of a ring element: 8 bytes little-endian.
inline void store_le64(u64 x, u8* out) {
  for (int i = 0; i < 8; ++i) out[i] = static_cast<u8>(x >> (8 * i));
}

inline u64 load_le64(const u8* in) {
  u64 x = 0;
  for (int i = 0; i < 8; ++i) x |= static_cast<u64>(in[i]) << (8 * i);
  return x;
}

inline void store_le32(u32 x, u8* out) {
  for (int i = 0; i < 4; ++i) out[i] = static_cast<u8>(x >> (8 * i));
}

inline u32 load_le32(const u8* in) {
  u32 x = 0;
  for (int i = 0; i < 4; ++i) x |= static_cast<u32>(in[i]) << (8 * i);
  return x;
}

inline void append_ring(std::vector<u8>& buf, Ring r) {
  u8 tmp[8];
  store_le64(r.v, tmp);
  buf.insert(buf.end(), tmp, tmp + 8);
}

inline std::vector<u8> pack_rings(std::span<const Ring> rs) {
  std::vector<u8> buf;
  buf.reserve(rs.size() * 8);
  for (Ring r : rs) append_ring(buf, r);
  return buf;
}

inline std::vector<Ring> unpack_rings(std::span<const u8> bytes) {
  if (bytes.size() % 8 != 0) {
    throw ProtocolAbort("payload length is not a multiple of 8 bytes");
  }
  std::vector<Ring> rs(bytes.size() / 8);
  for (size_t i = 0; i < rs.size(); ++i) rs[i] = Ring(load_le64(bytes.data() + 8 * i));
  return rs;
}

}  // namespace privfair
