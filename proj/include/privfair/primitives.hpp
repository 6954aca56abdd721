#pragma once

#include <cassert>
#include <span>
#include <vector>

#include "privfair/engine.hpp"

namespace privfair {

// Secure subprotocols on secret-shared values. Everything here is batched:
// one call processes a whole vector and the communication rounds are shared
// across the batch. The non-linear work is all expressed through Engine::mul
// on shared bits, fed by dealer random-with-bits items.

// Counts in the audit protocols stay below 2^20 (dataset size bound), so
// bit decompositions of counts use this width.
inline constexpr int kCountBits = 21;

// Shared bits laid out instance-major: bit j of instance i at [i*m + j].
template <class S>
struct BitRows {
  size_t n = 0;
  size_t m = 0;
  std::vector<typename S::Share> bits;

  typename S::Share& at(size_t i, size_t j) { return bits[i * m + j]; }
  const typename S::Share& at(size_t i, size_t j) const { return bits[i * m + j]; }
};

namespace detail {

// Inclusive suffix products per row: out[i][j] = prod_{k >= j} in[i][k].
// Doubling scheme, ceil(log2 m) rounds.
template <class S>
BitRows<S> suffix_products(Engine<S>& e, BitRows<S> rows) {
  using Share = typename S::Share;
  for (size_t step = 1; step < rows.m; step *= 2) {
    std::vector<Share> lhs, rhs;
    for (size_t i = 0; i < rows.n; ++i) {
      for (size_t j = 0; j + step < rows.m; ++j) {
        lhs.push_back(rows.at(i, j));
        rhs.push_back(rows.at(i, j + step));
      }
    }
    auto prod = e.mul(lhs, rhs);
    size_t k = 0;
    for (size_t i = 0; i < rows.n; ++i) {
      for (size_t j = 0; j + step < rows.m; ++j) rows.at(i, j) = prod[k++];
    }
  }
  return rows;
}

// AND over each row, pairwise tree, ceil(log2 m) rounds.
template <class S>
std::vector<typename S::Share> and_rows(Engine<S>& e, BitRows<S> rows) {
  using Share = typename S::Share;
  size_t width = rows.m;
  while (width > 1) {
    const size_t pairs = width / 2;
    std::vector<Share> lhs, rhs;
    for (size_t i = 0; i < rows.n; ++i) {
      for (size_t j = 0; j < pairs; ++j) {
        lhs.push_back(rows.at(i, 2 * j));
        rhs.push_back(rows.at(i, 2 * j + 1));
      }
    }
    auto prod = e.mul(lhs, rhs);
    size_t k = 0;
    const size_t next_width = pairs + (width % 2);
    for (size_t i = 0; i < rows.n; ++i) {
      for (size_t j = 0; j < pairs; ++j) rows.bits[i * rows.m + j] = prod[k++];
      if (width % 2) rows.bits[i * rows.m + pairs] = rows.at(i, width - 1);
    }
    width = next_width;
  }
  std::vector<Share> out(rows.n);
  for (size_t i = 0; i < rows.n; ++i) out[i] = rows.at(i, 0);
  return out;
}

// Per-row bit equality with a public value: e_j = (r_j == c_j), linear in
// the shared bit for a public c_j.
template <class S>
BitRows<S> bit_eq_public(Engine<S>& e, std::span<const u64> c,
                         const BitRows<S>& rbits, size_t m) {
  BitRows<S> out{rbits.n, m, {}};
  out.bits.resize(rbits.n * m);
  const Ring one(1);
  for (size_t i = 0; i < rbits.n; ++i) {
    for (size_t j = 0; j < m; ++j) {
      const bool cj = (c[i] >> j) & 1;
      out.at(i, j) = cj ? rbits.at(i, j) : e.const_minus(one, rbits.at(i, j));
    }
  }
  return out;
}

// [c_i < r_i] per row, where c is public and r is given by its shared bits
// (low m bits). MSB-first comparison via suffix equality products.
template <class S>
std::vector<typename S::Share> lt_public(Engine<S>& e, std::span<const u64> c,
                                         const BitRows<S>& rbits, size_t m) {
  using Share = typename S::Share;
  if (m == 0) return std::vector<Share>(rbits.n);
  auto eq = bit_eq_public(e, c, rbits, m);
  // Shift one left so position j holds prod_{k > j} e_k.
  BitRows<S> shifted{eq.n, m, {}};
  shifted.bits.resize(eq.n * m);
  for (size_t i = 0; i < eq.n; ++i) {
    for (size_t j = 0; j + 1 < m; ++j) shifted.at(i, j) = eq.at(i, j + 1);
    shifted.at(i, m - 1) = e.constant(Ring(1));
  }
  auto pref = suffix_products(e, std::move(shifted));
  // Sum r_j * pref_j over positions where c_j == 0.
  std::vector<Share> lhs, rhs;
  for (size_t i = 0; i < rbits.n; ++i) {
    for (size_t j = 0; j < m; ++j) {
      if (((c[i] >> j) & 1) == 0) {
        lhs.push_back(rbits.at(i, j));
        rhs.push_back(pref.at(i, j));
      }
    }
  }
  auto terms = e.mul(lhs, rhs);
  std::vector<Share> out(rbits.n);
  size_t k = 0;
  for (size_t i = 0; i < rbits.n; ++i) {
    Share acc{};
    for (size_t j = 0; j < m; ++j) {
      if (((c[i] >> j) & 1) == 0) acc = acc + terms[k++];
    }
    out[i] = acc;
  }
  return out;
}

template <class S>
struct MaskedOpen {
  std::vector<u64> opened;  // public masked values
  BitRows<S> rbits;         // the masks' shared bits
};

// Opens x_i + r_i with fresh dealer masks; the opened values are uniform.
template <class S>
MaskedOpen<S> open_with_mask(Engine<S>& e, std::span<const typename S::Share> x,
                             Ring offset = Ring(0)) {
  using Share = typename S::Share;
  const size_t n = x.size();
  MaskedOpen<S> out;
  out.rbits.n = n;
  out.rbits.m = kRingBits;
  out.rbits.bits.resize(n * kRingBits);
  std::vector<Share> masked(n);
  for (size_t i = 0; i < n; ++i) {
    const auto& rwb = e.prep().take_random_with_bits();
    masked[i] = e.add_const(x[i] + rwb.r, offset);
    for (int j = 0; j < kRingBits; ++j) out.rbits.at(i, j) = rwb.bits[j];
  }
  auto rings = e.open_masked(masked);
  out.opened.resize(n);
  for (size_t i = 0; i < n; ++i) out.opened[i] = rings[i].v;
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// eq_public: shared bit, 1 iff x == c. x must be an integer-encoded value
// (no fractional part); equality is taken in the full ring, so negative
// differences compare correctly.
template <class S>
std::vector<typename S::Share> eq_public(Engine<S>& e,
                                         std::span<const typename S::Share> x,
                                         std::span<const u64> c) {
  if (x.size() != c.size()) throw ShapeError("eq_public: length mismatch");
  OpScope scope(e.session(), "eq_public");
  using Share = typename S::Share;
  const size_t n = x.size();
  std::vector<Share> shifted(n);
  for (size_t i = 0; i < n; ++i) shifted[i] = e.add_const(x[i], -Ring(c[i]));
  auto mo = detail::open_with_mask(e, std::span<const Share>(shifted));
  // x - c + r == r  iff  x == c; compare all 64 digits with an AND tree.
  auto eq = detail::bit_eq_public(e, mo.opened, mo.rbits, kRingBits);
  return detail::and_rows(e, std::move(eq));
}

template <class S>
std::vector<typename S::Share> eq_public(Engine<S>& e,
                                         std::span<const typename S::Share> x,
                                         u64 c) {
  std::vector<u64> cs(x.size(), c);
  return eq_public(e, x, std::span<const u64>(cs));
}

// eqz: 1 iff x == 0.
template <class S>
std::vector<typename S::Share> eqz(Engine<S>& e,
                                   std::span<const typename S::Share> x) {
  return eq_public(e, x, u64(0));
}

// msb: 1 iff the signed interpretation of x is negative. Computed from a
// masked opening of x + r by reconstructing the borrow into bit 63.
template <class S>
std::vector<typename S::Share> msb(Engine<S>& e,
                                   std::span<const typename S::Share> x) {
  OpScope scope(e.session(), "msb");
  using Share = typename S::Share;
  const size_t n = x.size();
  auto mo = detail::open_with_mask(e, x);
  // x = c - r. Bit 63 of x is c63 ^ r63 ^ borrow, with borrow =
  // [c mod 2^63 < r mod 2^63].
  std::vector<u64> c_low(n);
  for (size_t i = 0; i < n; ++i) c_low[i] = mo.opened[i] & ~(u64(1) << 63);
  auto borrow = detail::lt_public(e, c_low, mo.rbits, 63);
  std::vector<Share> r63(n);
  for (size_t i = 0; i < n; ++i) r63[i] = mo.rbits.at(i, 63);
  auto both = e.mul(r63, borrow);
  std::vector<Share> out(n);
  for (size_t i = 0; i < n; ++i) {
    Share x63 = r63[i] + borrow[i] - both[i] - both[i];  // r63 xor borrow
    const bool c63 = (mo.opened[i] >> 63) & 1;
    out[i] = c63 ? e.const_minus(Ring(1), x63) : x63;
  }
  return out;
}

// trunc: floor division of the signed value by 2^frac_bits. Requires the
// signed magnitude below 2^62. The received bits of the mask let the
// parties reconstruct both the wraparound and the low-part borrow, so the
// result is exact (well within the 1-LSB contract).
template <class S>
std::vector<typename S::Share> trunc(Engine<S>& e,
                                     std::span<const typename S::Share> x,
                                     int frac_bits) {
  if (frac_bits < 1 || frac_bits > 62) throw ShapeError("trunc: bad frac_bits");
  OpScope scope(e.session(), "trunc");
  using Share = typename S::Share;
  const size_t n = x.size();
  const Ring bias(u64(1) << 62);
  auto mo = detail::open_with_mask(e, x, bias);
  // x + bias = c - r + w*2^64 as integers, w = [c < r].
  auto wrap = detail::lt_public(e, mo.opened, mo.rbits, kRingBits);
  std::vector<u64> c_low(n);
  const u64 low_mask = (u64(1) << frac_bits) - 1;
  for (size_t i = 0; i < n; ++i) c_low[i] = mo.opened[i] & low_mask;
  auto borrow = detail::lt_public(e, c_low, mo.rbits, frac_bits);
  std::vector<Share> out(n);
  for (size_t i = 0; i < n; ++i) {
    // floor((x+bias)/2^a) = (c >> a) - (r >> a) + w*2^(64-a) - borrow.
    Share r_high{};
    for (int j = frac_bits; j < kRingBits; ++j) {
      r_high = r_high + e.mul_public(mo.rbits.at(i, j), Ring(u64(1) << (j - frac_bits)));
    }
    Share res = e.constant(Ring(mo.opened[i] >> frac_bits)) - r_high +
                e.mul_public(wrap[i], Ring(u64(1) << (kRingBits - frac_bits))) -
                borrow[i];
    out[i] = e.add_const(res, -Ring(u64(1) << (62 - frac_bits)));
  }
  return out;
}

// bit_decompose: shared bits 0..m-1 of an integer-encoded x, via a masked
// opening and a borrow-propagating subtraction against the mask's bits.
template <class S>
BitRows<S> bit_decompose(Engine<S>& e, std::span<const typename S::Share> x,
                         size_t m) {
  using Share = typename S::Share;
  const size_t n = x.size();
  auto mo = detail::open_with_mask(e, x);
  BitRows<S> out{n, m, {}};
  out.bits.resize(n * m);
  // x = c - r; walk the borrow chain from bit 0.
  std::vector<Share> borrow(n);  // zero shares
  for (size_t j = 0; j < m; ++j) {
    std::vector<Share> rj(n);
    for (size_t i = 0; i < n; ++i) rj[i] = mo.rbits.at(i, j);
    std::vector<Share> rb;
    if (j > 0) rb = e.mul(rj, borrow);
    for (size_t i = 0; i < n; ++i) {
      const bool cj = (mo.opened[i] >> j) & 1;
      const Share t = j > 0 ? rb[i] : Share{};
      Share r_xor_b = rj[i] + borrow[i] - t - t;
      out.at(i, j) = cj ? e.const_minus(Ring(1), r_xor_b) : r_xor_b;
      borrow[i] = cj ? t : rj[i] + borrow[i] - t;
    }
  }
  return out;
}

// div: fixed-point quotient n/d at the codec's precision, |error| <= 2^-10.
// d encodes a count below 2^(kCountBits-1); quotients must stay below
// 2^(k - 3a - 2), which count ratios (<= 1) always satisfy. d = 0 produces
// an unspecified value (0 here); callers pair the result with an eqz flag
// on the denominator, since branching on it would leak.
//
// Reciprocal Newton-Raphson: normalize d into [0.5, 1) via prefix-OR over
// its bits, start from w0 = 2.9142 - 2*d_norm, five iterations, then scale
// back.
template <class S>
std::vector<typename S::Share> div_counts(Engine<S>& e,
                                          std::span<const typename S::Share> num,
                                          std::span<const typename S::Share> den) {
  if (num.size() != den.size()) throw ShapeError("div: length mismatch");
  using Share = typename S::Share;
  const int a = e.codec().frac_bits;
  if (a < 11 || 3 * a + 2 > kRingBits) throw ShapeError("div: frac_bits out of range");
  e.session().count_divs(num.size());  // attributed to the caller's label
  OpScope scope(e.session(), "div");
  const size_t n = num.size();
  const size_t m = kCountBits;

  auto dbits = bit_decompose(e, den, m);
  // Prefix-OR (from the MSB) via suffix products of complements.
  BitRows<S> comp{n, m, {}};
  comp.bits.resize(n * m);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < m; ++j) {
      comp.at(i, j) = e.const_minus(Ring(1), dbits.at(i, j));
    }
  }
  auto noneset = detail::suffix_products(e, std::move(comp));
  // h_j = 1 iff the highest set bit of d is j; s2 = sum h_j * 2^(2a-1-j)
  // scales d into [0.5, 1) at 2a fractional bits.
  std::vector<Share> s2(n);
  for (size_t i = 0; i < n; ++i) {
    Share acc{};
    for (size_t j = 0; j < m; ++j) {
      Share o_j = e.const_minus(Ring(1), noneset.at(i, j));
      Share o_next = j + 1 < m ? e.const_minus(Ring(1), noneset.at(i, j + 1)) : Share{};
      Share h_j = o_j - o_next;
      acc = acc + e.mul_public(h_j, Ring(u64(1) << (2 * a - 1 - j)));
    }
    s2[i] = acc;
  }
  auto d_norm2a = e.mul(den, s2);
  auto d_norm = trunc(e, std::span<const Share>(d_norm2a), a);

  const Ring two_fp(u64(2) << a);
  std::vector<Share> w(n);
  const Ring w0_const = e.codec().encode(2.9142);
  for (size_t i = 0; i < n; ++i) {
    w[i] = e.const_minus(w0_const, d_norm[i] + d_norm[i]);
  }
  for (int it = 0; it < 5; ++it) {
    auto t2a = e.mul(w, d_norm);
    auto t = trunc(e, std::span<const Share>(t2a), a);
    std::vector<Share> u(n);
    for (size_t i = 0; i < n; ++i) u[i] = e.const_minus(two_fp, t[i]);
    auto w2a = e.mul(w, u);
    w = trunc(e, std::span<const Share>(w2a), a);
  }
  auto p1 = e.mul(num, w);                               // n*w at a frac bits
  auto p2 = e.mul(p1, s2);                               // times 2^(2a-1-j)
  return trunc(e, std::span<const Share>(p2), 2 * a);    // back to a frac bits
}

}  // namespace privfair
