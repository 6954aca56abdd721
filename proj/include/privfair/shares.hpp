#pragma once

#include <array>
#include <span>
#include <vector>

#include "privfair/prg.hpp"
#include "privfair/ring.hpp"

namespace privfair {

enum class SchemeKind : u8 { additive2 = 2, replicated3 = 3 };

inline const char* scheme_name(SchemeKind k) {
  return k == SchemeKind::additive2 ? "2pc" : "3pc";
}

// Two-party additive sharing: share_1 + share_2 = secret mod 2^64. The
// dishonest-majority scheme; each party's share is individually uniform.
struct Additive2 {
  static constexpr SchemeKind kKind = SchemeKind::additive2;
  static constexpr int kParties = 2;
  static constexpr int kLimbs = 1;  // ring elements per share on the wire

  struct Share {
    Ring s{};

    friend Share operator+(Share a, Share b) { return {a.s + b.s}; }
    friend Share operator-(Share a, Share b) { return {a.s - b.s}; }
    friend Share operator-(Share a) { return {-a.s}; }
  };

  static std::array<Share, 2> share(Ring secret, Prg& rng) {
    Ring s1 = rng.next_ring();
    return {Share{s1}, Share{secret - s1}};
  }

  static Ring reconstruct(std::span<const Share> all) {
    if (all.size() != 2) throw ShapeError("additive2: need both shares");
    return all[0].s + all[1].s;
  }

  // Canonical sharing of a public constant: (c, 0). Addition of a constant
  // is local at party 1 only.
  static Share constant(Ring c, int party) {
    return party == 1 ? Share{c} : Share{};
  }

  static Share scale(Share a, Ring k) { return {a.s * k}; }

  static void store(const Share& sh, std::vector<u8>& out) { append_ring(out, sh.s); }
  static Share load(const Ring* limbs) { return Share{limbs[0]}; }
  static void push_limbs(const Share& sh, std::vector<Ring>& out) {
    out.push_back(sh.s);
  }
};

// Three-party replicated sharing (honest majority, passive): uniformly
// random x_1 + x_2 + x_3 = secret, party i holding the pair (x_i, x_{i+1}).
// Any two parties reconstruct; one alone learns nothing.
struct Replicated3 {
  static constexpr SchemeKind kKind = SchemeKind::replicated3;
  static constexpr int kParties = 3;
  static constexpr int kLimbs = 2;

  struct Share {
    Ring a{};  // x_i
    Ring b{};  // x_{i+1 mod 3}

    friend Share operator+(Share x, Share y) { return {x.a + y.a, x.b + y.b}; }
    friend Share operator-(Share x, Share y) { return {x.a - y.a, x.b - y.b}; }
    friend Share operator-(Share x) { return {-x.a, -x.b}; }
  };

  static std::array<Share, 3> share(Ring secret, Prg& rng) {
    Ring x1 = rng.next_ring();
    Ring x2 = rng.next_ring();
    Ring x3 = secret - x1 - x2;
    return {Share{x1, x2}, Share{x2, x3}, Share{x3, x1}};
  }

  // Checks pair consistency across the roster before summing.
  static Ring reconstruct(std::span<const Share> all) {
    if (all.size() != 3) throw ShapeError("replicated3: need all three shares");
    for (int i = 0; i < 3; ++i) {
      if (all[i].b != all[(i + 1) % 3].a) {
        throw IntegrityError("replicated3: share pair consistency violated");
      }
    }
    return all[0].a + all[1].a + all[2].a;
  }

  // Canonical sharing of a public constant: (c, 0, 0). Party 1 holds
  // (c, 0), party 2 holds (0, 0), party 3 holds (0, c).
  static Share constant(Ring c, int party) {
    switch (party) {
      case 1: return Share{c, Ring{}};
      case 3: return Share{Ring{}, c};
      default: return Share{};
    }
  }

  static Share scale(Share x, Ring k) { return {x.a * k, x.b * k}; }

  static void store(const Share& sh, std::vector<u8>& out) {
    append_ring(out, sh.a);
    append_ring(out, sh.b);
  }
  static Share load(const Ring* limbs) { return Share{limbs[0], limbs[1]}; }
  static void push_limbs(const Share& sh, std::vector<Ring>& out) {
    out.push_back(sh.a);
    out.push_back(sh.b);
  }
};

// A share of a value known to reconstruct to 0 or 1.
template <class S>
using SharedBit = typename S::Share;

}  // namespace privfair
