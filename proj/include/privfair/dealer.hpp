#pragma once

#include <array>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "privfair/prg.hpp"
#include "privfair/shares.hpp"

namespace privfair {

// Correlated randomness produced in the offline phase by a semi-honest
// trusted dealer process. The dealer never takes part in the online phase;
// batches are handed to the compute parties before the protocol starts.
enum class PrepKind : u8 { triples = 1, random_bits = 2, random_with_bits = 3 };

template <class S>
struct TripleShare {
  typename S::Share a, b, c;  // c = a*b in the ring
};

// A uniform r together with shares of its 64 low-order bits, consumed by
// the masked-opening equality / comparison / truncation protocols.
template <class S>
struct RandomWithBits {
  typename S::Share r;
  std::array<typename S::Share, kRingBits> bits;
};

// One party's pools, consumed front to back during the online phase.
template <class S>
class PrepPool {
 public:
  std::vector<TripleShare<S>> triples;
  std::vector<typename S::Share> random_bits;
  std::vector<RandomWithBits<S>> random_with_bits;

  const TripleShare<S>& take_triple() {
    if (triple_pos_ >= triples.size()) {
      throw PreprocessingExhausted("preprocessing exhausted: beaver triples");
    }
    return triples[triple_pos_++];
  }

  const typename S::Share& take_random_bit() {
    if (bit_pos_ >= random_bits.size()) {
      throw PreprocessingExhausted("preprocessing exhausted: random bits");
    }
    return random_bits[bit_pos_++];
  }

  const RandomWithBits<S>& take_random_with_bits() {
    if (rwb_pos_ >= random_with_bits.size()) {
      throw PreprocessingExhausted("preprocessing exhausted: random-with-bits");
    }
    return random_with_bits[rwb_pos_++];
  }

  size_t triples_used() const { return triple_pos_; }
  size_t random_bits_used() const { return bit_pos_; }
  size_t random_with_bits_used() const { return rwb_pos_; }

  void append(PrepPool&& other) {
    triples.insert(triples.end(), other.triples.begin(), other.triples.end());
    random_bits.insert(random_bits.end(), other.random_bits.begin(),
                       other.random_bits.end());
    random_with_bits.insert(random_with_bits.end(),
                            other.random_with_bits.begin(),
                            other.random_with_bits.end());
  }

 private:
  size_t triple_pos_ = 0;
  size_t bit_pos_ = 0;
  size_t rwb_pos_ = 0;
};

namespace detail {

template <class S, class F>
void emit_shared(F&& put, Ring secret, Prg& rng) {
  auto shares = S::share(secret, rng);
  for (int p = 0; p < S::kParties; ++p) put(p, shares[p]);
}

}  // namespace detail

// Generates `count` items of one kind for all parties of the scheme.
template <class S>
std::array<PrepPool<S>, S::kParties> dealer_gen(PrepKind kind, size_t count,
                                                Prg& rng) {
  if (count == 0) throw ParseError("dealer_gen: count must be at least 1");
  std::array<PrepPool<S>, S::kParties> pools;
  switch (kind) {
    case PrepKind::triples:
      for (size_t i = 0; i < count; ++i) {
        Ring a = rng.next_ring();
        Ring b = rng.next_ring();
        auto sa = S::share(a, rng);
        auto sb = S::share(b, rng);
        auto sc = S::share(a * b, rng);
        for (int p = 0; p < S::kParties; ++p) {
          pools[p].triples.push_back({sa[p], sb[p], sc[p]});
        }
      }
      break;
    case PrepKind::random_bits:
      for (size_t i = 0; i < count; ++i) {
        auto sh = S::share(Ring(rng.next_bit()), rng);
        for (int p = 0; p < S::kParties; ++p) pools[p].random_bits.push_back(sh[p]);
      }
      break;
    case PrepKind::random_with_bits:
      for (size_t i = 0; i < count; ++i) {
        Ring r = rng.next_ring();
        std::array<RandomWithBits<S>, S::kParties> item;
        auto sr = S::share(r, rng);
        for (int p = 0; p < S::kParties; ++p) item[p].r = sr[p];
        for (int j = 0; j < kRingBits; ++j) {
          auto sb = S::share(Ring((r.v >> j) & 1), rng);
          for (int p = 0; p < S::kParties; ++p) item[p].bits[j] = sb[p];
        }
        for (int p = 0; p < S::kParties; ++p) {
          pools[p].random_with_bits.push_back(item[p]);
        }
      }
      break;
  }
  return pools;
}

// ---------------------------------------------------------------------------
// Dealer output file format: magic "PFD1", scheme tag, kind tag, count
// (u32 LE), then packed 8-byte little-endian share limbs in party-major
// order (all of party 1's limbs, then party 2's, ...).

inline constexpr char kPrepMagic[4] = {'P', 'F', 'D', '1'};

template <class S>
size_t prep_limbs_per_item(PrepKind kind) {
  switch (kind) {
    case PrepKind::triples: return 3 * S::kLimbs;
    case PrepKind::random_bits: return S::kLimbs;
    case PrepKind::random_with_bits: return (1 + kRingBits) * S::kLimbs;
  }
  return 0;
}

template <class S>
void serialize_prep_party(const PrepPool<S>& pool, PrepKind kind,
                          std::vector<u8>& out) {
  switch (kind) {
    case PrepKind::triples:
      for (const auto& t : pool.triples) {
        S::store(t.a, out);
        S::store(t.b, out);
        S::store(t.c, out);
      }
      break;
    case PrepKind::random_bits:
      for (const auto& b : pool.random_bits) S::store(b, out);
      break;
    case PrepKind::random_with_bits:
      for (const auto& rwb : pool.random_with_bits) {
        S::store(rwb.r, out);
        for (const auto& b : rwb.bits) S::store(b, out);
      }
      break;
  }
}

template <class S>
PrepPool<S> parse_prep_party(PrepKind kind, size_t count,
                             std::span<const Ring> limbs) {
  PrepPool<S> pool;
  const Ring* p = limbs.data();
  const size_t per_item = prep_limbs_per_item<S>(kind);
  if (limbs.size() != count * per_item) {
    throw ParseError("prep payload: limb count mismatch");
  }
  for (size_t i = 0; i < count; ++i) {
    switch (kind) {
      case PrepKind::triples: {
        TripleShare<S> t;
        t.a = S::load(p);
        t.b = S::load(p + S::kLimbs);
        t.c = S::load(p + 2 * S::kLimbs);
        pool.triples.push_back(t);
        break;
      }
      case PrepKind::random_bits:
        pool.random_bits.push_back(S::load(p));
        break;
      case PrepKind::random_with_bits: {
        RandomWithBits<S> rwb;
        rwb.r = S::load(p);
        for (int j = 0; j < kRingBits; ++j) {
          rwb.bits[j] = S::load(p + (1 + j) * S::kLimbs);
        }
        pool.random_with_bits.push_back(rwb);
        break;
      }
    }
    p += per_item;
  }
  return pool;
}

template <class S>
std::vector<u8> serialize_prep(PrepKind kind,
                               std::span<const PrepPool<S>> pools) {
  size_t count = 0;
  switch (kind) {
    case PrepKind::triples: count = pools[0].triples.size(); break;
    case PrepKind::random_bits: count = pools[0].random_bits.size(); break;
    case PrepKind::random_with_bits: count = pools[0].random_with_bits.size(); break;
  }
  std::vector<u8> out;
  out.insert(out.end(), kPrepMagic, kPrepMagic + 4);
  out.push_back(static_cast<u8>(S::kKind));
  out.push_back(static_cast<u8>(kind));
  u8 cnt[4];
  store_le32(static_cast<u32>(count), cnt);
  out.insert(out.end(), cnt, cnt + 4);
  for (const auto& pool : pools) serialize_prep_party<S>(pool, kind, out);
  return out;
}

template <class S>
std::array<PrepPool<S>, S::kParties> parse_prep(std::span<const u8> bytes) {
  if (bytes.size() < 10 || std::memcmp(bytes.data(), kPrepMagic, 4) != 0) {
    throw ParseError("prep file: bad magic");
  }
  if (bytes[4] != static_cast<u8>(S::kKind)) {
    throw ParseError("prep file: scheme tag mismatch");
  }
  const auto kind = static_cast<PrepKind>(bytes[5]);
  if (kind != PrepKind::triples && kind != PrepKind::random_bits &&
      kind != PrepKind::random_with_bits) {
    throw ParseError("prep file: unknown kind tag");
  }
  const size_t count = load_le32(bytes.data() + 6);
  const auto limbs = unpack_rings(bytes.subspan(10));
  const size_t per_party = count * prep_limbs_per_item<S>(kind);
  if (limbs.size() != per_party * S::kParties) {
    throw ParseError("prep file: truncated body");
  }
  std::array<PrepPool<S>, S::kParties> pools;
  for (int p = 0; p < S::kParties; ++p) {
    pools[p] = parse_prep_party<S>(
        kind, count, std::span<const Ring>(limbs).subspan(p * per_party, per_party));
  }
  return pools;
}

}  // namespace privfair
