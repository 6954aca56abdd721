#include <gtest/gtest.h>

#include "privfair/shares.hpp"

namespace privfair {
namespace {

// chi-square critical value, 255 degrees of freedom, upper tail 0.01.
constexpr double kChi2Crit255 = 310.4574;

template <class S>
double chi_square_low_byte(Ring secret, u64 seed, int party, int limb) {
  Prg rng(seed);
  std::array<int, 256> buckets{};
  const int samples = 10000;
  for (int i = 0; i < samples; ++i) {
    auto shares = S::share(secret, rng);
    u64 v;
    if constexpr (S::kKind == SchemeKind::additive2) {
      v = shares[party].s.v;
    } else {
      v = limb == 0 ? shares[party].a.v : shares[party].b.v;
    }
    buckets[v & 0xff]++;
  }
  const double expected = samples / 256.0;
  double stat = 0;
  for (int count : buckets) {
    const double d = count - expected;
    stat += d * d / expected;
  }
  return stat;
}

TEST(Additive2, ShareReconstructRoundtrip) {
  Prg rng(1);
  {
    auto sh = Additive2::share(Ring(0), rng);
    EXPECT_EQ(Additive2::reconstruct(std::span<const Additive2::Share>(sh)).v, 0u);
  }
  for (int i = 0; i < 10000; ++i) {
    Ring x = rng.next_ring();
    auto sh = Additive2::share(x, rng);
    ASSERT_EQ(Additive2::reconstruct(std::span<const Additive2::Share>(sh)).v, x.v);
  }
}

TEST(Replicated3, ShareReconstructRoundtrip) {
  Prg rng(2);
  for (int i = 0; i < 10000; ++i) {
    Ring x = rng.next_ring();
    auto sh = Replicated3::share(x, rng);
    ASSERT_EQ(Replicated3::reconstruct(std::span<const Replicated3::Share>(sh)).v, x.v);
  }
}

TEST(Replicated3, PairOverlapStructure) {
  Prg rng(3);
  auto sh = Replicated3::share(Ring(42), rng);
  // Party i's second limb is party i+1's first limb.
  EXPECT_EQ(sh[0].b.v, sh[1].a.v);
  EXPECT_EQ(sh[1].b.v, sh[2].a.v);
  EXPECT_EQ(sh[2].b.v, sh[0].a.v);
}

TEST(Linearity, SharewiseSumReconstructsToSum) {
  Prg rng(4);
  for (int i = 0; i < 100; ++i) {
    Ring x = rng.next_ring(), y = rng.next_ring();
    {
      auto sx = Additive2::share(x, rng);
      auto sy = Additive2::share(y, rng);
      std::array<Additive2::Share, 2> sum{sx[0] + sy[0], sx[1] + sy[1]};
      ASSERT_EQ(Additive2::reconstruct(std::span<const Additive2::Share>(sum)).v,
                (x + y).v);
    }
    {
      auto sx = Replicated3::share(x, rng);
      auto sy = Replicated3::share(y, rng);
      std::array<Replicated3::Share, 3> sum{sx[0] + sy[0], sx[1] + sy[1], sx[2] + sy[2]};
      ASSERT_EQ(Replicated3::reconstruct(std::span<const Replicated3::Share>(sum)).v,
                (x + y).v);
    }
  }
}

TEST(Linearity, PublicScalingCommutesWithReconstruction) {
  Prg rng(5);
  for (int i = 0; i < 100; ++i) {
    Ring x = rng.next_ring();
    Ring k = rng.next_ring();
    auto sx = Replicated3::share(x, rng);
    std::array<Replicated3::Share, 3> scaled{Replicated3::scale(sx[0], k),
                                             Replicated3::scale(sx[1], k),
                                             Replicated3::scale(sx[2], k)};
    ASSERT_EQ(Replicated3::reconstruct(std::span<const Replicated3::Share>(scaled)).v,
              (x * k).v);
  }
}

TEST(CanonicalConstants, ReconstructToTheConstant) {
  Ring c(123456789);
  std::array<Additive2::Share, 2> a2{Additive2::constant(c, 1), Additive2::constant(c, 2)};
  EXPECT_EQ(Additive2::reconstruct(std::span<const Additive2::Share>(a2)).v, c.v);
  std::array<Replicated3::Share, 3> r3{Replicated3::constant(c, 1),
                                       Replicated3::constant(c, 2),
                                       Replicated3::constant(c, 3)};
  EXPECT_EQ(Replicated3::reconstruct(std::span<const Replicated3::Share>(r3)).v, c.v);
}

TEST(FaultInjection, PerturbedAdditiveShareChangesValue) {
  Prg rng(6);
  Ring x(777);
  auto sh = Additive2::share(x, rng);
  sh[0].s += Ring(1);
  EXPECT_NE(Additive2::reconstruct(std::span<const Additive2::Share>(sh)).v, x.v);
}

TEST(FaultInjection, PerturbedReplicatedShareFailsIntegrity) {
  Prg rng(7);
  auto sh = Replicated3::share(Ring(777), rng);
  for (int p = 0; p < 3; ++p) {
    for (int limb = 0; limb < 2; ++limb) {
      auto bad = sh;
      (limb == 0 ? bad[p].a : bad[p].b) += Ring(1);
      EXPECT_THROW(Replicated3::reconstruct(std::span<const Replicated3::Share>(bad)),
                   IntegrityError);
    }
  }
}

TEST(ShareUniformity, ChiSquareLowByteAcrossTwoSecrets) {
  // Share marginals must look uniform regardless of the secret: chi-square
  // over the low 8 bits of 10^4 sharings, p > 0.01.
  const Ring secrets[2] = {Ring(0), Ring::from_signed(-123456789)};
  int check = 0;
  for (const Ring secret : secrets) {
    EXPECT_LT((chi_square_low_byte<Additive2>(secret, 100 + check, 0, 0)), kChi2Crit255);
    EXPECT_LT((chi_square_low_byte<Additive2>(secret, 200 + check, 1, 0)), kChi2Crit255);
    EXPECT_LT((chi_square_low_byte<Replicated3>(secret, 300 + check, 0, 0)), kChi2Crit255);
    EXPECT_LT((chi_square_low_byte<Replicated3>(secret, 400 + check, 1, 1)), kChi2Crit255);
    EXPECT_LT((chi_square_low_byte<Replicated3>(secret, 500 + check, 2, 0)), kChi2Crit255);
    ++check;
  }
}

}  // namespace
}  // namespace privfair
