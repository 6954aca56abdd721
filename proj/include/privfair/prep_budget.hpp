#pragma once

#include <cstddef>
#include <vector>

#include "privfair/oracle.hpp"
#include "privfair/primitives.hpp"
#include "privfair/report.hpp"

namespace privfair {

// Sizing of the dealer's offline batches. The formulas mirror the round
// structure of the online protocols and round up wherever a count depends
// on public masked values; the final demand is over-provisioned by 10% on
// top to absorb batching granularity.

struct PrepDemand {
  size_t triples = 0;
  size_t random_bits = 0;
  size_t random_with_bits = 0;

  PrepDemand& operator+=(const PrepDemand& o) {
    triples += o.triples;
    random_bits += o.random_bits;
    random_with_bits += o.random_with_bits;
    return *this;
  }
  friend PrepDemand operator+(PrepDemand a, const PrepDemand& b) { return a += b; }
  friend PrepDemand operator*(size_t k, PrepDemand d) {
    return {k * d.triples, k * d.random_bits, k * d.random_with_bits};
  }
};

namespace budget {

inline PrepDemand muls(size_t n) { return {n, 0, 0}; }

inline size_t suffix_muls(size_t m) {
  size_t total = 0;
  for (size_t step = 1; step < m; step *= 2) total += m - step;
  return total;
}

// [c < r]: suffix products plus at most one term per bit.
inline PrepDemand lt(size_t m) { return muls(suffix_muls(m) + m); }

inline PrepDemand eq_public() { return muls(kRingBits - 1) + PrepDemand{0, 0, 1}; }

inline PrepDemand msb() { return lt(63) + muls(1) + PrepDemand{0, 0, 1}; }

inline PrepDemand trunc(int frac_bits) {
  return lt(kRingBits) + lt(frac_bits) + PrepDemand{0, 0, 1};
}

inline PrepDemand bit_decompose(size_t m) {
  return muls(m - 1) + PrepDemand{0, 0, 1};
}

inline PrepDemand div(int a) {
  PrepDemand d = bit_decompose(kCountBits);
  d += muls(suffix_muls(kCountBits));  // prefix-OR
  d += muls(1) + trunc(a);             // normalization
  d += 5 * (muls(2) + 2 * PrepDemand(trunc(a)));  // Newton-Raphson
  d += muls(2) + trunc(2 * a);         // scale back
  return d;
}

inline PrepDemand infer_lr(size_t n, size_t d, int a) {
  return muls(n * d) + n * trunc(a) + n * msb();
}

inline PrepDemand infer_mlp(size_t n, size_t d, size_t h, size_t C, int a) {
  PrepDemand out = muls(n * d * h) + (n * h) * trunc(a);  // layer 1
  out += (n * h) * msb() + muls(n * h);                   // relu
  out += muls(n * h * C) + (n * C) * trunc(a);            // layer 2
  out += (C - 1) * (n * PrepDemand(msb()) + muls(2 * n)); // argmax
  return out;
}

inline PrepDemand infer(ModelArch arch, size_t n, size_t d, size_t h, size_t C,
                        int a) {
  return arch == ModelArch::logistic_regression ? infer_lr(n, d, a)
                                                : infer_mlp(n, d, h, C, a);
}

inline PrepDemand metric(MetricKind m, ModelArch arch, size_t n, size_t d,
                         size_t h, size_t C, int a) {
  PrepDemand out = infer(arch, n, d, h, C, a);
  switch (m) {
    case MetricKind::eod:
      out += (2 * n * C) * eq_public() + muls(4 * n * C);
      out += (4 * C) * div(a) + (4 * C) * eq_public();
      break;
    case MetricKind::eop:
      out += (2 * n) * eq_public() + muls(3 * n);
      out += 2 * div(a) + 2 * PrepDemand(eq_public());
      break;
    case MetricKind::gacc:
      out += n * eq_public() + muls(n);
      out += 2 * div(a) + 2 * PrepDemand(eq_public()) + trunc(a);
      break;
    case MetricKind::dp:
      out += (2 * n) * eq_public() + muls(4 * n);
      out += 2 * div(a) + 2 * PrepDemand(eq_public());
      break;
  }
  return out;
}

}  // namespace budget

// Demand for a full audit: the selected metrics in order, each re-running
// secure inference, plus 10% headroom. Replicated-sharing multiplication
// reshares with a pseudorandom zero-sharing, so 3PC consumes no triples.
inline PrepDemand audit_prep_demand(const std::vector<MetricKind>& metrics,
                                    ModelArch arch, size_t n, size_t d, size_t h,
                                    size_t C, int frac_bits,
                                    SchemeKind scheme = SchemeKind::additive2) {
  PrepDemand total;
  for (MetricKind m : metrics) {
    total += budget::metric(m, arch, n, d, h, C, frac_bits);
  }
  total.triples += total.triples / 10 + 16;
  total.random_bits += total.random_bits / 10;
  total.random_with_bits += total.random_with_bits / 10 + 16;
  if (scheme == SchemeKind::replicated3) total.triples = 0;
  return total;
}

}  // namespace privfair
