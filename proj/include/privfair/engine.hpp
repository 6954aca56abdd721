#pragma once

#include <optional>
#include <span>
#include <vector>

#include "privfair/dealer.hpp"
#include "privfair/session.hpp"
#include "privfair/shares.hpp"

namespace privfair {

// Scheme-generic share arithmetic bound to one session. Linear operations
// are local; mul and the openings cost communication rounds. All
// interactive operations are batched: one call, one round, any width.
template <class S>
class Engine {
 public:
  using Share = typename S::Share;

  Engine(Session& session, PrepPool<S> prep)
      : sess_(session),
        prep_(std::move(prep)),
        rng_(Prg(session.config().seed).fork(session.party())) {
    if (session.config().scheme != S::kKind) {
      throw ShapeError("engine scheme does not match session scheme");
    }
  }

  Session& session() { return sess_; }
  const FixedPointCodec& codec() const { return sess_.config().codec; }
  int party() const { return sess_.party(); }
  PrepPool<S>& prep() { return prep_; }

  // One-time session setup. In the replicated scheme the parties establish
  // pairwise PRF seeds so that multiplications can reshare with a
  // pseudorandom zero-sharing and no dealer involvement.
  void setup() {
    if constexpr (S::kKind == SchemeKind::replicated3) {
      Ring my_seed = rng_.next_ring();
      auto got = sess_.exchange({{next_id(), {my_seed}}}, {prev_id()});
      zero_next_.emplace(my_seed.v);
      zero_prev_.emplace(got[prev_id()][0].v);
    }
  }

  // --- local (linear) operations -------------------------------------------

  Share constant(Ring c) const { return S::constant(c, party()); }
  Share zero() const { return Share{}; }
  Share add(Share x, Share y) const { return x + y; }
  Share sub(Share x, Share y) const { return x - y; }
  Share neg(Share x) const { return -x; }
  Share add_const(Share x, Ring c) const { return x + constant(c); }
  Share const_minus(Ring c, Share x) const { return constant(c) - x; }
  Share mul_public(Share x, Ring k) const { return S::scale(x, k); }

  // --- interactive operations ----------------------------------------------

  // Element-wise product of two equal-length vectors; exactly one
  // communication round. Counts toward the session's MulCounter under the
  // current call-site label.
  std::vector<Share> mul(std::span<const Share> x, std::span<const Share> y) {
    if (x.size() != y.size()) throw ShapeError("mul: length mismatch");
    const size_t n = x.size();
    if (n == 0) return {};
    sess_.count_muls(n);
    if constexpr (S::kKind == SchemeKind::additive2) {
      std::vector<const TripleShare<S>*> ts(n);
      std::vector<Share> masked(2 * n);
      for (size_t i = 0; i < n; ++i) {
        ts[i] = &prep_.take_triple();
        masked[2 * i] = x[i] - ts[i]->a;
        masked[2 * i + 1] = y[i] - ts[i]->b;
      }
      sess_.count_mul_opened_elements(2 * n);
      auto opened = open_masked(masked);
      std::vector<Share> z(n);
      for (size_t i = 0; i < n; ++i) {
        const Ring d = opened[2 * i];
        const Ring e = opened[2 * i + 1];
        z[i] = ts[i]->c + S::scale(ts[i]->b, d) + S::scale(ts[i]->a, e) +
               constant(d * e);
      }
      return z;
    } else {
      // Local cross terms, rerandomized with a zero-sharing, then reshared
      // so every party ends up with a consistent replicated pair.
      std::vector<Ring> t(n);
      for (size_t i = 0; i < n; ++i) {
        t[i] = x[i].a * y[i].a + x[i].a * y[i].b + x[i].b * y[i].a + next_zero_share();
      }
      sess_.count_mul_opened_elements(n);
      auto got = sess_.exchange({{prev_id(), t}}, {next_id()});
      const auto& from_next = got[next_id()];
      std::vector<Share> z(n);
      for (size_t i = 0; i < n; ++i) z[i] = Share{t[i], from_next[i]};
      return z;
    }
  }

  Share mul1(Share x, Share y) {
    std::array<Share, 1> xs{x}, ys{y};
    return mul(xs, ys)[0];
  }

  // Opens values that are uniformly masked by construction (Beaver
  // differences, x + r). The only reconstruction a compute server ever
  // performs; logged so the transcript audit can verify that.
  std::vector<Ring> open_masked(std::span<const Share> xs) {
    return open(xs, OpenKind::masked);
  }

  // Opens semantic values. Never called by a server during an audit; used
  // by the investigator-side release path and by test harnesses.
  std::vector<Ring> open_output(std::span<const Share> xs) {
    return open(xs, OpenKind::output);
  }

 private:
  u8 next_id() const {
    return static_cast<u8>(party() % S::kParties + 1);
  }
  u8 prev_id() const {
    return static_cast<u8>((party() + S::kParties - 2) % S::kParties + 1);
  }

  Ring next_zero_share() {
    return zero_next_->next_ring() - zero_prev_->next_ring();
  }

  std::vector<Ring> open(std::span<const Share> xs, OpenKind kind) {
    const size_t n = xs.size();
    sess_.log_opening(kind, n);
    if (n == 0) return {};
    if constexpr (S::kKind == SchemeKind::additive2) {
      std::vector<Ring> mine(n);
      for (size_t i = 0; i < n; ++i) mine[i] = xs[i].s;
      const u8 other = static_cast<u8>(3 - party());
      auto got = sess_.exchange({{other, mine}}, {other});
      std::vector<Ring> out(n);
      for (size_t i = 0; i < n; ++i) out[i] = mine[i] + got[other][i];
      return out;
    } else {
      std::vector<Ring> first(n);
      for (size_t i = 0; i < n; ++i) first[i] = xs[i].a;
      auto got = sess_.exchange({{next_id(), first}}, {prev_id()});
      const auto& missing = got[prev_id()];
      std::vector<Ring> out(n);
      for (size_t i = 0; i < n; ++i) out[i] = missing[i] + xs[i].a + xs[i].b;
      return out;
    }
  }

  Session& sess_;
  PrepPool<S> prep_;
  Prg rng_;
  std::optional<Prg> zero_next_;
  std::optional<Prg> zero_prev_;
};

}  // namespace privfair
