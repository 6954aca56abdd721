#pragma once

#include <exception>
#include <functional>
#include <map>
#include <memory>
#include <thread>
#include <vector>

#include "privfair/audit.hpp"
#include "privfair/data.hpp"
#include "privfair/prep_budget.hpp"

namespace privfair {

// The outsourced deployment: a model owner and an investigator secret-share
// their inputs to 2 or 3 compute servers, the servers run the selected
// audit protocols, and only the investigator reconstructs the results.
// This header implements each role against a Transport, so the same code
// drives the loopback `simulate` mode and the socket deployment.

namespace wirefmt {

inline u64 metric_tag(MetricKind m) { return static_cast<u64>(m) + 1; }

inline MetricKind metric_from_tag(u64 t) {
  if (t < 1 || t > 4) throw ProtocolAbort("bad metric tag in result frame");
  return static_cast<MetricKind>(t - 1);
}

inline u64 arch_tag(ModelArch a) {
  return a == ModelArch::logistic_regression ? 1 : 2;
}

inline ModelArch arch_from_tag(u64 t) {
  if (t == 1) return ModelArch::logistic_regression;
  if (t == 2) return ModelArch::mlp1;
  throw ProtocolAbort("bad arch tag in model frame");
}

template <class S>
std::vector<typename S::Share> shares_from_rings(std::span<const Ring> rings,
                                                 size_t count) {
  if (rings.size() != count * S::kLimbs) {
    throw ProtocolAbort("share payload: limb count mismatch");
  }
  std::vector<typename S::Share> out(count);
  for (size_t i = 0; i < count; ++i) out[i] = S::load(rings.data() + i * S::kLimbs);
  return out;
}

}  // namespace wirefmt

// --- model owner ------------------------------------------------------------

// Encodes, shares and submits the model; the owner keeps nothing that is
// secret-shared. Connections to every server exist before the first share
// leaves, so a dead server fails the submission with no partial delivery.
template <class S>
void owner_submit(Session& sess, const PlainModel& model, Prg& rng) {
  auto values = encode_model_values(model, sess.config().codec);
  std::array<std::vector<Ring>, S::kParties> payloads;
  for (auto& p : payloads) {
    p = {Ring(wirefmt::arch_tag(model.arch)), Ring(static_cast<u64>(model.features)),
         Ring(static_cast<u64>(model.hidden)), Ring(static_cast<u64>(model.classes))};
  }
  for (Ring v : values) {
    auto shares = S::share(v, rng);
    for (int p = 0; p < S::kParties; ++p) S::push_limbs(shares[p], payloads[p]);
  }
  for (int p = 0; p < S::kParties; ++p) {
    sess.send_async(static_cast<u8>(p + 1), payloads[p]);
  }
}

// --- investigator: submission -----------------------------------------------

template <class S>
void investigator_submit(Session& sess, const PlainDataset& ds, int classes,
                         Prg& rng) {
  auto values = encode_dataset_values(ds, sess.config().codec);
  std::array<std::vector<Ring>, S::kParties> payloads;
  for (auto& p : payloads) {
    p = {Ring(static_cast<u64>(ds.n())), Ring(static_cast<u64>(ds.features())),
         Ring(static_cast<u64>(classes))};
  }
  for (Ring v : values) {
    auto shares = S::share(v, rng);
    for (int p = 0; p < S::kParties; ++p) S::push_limbs(shares[p], payloads[p]);
  }
  for (int p = 0; p < S::kParties; ++p) {
    sess.send_async(static_cast<u8>(p + 1), payloads[p]);
  }
}

// --- investigator: output release -------------------------------------------

// Collects every server's result shares, reconstructs and decodes. This is
// the only place in an audit where an `output` opening happens.
template <class S>
FairnessReport investigator_collect(Session& sess,
                                    const std::vector<MetricKind>& metrics,
                                    int classes) {
  using Share = typename S::Share;
  FairnessReport report;
  const auto& codec = sess.config().codec;
  for (MetricKind metric : metrics) {
    const auto layout = release_layout(metric, classes);
    const size_t width = release_width(metric, classes);
    std::array<std::vector<Share>, S::kParties> per_server;
    for (int p = 0; p < S::kParties; ++p) {
      auto rings = sess.recv_async(static_cast<u8>(p + 1));
      if (rings.size() < 2 || wirefmt::metric_from_tag(rings[0].v) != metric ||
          rings[1].v != static_cast<u64>(classes)) {
        throw ProtocolAbort("result frame does not match requested metric");
      }
      per_server[p] = wirefmt::shares_from_rings<S>(
          std::span<const Ring>(rings).subspan(2), width);
    }
    sess.log_opening(OpenKind::output, width);
    std::vector<Ring> opened(width);
    for (size_t i = 0; i < width; ++i) {
      std::array<Share, S::kParties> all;
      for (int p = 0; p < S::kParties; ++p) all[p] = per_server[p][i];
      opened[i] = S::reconstruct(std::span<const Share>(all.data(), all.size()));
    }
    size_t pos = 0;
    for (const auto& slot : layout) {
      ReportLine line;
      line.metric = slot.metric;
      line.kind = slot.kind;
      line.cls = slot.cls;
      line.group = slot.group;
      const Ring value = opened[pos++];
      if (slot.has_flag) {
        const Ring flag = opened[pos++];
        line.defined = flag.v == 0;
      }
      line.value = line.defined ? codec.decode(value) : 0.0;
      report.lines.push_back(line);
    }
  }
  return report;
}

// --- dealer -------------------------------------------------------------------

// Pre-generates every kind the demand asks for, merged per party.
template <class S>
std::array<PrepPool<S>, S::kParties> dealer_gen_all(const PrepDemand& demand,
                                                    Prg& rng) {
  std::array<PrepPool<S>, S::kParties> pools;
  if (demand.triples > 0) {
    auto gen = dealer_gen<S>(PrepKind::triples, demand.triples, rng);
    for (int p = 0; p < S::kParties; ++p) pools[p].append(std::move(gen[p]));
  }
  if (demand.random_bits > 0) {
    auto gen = dealer_gen<S>(PrepKind::random_bits, demand.random_bits, rng);
    for (int p = 0; p < S::kParties; ++p) pools[p].append(std::move(gen[p]));
  }
  if (demand.random_with_bits > 0) {
    auto gen = dealer_gen<S>(PrepKind::random_with_bits, demand.random_with_bits, rng);
    for (int p = 0; p < S::kParties; ++p) pools[p].append(std::move(gen[p]));
  }
  return pools;
}

// Ships each server its pools in a single frame: [triples, random_bits,
// random_with_bits] counts, then the limbs of each kind in order.
template <class S>
void dealer_send(Session& sess, const std::array<PrepPool<S>, S::kParties>& pools) {
  for (int p = 0; p < S::kParties; ++p) {
    std::vector<Ring> payload{Ring(pools[p].triples.size()),
                              Ring(pools[p].random_bits.size()),
                              Ring(pools[p].random_with_bits.size())};
    for (const auto& t : pools[p].triples) {
      S::push_limbs(t.a, payload);
      S::push_limbs(t.b, payload);
      S::push_limbs(t.c, payload);
    }
    for (const auto& b : pools[p].random_bits) S::push_limbs(b, payload);
    for (const auto& rwb : pools[p].random_with_bits) {
      S::push_limbs(rwb.r, payload);
      for (const auto& b : rwb.bits) S::push_limbs(b, payload);
    }
    sess.send_async(static_cast<u8>(p + 1), payload);
  }
}

template <class S>
void dealer_serve(Session& sess, const PrepDemand& demand, Prg& rng) {
  dealer_send<S>(sess, dealer_gen_all<S>(demand, rng));
}

// --- compute server -----------------------------------------------------------

namespace wirefmt {

template <class S>
PrepPool<S> parse_prep_payload(std::span<const Ring> rings) {
  if (rings.size() < 3) throw ProtocolAbort("prep frame too short");
  const size_t n_triples = rings[0].v;
  const size_t n_bits = rings[1].v;
  const size_t n_rwb = rings[2].v;
  size_t pos = 3;
  auto take = [&](size_t limbs) {
    if (pos + limbs > rings.size()) throw ProtocolAbort("prep frame truncated");
    const Ring* p = rings.data() + pos;
    pos += limbs;
    return p;
  };
  PrepPool<S> pool;
  for (size_t i = 0; i < n_triples; ++i) {
    const Ring* p = take(3 * S::kLimbs);
    pool.triples.push_back(
        {S::load(p), S::load(p + S::kLimbs), S::load(p + 2 * S::kLimbs)});
  }
  for (size_t i = 0; i < n_bits; ++i) pool.random_bits.push_back(S::load(take(S::kLimbs)));
  for (size_t i = 0; i < n_rwb; ++i) {
    const Ring* p = take((1 + kRingBits) * S::kLimbs);
    RandomWithBits<S> rwb;
    rwb.r = S::load(p);
    for (int j = 0; j < kRingBits; ++j) rwb.bits[j] = S::load(p + (1 + j) * S::kLimbs);
    pool.random_with_bits.push_back(rwb);
  }
  if (pos != rings.size()) throw ProtocolAbort("prep frame has trailing limbs");
  return pool;
}

template <class S>
SharedModel<S> parse_model_payload(std::span<const Ring> rings) {
  if (rings.size() < 4) throw ProtocolAbort("model frame too short");
  SharedModel<S> m;
  m.arch = arch_from_tag(rings[0].v);
  m.features = static_cast<int>(rings[1].v);
  m.hidden = static_cast<int>(rings[2].v);
  m.classes = static_cast<int>(rings[3].v);
  size_t count = 0;
  if (m.arch == ModelArch::logistic_regression) {
    count = static_cast<size_t>(m.features) + 1;
  } else {
    count = static_cast<size_t>(m.hidden) * m.features + m.hidden +
            static_cast<size_t>(m.classes) * m.hidden + m.classes;
  }
  auto shares = shares_from_rings<S>(std::span<const Ring>(rings).subspan(4), count);
  size_t pos = 0;
  if (m.arch == ModelArch::logistic_regression) {
    m.lr_w.assign(shares.begin(), shares.begin() + m.features);
    m.lr_b = shares[m.features];
  } else {
    auto grab = [&](size_t k) {
      auto out = std::vector<typename S::Share>(shares.begin() + pos,
                                                shares.begin() + pos + k);
      pos += k;
      return out;
    };
    m.w1 = grab(static_cast<size_t>(m.hidden) * m.features);
    m.b1 = grab(m.hidden);
    m.w2 = grab(static_cast<size_t>(m.classes) * m.hidden);
    m.b2 = grab(m.classes);
  }
  return m;
}

template <class S>
SharedDataset<S> parse_dataset_payload(std::span<const Ring> rings) {
  if (rings.size() < 3) throw ProtocolAbort("dataset frame too short");
  SharedDataset<S> d;
  d.n = static_cast<int>(rings[0].v);
  d.features = static_cast<int>(rings[1].v);
  d.classes = static_cast<int>(rings[2].v);
  const size_t total = static_cast<size_t>(d.n) * d.features + 2 * d.n;
  auto shares = shares_from_rings<S>(std::span<const Ring>(rings).subspan(3), total);
  const size_t nx = static_cast<size_t>(d.n) * d.features;
  d.x.assign(shares.begin(), shares.begin() + nx);
  d.y.assign(shares.begin() + nx, shares.begin() + nx + d.n);
  d.a.assign(shares.begin() + nx + d.n, shares.end());
  return d;
}

}  // namespace wirefmt

// Full server lifecycle: take the dealer batch and both inputs, run the
// selected protocols in order, send result shares to the investigator.
// The server never opens anything but masked values.
template <class S>
void server_run(Session& sess, const std::vector<MetricKind>& metrics) {
  auto pool = wirefmt::parse_prep_payload<S>(sess.recv_async(kDealerId));
  auto model = wirefmt::parse_model_payload<S>(sess.recv_async(kOwnerId));
  auto data = wirefmt::parse_dataset_payload<S>(sess.recv_async(kInvestigatorId));
  if (model.features != data.features) {
    throw ShapeError("model and dataset disagree on feature count");
  }
  if (model.classes != data.classes) {
    throw ShapeError("model and dataset disagree on class count");
  }
  Engine<S> engine(sess, std::move(pool));
  engine.setup();
  for (MetricKind metric : metrics) {
    auto out = run_metric(engine, metric, model, data);
    std::vector<Ring> payload{Ring(wirefmt::metric_tag(metric)),
                              Ring(static_cast<u64>(out.classes))};
    for (const auto& sh : out.slots) S::push_limbs(sh, payload);
    sess.send_async(kInvestigatorId, payload);
  }
}

// --- single-process simulation -------------------------------------------------

struct SimulateOptions {
  SchemeKind scheme = SchemeKind::replicated3;
  std::vector<MetricKind> metrics{MetricKind::dp, MetricKind::eop};
  int frac_bits = 16;
  u64 seed = 0;
  std::chrono::milliseconds timeout{30000};
};

struct SimulateResult {
  FairnessReport report;
  std::map<u8, std::vector<u8>> transcripts;  // per party id
};

namespace detail {

template <class S>
SimulateResult simulate_audit_t(const PlainModel& model, const PlainDataset& ds,
                                const SimulateOptions& opts) {
  auto hub = std::make_shared<LoopbackHub>();
  Prg master(opts.seed);
  SessionId sid = SessionId::from_prg(master);

  SessionConfig base;
  base.scheme = S::kKind;
  base.codec.frac_bits = opts.frac_bits;
  base.sid = sid;
  base.seed = opts.seed;
  base.round_timeout = opts.timeout;

  auto make_session = [&](u8 id, std::unique_ptr<LoopbackTransport>& tr) {
    tr = std::make_unique<LoopbackTransport>(hub, id);
    SessionConfig cfg = base;
    cfg.party_id = id;
    return std::make_unique<Session>(cfg, *tr);
  };

  const int P = S::kParties;
  std::vector<std::unique_ptr<LoopbackTransport>> transports(P + 3);
  std::vector<std::unique_ptr<Session>> sessions(P + 3);

  std::vector<std::exception_ptr> errors(P);
  std::vector<std::thread> threads;
  for (int p = 1; p <= P; ++p) {
    sessions[p] = make_session(static_cast<u8>(p), transports[p]);
    threads.emplace_back([&, p] {
      try {
        server_run<S>(*sessions[p], opts.metrics);
      } catch (...) {
        errors[p - 1] = std::current_exception();
      }
    });
  }

  auto& dealer_tr = transports[0];
  auto dealer_sess = make_session(kDealerId, dealer_tr);
  auto& owner_tr = transports[P + 1];
  auto owner_sess = make_session(kOwnerId, owner_tr);
  auto& inv_tr = transports[P + 2];
  auto inv_sess = make_session(kInvestigatorId, inv_tr);

  SimulateResult result;
  std::exception_ptr client_error;
  try {
    const auto demand =
        audit_prep_demand(opts.metrics, model.arch, ds.n(), model.features,
                          model.hidden, model.classes, opts.frac_bits, S::kKind);
    Prg dealer_rng = Prg(opts.seed).fork(kDealerId);
    dealer_serve<S>(*dealer_sess, demand, dealer_rng);

    Prg owner_rng = Prg(opts.seed).fork(kOwnerId);
    owner_submit<S>(*owner_sess, model, owner_rng);

    Prg inv_rng = Prg(opts.seed).fork(kInvestigatorId);
    investigator_submit<S>(*inv_sess, ds, model.classes, inv_rng);
    result.report = investigator_collect<S>(*inv_sess, opts.metrics, model.classes);
  } catch (...) {
    client_error = std::current_exception();
  }
  // Join in every path; a failed party leaves the others to their round
  // timeout, so failure tests should run with a short one.
  for (auto& t : threads) t.join();
  for (auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  if (client_error) std::rethrow_exception(client_error);

  result.transcripts[kDealerId] = dealer_sess->transcript_bytes();
  for (int p = 1; p <= P; ++p) {
    result.transcripts[static_cast<u8>(p)] = sessions[p]->transcript_bytes();
  }
  result.transcripts[kOwnerId] = owner_sess->transcript_bytes();
  result.transcripts[kInvestigatorId] = inv_sess->transcript_bytes();
  return result;
}

}  // namespace detail

inline SimulateResult simulate_audit(const PlainModel& model, const PlainDataset& ds,
                                     const SimulateOptions& opts) {
  return opts.scheme == SchemeKind::additive2
             ? detail::simulate_audit_t<Additive2>(model, ds, opts)
             : detail::simulate_audit_t<Replicated3>(model, ds, opts);
}

}  // namespace privfair
