#pragma once

#include <span>
#include <vector>

#include "privfair/inference.hpp"
#include "privfair/report.hpp"

namespace privfair {

// Secret-shared fairness auditing: equalized odds, equal opportunity,
// sub-group accuracy and demographic parity over a secret-shared model and
// audit set. Nothing is opened server-side; every ratio leaves the servers
// as shares, paired with a secret-shared zero-denominator flag.

template <class S>
struct ConfusionCounts {
  using Share = typename S::Share;
  int classes = 0;
  // Indexed [cls * 2 + group], group 1 = protected.
  std::vector<Share> tp, fn, fp, tn;

  Share& at(std::vector<Share>& v, int c, int g) { return v[c * 2 + g]; }
  const Share& at(const std::vector<Share>& v, int c, int g) const {
    return v[c * 2 + g];
  }
};

namespace detail {

template <class S>
void check_audit_shapes(const SharedDataset<S>& data) {
  if (data.n <= 0) throw ShapeError("audit: empty dataset");
  if (data.n > (1 << 20)) throw ShapeError("audit: dataset larger than 2^20");
  if (data.x.size() != static_cast<size_t>(data.n) * data.features ||
      data.y.size() != static_cast<size_t>(data.n) ||
      data.a.size() != static_cast<size_t>(data.n)) {
    throw ShapeError("audit: inconsistent dataset vectors");
  }
}

}  // namespace detail

// One-vs-rest confusion counts per (class, group). Four multiplications
// per instance and per class beyond the two equality tests: tp, ta, pa in
// one round, tpa in a second; all sixteen accumulator updates are linear.
template <class S>
ConfusionCounts<S> confusion_counts(Engine<S>& e,
                                    std::span<const typename S::Share> y,
                                    std::span<const typename S::Share> y_pred,
                                    std::span<const typename S::Share> a,
                                    int classes) {
  using Share = typename S::Share;
  if (y.size() != y_pred.size() || y.size() != a.size()) {
    throw ShapeError("confusion_counts: length mismatch");
  }
  const size_t n = y.size();
  ConfusionCounts<S> cc;
  cc.classes = classes;
  cc.tp.assign(classes * 2, Share{});
  cc.fn.assign(classes * 2, Share{});
  cc.fp.assign(classes * 2, Share{});
  cc.tn.assign(classes * 2, Share{});

  for (int c = 0; c < classes; ++c) {
    auto grnd = eq_public(e, y, static_cast<u64>(c));
    auto pred = eq_public(e, y_pred, static_cast<u64>(c));

    OpScope scope(e.session(), "confusion_counts");
    std::vector<Share> lhs, rhs;
    lhs.reserve(3 * n);
    rhs.reserve(3 * n);
    for (size_t i = 0; i < n; ++i) {
      lhs.push_back(grnd[i]);
      rhs.push_back(pred[i]);
      lhs.push_back(grnd[i]);
      rhs.push_back(a[i]);
      lhs.push_back(pred[i]);
      rhs.push_back(a[i]);
    }
    auto prods = e.mul(lhs, rhs);
    std::vector<Share> tp(n), ta(n), pa(n);
    for (size_t i = 0; i < n; ++i) {
      tp[i] = prods[3 * i];
      ta[i] = prods[3 * i + 1];
      pa[i] = prods[3 * i + 2];
    }
    auto tpa = e.mul(tp, a);

    for (size_t i = 0; i < n; ++i) {
      cc.at(cc.tp, c, 1) = cc.at(cc.tp, c, 1) + tpa[i];
      cc.at(cc.fn, c, 1) = cc.at(cc.fn, c, 1) + (ta[i] - tpa[i]);
      cc.at(cc.fp, c, 1) = cc.at(cc.fp, c, 1) + (pa[i] - tpa[i]);
      cc.at(cc.tn, c, 1) = cc.at(cc.tn, c, 1) + (a[i] - ta[i] - pa[i] + tpa[i]);
      cc.at(cc.tp, c, 0) = cc.at(cc.tp, c, 0) + (tp[i] - tpa[i]);
      cc.at(cc.fn, c, 0) = cc.at(cc.fn, c, 0) + (grnd[i] - ta[i] - tp[i] + tpa[i]);
      cc.at(cc.fp, c, 0) = cc.at(cc.fp, c, 0) + (pred[i] - pa[i] - tp[i] + tpa[i]);
      cc.at(cc.tn, c, 0) =
          cc.at(cc.tn, c, 0) +
          (e.constant(Ring(1)) - grnd[i] - pred[i] - a[i] + tp[i] + ta[i] + pa[i] -
           tpa[i]);
    }
  }
  return cc;
}

// Computed result of one metric protocol: shares laid out exactly as
// release_layout(metric, classes) prescribes.
template <class S>
struct MetricOutput {
  MetricKind metric;
  int classes = 2;
  std::vector<typename S::Share> slots;
};

namespace detail {

// value slot + flag slot for a guarded ratio.
template <class S>
void push_ratio(MetricOutput<S>& out, std::span<const typename S::Share> values,
                std::span<const typename S::Share> flags, size_t i) {
  out.slots.push_back(values[i]);
  out.slots.push_back(flags[i]);
}

template <class S>
std::vector<typename S::Share> group_counts(Engine<S>& e,
                                            std::span<const typename S::Share> a,
                                            size_t n) {
  typename S::Share count1{};
  for (size_t i = 0; i < n; ++i) count1 = count1 + a[i];
  // N is public information, so the unprotected count is local.
  auto count0 = e.const_minus(Ring(static_cast<u64>(n)), count1);
  return {count1, count0};
}

}  // namespace detail

// Equalized odds (one-vs-rest): per class and group, TPR = TP/(TP+FN) and
// FPR = FP/(FP+TN), with zero-denominator flags. Divisions run inside the
// class loop.
template <class S>
MetricOutput<S> eod(Engine<S>& e, const SharedModel<S>& model,
                    const SharedDataset<S>& data) {
  using Share = typename S::Share;
  detail::check_audit_shapes(data);
  auto y_pred = infer(e, model, data);
  auto cc = confusion_counts(e, std::span<const Share>(data.y),
                             std::span<const Share>(y_pred),
                             std::span<const Share>(data.a), data.classes);
  MetricOutput<S> out{MetricKind::eod, data.classes, {}};
  for (int c = 0; c < data.classes; ++c) {
    std::vector<Share> tp_num{cc.at(cc.tp, c, 1), cc.at(cc.tp, c, 0)};
    std::vector<Share> tp_den{cc.at(cc.tp, c, 1) + cc.at(cc.fn, c, 1),
                              cc.at(cc.tp, c, 0) + cc.at(cc.fn, c, 0)};
    std::vector<Share> fp_num{cc.at(cc.fp, c, 1), cc.at(cc.fp, c, 0)};
    std::vector<Share> fp_den{cc.at(cc.fp, c, 1) + cc.at(cc.tn, c, 1),
                              cc.at(cc.fp, c, 0) + cc.at(cc.tn, c, 0)};
    std::vector<Share> tpr, fpr, tpr_flag, fpr_flag;
    {
      OpScope scope(e.session(), "tpr_div");
      tpr = div_counts(e, std::span<const Share>(tp_num), std::span<const Share>(tp_den));
      tpr_flag = eqz(e, std::span<const Share>(tp_den));
    }
    {
      OpScope scope(e.session(), "fpr_div");
      fpr = div_counts(e, std::span<const Share>(fp_num), std::span<const Share>(fp_den));
      fpr_flag = eqz(e, std::span<const Share>(fp_den));
    }
    for (size_t g = 0; g < 2; ++g) {
      detail::push_ratio(out, std::span<const Share>(tpr),
                         std::span<const Share>(tpr_flag), g);
    }
    for (size_t g = 0; g < 2; ++g) {
      detail::push_ratio(out, std::span<const Share>(fpr),
                         std::span<const Share>(fpr_flag), g);
    }
  }
  return out;
}

// Equal opportunity: the TPR branch of equalized odds at c = 1. The pa
// product, the FP/TN accumulators and the FPR divisions are never executed
// (three multiplications per instance).
template <class S>
MetricOutput<S> eop(Engine<S>& e, const SharedModel<S>& model,
                    const SharedDataset<S>& data) {
  using Share = typename S::Share;
  detail::check_audit_shapes(data);
  if (data.classes != 2) throw ShapeError("eop: binary task required");
  auto y_pred = infer(e, model, data);
  const size_t n = data.y.size();

  auto grnd = eq_public(e, std::span<const Share>(data.y), u64(1));
  auto pred = eq_public(e, std::span<const Share>(y_pred), u64(1));

  Share tp1{}, fn1{}, tp0{}, fn0{};
  {
    OpScope scope(e.session(), "confusion_counts");
    std::vector<Share> lhs, rhs;
    lhs.reserve(2 * n);
    rhs.reserve(2 * n);
    for (size_t i = 0; i < n; ++i) {
      lhs.push_back(grnd[i]);
      rhs.push_back(pred[i]);
      lhs.push_back(grnd[i]);
      rhs.push_back(data.a[i]);
    }
    auto prods = e.mul(lhs, rhs);
    std::vector<Share> tp(n), ta(n);
    for (size_t i = 0; i < n; ++i) {
      tp[i] = prods[2 * i];
      ta[i] = prods[2 * i + 1];
    }
    auto tpa = e.mul(tp, std::span<const Share>(data.a));
    for (size_t i = 0; i < n; ++i) {
      tp1 = tp1 + tpa[i];
      fn1 = fn1 + (ta[i] - tpa[i]);
      tp0 = tp0 + (tp[i] - tpa[i]);
      fn0 = fn0 + (grnd[i] - ta[i] - tp[i] + tpa[i]);
    }
  }

  MetricOutput<S> out{MetricKind::eop, data.classes, {}};
  std::vector<Share> num{tp1, tp0};
  std::vector<Share> den{tp1 + fn1, tp0 + fn0};
  OpScope scope(e.session(), "tpr_div");
  auto tpr = div_counts(e, std::span<const Share>(num), std::span<const Share>(den));
  auto flag = eqz(e, std::span<const Share>(den));
  for (size_t g = 0; g < 2; ++g) {
    detail::push_ratio(out, std::span<const Share>(tpr),
                       std::span<const Share>(flag), g);
  }
  return out;
}

// Sub-group accuracy: counts of correct predictions per group via an
// equality test on Y - Y_pred and one multiplication per instance, group
// sizes from the linear sum of A (with N public), and the overall accuracy
// by secure multiplication with the constant 1/N.
template <class S>
MetricOutput<S> gacc(Engine<S>& e, const SharedModel<S>& model,
                     const SharedDataset<S>& data) {
  using Share = typename S::Share;
  detail::check_audit_shapes(data);
  auto y_pred = infer(e, model, data);
  const size_t n = data.y.size();

  auto counts = detail::group_counts(e, std::span<const Share>(data.a), n);

  std::vector<Share> corr(n);
  for (size_t i = 0; i < n; ++i) corr[i] = data.y[i] - y_pred[i];
  auto iscorr = eqz(e, std::span<const Share>(corr));
  std::vector<Share> iscorr1;
  {
    OpScope scope(e.session(), "gacc_mul");
    iscorr1 = e.mul(iscorr, std::span<const Share>(data.a));
  }
  Share correct1{}, correct0{};
  for (size_t i = 0; i < n; ++i) {
    correct1 = correct1 + iscorr1[i];
    correct0 = correct0 + (iscorr[i] - iscorr1[i]);
  }

  MetricOutput<S> out{MetricKind::gacc, data.classes, {}};
  std::vector<Share> num{correct1, correct0};
  std::vector<Share> den{counts[0], counts[1]};
  {
    OpScope scope(e.session(), "acc_div");
    auto acc = div_counts(e, std::span<const Share>(num), std::span<const Share>(den));
    auto flag = eqz(e, std::span<const Share>(den));
    for (size_t g = 0; g < 2; ++g) {
      detail::push_ratio(out, std::span<const Share>(acc),
                         std::span<const Share>(flag), g);
    }
  }
  // Overall accuracy: (correct1 + correct0) * (1/N), the constant encoded
  // at 2a fractional bits and truncated back to a.
  const int a_bits = e.codec().frac_bits;
  const double inv_n = 1.0 / static_cast<double>(n);
  const Ring inv_n_2a = FixedPointCodec{2 * a_bits}.encode(inv_n);
  std::array<Share, 1> scaled{e.mul_public(correct1 + correct0, inv_n_2a)};
  auto acc_overall = trunc(e, std::span<const Share>(scaled), a_bits);
  out.slots.push_back(acc_overall[0]);
  return out;
}

// Demographic parity: positive outcomes per group are TP + FP at c = 1;
// rates divide by the group sizes computed as in sub-group accuracy.
template <class S>
MetricOutput<S> dp(Engine<S>& e, const SharedModel<S>& model,
                   const SharedDataset<S>& data) {
  using Share = typename S::Share;
  detail::check_audit_shapes(data);
  if (data.classes != 2) throw ShapeError("dp: binary task required");
  auto y_pred = infer(e, model, data);
  const size_t n = data.y.size();

  auto counts = detail::group_counts(e, std::span<const Share>(data.a), n);

  auto grnd = eq_public(e, std::span<const Share>(data.y), u64(1));
  auto pred = eq_public(e, std::span<const Share>(y_pred), u64(1));

  Share tp1{}, fp1{}, tp0{}, fp0{};
  {
    OpScope scope(e.session(), "confusion_counts");
    std::vector<Share> lhs, rhs;
    lhs.reserve(3 * n);
    rhs.reserve(3 * n);
    for (size_t i = 0; i < n; ++i) {
      lhs.push_back(grnd[i]);
      rhs.push_back(pred[i]);
      lhs.push_back(grnd[i]);
      rhs.push_back(data.a[i]);
      lhs.push_back(pred[i]);
      rhs.push_back(data.a[i]);
    }
    auto prods = e.mul(lhs, rhs);
    std::vector<Share> tp(n), ta(n), pa(n);
    for (size_t i = 0; i < n; ++i) {
      tp[i] = prods[3 * i];
      ta[i] = prods[3 * i + 1];
      pa[i] = prods[3 * i + 2];
    }
    auto tpa = e.mul(tp, std::span<const Share>(data.a));
    for (size_t i = 0; i < n; ++i) {
      tp1 = tp1 + tpa[i];
      fp1 = fp1 + (pa[i] - tpa[i]);
      tp0 = tp0 + (tp[i] - tpa[i]);
      fp0 = fp0 + (pred[i] - pa[i] - tp[i] + tpa[i]);
    }
  }

  MetricOutput<S> out{MetricKind::dp, data.classes, {}};
  std::vector<Share> pos{tp1 + fp1, tp0 + fp0};
  std::vector<Share> den{counts[0], counts[1]};
  OpScope scope(e.session(), "dp_div");
  auto rate = div_counts(e, std::span<const Share>(pos), std::span<const Share>(den));
  auto flag = eqz(e, std::span<const Share>(den));
  for (size_t g = 0; g < 2; ++g) {
    detail::push_ratio(out, std::span<const Share>(rate),
                       std::span<const Share>(flag), g);
  }
  return out;
}

template <class S>
MetricOutput<S> run_metric(Engine<S>& e, MetricKind metric,
                           const SharedModel<S>& model,
                           const SharedDataset<S>& data) {
  switch (metric) {
    case MetricKind::dp: return dp(e, model, data);
    case MetricKind::eop: return eop(e, model, data);
    case MetricKind::eod: return eod(e, model, data);
    case MetricKind::gacc: return gacc(e, model, data);
  }
  throw ShapeError("unknown metric");
}

}  // namespace privfair
