#pragma once

#include <span>
#include <vector>

#include "privfair/oracle.hpp"
#include "privfair/primitives.hpp"

namespace privfair {

// Secret-shared model parameters, fixed-point encoded at the session codec.
template <class S>
struct SharedModel {
  using Share = typename S::Share;
  ModelArch arch = ModelArch::logistic_regression;
  int features = 0;
  int hidden = 0;   // mlp1 only
  int classes = 2;
  std::vector<Share> lr_w;  // features
  Share lr_b{};
  std::vector<Share> w1;  // hidden x features, row-major
  std::vector<Share> b1;  // hidden
  std::vector<Share> w2;  // classes x hidden, row-major
  std::vector<Share> b2;  // classes
};

// Secret-shared audit data: features fixed-point encoded, labels and the
// sensitive attribute integer-encoded.
template <class S>
struct SharedDataset {
  using Share = typename S::Share;
  int n = 0;
  int features = 0;
  int classes = 2;
  std::vector<Share> x;  // n x features, row-major
  std::vector<Share> y;  // n ground-truth labels in [0, classes)
  std::vector<Share> a;  // n sensitive bits
};

namespace detail {

// rows (n x k, a-frac) times weightsT (m x k, a-frac) plus bias (m, a-frac):
// one multiplication round for all n*k*m products, one truncation batch.
template <class S>
std::vector<typename S::Share> affine_layer(Engine<S>& e,
                                            std::span<const typename S::Share> rows,
                                            size_t n, size_t k,
                                            std::span<const typename S::Share> weights,
                                            std::span<const typename S::Share> bias,
                                            size_t m) {
  using Share = typename S::Share;
  std::vector<Share> lhs, rhs;
  lhs.reserve(n * m * k);
  rhs.reserve(n * m * k);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < m; ++j) {
      for (size_t t = 0; t < k; ++t) {
        lhs.push_back(rows[i * k + t]);
        rhs.push_back(weights[j * k + t]);
      }
    }
  }
  auto prod = e.mul(lhs, rhs);
  const Ring scale_up(u64(1) << e.codec().frac_bits);
  std::vector<Share> acc(n * m);
  size_t p = 0;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < m; ++j) {
      Share s = e.mul_public(bias[j], scale_up);  // bias at 2a frac bits
      for (size_t t = 0; t < k; ++t) s = s + prod[p++];
      acc[i * m + j] = s;
    }
  }
  return trunc(e, std::span<const Share>(acc), e.codec().frac_bits);
}

}  // namespace detail

// Secure logistic-regression labeling: label = 1 iff w.x + b >= 0. The
// sigmoid never needs evaluating; thresholding the score at zero gives the
// same labels, computed as 1 - msb(score).
template <class S>
std::vector<typename S::Share> infer_lr(Engine<S>& e, const SharedModel<S>& model,
                                        const SharedDataset<S>& data) {
  using Share = typename S::Share;
  if (model.arch != ModelArch::logistic_regression) {
    throw ShapeError("infer_lr: wrong architecture");
  }
  if (model.classes != 2) throw ShapeError("infer_lr: binary task required");
  if (model.features != data.features ||
      static_cast<int>(model.lr_w.size()) != model.features) {
    throw ShapeError("infer_lr: feature count mismatch");
  }
  OpScope scope(e.session(), "infer");
  std::array<Share, 1> bias{model.lr_b};
  auto scores = detail::affine_layer(e, std::span<const Share>(data.x), data.n,
                                     data.features, std::span<const Share>(model.lr_w),
                                     std::span<const Share>(bias), 1);
  auto negative = msb(e, std::span<const Share>(scores));
  std::vector<Share> labels(data.n);
  for (int i = 0; i < data.n; ++i) labels[i] = e.const_minus(Ring(1), negative[i]);
  return labels;
}

// One-hidden-layer MLP labeling: ReLU(z) = z * (1 - msb(z)), then a secure
// argmax tournament over the logits with ties broken toward the lower
// class index.
template <class S>
std::vector<typename S::Share> infer_mlp(Engine<S>& e, const SharedModel<S>& model,
                                         const SharedDataset<S>& data) {
  using Share = typename S::Share;
  if (model.arch != ModelArch::mlp1) throw ShapeError("infer_mlp: wrong architecture");
  if (model.features != data.features || model.hidden <= 0 || model.hidden > 64 ||
      model.classes < 2 ||
      model.w1.size() != static_cast<size_t>(model.hidden) * model.features ||
      model.b1.size() != static_cast<size_t>(model.hidden) ||
      model.w2.size() != static_cast<size_t>(model.classes) * model.hidden ||
      model.b2.size() != static_cast<size_t>(model.classes)) {
    throw ShapeError("infer_mlp: inconsistent dimensions");
  }
  OpScope scope(e.session(), "infer");
  const size_t n = data.n;
  const size_t h = model.hidden;
  const size_t C = model.classes;

  auto pre = detail::affine_layer(e, std::span<const Share>(data.x), n,
                                  data.features, std::span<const Share>(model.w1),
                                  std::span<const Share>(model.b1), h);
  auto neg = msb(e, std::span<const Share>(pre));
  std::vector<Share> keep(n * h);
  for (size_t i = 0; i < n * h; ++i) keep[i] = e.const_minus(Ring(1), neg[i]);
  auto hidden = e.mul(pre, keep);

  auto logits = detail::affine_layer(e, std::span<const Share>(hidden), n, h,
                                     std::span<const Share>(model.w2),
                                     std::span<const Share>(model.b2), C);

  // Tournament argmax: a strict "current best < candidate" test per class.
  std::vector<Share> best_val(n), best_idx(n);
  for (size_t i = 0; i < n; ++i) {
    best_val[i] = logits[i * C];
    best_idx[i] = e.zero();
  }
  for (size_t c = 1; c < C; ++c) {
    std::vector<Share> diff(n);
    for (size_t i = 0; i < n; ++i) diff[i] = best_val[i] - logits[i * C + c];
    auto take = msb(e, std::span<const Share>(diff));  // 1 iff best < candidate
    std::vector<Share> lhs, rhs;
    lhs.reserve(2 * n);
    rhs.reserve(2 * n);
    for (size_t i = 0; i < n; ++i) {
      lhs.push_back(take[i]);
      rhs.push_back(logits[i * C + c] - best_val[i]);
      lhs.push_back(take[i]);
      rhs.push_back(e.const_minus(Ring(c), best_idx[i]));
    }
    auto upd = e.mul(lhs, rhs);
    for (size_t i = 0; i < n; ++i) {
      best_val[i] = best_val[i] + upd[2 * i];
      best_idx[i] = best_idx[i] + upd[2 * i + 1];
    }
  }
  return best_idx;
}

// Protocol line 1: privacy-preserving labeling of the audit data.
template <class S>
std::vector<typename S::Share> infer(Engine<S>& e, const SharedModel<S>& model,
                                     const SharedDataset<S>& data) {
  return model.arch == ModelArch::logistic_regression ? infer_lr(e, model, data)
                                                      : infer_mlp(e, model, data);
}

}  // namespace privfair
