#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "privfair/report.hpp"

namespace privfair {

// Reference implementations of inference and the fairness metrics in the
// clear. This module is the correctness anchor for the MPC path: it shares
// no code with it, works in exact integer/rational arithmetic for all
// ratios, and doubles as the `plain-audit` mode of the CLI.

enum class ModelArch { logistic_regression, mlp1 };

inline const char* arch_name(ModelArch a) {
  return a == ModelArch::logistic_regression ? "logistic_regression" : "mlp1";
}

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 0;  // den == 0 means undefined

  bool defined() const { return den != 0; }
  double value() const { return defined() ? double(num) / double(den) : 0.0; }

  // Decimal rendering by long division; exact to the requested digits.
  std::string render(int digits = 10) const {
    if (!defined()) return "undefined";
    std::int64_t n = num, d = den;
    std::string out;
    if ((n < 0) != (d < 0) && n != 0) out += "-";
    if (n < 0) n = -n;
    if (d < 0) d = -d;
    out += std::to_string(n / d);
    n %= d;
    if (digits > 0) out += ".";
    for (int i = 0; i < digits; ++i) {
      n *= 10;
      out += char('0' + n / d);
      n %= d;
    }
    return out;
  }
};

struct PlainLrModel {
  std::vector<double> weights;
  double bias = 0.0;
};

struct PlainMlpModel {
  int features = 0;
  int hidden = 0;
  int classes = 0;
  std::vector<double> w1;  // hidden x features, row-major
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // classes x hidden, row-major
  std::vector<double> b2;  // classes
};

inline std::vector<int> plain_infer_lr(const PlainLrModel& m,
                                       const std::vector<std::vector<double>>& X) {
  std::vector<int> labels;
  labels.reserve(X.size());
  for (const auto& row : X) {
    if (row.size() != m.weights.size()) {
      throw ShapeError("plain_infer_lr: feature count mismatch");
    }
    double score = m.bias;
    for (size_t j = 0; j < row.size(); ++j) score += m.weights[j] * row[j];
    labels.push_back(score >= 0.0 ? 1 : 0);
  }
  return labels;
}

inline double plain_lr_score(const PlainLrModel& m, const std::vector<double>& row) {
  double score = m.bias;
  for (size_t j = 0; j < row.size(); ++j) score += m.weights[j] * row[j];
  return score;
}

inline std::vector<double> plain_mlp_logits(const PlainMlpModel& m,
                                            const std::vector<double>& row) {
  if (static_cast<int>(row.size()) != m.features) {
    throw ShapeError("plain_infer_mlp: feature count mismatch");
  }
  std::vector<double> hidden(m.hidden);
  for (int j = 0; j < m.hidden; ++j) {
    double z = m.b1[j];
    for (int k = 0; k < m.features; ++k) z += m.w1[j * m.features + k] * row[k];
    hidden[j] = z > 0.0 ? z : 0.0;
  }
  std::vector<double> logits(m.classes);
  for (int c = 0; c < m.classes; ++c) {
    double z = m.b2[c];
    for (int j = 0; j < m.hidden; ++j) z += m.w2[c * m.hidden + j] * hidden[j];
    logits[c] = z;
  }
  return logits;
}

// Ties break toward the lower class index, matching the secure argmax.
inline std::vector<int> plain_infer_mlp(const PlainMlpModel& m,
                                        const std::vector<std::vector<double>>& X) {
  std::vector<int> labels;
  labels.reserve(X.size());
  for (const auto& row : X) {
    auto logits = plain_mlp_logits(m, row);
    int best = 0;
    for (int c = 1; c < m.classes; ++c) {
      if (logits[c] > logits[best]) best = c;
    }
    labels.push_back(best);
  }
  return labels;
}

// Exact confusion counts per (class, group), one-vs-rest.
struct PlainConfusion {
  int classes = 0;
  // [cls][group] with group index 0/1
  std::vector<std::int64_t> tp, fn, fp, tn;

  std::int64_t& at(std::vector<std::int64_t>& v, int c, int g) { return v[c * 2 + g]; }
  std::int64_t at(const std::vector<std::int64_t>& v, int c, int g) const {
    return v[c * 2 + g];
  }
};

inline PlainConfusion plain_confusion(const std::vector<int>& y,
                                      const std::vector<int>& y_pred,
                                      const std::vector<int>& a, int classes) {
  if (y.size() != y_pred.size() || y.size() != a.size()) {
    throw ShapeError("plain_confusion: length mismatch");
  }
  PlainConfusion pc;
  pc.classes = classes;
  pc.tp.assign(classes * 2, 0);
  pc.fn.assign(classes * 2, 0);
  pc.fp.assign(classes * 2, 0);
  pc.tn.assign(classes * 2, 0);
  for (size_t i = 0; i < y.size(); ++i) {
    for (int c = 0; c < classes; ++c) {
      const bool grnd = y[i] == c;
      const bool pred = y_pred[i] == c;
      const int g = a[i];
      if (grnd && pred) ++pc.at(pc.tp, c, g);
      if (grnd && !pred) ++pc.at(pc.fn, c, g);
      if (!grnd && pred) ++pc.at(pc.fp, c, g);
      if (!grnd && !pred) ++pc.at(pc.tn, c, g);
    }
  }
  return pc;
}

// Mirrors the MPC release layout entry for entry; every ratio is an exact
// rational with an explicit undefined marker for zero denominators.
struct PlainReport {
  MetricKind metric;
  struct Entry {
    ReportSlot slot;
    Rational value;
  };
  std::vector<Entry> entries;

  void render(std::ostream& os, const GroupNames& names, int digits = 10) const {
    for (const auto& en : entries) {
      std::string label = metric_display_name(en.slot.metric);
      if (en.slot.metric == MetricKind::eod) {
        label += " - class " + std::to_string(en.slot.cls);
        label += en.slot.kind == ValueKind::tpr ? " - TPR" : " - FPR";
      }
      if (en.slot.kind == ValueKind::acc_overall) label = "Accuracy";
      std::string who = en.slot.group == 1   ? names.protected_name
                        : en.slot.group == 0 ? names.unprotected_name
                                             : "overall";
      os << label << " - " << who << ": " << en.value.render(digits) << "\n";
    }
  }
};

inline PlainReport plain_metrics(const std::vector<int>& labels,
                                 const std::vector<int>& y,
                                 const std::vector<int>& a, int classes,
                                 MetricKind metric) {
  for (int g : a) {
    if (g != 0 && g != 1) throw ShapeError("sensitive attribute must be 0/1");
  }
  const auto pc = plain_confusion(y, labels, a, classes);
  std::int64_t count[2] = {0, 0};
  for (int g : a) ++count[g];

  PlainReport rep;
  rep.metric = metric;
  auto rational = [](std::int64_t n, std::int64_t d) { return Rational{n, d}; };

  switch (metric) {
    case MetricKind::dp: {
      // Positive outcomes = TP + FP at c = 1.
      for (int g : {1, 0}) {
        std::int64_t pos = pc.at(pc.tp, 1, g) + pc.at(pc.fp, 1, g);
        rep.entries.push_back({{metric, ValueKind::dp_rate, -1, g, true},
                               rational(pos, count[g])});
      }
      break;
    }
    case MetricKind::eop: {
      for (int g : {1, 0}) {
        std::int64_t tp = pc.at(pc.tp, 1, g);
        std::int64_t fn = pc.at(pc.fn, 1, g);
        rep.entries.push_back(
            {{metric, ValueKind::tpr, -1, g, true}, rational(tp, tp + fn)});
      }
      break;
    }
    case MetricKind::eod: {
      for (int c = 0; c < classes; ++c) {
        for (int g : {1, 0}) {
          std::int64_t tp = pc.at(pc.tp, c, g);
          std::int64_t fn = pc.at(pc.fn, c, g);
          rep.entries.push_back(
              {{metric, ValueKind::tpr, c, g, true}, rational(tp, tp + fn)});
        }
        for (int g : {1, 0}) {
          std::int64_t fp = pc.at(pc.fp, c, g);
          std::int64_t tn = pc.at(pc.tn, c, g);
          rep.entries.push_back(
              {{metric, ValueKind::fpr, c, g, true}, rational(fp, fp + tn)});
        }
      }
      break;
    }
    case MetricKind::gacc: {
      std::int64_t correct[2] = {0, 0};
      for (size_t i = 0; i < y.size(); ++i) {
        if (y[i] == labels[i]) ++correct[a[i]];
      }
      for (int g : {1, 0}) {
        rep.entries.push_back(
            {{metric, ValueKind::acc, -1, g, true}, rational(correct[g], count[g])});
      }
      rep.entries.push_back(
          {{metric, ValueKind::acc_overall, -1, -1, false},
           rational(correct[0] + correct[1],
                    static_cast<std::int64_t>(y.size()))});
      break;
    }
  }
  return rep;
}

}  // namespace privfair
