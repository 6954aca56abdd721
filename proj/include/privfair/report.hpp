#pragma once

#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "privfair/errors.hpp"

namespace privfair {

enum class MetricKind { dp, eop, eod, gacc };

inline const char* metric_name(MetricKind m) {
  switch (m) {
    case MetricKind::dp: return "dp";
    case MetricKind::eop: return "eop";
    case MetricKind::eod: return "eod";
    case MetricKind::gacc: return "gacc";
  }
  return "?";
}

inline MetricKind parse_metric(const std::string& s) {
  if (s == "dp") return MetricKind::dp;
  if (s == "eop") return MetricKind::eop;
  if (s == "eod") return MetricKind::eod;
  if (s == "gacc") return MetricKind::gacc;
  throw ParseError("unknown metric: " + s + " (expected dp,eop,eod,gacc)");
}

inline const char* metric_display_name(MetricKind m) {
  switch (m) {
    case MetricKind::dp: return "Demographic parity";
    case MetricKind::eop: return "Equal opportunity";
    case MetricKind::eod: return "Equalized odds";
    case MetricKind::gacc: return "Sub-group accuracy";
  }
  return "?";
}

enum class ValueKind { dp_rate, tpr, fpr, acc, acc_overall };

// One released quantity. The layout below fixes the order in which the
// servers flatten their result shares and the investigator reads them
// back, so both sides derive it from the same public (metric, C) pair.
struct ReportSlot {
  MetricKind metric;
  ValueKind kind;
  int cls;        // class index for eod, -1 otherwise
  int group;      // 1 = protected, 0 = unprotected, -1 = overall
  bool has_flag;  // followed by a zero-denominator flag share on the wire
};

inline std::vector<ReportSlot> release_layout(MetricKind metric, int num_classes) {
  std::vector<ReportSlot> slots;
  switch (metric) {
    case MetricKind::dp:
      slots.push_back({metric, ValueKind::dp_rate, -1, 1, true});
      slots.push_back({metric, ValueKind::dp_rate, -1, 0, true});
      break;
    case MetricKind::eop:
      slots.push_back({metric, ValueKind::tpr, -1, 1, true});
      slots.push_back({metric, ValueKind::tpr, -1, 0, true});
      break;
    case MetricKind::eod:
      for (int c = 0; c < num_classes; ++c) {
        slots.push_back({metric, ValueKind::tpr, c, 1, true});
        slots.push_back({metric, ValueKind::tpr, c, 0, true});
        slots.push_back({metric, ValueKind::fpr, c, 1, true});
        slots.push_back({metric, ValueKind::fpr, c, 0, true});
      }
      break;
    case MetricKind::gacc:
      slots.push_back({metric, ValueKind::acc, -1, 1, true});
      slots.push_back({metric, ValueKind::acc, -1, 0, true});
      slots.push_back({metric, ValueKind::acc_overall, -1, -1, false});
      break;
  }
  return slots;
}

inline size_t release_width(MetricKind metric, int num_classes) {
  size_t n = 0;
  for (const auto& s : release_layout(metric, num_classes)) n += s.has_flag ? 2 : 1;
  return n;
}

// A reconstructed metric value as seen by the investigator.
struct ReportLine {
  MetricKind metric;
  ValueKind kind;
  int cls = -1;
  int group = -1;
  bool defined = true;
  double value = 0.0;
};

struct GroupNames {
  std::string protected_name = "protected";
  std::string unprotected_name = "unprotected";
};

struct FairnessReport {
  std::vector<ReportLine> lines;

  void render(std::ostream& os, const GroupNames& names, int decimals = 4) const {
    char buf[64];
    for (const auto& ln : lines) {
      std::string label = metric_display_name(ln.metric);
      if (ln.metric == MetricKind::eod) {
        label += " - class " + std::to_string(ln.cls);
        label += ln.kind == ValueKind::tpr ? " - TPR" : " - FPR";
      }
      std::string who = ln.group == 1   ? names.protected_name
                        : ln.group == 0 ? names.unprotected_name
                                        : "overall";
      if (ln.kind == ValueKind::acc_overall) label = "Accuracy";
      if (ln.defined) {
        std::snprintf(buf, sizeof(buf), "%.*f", decimals, ln.value);
        os << label << " - " << who << ": " << buf << "\n";
      } else {
        os << label << " - " << who << ": undefined\n";
      }
    }
  }

  std::string to_string(const GroupNames& names, int decimals = 4) const {
    std::ostringstream ss;
    render(ss, names, decimals);
    return ss.str();
  }
};

}  // namespace privfair
