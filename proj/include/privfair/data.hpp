#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "privfair/oracle.hpp"
#include "privfair/ring.hpp"

namespace privfair {

// Audit inputs in the clear, as held by the investigator (dataset) and the
// model owner (model) before submission.

struct PlainDataset {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  std::vector<int> a;

  int n() const { return static_cast<int>(y.size()); }
  int features() const { return x.empty() ? 0 : static_cast<int>(x[0].size()); }
};

struct PlainModel {
  ModelArch arch = ModelArch::logistic_regression;
  int features = 0;
  int hidden = 0;
  int classes = 2;
  PlainLrModel lr;
  PlainMlpModel mlp;
};

// Feature and parameter magnitudes are capped so that a 64-wide dot
// product stays below the truncation bound in both MLP layers.
inline constexpr double kMaxAbsValue = 16.0;
inline constexpr int kMaxDatasetRows = 1 << 20;

// ---------------------------------------------------------------------------
// Dataset file: comma-separated, header "f1,...,fd,y,a", real features,
// integer label and sensitive attribute.

inline PlainDataset load_dataset(const std::string& path, int classes) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset file: " + path);
  PlainDataset ds;
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  // Header row gives the feature count.
  int columns = 1;
  for (char ch : line) columns += ch == ',';
  const int d = columns - 2;
  if (d < 1 || line.substr(0, 2) != "f1") {
    throw ParseError(path + ":1: expected header f1,...,fd,y,a");
  }
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        size_t used = 0;
        double v = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        row.push_back(v);
      } catch (const std::exception&) {
        throw ParseError(path + ":" + std::to_string(lineno) + ": bad value '" +
                         cell + "'");
      }
    }
    if (static_cast<int>(row.size()) != columns) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(columns) + " columns, got " +
                       std::to_string(row.size()));
    }
    const double yv = row[d];
    const double av = row[d + 1];
    if (yv != static_cast<int>(yv) || yv < 0 || yv >= classes) {
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": label out of range [0," + std::to_string(classes) + ")");
    }
    if (av != 0.0 && av != 1.0) {
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": sensitive attribute must be 0 or 1");
    }
    for (int j = 0; j < d; ++j) {
      if (!(std::fabs(row[j]) <= kMaxAbsValue)) {
        throw ParseError(path + ":" + std::to_string(lineno) +
                         ": feature magnitude above " + std::to_string(kMaxAbsValue));
      }
    }
    row.resize(d);
    ds.x.push_back(std::move(row));
    ds.y.push_back(static_cast<int>(yv));
    ds.a.push_back(static_cast<int>(av));
    if (ds.n() > kMaxDatasetRows) {
      throw ParseError(path + ": more than 2^20 rows");
    }
  }
  if (ds.n() == 0) throw ParseError(path + ": no data rows");
  return ds;
}

inline void save_dataset(const std::string& path, const PlainDataset& ds) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write dataset file: " + path);
  for (int j = 0; j < ds.features(); ++j) out << "f" << (j + 1) << ",";
  out << "y,a\n";
  out.precision(17);
  for (int i = 0; i < ds.n(); ++i) {
    for (double v : ds.x[i]) out << v << ",";
    out << ds.y[i] << "," << ds.a[i] << "\n";
  }
}

// ---------------------------------------------------------------------------
// Model file: versioned structured text. First line "privfair-model v1",
// then "arch", dimension lines, and whitespace-separated parameter blocks.

namespace detail {

inline void read_values(std::istream& in, const std::string& path,
                        const std::string& block, size_t count,
                        std::vector<double>& out) {
  out.resize(count);
  for (size_t i = 0; i < count; ++i) {
    if (!(in >> out[i])) {
      throw ParseError(path + ": block '" + block + "' needs " +
                       std::to_string(count) + " values");
    }
    if (!(std::fabs(out[i]) <= kMaxAbsValue)) {
      throw ParseError(path + ": parameter magnitude above " +
                       std::to_string(kMaxAbsValue) + " in block '" + block + "'");
    }
  }
}

}  // namespace detail

inline PlainModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file: " + path);
  std::string word, version;
  in >> word >> version;
  if (word != "privfair-model" || version != "v1") {
    throw ParseError(path + ": expected 'privfair-model v1' header");
  }
  PlainModel m;
  std::string key;
  in >> key;
  if (key != "arch") throw ParseError(path + ": expected 'arch'");
  std::string arch;
  in >> arch;
  if (arch == "logistic_regression") {
    m.arch = ModelArch::logistic_regression;
  } else if (arch == "mlp1") {
    m.arch = ModelArch::mlp1;
  } else {
    throw ParseError(path + ": unknown arch '" + arch + "'");
  }
  auto read_dim = [&](const char* name) {
    std::string k;
    int v = 0;
    if (!(in >> k >> v) || k != name || v <= 0) {
      throw ParseError(path + ": expected '" + std::string(name) + " <n>'");
    }
    return v;
  };
  if (m.arch == ModelArch::logistic_regression) {
    m.features = read_dim("features");
    m.classes = read_dim("classes");
    if (m.classes != 2) throw ParseError(path + ": logistic_regression needs classes 2");
    std::string k;
    if (!(in >> k) || k != "bias" || !(in >> m.lr.bias)) {
      throw ParseError(path + ": expected 'bias <value>'");
    }
    if (!(in >> k) || k != "weights") throw ParseError(path + ": expected 'weights'");
    detail::read_values(in, path, "weights", m.features, m.lr.weights);
  } else {
    m.features = read_dim("features");
    m.hidden = read_dim("hidden");
    m.classes = read_dim("classes");
    if (m.hidden > 64) throw ParseError(path + ": hidden width above 64");
    m.mlp.features = m.features;
    m.mlp.hidden = m.hidden;
    m.mlp.classes = m.classes;
    std::string k;
    auto block = [&](const char* name, size_t count, std::vector<double>& out) {
      if (!(in >> k) || k != name) {
        throw ParseError(path + ": expected block '" + std::string(name) + "'");
      }
      detail::read_values(in, path, name, count, out);
    };
    block("w1", static_cast<size_t>(m.hidden) * m.features, m.mlp.w1);
    block("b1", m.hidden, m.mlp.b1);
    block("w2", static_cast<size_t>(m.classes) * m.hidden, m.mlp.w2);
    block("b2", m.classes, m.mlp.b2);
  }
  return m;
}

inline void save_model(const std::string& path, const PlainModel& m) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write model file: " + path);
  out.precision(17);
  out << "privfair-model v1\n";
  out << "arch " << arch_name(m.arch) << "\n";
  if (m.arch == ModelArch::logistic_regression) {
    out << "features " << m.features << "\nclasses " << m.classes << "\n";
    out << "bias " << m.lr.bias << "\nweights\n";
    for (double w : m.lr.weights) out << w << " ";
    out << "\n";
  } else {
    out << "features " << m.features << "\nhidden " << m.hidden << "\nclasses "
        << m.classes << "\n";
    auto block = [&](const char* name, const std::vector<double>& vs) {
      out << name << "\n";
      for (double v : vs) out << v << " ";
      out << "\n";
    };
    block("w1", m.mlp.w1);
    block("b1", m.mlp.b1);
    block("w2", m.mlp.w2);
    block("b2", m.mlp.b2);
  }
}

// ---------------------------------------------------------------------------
// Canonical flattenings used at submission time. Encoding to fixed point
// happens here, on the input owner's side.

inline std::vector<Ring> encode_model_values(const PlainModel& m,
                                             const FixedPointCodec& codec) {
  std::vector<Ring> vals;
  if (m.arch == ModelArch::logistic_regression) {
    for (double w : m.lr.weights) vals.push_back(codec.encode(w));
    vals.push_back(codec.encode(m.lr.bias));
  } else {
    for (double v : m.mlp.w1) vals.push_back(codec.encode(v));
    for (double v : m.mlp.b1) vals.push_back(codec.encode(v));
    for (double v : m.mlp.w2) vals.push_back(codec.encode(v));
    for (double v : m.mlp.b2) vals.push_back(codec.encode(v));
  }
  return vals;
}

inline std::vector<Ring> encode_dataset_values(const PlainDataset& ds,
                                               const FixedPointCodec& codec) {
  std::vector<Ring> vals;
  vals.reserve(static_cast<size_t>(ds.n()) * (ds.features() + 2));
  for (const auto& row : ds.x) {
    for (double v : row) vals.push_back(codec.encode(v));
  }
  for (int y : ds.y) vals.push_back(Ring(static_cast<u64>(y)));
  for (int a : ds.a) vals.push_back(Ring(static_cast<u64>(a)));
  return vals;
}

// Oracle-side view of the model for the plaintext cross-check.
inline std::vector<int> plain_infer(const PlainModel& m, const PlainDataset& ds) {
  return m.arch == ModelArch::logistic_regression ? plain_infer_lr(m.lr, ds.x)
                                                  : plain_infer_mlp(m.mlp, ds.x);
}

}  // namespace privfair
