#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "test_harness.hpp"

namespace privfair {
namespace {

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("privfair_io_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write(const std::string& name, const std::string& content) const {
    const std::string p = path(name);
    std::ofstream out(p);
    out << content;
    return p;
  }

  std::filesystem::path dir_;
};

using DatasetFile = TempDir;
using ModelFile = TempDir;

TEST_F(DatasetFile, ValidThreeRows) {
  auto p = write("ds.csv",
                 "f1,f2,y,a\n"
                 "0.5,-0.25,1,0\n"
                 "1.0,0.0,0,1\n"
                 "-0.125,2.0,1,1\n");
  auto ds = load_dataset(p, 2);
  EXPECT_EQ(ds.n(), 3);
  EXPECT_EQ(ds.features(), 2);
  EXPECT_EQ(ds.y, (std::vector<int>{1, 0, 1}));
  EXPECT_EQ(ds.a, (std::vector<int>{0, 1, 1}));
  EXPECT_DOUBLE_EQ(ds.x[0][1], -0.25);
}

TEST_F(DatasetFile, SensitiveValueTwoRejectedWithLineNumber) {
  auto p = write("bad_a.csv",
                 "f1,y,a\n"
                 "0.5,1,0\n"
                 "0.5,1,2\n");
  try {
    load_dataset(p, 2);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("sensitive"), std::string::npos);
  }
}

TEST_F(DatasetFile, LabelOutOfRangeRejected) {
  auto p = write("bad_y.csv",
                 "f1,y,a\n"
                 "0.5,2,0\n");
  EXPECT_THROW(load_dataset(p, 2), ParseError);
}

TEST_F(DatasetFile, MalformedCellNamesLine) {
  auto p = write("bad_cell.csv",
                 "f1,y,a\n"
                 "0.5,1,0\n"
                 "zz,1,0\n");
  try {
    load_dataset(p, 2);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos);
  }
}

TEST_F(DatasetFile, MissingHeaderRejected) {
  auto p = write("no_header.csv", "0.5,1,0\n");
  EXPECT_THROW(load_dataset(p, 2), ParseError);
}

TEST_F(DatasetFile, GermanCreditShapedFileLoads) {
  // 200 rows, 47 feature columns, binary label, gender-style attribute.
  Prg rng(150);
  PlainDataset ds;
  for (int i = 0; i < 200; ++i) {
    std::vector<double> row(47);
    for (auto& v : row) v = testing::grid_value(rng);
    ds.x.push_back(row);
    ds.y.push_back(static_cast<int>(rng.next_bit()));
    ds.a.push_back(static_cast<int>(rng.next_bit()));
  }
  save_dataset(path("german.csv"), ds);
  auto loaded = load_dataset(path("german.csv"), 2);
  EXPECT_EQ(loaded.n(), 200);
  EXPECT_EQ(loaded.features(), 47);
  for (int i = 0; i < 200; ++i) {
    ASSERT_EQ(loaded.y[i], ds.y[i]);
    for (int j = 0; j < 47; ++j) ASSERT_DOUBLE_EQ(loaded.x[i][j], ds.x[i][j]);
  }
}

TEST_F(ModelFile, LrRoundtrip) {
  PlainModel m;
  m.arch = ModelArch::logistic_regression;
  m.features = 3;
  m.classes = 2;
  m.lr.weights = {0.5, -1.25, 0.0625};
  m.lr.bias = -0.75;
  save_model(path("lr.model"), m);
  auto back = load_model(path("lr.model"));
  EXPECT_EQ(back.arch, ModelArch::logistic_regression);
  EXPECT_EQ(back.features, 3);
  EXPECT_EQ(back.lr.weights, m.lr.weights);
  EXPECT_DOUBLE_EQ(back.lr.bias, m.lr.bias);
}

TEST_F(ModelFile, MlpRoundtrip) {
  Prg rng(151);
  auto audit = testing::make_mlp_audit(rng, 4, 5, 3, 4);
  save_model(path("mlp.model"), audit.model);
  auto back = load_model(path("mlp.model"));
  EXPECT_EQ(back.arch, ModelArch::mlp1);
  EXPECT_EQ(back.hidden, 3);
  EXPECT_EQ(back.mlp.w1, audit.model.mlp.w1);
  EXPECT_EQ(back.mlp.b2, audit.model.mlp.b2);
}

TEST_F(ModelFile, TruncatedBlockRejected) {
  auto p = write("short.model",
                 "privfair-model v1\n"
                 "arch logistic_regression\n"
                 "features 4\n"
                 "classes 2\n"
                 "bias 0.5\n"
                 "weights\n"
                 "0.1 0.2\n");
  EXPECT_THROW(load_model(p), ParseError);
}

TEST_F(ModelFile, WrongHeaderRejected) {
  auto p = write("bad.model", "some-model v9\n");
  EXPECT_THROW(load_model(p), ParseError);
}

TEST_F(ModelFile, MissingFileRejected) {
  EXPECT_THROW(load_model(path("nope.model")), ParseError);
}

TEST(ReportRender, InvestigatorTerminalLineStructure) {
  FairnessReport rep;
  rep.lines.push_back({MetricKind::dp, ValueKind::dp_rate, -1, 1, true, 0.24});
  rep.lines.push_back({MetricKind::dp, ValueKind::dp_rate, -1, 0, true, 0.19});
  rep.lines.push_back({MetricKind::eop, ValueKind::tpr, -1, 1, true, 0.399});
  rep.lines.push_back({MetricKind::eop, ValueKind::tpr, -1, 0, true, 0.40});
  GroupNames names{"male", "female"};
  const std::string text = rep.to_string(names);
  EXPECT_EQ(text,
            "Demographic parity - male: 0.2400\n"
            "Demographic parity - female: 0.1900\n"
            "Equal opportunity - male: 0.3990\n"
            "Equal opportunity - female: 0.4000\n");
}

TEST(ReportRender, UndefinedAndEodLines) {
  FairnessReport rep;
  rep.lines.push_back({MetricKind::eod, ValueKind::tpr, 2, 1, true, 0.5});
  rep.lines.push_back({MetricKind::eod, ValueKind::fpr, 2, 0, false, 0.0});
  rep.lines.push_back({MetricKind::gacc, ValueKind::acc_overall, -1, -1, true, 0.875});
  const std::string text = rep.to_string(GroupNames{});
  EXPECT_EQ(text,
            "Equalized odds - class 2 - TPR - protected: 0.5000\n"
            "Equalized odds - class 2 - FPR - unprotected: undefined\n"
            "Accuracy - overall: 0.8750\n");
}

TEST(PrepBudget, FormulaDominatesMeasuredUse) {
  // The documented sizing formula must cover actual consumption across a
  // spread of audit shapes (no preprocessing-exhausted for sized pools).
  struct Case {
    int n, d, h, C;
    ModelArch arch;
    std::vector<MetricKind> metrics;
  };
  const Case cases[] = {
      {64, 8, 0, 2, ModelArch::logistic_regression, {MetricKind::dp, MetricKind::eop}},
      {48, 12, 6, 4, ModelArch::mlp1, {MetricKind::eod, MetricKind::gacc}},
      {33, 5, 3, 3, ModelArch::mlp1, {MetricKind::gacc}},
  };
  u64 seed = 160;
  for (const auto& c : cases) {
    Prg rng(seed++);
    PlainModel model;
    PlainDataset data;
    if (c.arch == ModelArch::logistic_regression) {
      auto audit = testing::make_lr_audit(rng, c.n, c.d);
      model = audit.model;
      data = audit.data;
    } else {
      auto audit = testing::make_mlp_audit(rng, c.n, c.d, c.h, c.C);
      model = audit.model;
      data = audit.data;
    }
    const auto demand =
        audit_prep_demand(c.metrics, c.arch, c.n, c.d, c.h, c.C, 16,
                          SchemeKind::replicated3);
    Prg share_rng(seed++);
    auto models = testing::share_model<Replicated3>(model, FixedPointCodec{16}, share_rng);
    auto datasets =
        testing::share_dataset<Replicated3>(data, c.C, FixedPointCodec{16}, share_rng);
    auto used = testing::run_parties<Replicated3>(seed++, demand, [&](Engine<Replicated3>& e) {
      for (MetricKind m : c.metrics) {
        run_metric(e, m, models[e.party() - 1], datasets[e.party() - 1]);
      }
      return std::pair{e.prep().triples_used(), e.prep().random_with_bits_used()};
    });
    for (auto [triples, rwb] : used) {
      EXPECT_LE(rwb, demand.random_with_bits) << "rwb under-sized";
      EXPECT_GE(demand.random_with_bits, rwb + rwb / 20) << "headroom below 5%";
    }
  }
}

}  // namespace
}  // namespace privfair
