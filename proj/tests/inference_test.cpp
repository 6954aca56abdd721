#include <gtest/gtest.h>

#include "test_harness.hpp"

namespace privfair {
namespace {

using testing::make_lr_audit;
using testing::make_mlp_audit;
using testing::run_parties;
using testing::share_dataset;
using testing::share_model;

const FixedPointCodec kCodec{16};

template <class S>
std::vector<int> secure_labels(u64 seed, const PlainModel& model,
                               const PlainDataset& ds, const PrepDemand& demand) {
  Prg rng(seed);
  auto models = share_model<S>(model, kCodec, rng);
  auto datasets = share_dataset<S>(ds, model.classes, kCodec, rng);
  auto results = run_parties<S>(seed + 1, demand, [&](Engine<S>& e) {
    return infer(e, models[e.party() - 1], datasets[e.party() - 1]);
  });
  auto rings = testing::reconstruct_values<S>(results);
  std::vector<int> labels;
  for (Ring r : rings) labels.push_back(static_cast<int>(r.v));
  return labels;
}

PrepDemand lr_demand(int n, int d) {
  return budget::infer_lr(n, d, 16) + PrepDemand{1000, 0, 16};
}

PrepDemand mlp_demand(int n, int d, int h, int C) {
  return budget::infer_mlp(n, d, h, C, 16) + PrepDemand{1000, 0, 16};
}

TEST(InferLr, ZeroWeightsPositiveBiasLabelsAllOne) {
  PlainModel m;
  m.arch = ModelArch::logistic_regression;
  m.features = 5;
  m.classes = 2;
  m.lr.weights.assign(5, 0.0);
  m.lr.bias = 1.0;
  PlainDataset ds;
  Prg rng(80);
  for (int i = 0; i < 8; ++i) {
    std::vector<double> row(5);
    for (auto& v : row) v = testing::grid_value(rng);
    ds.x.push_back(row);
    ds.y.push_back(static_cast<int>(rng.next_bit()));
    ds.a.push_back(static_cast<int>(rng.next_bit()));
  }
  auto labels = secure_labels<Replicated3>(81, m, ds, lr_demand(8, 5));
  for (int l : labels) EXPECT_EQ(l, 1);
  m.lr.bias = -1.0;
  labels = secure_labels<Replicated3>(82, m, ds, lr_demand(8, 5));
  for (int l : labels) EXPECT_EQ(l, 0);
}

template <class S>
void lr_matches_plaintext_oracle(u64 seed) {
  Prg rng(seed);
  auto audit = make_lr_audit(rng, 200, 47);
  auto expected = plain_infer(audit.model, audit.data);
  auto labels = secure_labels<S>(seed + 1, audit.model, audit.data, lr_demand(200, 47));
  ASSERT_EQ(labels.size(), expected.size());
  for (size_t i = 0; i < labels.size(); ++i) {
    ASSERT_EQ(labels[i], expected[i]) << "instance " << i;
  }
}

TEST(InferLr, MatchesOracleAtPaperScale2pc) { lr_matches_plaintext_oracle<Additive2>(83); }
TEST(InferLr, MatchesOracleAtPaperScale3pc) { lr_matches_plaintext_oracle<Replicated3>(85); }

TEST(InferLr, ShapeMismatchThrowsBeforeCommunication) {
  PlainModel m;
  m.arch = ModelArch::logistic_regression;
  m.features = 4;
  m.classes = 2;
  m.lr.weights.assign(4, 0.1);
  PlainDataset ds;
  ds.x.push_back(std::vector<double>(6, 0.0));
  ds.y.push_back(0);
  ds.a.push_back(0);
  Prg rng(87);
  auto models = share_model<Replicated3>(m, kCodec, rng);
  auto datasets = share_dataset<Replicated3>(ds, 2, kCodec, rng);
  auto rounds = run_parties<Replicated3>(88, PrepDemand{}, [&](Engine<Replicated3>& e) {
    const u32 before = e.session().round();
    EXPECT_THROW(infer_lr(e, models[e.party() - 1], datasets[e.party() - 1]), ShapeError);
    return e.session().round() - before;
  });
  for (u32 r : rounds) EXPECT_EQ(r, 0u);
}

TEST(InferMlp, ConstructedNetworkPicksLargestInput) {
  // Identity-ish network: hidden = relu(x), logits = hidden, inputs >= 0.
  const int d = 4;
  PlainModel m;
  m.arch = ModelArch::mlp1;
  m.features = d;
  m.hidden = d;
  m.classes = d;
  m.mlp.features = d;
  m.mlp.hidden = d;
  m.mlp.classes = d;
  m.mlp.w1.assign(d * d, 0.0);
  m.mlp.w2.assign(d * d, 0.0);
  for (int i = 0; i < d; ++i) {
    m.mlp.w1[i * d + i] = 1.0;
    m.mlp.w2[i * d + i] = 1.0;
  }
  m.mlp.b1.assign(d, 0.0);
  m.mlp.b2.assign(d, 0.0);
  PlainDataset ds;
  Prg rng(89);
  std::vector<int> expected;
  for (int i = 0; i < 12; ++i) {
    std::vector<double> row(d);
    int best = 0;
    for (int j = 0; j < d; ++j) {
      row[j] = testing::grid_value(rng, 0.0, 1.0);
      if (row[j] > row[best]) best = j;
    }
    row[best] += 0.25;  // keep a clear winner
    ds.x.push_back(row);
    ds.y.push_back(best);
    ds.a.push_back(static_cast<int>(rng.next_bit()));
    expected.push_back(best);
  }
  auto labels = secure_labels<Replicated3>(90, m, ds, mlp_demand(12, d, d, d));
  EXPECT_EQ(labels, expected);
}

TEST(InferMlp, AllZeroWeightsTieBreaksToClassZero) {
  PlainModel m;
  m.arch = ModelArch::mlp1;
  m.features = 3;
  m.hidden = 2;
  m.classes = 5;
  m.mlp.features = 3;
  m.mlp.hidden = 2;
  m.mlp.classes = 5;
  m.mlp.w1.assign(6, 0.0);
  m.mlp.b1.assign(2, 0.0);
  m.mlp.w2.assign(10, 0.0);
  m.mlp.b2.assign(5, 0.0);
  PlainDataset ds;
  Prg rng(91);
  for (int i = 0; i < 6; ++i) {
    std::vector<double> row(3);
    for (auto& v : row) v = testing::grid_value(rng);
    ds.x.push_back(row);
    ds.y.push_back(static_cast<int>(rng.next_below(5)));
    ds.a.push_back(static_cast<int>(rng.next_bit()));
  }
  auto labels = secure_labels<Replicated3>(92, m, ds, mlp_demand(6, 3, 2, 5));
  for (int l : labels) EXPECT_EQ(l, 0);
}

template <class S>
void mlp_matches_oracle_outside_tie_zone(u64 seed) {
  Prg rng(seed);
  auto audit = make_mlp_audit(rng, 56, 10, 8, 7);
  auto expected = plain_infer(audit.model, audit.data);
  auto labels =
      secure_labels<S>(seed + 1, audit.model, audit.data, mlp_demand(56, 10, 8, 7));
  for (size_t i = 0; i < labels.size(); ++i) {
    if (audit.tie_zone[i]) continue;  // fixed-point tie zone: either label accepted
    ASSERT_EQ(labels[i], expected[i]) << "instance " << i;
  }
}

TEST(InferMlp, MatchesOracleAtPaperScale2pc) {
  mlp_matches_oracle_outside_tie_zone<Additive2>(93);
}
TEST(InferMlp, MatchesOracleAtPaperScale3pc) {
  mlp_matches_oracle_outside_tie_zone<Replicated3>(95);
}

TEST(InferMlp, ArgmaxInvariantToPublicLogitShift) {
  Prg rng(97);
  auto audit = make_mlp_audit(rng, 16, 6, 4, 5);
  auto base = secure_labels<Replicated3>(98, audit.model, audit.data,
                                         mlp_demand(16, 6, 4, 5));
  // Add a public constant to all logits via the output biases.
  auto shifted = audit;
  for (auto& b : shifted.model.mlp.b2) b += 0.75;
  auto moved = secure_labels<Replicated3>(99, shifted.model, shifted.data,
                                          mlp_demand(16, 6, 4, 5));
  EXPECT_EQ(base, moved);
}

TEST(Inference, NoValueOpeningsDuringInference) {
  Prg rng(100);
  auto audit = make_lr_audit(rng, 16, 5);
  auto models = share_model<Replicated3>(audit.model, kCodec, rng);
  auto datasets = share_dataset<Replicated3>(audit.data, 2, kCodec, rng);
  auto counts = run_parties<Replicated3>(101, lr_demand(16, 5), [&](Engine<Replicated3>& e) {
    infer(e, models[e.party() - 1], datasets[e.party() - 1]);
    return e.session().opening_count(OpenKind::output);
  });
  for (auto c : counts) EXPECT_EQ(c, 0u);
}

}  // namespace
}  // namespace privfair
