#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "gaitref/fusion.hpp"
#include "gaitref/rng.hpp"

using namespace gaitref;

namespace {

// 1-D single-part embedding at a given position
NodeId point(Tape& tape, double x) { return tape.param(Tensor({1, 1}, {x})); }

double brute_force_triplet(const std::vector<Tensor>& embeddings,
                           const std::vector<std::int64_t>& labels, double margin) {
  const std::size_t n = embeddings.size();
  auto dist = [&](std::size_t i, std::size_t j) {
    const Tensor &a = embeddings[i], &b = embeddings[j];
    double total = 0.0;
    for (std::int64_t p = 0; p < a.dim(0); ++p) {
      double s = 0.0;
      for (std::int64_t d = 0; d < a.dim(1); ++d) {
        const double diff = a.at(p, d) - b.at(p, d);
        s += diff * diff;
      }
      total += std::sqrt(s);
    }
    return total / static_cast<double>(a.dim(0));
  };
  double sum = 0.0;
  std::int64_t active = 0, triplets = 0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t p = 0; p < n; ++p) {
      if (p == a || labels[p] != labels[a]) continue;
      for (std::size_t g = 0; g < n; ++g) {
        if (labels[g] == labels[a]) continue;
        ++triplets;
        const double h = std::max(0.0, dist(a, p) - dist(a, g) + margin);
        if (h > 0.0) {
          sum += h;
          ++active;
        }
      }
    }
  }
  if (triplets == 0) return 0.0;
  return sum / static_cast<double>(std::max<std::int64_t>(1, active));
}

}  // namespace

TEST(TripletLoss, AllIdenticalGivesMargin) {
  Tape tape;
  std::vector<NodeId> e = {point(tape, 0.5), point(tape, 0.5), point(tape, 0.5),
                           point(tape, 0.5)};
  std::vector<std::int64_t> labels = {0, 0, 1, 1};
  NodeId loss = triplet_loss(tape, e, labels, 0.2);
  EXPECT_NEAR(tape.value(loss).item(), 0.2, 1e-12);
  tape.backward(loss);  // collapsed distances must not produce NaNs
  for (NodeId id : e) EXPECT_TRUE(tape.gradient(id).all_finite());
}

TEST(TripletLoss, WellSeparatedGivesZero) {
  Tape tape;
  std::vector<NodeId> e = {point(tape, 0.0), point(tape, 0.0), point(tape, 100.0),
                           point(tape, 100.0)};
  std::vector<std::int64_t> labels = {0, 0, 1, 1};
  bool no_triplet = true;
  NodeId loss = triplet_loss(tape, e, labels, 0.2, &no_triplet);
  EXPECT_FALSE(no_triplet);
  EXPECT_DOUBLE_EQ(tape.value(loss).item(), 0.0);
}

TEST(TripletLoss, SpecExampleEvaluatesToZero) {
  // {0, 0.1} vs {1, 1.1}: intra 0.1, nearest cross 0.9 → every hinge inactive
  Tape tape;
  std::vector<NodeId> e = {point(tape, 0.0), point(tape, 0.1), point(tape, 1.0),
                           point(tape, 1.1)};
  std::vector<std::int64_t> labels = {0, 0, 1, 1};
  NodeId loss = triplet_loss(tape, e, labels, 0.2);
  EXPECT_DOUBLE_EQ(tape.value(loss).item(), 0.0);
  std::vector<Tensor> vals = {Tensor({1, 1}, {0.0}), Tensor({1, 1}, {0.1}),
                              Tensor({1, 1}, {1.0}), Tensor({1, 1}, {1.1})};
  EXPECT_DOUBLE_EQ(brute_force_triplet(vals, labels, 0.2), 0.0);
}

TEST(TripletLoss, HandEnumeratedFixture) {
  // id0 at {0, 0.4}, id1 at {0.5, 1.2}: five active hinges
  // {0.1, 0.5, 0.4, 0.8, 0.1} → 1.9 / 5 = 0.38
  Tape tape;
  std::vector<NodeId> e = {point(tape, 0.0), point(tape, 0.4), point(tape, 0.5),
                           point(tape, 1.2)};
  std::vector<std::int64_t> labels = {0, 0, 1, 1};
  NodeId loss = triplet_loss(tape, e, labels, 0.2);
  EXPECT_NEAR(tape.value(loss).item(), 0.38, 1e-12);
}

TEST(TripletLoss, MatchesEnumerationOnRandomBatches) {
  Rng rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    Tape tape;
    std::vector<NodeId> ids;
    std::vector<Tensor> vals;
    std::vector<std::int64_t> labels;
    const std::int64_t n = 4 + static_cast<std::int64_t>(rng.uniform_int(13));
    for (std::int64_t i = 0; i < n; ++i) {
      Tensor t({2, 3});
      for (std::int64_t v = 0; v < t.numel(); ++v) t.at(v) = rng.gaussian();
      ids.push_back(tape.param(t));
      vals.push_back(t);
      labels.push_back(static_cast<std::int64_t>(rng.uniform_int(3)));
    }
    NodeId loss = triplet_loss(tape, ids, labels, 0.2);
    EXPECT_NEAR(tape.value(loss).item(), brute_force_triplet(vals, labels, 0.2), 1e-12)
        << "trial " << trial;
  }
}

TEST(TripletLoss, NoValidTripletFlagsAndReturnsZero) {
  Tape tape;
  std::vector<NodeId> e = {point(tape, 0.1), point(tape, 0.9)};
  std::vector<std::int64_t> labels = {0, 0};  // no negatives anywhere
  bool no_triplet = false;
  NodeId loss = triplet_loss(tape, e, labels, 0.2, &no_triplet);
  EXPECT_TRUE(no_triplet);
  EXPECT_DOUBLE_EQ(tape.value(loss).item(), 0.0);
}

TEST(ClassificationLoss, UniformLogitsGiveLogN) {
  Tape tape;
  NodeId logits = tape.param(Tensor({2, 5}));
  NodeId loss = classification_loss(tape, logits, {0, 3});
  EXPECT_NEAR(tape.value(loss).item(), std::log(5.0), 1e-12);
}

TEST(ClassificationLoss, ConfidentCorrectApproachesZero) {
  Tape tape;
  Tensor t({1, 4});
  t.at(0, 2) = 60.0;
  NodeId loss = classification_loss(tape, tape.param(t), {2});
  EXPECT_LT(tape.value(loss).item(), 1e-12);
}

TEST(ClassificationLoss, MatchesLogSumExpOracle) {
  Rng rng(62);
  Tensor t({4, 3});
  for (std::int64_t i = 0; i < t.numel(); ++i) t.at(i) = 3.0 * rng.gaussian();
  std::vector<std::int64_t> labels = {2, 0, 1, 1};
  Tape tape;
  NodeId loss = classification_loss(tape, tape.param(t), labels);
  double want = 0.0;
  for (std::int64_t r = 0; r < 4; ++r) {
    double mx = t.at(r, 0);
    for (std::int64_t c = 1; c < 3; ++c) mx = std::max(mx, t.at(r, c));
    double lse = 0.0;
    for (std::int64_t c = 0; c < 3; ++c) lse += std::exp(t.at(r, c) - mx);
    want += mx + std::log(lse) - t.at(r, labels[static_cast<std::size_t>(r)]);
  }
  want /= 4.0;
  EXPECT_NEAR(tape.value(loss).item(), want, 1e-12);
}

TEST(TotalLoss, WeightedSumExamples) {
  Tape tape;
  NodeId trip = tape.constant(Tensor::scalar(0.3));
  NodeId cls = tape.constant(Tensor::scalar(0.7));
  EXPECT_NEAR(tape.value(total_loss(tape, trip, cls, 1.0, 1.0)).item(), 1.0, 1e-15);
  EXPECT_NEAR(tape.value(total_loss(tape, trip, cls, 1.0, 0.1)).item(), 0.37, 1e-15);
  EXPECT_NEAR(tape.value(total_loss(tape, trip, cls, 1.0, 0.0)).item(), 0.3, 1e-15);
}

TEST(TotalLoss, LinearInComponents) {
  Rng rng(63);
  for (int trial = 0; trial < 10; ++trial) {
    const double t = rng.uniform(), c = rng.uniform();
    const double l1 = rng.uniform(0.0, 2.0), l2 = rng.uniform(0.0, 2.0);
    Tape tape;
    NodeId loss = total_loss(tape, tape.constant(Tensor::scalar(t)),
                             tape.constant(Tensor::scalar(c)), l1, l2);
    EXPECT_NEAR(tape.value(loss).item(), l1 * t + l2 * c, 1e-12);
  }
}
