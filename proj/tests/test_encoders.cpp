#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "gaitref/fusion.hpp"
#include "gaitref/rng.hpp"

using namespace gaitref;

namespace {

ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.mode = ModelMode::kGaitMix;
  cfg.conv_stack = {{4, 3, 1, 1, true}, {8, 3, 1, 1, true}};
  cfg.skeleton_hidden = {8, 8};
  cfg.decoder_hidden = {8};
  cfg.embed_dim = 8;
  cfg.temporal_kernel = 3;
  return cfg;
}

SilhouetteSequence random_silhouette(Rng& rng, std::int64_t n) {
  SilhouetteSequence s;
  s.frames.assign(static_cast<std::size_t>(n),
                  std::vector<std::uint8_t>(kSilhouetteHeight * kSilhouetteWidth, 0));
  for (auto& f : s.frames) {
    for (auto& px : f) px = rng.uniform() < 0.25 ? 1 : 0;
  }
  return s;
}

}  // namespace

TEST(Encoders, SilhouetteShapeAndFiniteness) {
  Rng rng(41);
  SilhouetteSequence sil = random_silhouette(rng, 7);
  Model model(tiny_config(), 9);
  Tape tape;
  TapeBinding bind = model.bind(tape);
  NodeId f_s = encode_silhouette(tape, bind, model.config(), sil);
  const Tensor& v = tape.value(f_s);
  ASSERT_EQ(v.rank(), 2);
  EXPECT_EQ(v.dim(0), 16);
  EXPECT_EQ(v.dim(1), 8);
  EXPECT_TRUE(v.all_finite());
}

TEST(Encoders, TemporalMaxIgnoresFrameOrder) {
  Rng rng(42);
  SilhouetteSequence sil = random_silhouette(rng, 6);
  SilhouetteSequence shuffled = sil;
  std::reverse(shuffled.frames.begin(), shuffled.frames.end());
  std::swap(shuffled.frames[1], shuffled.frames[4]);

  Model model(tiny_config(), 9);
  Tape tape;
  TapeBinding bind = model.bind(tape);
  NodeId a = encode_silhouette(tape, bind, model.config(), sil);
  NodeId b = encode_silhouette(tape, bind, model.config(), shuffled);
  const Tensor &va = tape.value(a), &vb = tape.value(b);
  for (std::int64_t i = 0; i < va.numel(); ++i) EXPECT_EQ(va.at(i), vb.at(i));
}

TEST(Encoders, DuplicateFrameIsIdempotentUnderTemporalMax) {
  Rng rng(43);
  SilhouetteSequence one = random_silhouette(rng, 1);
  SilhouetteSequence two = one;
  two.frames.push_back(two.frames[0]);

  Model model(tiny_config(), 9);
  Tape tape;
  TapeBinding bind = model.bind(tape);
  NodeId a = encode_silhouette(tape, bind, model.config(), one);
  NodeId b = encode_silhouette(tape, bind, model.config(), two);
  const Tensor &va = tape.value(a), &vb = tape.value(b);
  for (std::int64_t i = 0; i < va.numel(); ++i) EXPECT_EQ(va.at(i), vb.at(i));
}

TEST(Encoders, AllZeroSilhouetteGivesUniformStrips) {
  SilhouetteSequence sil;
  sil.frames.assign(3, std::vector<std::uint8_t>(kSilhouetteHeight * kSilhouetteWidth, 0));
  Model model(tiny_config(), 9);  // biases start at zero
  Tape tape;
  TapeBinding bind = model.bind(tape);
  NodeId f_s = encode_silhouette(tape, bind, model.config(), sil);
  const Tensor& v = tape.value(f_s);
  for (std::int64_t s = 1; s < v.dim(0); ++s) {
    for (std::int64_t c = 0; c < v.dim(1); ++c) {
      EXPECT_EQ(v.at(s, c), v.at(0, c)) << "strip " << s << " channel " << c;
    }
  }
}

TEST(Encoders, EmptySilhouetteThrows) {
  SilhouetteSequence sil;
  Model model(tiny_config(), 9);
  Tape tape;
  TapeBinding bind = model.bind(tape);
  EXPECT_THROW(encode_silhouette(tape, bind, model.config(), sil), ContractError);
}

TEST(Encoders, PooledSkeletonFeatureIsExactMean) {
  Rng rng(44);
  Tensor joints({5, 17, 2});
  for (std::int64_t i = 0; i < joints.numel(); ++i) joints.at(i) = rng.gaussian();
  Model model(tiny_config(), 9);
  Tape tape;
  TapeBinding bind = model.bind(tape);
  SkeletonFeatures f =
      encode_skeleton(tape, bind, model.config(), model.raw_skeleton_encoder(), tape.constant(joints));
  const Tensor& pre = tape.value(f.f_j_pre);
  const Tensor& pooled = tape.value(f.f_j);
  ASSERT_EQ(pre.rank(), 3);
  EXPECT_EQ(pre.dim(0), 5);
  EXPECT_EQ(pre.dim(1), 17);
  EXPECT_EQ(pre.dim(2), 8);
  ASSERT_EQ(pooled.dim(0), 1);
  for (std::int64_t c = 0; c < 8; ++c) {
    double sum = 0.0;
    for (std::int64_t n = 0; n < 5; ++n) {
      for (std::int64_t k = 0; k < 17; ++k) sum += pre.at(n, k, c);
    }
    EXPECT_NEAR(pooled.at(0, c), sum / 85.0, 1e-12);
  }
}

TEST(Encoders, ZeroJointsGiveZeroFeaturesAtInit) {
  Tensor joints({4, 17, 2});
  Model model(tiny_config(), 9);
  Tape tape;
  TapeBinding bind = model.bind(tape);
  SkeletonFeatures f =
      encode_skeleton(tape, bind, model.config(), model.raw_skeleton_encoder(), tape.constant(joints));
  const Tensor& pre = tape.value(f.f_j_pre);
  for (std::int64_t i = 0; i < pre.numel(); ++i) EXPECT_EQ(pre.at(i), 0.0);
}

TEST(Encoders, SingleBlockMatchesDenseLoopOracle) {
  Rng rng(45);
  Tensor joints({4, 17, 2});
  for (std::int64_t i = 0; i < joints.numel(); ++i) joints.at(i) = rng.gaussian();

  ModelConfig cfg = tiny_config();
  cfg.skeleton_hidden = {6};
  cfg.conv_stack = {{4, 3, 1, 1, true}, {6, 3, 1, 1, true}};
  Model model(cfg, 13);
  Tape tape;
  TapeBinding bind = model.bind(tape);
  NodeId out = stgcn_block(tape, bind, cfg, model.graph(), "skel.block0", tape.constant(joints));
  const Tensor& got = tape.value(out);

  const Tensor& adj = model.graph().normalized_adjacency;
  const Tensor& sw = model.params().at("skel.block0.spatial.w");   // 2×6
  const Tensor& sb = model.params().at("skel.block0.spatial.b");   // 6
  const Tensor& tw = model.params().at("skel.block0.temporal.w");  // 6×3×6
  const Tensor& tb = model.params().at("skel.block0.temporal.b");  // 6

  const std::int64_t n = 4, k = 17, ci = 2, co = 6, kt = 3, pad = 1;
  std::vector<double> mixed(static_cast<std::size_t>(n * k * ci));
  for (std::int64_t f = 0; f < n; ++f) {
    for (std::int64_t a = 0; a < k; ++a) {
      for (std::int64_t c = 0; c < ci; ++c) {
        double s = 0.0;
        for (std::int64_t b = 0; b < k; ++b) s += adj.at(a, b) * joints.at(f, b, c);
        mixed[static_cast<std::size_t>((f * k + a) * ci + c)] = s;
      }
    }
  }
  std::vector<double> lin(static_cast<std::size_t>(n * k * co));
  for (std::int64_t f = 0; f < n; ++f) {
    for (std::int64_t a = 0; a < k; ++a) {
      for (std::int64_t o = 0; o < co; ++o) {
        double s = sb.at(o);
        for (std::int64_t c = 0; c < ci; ++c) {
          s += mixed[static_cast<std::size_t>((f * k + a) * ci + c)] * sw.at(c, o);
        }
        lin[static_cast<std::size_t>((f * k + a) * co + o)] = s;
      }
    }
  }
  for (std::int64_t f = 0; f < n; ++f) {
    for (std::int64_t a = 0; a < k; ++a) {
      for (std::int64_t o = 0; o < co; ++o) {
        double s = tb.at(o);
        for (std::int64_t t = 0; t < kt; ++t) {
          const std::int64_t src = f + t - pad;
          if (src < 0 || src >= n) continue;
          for (std::int64_t c = 0; c < co; ++c) {
            s += tw.at(o, t, c) * lin[static_cast<std::size_t>((src * k + a) * co + c)];
          }
        }
        const double want = s > 0.0 ? s : 0.01 * s;
        EXPECT_NEAR(got.at(f, a, o), want, 1e-10);
      }
    }
  }
}

TEST(Encoders, InteriorFramesUnchangedWhenSequenceRepeats) {
  // append the sequence to itself: interior frames of the first copy see the
  // same temporal neighborhoods, so their features and hence the interior
  // means agree
  Rng rng(46);
  const std::int64_t n = 12;
  Tensor joints({n, 17, 2});
  for (std::int64_t i = 0; i < joints.numel(); ++i) joints.at(i) = rng.gaussian();
  Tensor doubled({2 * n, 17, 2});
  for (std::int64_t i = 0; i < joints.numel(); ++i) {
    doubled.at(i) = joints.at(i);
    doubled.at(joints.numel() + i) = joints.at(i);
  }

  ModelConfig cfg = tiny_config();
  Model model(cfg, 17);
  Tape tape;
  TapeBinding bind = model.bind(tape);
  SkeletonFeatures a = encode_skeleton(tape, bind, cfg, model.raw_skeleton_encoder(),
                                       tape.constant(joints));
  SkeletonFeatures b = encode_skeleton(tape, bind, cfg, model.raw_skeleton_encoder(),
                                       tape.constant(doubled));
  const Tensor& va = tape.value(a.f_j_pre);
  const Tensor& vb = tape.value(b.f_j_pre);
  // two blocks of kernel 3 → receptive radius 2
  const std::int64_t r = 2;
  double mean_a = 0.0, mean_b = 0.0;
  std::int64_t count = 0;
  for (std::int64_t f = r; f < n - r; ++f) {
    for (std::int64_t k = 0; k < 17; ++k) {
      for (std::int64_t c = 0; c < 8; ++c) {
        EXPECT_NEAR(vb.at(f, k, c), va.at(f, k, c), 1e-12);
        mean_a += va.at(f, k, c);
        mean_b += vb.at(f, k, c);
        ++count;
      }
    }
  }
  EXPECT_NEAR(mean_a / count, mean_b / count, 1e-9);
}

TEST(Encoders, BlockRejectsGraphMismatch) {
  ModelConfig cfg = tiny_config();
  Model model(cfg, 3);
  Tape tape;
  TapeBinding bind = model.bind(tape);
  Tensor joints({4, 18, 2});  // 18 joints vs coco17 graph
  EXPECT_THROW(stgcn_block(tape, bind, cfg, model.graph(), "skel.block0", tape.constant(joints)),
               DimensionError);
}
