#include <gtest/gtest.h>

#include <cmath>

#include "gaitref/synth.hpp"

using namespace gaitref;

TEST(Synth, DeterministicGivenSeeds) {
  SynthConfig cfg;
  cfg.n_frames = 20;
  cfg.jitter_sigma = 0.05;
  cfg.jitter_frame_prob = 0.5;
  SampleRecord a = synth_gait(3, cfg, 9);
  SampleRecord b = synth_gait(3, cfg, 9);
  EXPECT_EQ(a.silhouette.frames, b.silhouette.frames);
  for (std::int64_t i = 0; i < a.skeleton.joints.numel(); ++i) {
    EXPECT_EQ(a.skeleton.joints.at(i), b.skeleton.joints.at(i));
  }
}

TEST(Synth, ZeroSigmaLeavesSkeletonClean) {
  SynthConfig cfg;
  cfg.n_frames = 16;
  cfg.jitter_sigma = 0.0;
  cfg.jitter_frame_prob = 1.0;
  SampleRecord rec = synth_gait(4, cfg, 2);
  ASSERT_TRUE(rec.clean_skeleton.has_value());
  for (std::int64_t i = 0; i < rec.skeleton.joints.numel(); ++i) {
    EXPECT_EQ(rec.skeleton.joints.at(i), rec.clean_skeleton->joints.at(i));
  }
}

TEST(Synth, RenderFreeCoreMatchesFullGenerator) {
  // the skeleton-only sampling path must consume the same random streams as
  // the full generator, or statistics gathered from it would not transfer
  SynthConfig cfg;
  cfg.n_frames = 14;
  cfg.jitter_sigma = 0.08;
  cfg.jitter_frame_prob = 0.4;
  detail::SynthCore core = detail::synth_core(5, cfg, 11);
  SampleRecord rec = synth_gait(5, cfg, 11);
  ASSERT_TRUE(rec.skeleton.joints.same_shape(core.jittered));
  for (std::int64_t i = 0; i < core.jittered.numel(); ++i) {
    EXPECT_EQ(rec.skeleton.joints.at(i), core.jittered.at(i));
    EXPECT_EQ(rec.clean_skeleton->joints.at(i), core.clean.at(i));
  }
}

TEST(Synth, DifferentSeedsDiffer) {
  SynthConfig cfg;
  cfg.n_frames = 12;
  SampleRecord a = synth_gait(1, cfg, 1);
  SampleRecord b = synth_gait(2, cfg, 1);
  double diff = 0.0;
  for (std::int64_t i = 0; i < a.skeleton.joints.numel(); ++i) {
    diff += std::abs(a.skeleton.joints.at(i) - b.skeleton.joints.at(i));
  }
  EXPECT_GT(diff, 1e-3);
}

TEST(Synth, InvalidConfigThrows) {
  SynthConfig cfg;
  cfg.n_frames = 4;
  EXPECT_THROW(synth_gait(1, cfg, 1), ConfigError);
  cfg.n_frames = 16;
  cfg.jitter_sigma = -0.1;
  EXPECT_THROW(synth_gait(1, cfg, 1), ConfigError);
  cfg.jitter_sigma = 0.1;
  cfg.jitter_frame_prob = 1.5;
  EXPECT_THROW(synth_gait(1, cfg, 1), ConfigError);
}

TEST(Synth, SilhouetteHasWalkerShapedMass) {
  SynthConfig cfg;
  cfg.n_frames = 10;
  SampleRecord rec = synth_gait(8, cfg, 3);
  for (const auto& frame : rec.silhouette.frames) {
    std::int64_t on = 0;
    for (std::uint8_t px : frame) on += px;
    // the walker should cover a plausible fraction of the 64×44 canvas
    EXPECT_GT(on, 150);
    EXPECT_LT(on, 64 * 44 / 2);
  }
}

TEST(Synth, CleanTrajectoriesPeriodicAtStridePeriod) {
  // squared frame-difference autocorrelation dips at the identity's period
  for (std::uint64_t id_seed : {11ull, 23ull, 47ull}) {
    const double period = WalkerIdentity::from_seed(id_seed).period;
    SynthConfig cfg;
    cfg.n_frames = 64;
    detail::SynthCore core = detail::synth_core(id_seed, cfg, 5);
    const Tensor& j = core.clean;
    double best = 1e30;
    std::int64_t best_lag = -1;
    for (std::int64_t lag = 8; lag <= 30; ++lag) {
      double ssd = 0.0;
      std::int64_t terms = 0;
      for (std::int64_t f = 0; f + lag < 64; ++f) {
        for (std::int64_t i = 0; i < 34; ++i) {
          const double d = j.at(f * 34 + i) - j.at((f + lag) * 34 + i);
          ssd += d * d;
          ++terms;
        }
      }
      ssd /= static_cast<double>(terms);
      if (ssd < best) {
        best = ssd;
        best_lag = lag;
      }
    }
    EXPECT_NEAR(static_cast<double>(best_lag), period, 1.0)
        << "identity seed " << id_seed << " period " << period;
  }
}

TEST(Synth, JitterDisplacementMatchesFoldedNormalMean) {
  // mean per-joint 2-D displacement = prob · sigma · sqrt(pi/2), the Rayleigh
  // mean scaled by the per-frame jitter probability
  const double sigma = 0.1, prob = 0.3;
  SynthConfig cfg;
  cfg.n_frames = 60;
  cfg.jitter_sigma = sigma;
  cfg.jitter_frame_prob = prob;
  double total = 0.0;
  std::int64_t count = 0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    detail::SynthCore core = detail::synth_core(100 + s, cfg, 9000 + s);
    for (std::int64_t f = 0; f < cfg.n_frames; ++f) {
      for (std::int64_t j = 0; j < 17; ++j) {
        const double dx = core.jittered.at(f, j, 0) - core.clean.at(f, j, 0);
        const double dy = core.jittered.at(f, j, 1) - core.clean.at(f, j, 1);
        total += std::sqrt(dx * dx + dy * dy);
        ++count;
      }
    }
  }
  const double measured = total / static_cast<double>(count);
  const double expected = prob * sigma * std::sqrt(M_PI / 2.0);
  EXPECT_NEAR(measured, expected, 0.05 * expected);
}

TEST(Synth, JitterHitsWholeFramesIndependently) {
  SynthConfig cfg;
  cfg.n_frames = 40;
  cfg.jitter_sigma = 0.2;
  cfg.jitter_frame_prob = 0.5;
  detail::SynthCore core = detail::synth_core(6, cfg, 60);
  std::int64_t jittered_frames = 0;
  for (std::int64_t f = 0; f < 40; ++f) {
    std::int64_t moved = 0;
    for (std::int64_t j = 0; j < 17; ++j) {
      if (core.jittered.at(f, j, 0) != core.clean.at(f, j, 0) ||
          core.jittered.at(f, j, 1) != core.clean.at(f, j, 1)) {
        ++moved;
      }
    }
    // a frame is either untouched or every joint moved
    EXPECT_TRUE(moved == 0 || moved == 17) << "frame " << f;
    if (moved == 17) ++jittered_frames;
  }
  EXPECT_GT(jittered_frames, 5);
  EXPECT_LT(jittered_frames, 35);
}
