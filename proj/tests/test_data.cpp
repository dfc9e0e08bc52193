#include <gtest/gtest.h>

#include "gaitref/data.hpp"

using namespace gaitref;

namespace {

SkeletonSequence make_skeleton(std::int64_t n, std::int64_t k) {
  SkeletonSequence s;
  s.joints = Tensor({n, k, 2});
  for (std::int64_t f = 0; f < n; ++f) {
    for (std::int64_t j = 0; j < k; ++j) {
      s.joints.at(f, j, 0) = static_cast<double>(f) + 0.1 * static_cast<double>(j);
      s.joints.at(f, j, 1) = static_cast<double>(j);
    }
  }
  return s;
}

SilhouetteSequence make_silhouette(std::int64_t n) {
  SilhouetteSequence s;
  s.frames.assign(static_cast<std::size_t>(n),
                  std::vector<std::uint8_t>(kSilhouetteHeight * kSilhouetteWidth, 0));
  for (std::int64_t f = 0; f < n; ++f) {
    s.frames[static_cast<std::size_t>(f)][static_cast<std::size_t>(f)] = 1;
  }
  return s;
}

}  // namespace

TEST(Data, NormalizeSymmetricSpansMinusOneToOne) {
  // y values symmetric about their mean: y ∈ {0,1,2,3,4} per frame, mean 2.
  SkeletonSequence s;
  s.joints = Tensor({1, 17, 2});
  for (std::int64_t j = 0; j < 17; ++j) {
    s.joints.at(0, j, 0) = 3.0;
    // y: {0,1,2,3,4} on the first five joints, midpoint 2 elsewhere → mean = midrange
    s.joints.at(0, j, 1) = j < 5 ? static_cast<double>(j) : 2.0;
  }
  SkeletonSequence norm = normalize_skeleton(s);
  double y_min = 1e9, y_max = -1e9, x_mean = 0.0, y_mean = 0.0;
  for (std::int64_t j = 0; j < 17; ++j) {
    y_min = std::min(y_min, norm.joints.at(0, j, 1));
    y_max = std::max(y_max, norm.joints.at(0, j, 1));
    x_mean += norm.joints.at(0, j, 0);
    y_mean += norm.joints.at(0, j, 1);
  }
  EXPECT_NEAR(y_max - y_min, 2.0, 1e-12);
  EXPECT_NEAR(x_mean / 17.0, 0.0, 1e-12);
  EXPECT_NEAR(y_mean / 17.0, 0.0, 1e-12);
  // symmetric y histogram → extremes land on ±1
  EXPECT_NEAR(y_min, -1.0, 1e-12);
  EXPECT_NEAR(y_max, 1.0, 1e-12);
}

TEST(Data, NormalizeScaleExample) {
  // y spanning [0,4] → scale 2/4 = 0.5
  SkeletonSequence s = make_skeleton(1, 17);
  for (std::int64_t j = 0; j < 17; ++j) s.joints.at(0, j, 1) = static_cast<double>(j % 5);
  NormalizeTransform t = normalize_transform_for(s);
  EXPECT_DOUBLE_EQ(t.scale, 0.5);
}

TEST(Data, NormalizeIdempotent) {
  SkeletonSequence s = make_skeleton(3, 17);
  SkeletonSequence once = normalize_skeleton(s);
  SkeletonSequence twice = normalize_skeleton(once);
  for (std::int64_t i = 0; i < once.joints.numel(); ++i) {
    EXPECT_NEAR(once.joints.at(i), twice.joints.at(i), 1e-12);
  }
}

TEST(Data, NormalizeDegenerateThrows) {
  SkeletonSequence s = make_skeleton(2, 17);
  for (std::int64_t i = 1; i < s.joints.numel(); i += 2) s.joints.at(i) = 5.0;
  EXPECT_THROW(normalize_transform_for(s), DegenerateInputError);
}

TEST(Data, SampleCenterCrop100To60) {
  std::vector<std::int64_t> idx = sample_frame_indices(100, 60, SampleMode::kCenterCrop);
  ASSERT_EQ(idx.size(), 60u);
  EXPECT_EQ(idx.front(), 20);
  EXPECT_EQ(idx.back(), 79);
}

TEST(Data, SampleRepeatPad10To25) {
  bool fell_back = false;
  std::vector<std::int64_t> idx = sample_frame_indices(10, 25, SampleMode::kCenterCrop, &fell_back);
  EXPECT_TRUE(fell_back);
  ASSERT_EQ(idx.size(), 25u);
  for (std::int64_t i = 0; i < 25; ++i) EXPECT_EQ(idx[static_cast<std::size_t>(i)], i % 10);
}

TEST(Data, SampleExactLengthIsIdentity) {
  std::vector<std::int64_t> idx = sample_frame_indices(30, 30, SampleMode::kCenterCrop);
  for (std::int64_t i = 0; i < 30; ++i) EXPECT_EQ(idx[static_cast<std::size_t>(i)], i);
}

TEST(Data, SampleFramesGathersBothModalitiesConsistently) {
  SkeletonSequence skel = make_skeleton(10, 17);
  SilhouetteSequence sil = make_silhouette(10);
  SkeletonSequence skel_s = sample_frames(skel, 4, SampleMode::kCenterCrop);
  SilhouetteSequence sil_s = sample_frames(sil, 4, SampleMode::kCenterCrop);
  ASSERT_EQ(skel_s.num_frames(), 4);
  ASSERT_EQ(sil_s.num_frames(), 4);
  // 10→4 center crop starts at 3
  EXPECT_DOUBLE_EQ(skel_s.joints.at(0, 0, 0), 3.0);
  EXPECT_EQ(sil_s.frames[0][3], 1);
}

TEST(Data, ValidateRejectsBadShapes) {
  SkeletonSequence s;
  s.joints = Tensor({2, 5, 2});
  EXPECT_THROW(s.validate(), DimensionError);  // K must be 17 or 18

  SilhouetteSequence sil;
  EXPECT_THROW(sil.validate(), ContractError);  // empty
  sil.frames.push_back(std::vector<std::uint8_t>(10, 0));
  EXPECT_THROW(sil.validate(), DimensionError);  // wrong pixel count
  sil.frames[0].assign(kSilhouetteHeight * kSilhouetteWidth, 2);
  EXPECT_THROW(sil.validate(), ContractError);  // non-binary
}
