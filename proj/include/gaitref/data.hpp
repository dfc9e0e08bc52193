#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gaitref/error.hpp"
#include "gaitref/graph.hpp"
#include "gaitref/tensor.hpp"

namespace gaitref {

inline constexpr std::int64_t kSilhouetteHeight = 64;
inline constexpr std::int64_t kSilhouetteWidth = 44;

// N binary occupancy masks of a walking person.
struct SilhouetteSequence {
  std::int64_t height = kSilhouetteHeight;
  std::int64_t width = kSilhouetteWidth;
  std::vector<std::vector<std::uint8_t>> frames;  // each height*width, values 0/1
  std::string subject_id;
  std::string view_tag;

  std::int64_t num_frames() const { return static_cast<std::int64_t>(frames.size()); }

  void validate() const {
    if (frames.empty()) throw ContractError("silhouette sequence has no frames");
    for (const auto& f : frames) {
      if (static_cast<std::int64_t>(f.size()) != height * width) {
        throw DimensionError("silhouette frame size mismatch");
      }
      for (std::uint8_t v : f) {
        if (v > 1) throw ContractError("silhouette values must be 0/1");
      }
    }
  }
};

// N frames of K 2-D joints; joints tensor is N×K×2 (x, y), y up.
struct SkeletonSequence {
  Tensor joints;
  std::string format = "coco17";  // matches SkeletonGraph::format
  std::string subject_id;

  std::int64_t num_frames() const { return joints.numel() == 0 ? 0 : joints.dim(0); }
  std::int64_t num_joints() const { return joints.numel() == 0 ? 0 : joints.dim(1); }

  void validate() const {
    if (joints.numel() == 0 || joints.rank() != 3 || joints.dim(2) != 2) {
      throw DimensionError("skeleton joints must be N×K×2");
    }
    if (num_joints() != 17 && num_joints() != 18) {
      throw DimensionError("joint count must be 17 or 18, got " + std::to_string(num_joints()));
    }
    if (!joints.all_finite()) throw ContractError("skeleton contains non-finite coordinates");
  }
};

// Paired modalities for one sequence; clean_skeleton carries synthetic ground
// truth when available.
struct SampleRecord {
  SilhouetteSequence silhouette;
  SkeletonSequence skeleton;
  std::optional<SkeletonSequence> clean_skeleton;
};

// One shared similarity transform for the whole sequence: vertical extent
// scaled to exactly 2, mean joint position moved to the origin.
struct NormalizeTransform {
  double scale = 1.0;
  double center_x = 0.0;  // applied after scaling
  double center_y = 0.0;

  void apply(Tensor& joints) const {
    for (std::int64_t i = 0; i + 1 < joints.numel(); i += 2) {
      joints.at(i) = joints.at(i) * scale - center_x;
      joints.at(i + 1) = joints.at(i + 1) * scale - center_y;
    }
  }
};

inline NormalizeTransform normalize_transform_for(const SkeletonSequence& seq) {
  seq.validate();
  const Tensor& j = seq.joints;
  double y_min = j.at(1), y_max = j.at(1);
  for (std::int64_t i = 1; i < j.numel(); i += 2) {
    y_min = std::min(y_min, j.at(i));
    y_max = std::max(y_max, j.at(i));
  }
  const double extent = y_max - y_min;
  if (extent < 1e-9) {
    throw DegenerateInputError("skeleton vertical extent is zero; cannot scale height to 2");
  }
  NormalizeTransform t;
  t.scale = 2.0 / extent;
  double sx = 0.0, sy = 0.0;
  for (std::int64_t i = 0; i + 1 < j.numel(); i += 2) {
    sx += j.at(i);
    sy += j.at(i + 1);
  }
  const double n = static_cast<double>(j.numel() / 2);
  t.center_x = t.scale * sx / n;
  t.center_y = t.scale * sy / n;
  return t;
}

inline SkeletonSequence normalize_skeleton(const SkeletonSequence& seq) {
  const NormalizeTransform t = normalize_transform_for(seq);
  SkeletonSequence out = seq;
  t.apply(out.joints);
  return out;
}

enum class SampleMode { kCenterCrop, kRepeatPad };

// Frame indices realizing the target length. Center-crop on a too-short
// input falls back to repeat-pad; fell_back reports that.
inline std::vector<std::int64_t> sample_frame_indices(std::int64_t n, std::int64_t target,
                                                      SampleMode mode,
                                                      bool* fell_back = nullptr) {
  if (n < 1) throw ContractError("cannot sample from an empty sequence");
  if (target < 1) throw ConfigError("target length must be >= 1");
  if (fell_back) *fell_back = false;
  std::vector<std::int64_t> idx(static_cast<std::size_t>(target));
  if (mode == SampleMode::kCenterCrop && n >= target) {
    const std::int64_t start = (n - target) / 2;
    for (std::int64_t i = 0; i < target; ++i) idx[static_cast<std::size_t>(i)] = start + i;
    return idx;
  }
  if (mode == SampleMode::kCenterCrop && fell_back) *fell_back = true;
  for (std::int64_t i = 0; i < target; ++i) idx[static_cast<std::size_t>(i)] = i % n;
  return idx;
}

inline SkeletonSequence sample_frames(const SkeletonSequence& seq, std::int64_t target,
                                      SampleMode mode, bool* fell_back = nullptr) {
  const std::vector<std::int64_t> idx =
      sample_frame_indices(seq.num_frames(), target, mode, fell_back);
  const std::int64_t k = seq.num_joints();
  SkeletonSequence out;
  out.format = seq.format;
  out.subject_id = seq.subject_id;
  out.joints = Tensor({target, k, 2});
  for (std::int64_t i = 0; i < target; ++i) {
    for (std::int64_t j = 0; j < k; ++j) {
      out.joints.at(i, j, 0) = seq.joints.at(idx[static_cast<std::size_t>(i)], j, 0);
      out.joints.at(i, j, 1) = seq.joints.at(idx[static_cast<std::size_t>(i)], j, 1);
    }
  }
  return out;
}

inline SilhouetteSequence sample_frames(const SilhouetteSequence& seq, std::int64_t target,
                                        SampleMode mode, bool* fell_back = nullptr) {
  const std::vector<std::int64_t> idx =
      sample_frame_indices(seq.num_frames(), target, mode, fell_back);
  SilhouetteSequence out = seq;
  out.frames.clear();
  out.frames.reserve(static_cast<std::size_t>(target));
  for (std::int64_t i : idx) out.frames.push_back(seq.frames[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace gaitref
