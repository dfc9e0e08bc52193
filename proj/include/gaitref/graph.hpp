#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gaitref/error.hpp"
#include "gaitref/tensor.hpp"

namespace gaitref {

// Joint-graph topology plus its normalized adjacency. The structural matrix
// A+I is symmetric with self-loops; the stored adjacency is the row-stochastic
// D^-1 (A+I), so every row sums to 1.
struct SkeletonGraph {
  std::int64_t num_joints = 0;
  std::string format;  // "coco17" | "openpose18" | "custom"
  std::vector<std::pair<int, int>> edges;
  Tensor normalized_adjacency;  // K×K

  static SkeletonGraph from_edges(std::int64_t k, std::vector<std::pair<int, int>> edges,
                                  std::string format = "custom") {
    if (k < 1) throw DimensionError("graph needs at least one joint");
    SkeletonGraph g;
    g.num_joints = k;
    g.format = std::move(format);
    g.edges = std::move(edges);
    Tensor a({k, k});
    for (std::int64_t i = 0; i < k; ++i) a.at(i, i) = 1.0;
    for (const auto& [u, v] : g.edges) {
      if (u < 0 || v < 0 || u >= k || v >= k) {
        throw DimensionError("edge (" + std::to_string(u) + "," + std::to_string(v) +
                             ") out of range for " + std::to_string(k) + " joints");
      }
      if (u == v) throw DimensionError("explicit self-loop in edge list");
      a.at(u, v) = 1.0;
      a.at(v, u) = 1.0;
    }
    for (std::int64_t i = 0; i < k; ++i) {
      double deg = 0.0;
      for (std::int64_t j = 0; j < k; ++j) deg += a.at(i, j);
      for (std::int64_t j = 0; j < k; ++j) a.at(i, j) /= deg;
    }
    g.normalized_adjacency = std::move(a);
    return g;
  }

  // MS-COCO keypoints: 0 nose, 1-2 eyes, 3-4 ears, 5-6 shoulders, 7-8 elbows,
  // 9-10 wrists, 11-12 hips, 13-14 knees, 15-16 ankles.
  static SkeletonGraph coco17() {
    return from_edges(17,
                      {{0, 1},
                       {0, 2},
                       {1, 3},
                       {2, 4},
                       {0, 5},
                       {0, 6},
                       {5, 7},
                       {7, 9},
                       {6, 8},
                       {8, 10},
                       {5, 11},
                       {6, 12},
                       {11, 13},
                       {13, 15},
                       {12, 14},
                       {14, 16},
                       {5, 6},
                       {11, 12}},
                      "coco17");
  }

  // OpenPose BODY-18: 0 nose, 1 neck, 2-4 right arm, 5-7 left arm,
  // 8-10 right leg, 11-13 left leg, 14-15 eyes, 16-17 ears.
  static SkeletonGraph openpose18() {
    return from_edges(18,
                      {{4, 3},
                       {3, 2},
                       {7, 6},
                       {6, 5},
                       {13, 12},
                       {12, 11},
                       {10, 9},
                       {9, 8},
                       {11, 5},
                       {8, 2},
                       {5, 1},
                       {2, 1},
                       {0, 1},
                       {15, 0},
                       {14, 0},
                       {17, 15},
                       {16, 14}},
                      "openpose18");
  }

  static SkeletonGraph for_format(const std::string& format) {
    if (format == "coco17") return coco17();
    if (format == "openpose18") return openpose18();
    throw ConfigError("unknown skeleton format: " + format);
  }

  // Self-loops only; the normalized adjacency is the identity.
  static SkeletonGraph isolated(std::int64_t k) { return from_edges(k, {}, "custom"); }
};

}  // namespace gaitref
