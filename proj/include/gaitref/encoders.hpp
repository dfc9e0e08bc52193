#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gaitref/data.hpp"
#include "gaitref/error.hpp"
#include "gaitref/model.hpp"
#include "gaitref/tape.hpp"

namespace gaitref {

// One silhouette frame as a 1×H×W tensor of {0,1} values.
inline Tensor silhouette_frame_tensor(const SilhouetteSequence& seq, std::int64_t f) {
  Tensor t({1, seq.height, seq.width});
  const auto& frame = seq.frames[static_cast<std::size_t>(f)];
  for (std::int64_t i = 0; i < seq.height * seq.width; ++i) {
    t.at(i) = static_cast<double>(frame[static_cast<std::size_t>(i)]);
  }
  return t;
}

// conv stack on one frame: conv -> bias -> leaky-ReLU (-> 2×2 max pool)
inline NodeId silhouette_conv_forward(Tape& tape, const TapeBinding& bind,
                                      const ModelConfig& cfg, NodeId frame) {
  NodeId x = frame;
  for (std::size_t i = 0; i < cfg.conv_stack.size(); ++i) {
    const ConvLayerSpec& l = cfg.conv_stack[i];
    const std::string p = "sil.conv" + std::to_string(i);
    x = tape.conv2d(x, bind.at(p + ".w"), l.stride, l.pad);
    x = tape.bias_channel(x, bind.at(p + ".b"));
    x = tape.leaky_relu(x, cfg.leaky_slope);
    if (l.pool) x = tape.max_pool2x2(x);
  }
  return x;
}

// Silhouette encoder: per-frame conv features, element-wise max over time,
// then horizontal strips each reduced by max + mean to a C-vector.
// Returns F_S with shape strips×C.
inline NodeId encode_silhouette(Tape& tape, const TapeBinding& bind, const ModelConfig& cfg,
                                const SilhouetteSequence& seq) {
  if (seq.num_frames() == 0) throw ContractError("cannot encode an empty silhouette sequence");
  std::vector<NodeId> frames;
  frames.reserve(static_cast<std::size_t>(seq.num_frames()));
  for (std::int64_t f = 0; f < seq.num_frames(); ++f) {
    NodeId conv = silhouette_conv_forward(tape, bind, cfg, tape.constant(silhouette_frame_tensor(seq, f)));
    const Shape& s = tape.value(conv).shape();
    frames.push_back(tape.reshape(conv, {1, s[0], s[1], s[2]}));
  }
  NodeId stacked = frames.size() == 1 ? frames[0] : tape.concat(frames, 0);
  NodeId pooled = tape.max_over_axis(stacked, 0);  // C×M×W'

  const std::int64_t strips = cfg.strips();
  const std::int64_t rows = tape.value(pooled).dim(1);
  if (rows < strips) {
    throw DimensionError("conv output has " + std::to_string(rows) + " rows, fewer than " +
                         std::to_string(strips) + " strips");
  }
  const std::int64_t c = tape.value(pooled).dim(0);
  std::vector<NodeId> parts;
  parts.reserve(static_cast<std::size_t>(strips));
  for (std::int64_t s = 0; s < strips; ++s) {
    const std::int64_t lo = s * rows / strips;
    const std::int64_t hi = (s + 1) * rows / strips;
    NodeId band = tape.slice(pooled, 1, lo, hi - lo);
    NodeId mx = tape.max_over_axis(tape.max_over_axis(band, 2), 1);  // C
    NodeId mn = tape.mean_over_axes(band, {1, 2});                    // C
    parts.push_back(tape.reshape(tape.add(mx, mn), {1, c}));
  }
  return tape.concat(parts, 0);  // strips×C
}

// One spatial-temporal block: adjacency mix, linear projection, per-node
// temporal convolution, activation.
inline NodeId stgcn_block(Tape& tape, const TapeBinding& bind, const ModelConfig& cfg,
                          const SkeletonGraph& graph, const std::string& prefix, NodeId x) {
  const Tensor& xv = tape.value(x);
  if (xv.rank() != 3 || xv.dim(1) != graph.num_joints) {
    throw DimensionError("block input " + shape_str(xv.shape()) + " does not match graph with " +
                         std::to_string(graph.num_joints) + " joints");
  }
  const std::int64_t n = xv.dim(0), k = xv.dim(1), ci = xv.dim(2);
  NodeId mixed = tape.graph_mix(x, tape.constant(graph.normalized_adjacency));
  NodeId flat = tape.reshape(mixed, {n * k, ci});
  NodeId proj = tape.bias_last(tape.matmul(flat, bind.at(prefix + ".spatial.w")),
                               bind.at(prefix + ".spatial.b"));
  const std::int64_t co = tape.value(proj).dim(1);
  NodeId spatial = tape.reshape(proj, {n, k, co});
  NodeId temporal = tape.bias_last(tape.temporal_conv(spatial, bind.at(prefix + ".temporal.w")),
                                   bind.at(prefix + ".temporal.b"));
  return tape.leaky_relu(temporal, cfg.leaky_slope);
}

struct SkeletonFeatures {
  NodeId f_j_pre;     // N×K×C
  NodeId f_j;         // 1×C, mean over frames and joints
};

// Skeleton encoder over normalized joints (as a tape node, N×K×2).
inline SkeletonFeatures encode_skeleton(Tape& tape, const TapeBinding& bind,
                                        const ModelConfig& cfg,
                                        const SkeletonEncoderHandle& enc, NodeId joints) {
  NodeId x = joints;
  for (std::size_t i = 0; i < enc.hidden->size(); ++i) {
    x = stgcn_block(tape, bind, cfg, *enc.graph, enc.param_prefix + ".block" + std::to_string(i),
                    x);
  }
  const std::int64_t c = tape.value(x).dim(2);
  NodeId pooled = tape.reshape(tape.mean_over_axes(x, {0, 1}), {1, c});
  return {x, pooled};
}

}  // namespace gaitref
