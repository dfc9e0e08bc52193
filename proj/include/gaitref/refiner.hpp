#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "gaitref/encoders.hpp"

namespace gaitref {

struct CorrectorOutput {
  NodeId j_prime;  // N×K×2
  NodeId delta;    // N×K×2
};

// Correction network: per-node concatenation of the joint coordinates with
// the toggled feature inputs, a reversed spatial-temporal decoder, and a
// final projection to per-joint (dx, dy). J' = J + ΔJ. The final projection
// starts zero-initialized, so an untrained refiner is exactly the identity.
inline CorrectorOutput correct_skeleton(Tape& tape, const TapeBinding& bind,
                                        const ModelConfig& cfg, const SkeletonGraph& graph,
                                        NodeId joints, NodeId f_j_pre, NodeId f_j_pooled,
                                        NodeId f_s) {
  if (!cfg.use_FJ && !cfg.use_FJP && !cfg.use_FS && !cfg.allow_bare_corrector) {
    throw ConfigError("correction network needs at least one feature input");
  }
  const Tensor& jv = tape.value(joints);
  if (jv.rank() != 3 || jv.dim(2) != 2) {
    throw DimensionError("corrector expects N×K×2 joints, got " + shape_str(jv.shape()));
  }
  const std::int64_t n = jv.dim(0), k = jv.dim(1);
  const std::int64_t c = cfg.channels();

  auto maybe_detach = [&](NodeId id) {
    return cfg.detach_corrector_inputs ? tape.constant(tape.value(id)) : id;
  };

  std::vector<NodeId> pieces{joints};
  if (cfg.use_FJ) {
    const Tensor& fv = tape.value(f_j_pre);
    if (fv.rank() != 3 || fv.dim(0) != n || fv.dim(1) != k || fv.dim(2) != c) {
      throw DimensionError("per-frame skeleton features " + shape_str(fv.shape()) +
                           " do not match joints " + shape_str(jv.shape()));
    }
    pieces.push_back(maybe_detach(f_j_pre));
  }
  if (cfg.use_FJP) {
    NodeId rep = tape.tile(tape.tile(tape.reshape(maybe_detach(f_j_pooled), {1, 1, c}), 0, n), 1, k);
    pieces.push_back(rep);
  }
  if (cfg.use_FS) {
    const std::int64_t flat = cfg.strips() * c;
    NodeId rep =
        tape.tile(tape.tile(tape.reshape(maybe_detach(f_s), {1, 1, flat}), 0, n), 1, k);
    pieces.push_back(rep);
  }
  NodeId x = pieces.size() == 1 ? pieces[0] : tape.concat(pieces, 2);

  for (std::size_t i = 0; i < cfg.decoder_hidden.size(); ++i) {
    x = stgcn_block(tape, bind, cfg, graph, "scn.block" + std::to_string(i), x);
  }
  const std::int64_t d_last = tape.value(x).dim(2);
  NodeId flat = tape.reshape(x, {n * k, d_last});
  NodeId out = tape.bias_last(tape.matmul(flat, bind.at("scn.out.w")), bind.at("scn.out.b"));
  NodeId delta = tape.reshape(out, {n, k, 2});
  NodeId j_prime = tape.add(joints, delta);
  return {j_prime, delta};
}

namespace detail {

inline SkeletonSequence smooth_with_weights(const SkeletonSequence& seq,
                                            const std::vector<double>& w) {
  seq.validate();
  const std::int64_t n = seq.num_frames(), k = seq.num_joints();
  const std::int64_t half = static_cast<std::int64_t>(w.size()) / 2;
  SkeletonSequence out = seq;
  for (std::int64_t f = 0; f < n; ++f) {
    for (std::int64_t j = 0; j < k; ++j) {
      double sx = 0.0, sy = 0.0;
      for (std::size_t t = 0; t < w.size(); ++t) {
        // clamp at the boundaries: repeat the edge frames
        std::int64_t src = f + static_cast<std::int64_t>(t) - half;
        src = std::min(std::max(src, std::int64_t{0}), n - 1);
        sx += w[t] * seq.joints.at(src, j, 0);
        sy += w[t] * seq.joints.at(src, j, 1);
      }
      out.joints.at(f, j, 0) = sx;
      out.joints.at(f, j, 1) = sy;
    }
  }
  return out;
}

}  // namespace detail

// Per-joint per-coordinate moving average over an odd window, edges clamped.
inline SkeletonSequence smooth_average(const SkeletonSequence& seq, std::int64_t window = 3) {
  if (window < 1 || window % 2 == 0) throw ConfigError("smoothing window must be odd and >= 1");
  return detail::smooth_with_weights(
      seq, std::vector<double>(static_cast<std::size_t>(window), 1.0 / static_cast<double>(window)));
}

// Normalized Gaussian weights over an odd window, edges clamped.
inline SkeletonSequence smooth_gaussian(const SkeletonSequence& seq, std::int64_t window = 3,
                                        double sigma = 1.0) {
  if (window < 1 || window % 2 == 0) throw ConfigError("smoothing window must be odd and >= 1");
  if (sigma <= 0.0) throw ConfigError("sigma must be > 0");
  std::vector<double> w(static_cast<std::size_t>(window));
  const double c = static_cast<double>(window / 2);
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double d = static_cast<double>(i) - c;
    w[i] = std::exp(-0.5 * d * d / (sigma * sigma));
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  return detail::smooth_with_weights(seq, w);
}

}  // namespace gaitref
