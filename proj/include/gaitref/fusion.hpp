#pragma once

#include <cstdint>
#include <vector>

#include "gaitref/refiner.hpp"

namespace gaitref {

constexpr NodeId kNoNode = -1;

// Stack (or pad together) the modality features into a parts×C matrix.
// Concat appends the pooled skeleton features as extra parts; padding adds
// them, broadcast, onto every silhouette strip.
inline NodeId fuse_parts(Tape& tape, const ModelConfig& cfg, NodeId f_s, NodeId f_j,
                         NodeId f_j_ref) {
  switch (cfg.mode) {
    case ModelMode::kSilhouetteOnly:
      if (f_s == kNoNode) throw ContractError("silhouette-only fusion needs F_S");
      return f_s;
    case ModelMode::kSkeletonOnly:
      if (f_j == kNoNode) throw ContractError("skeleton-only fusion needs F_J");
      return f_j;
    case ModelMode::kGaitMix: {
      if (f_s == kNoNode || f_j == kNoNode) throw ContractError("gaitmix fusion needs F_S and F_J");
      if (cfg.combine == CombineMode::kConcat) return tape.concat({f_s, f_j}, 0);
      return tape.add(f_s, tape.tile(f_j, 0, cfg.strips()));
    }
    case ModelMode::kGaitRef: {
      if (f_s == kNoNode || f_j == kNoNode) throw ContractError("gaitref fusion needs F_S and F_J");
      if (f_j_ref == kNoNode) {
        throw ContractError("gaitref fusion needs the refined skeleton feature");
      }
      if (cfg.combine == CombineMode::kConcat) return tape.concat({f_s, f_j, f_j_ref}, 0);
      return tape.add(tape.add(f_s, tape.tile(f_j, 0, cfg.strips())),
                      tape.tile(f_j_ref, 0, cfg.strips()));
    }
  }
  throw ContractError("unknown model mode");
}

// Shared identity MLP: the same C→d map applied to every part row.
inline NodeId embed_parts(Tape& tape, const TapeBinding& bind, NodeId parts) {
  return tape.bias_last(tape.matmul(parts, bind.at("fuse.mlp.w")), bind.at("fuse.mlp.b"));
}

// Per-part classifier heads; logits averaged over parts → 1×num_train_ids.
inline NodeId classify_parts(Tape& tape, const TapeBinding& bind, NodeId embedding) {
  const Tensor& e = tape.value(embedding);
  const std::int64_t p = e.dim(0), d = e.dim(1);
  NodeId per_part = tape.bmm(tape.reshape(embedding, {p, 1, d}), bind.at("cls.w"));
  const std::int64_t ids = tape.value(per_part).dim(2);
  NodeId with_bias = tape.add(tape.reshape(per_part, {p, ids}), bind.at("cls.b"));
  return tape.reshape(tape.mean_over_axes(with_bias, {0}), {1, ids});
}

struct SampleForward {
  NodeId embedding = kNoNode;  // parts×d
  NodeId logits = kNoNode;     // 1×num_train_ids when a classifier head exists
  NodeId j_prime = kNoNode;    // gaitref only
  NodeId delta = kNoNode;      // gaitref only
};

// Full forward pass for one sequence. `joints` must already be normalized.
inline SampleForward forward_sample(Tape& tape, const TapeBinding& bind, const ModelConfig& cfg,
                                    const SkeletonEncoderHandle& enc,
                                    const SilhouetteSequence* sil, const Tensor* joints) {
  const bool need_sil = cfg.mode != ModelMode::kSkeletonOnly;
  const bool need_skel = cfg.mode != ModelMode::kSilhouetteOnly;
  if (need_sil && sil == nullptr) throw ContractError("model mode needs silhouettes");
  if (need_skel && joints == nullptr) throw ContractError("model mode needs a skeleton");

  SampleForward out;
  NodeId f_s = kNoNode, f_j = kNoNode, f_j_ref = kNoNode;
  if (need_sil) f_s = encode_silhouette(tape, bind, cfg, *sil);
  if (need_skel) {
    NodeId j = tape.constant(*joints);
    SkeletonFeatures feats = encode_skeleton(tape, bind, cfg, enc, j);
    f_j = feats.f_j;
    if (cfg.mode == ModelMode::kGaitRef) {
      CorrectorOutput corr =
          correct_skeleton(tape, bind, cfg, *enc.graph, j, feats.f_j_pre, feats.f_j, f_s);
      out.j_prime = corr.j_prime;
      out.delta = corr.delta;
      f_j_ref = encode_skeleton(tape, bind, cfg, enc, corr.j_prime).f_j;
    }
  }
  out.embedding = embed_parts(tape, bind, fuse_parts(tape, cfg, f_s, f_j, f_j_ref));
  if (bind.has("cls.w")) out.logits = classify_parts(tape, bind, out.embedding);
  return out;
}

// Mean-over-parts Euclidean distance between two parts×d embeddings, on tape.
inline NodeId part_distance(Tape& tape, NodeId a, NodeId b) {
  NodeId diff = tape.sub(a, b);
  NodeId per_part = tape.safe_sqrt(tape.sum_over_axes(tape.mul(diff, diff), {1}));
  return tape.mean_over_axes(per_part, {0});
}

// Batch-all triplet loss: every ordered (anchor, positive) pair within an
// identity against every negative; hinge terms max(0, d_ap − d_an + margin)
// summed and divided by the number of nonzero terms (no active term → zero
// loss, flagged). The count acts as a constant in the gradient.
inline NodeId triplet_loss(Tape& tape, const std::vector<NodeId>& embeddings,
                           const std::vector<std::int64_t>& labels, double margin,
                           bool* no_triplet_flag = nullptr) {
  const std::size_t n = embeddings.size();
  if (n != labels.size()) throw ContractError("embeddings and labels disagree in length");
  if (margin < 0.0) throw ConfigError("triplet margin must be >= 0");

  // pairwise distances, computed once per unordered pair
  std::vector<NodeId> dist(n * n, kNoNode);
  auto d_of = [&](std::size_t i, std::size_t j) {
    NodeId& slot = dist[std::min(i, j) * n + std::max(i, j)];
    if (slot == kNoNode) slot = part_distance(tape, embeddings[i], embeddings[j]);
    return slot;
  };

  std::vector<NodeId> hinges;
  std::int64_t active = 0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t p = 0; p < n; ++p) {
      if (p == a || labels[p] != labels[a]) continue;
      for (std::size_t g = 0; g < n; ++g) {
        if (labels[g] == labels[a]) continue;
        NodeId term =
            tape.relu(tape.add_scalar(tape.sub(d_of(a, p), d_of(a, g)), margin));
        if (tape.value(term).item() > 0.0) ++active;
        hinges.push_back(term);
      }
    }
  }
  if (no_triplet_flag) *no_triplet_flag = hinges.empty();
  if (hinges.empty()) return tape.constant(Tensor::scalar(0.0));
  NodeId total = hinges.size() == 1 ? hinges[0] : tape.add_n(hinges);
  return tape.scale(total, 1.0 / static_cast<double>(std::max<std::int64_t>(1, active)));
}

// Softmax cross-entropy, mean over the batch.
inline NodeId classification_loss(Tape& tape, NodeId logits,
                                  const std::vector<std::int64_t>& labels) {
  return tape.cross_entropy_logits(logits, labels);
}

inline NodeId total_loss(Tape& tape, NodeId trip, NodeId cls, double lambda1, double lambda2) {
  return tape.add(tape.scale(trip, lambda1), tape.scale(cls, lambda2));
}

}  // namespace gaitref
