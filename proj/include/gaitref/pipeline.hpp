#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gaitref/evaluator.hpp"
#include "gaitref/trainer.hpp"

namespace gaitref {

// Embed one sequence for retrieval: sample frames, normalize the skeleton,
// run the model forward, return the parts×d embedding.
inline Embedded embed_sequence(const Model& model, const SampleRecord& rec,
                               std::int64_t eval_frames) {
  detail::PreparedSample prep = detail::prepare_sample(rec, eval_frames);
  Tape tape;
  TapeBinding bind = model.bind(tape);
  const ModelConfig& mc = model.config();
  const SilhouetteSequence* sil = mc.mode == ModelMode::kSkeletonOnly ? nullptr : &prep.sil;
  const Tensor* joints = mc.mode == ModelMode::kSilhouetteOnly ? nullptr : &prep.joints;
  SampleForward fwd = forward_sample(tape, bind, mc, model.raw_skeleton_encoder(), sil, joints);
  Embedded out;
  out.parts = tape.value(fwd.embedding);
  out.subject = rec.skeleton.subject_id;
  out.view = rec.silhouette.view_tag;
  return out;
}

// Run the correction network over a full sequence and map the predicted
// correction back to the input coordinate frame. Only the delta is
// un-scaled, so a zero correction leaves the input bitwise untouched.
inline SkeletonSequence refine_sequence(const Model& model, const SampleRecord& rec) {
  const ModelConfig& mc = model.config();
  if (mc.mode != ModelMode::kGaitRef) {
    throw ContractError("refinement needs a gaitref-mode model");
  }
  const NormalizeTransform t = normalize_transform_for(rec.skeleton);
  SkeletonSequence normalized = rec.skeleton;
  t.apply(normalized.joints);

  Tape tape;
  TapeBinding bind = model.bind(tape);
  SampleForward fwd =
      forward_sample(tape, bind, mc, model.raw_skeleton_encoder(), &rec.silhouette,
                     &normalized.joints);
  SkeletonSequence out = rec.skeleton;
  const Tensor& delta = tape.value(fwd.delta);
  for (std::int64_t i = 0; i < delta.numel(); ++i) {
    out.joints.at(i) += delta.at(i) / t.scale;
  }
  return out;
}

// Mean over frames and joints of the per-joint Euclidean displacement.
inline double mean_joint_displacement(const SkeletonSequence& a, const SkeletonSequence& b) {
  a.validate();
  b.validate();
  if (!a.joints.same_shape(b.joints)) {
    throw DimensionError("skeleton sequences differ in shape: " + shape_str(a.joints.shape()) +
                         " vs " + shape_str(b.joints.shape()));
  }
  double total = 0.0;
  const std::int64_t pairs = a.joints.numel() / 2;
  for (std::int64_t i = 0; i < pairs; ++i) {
    const double dx = a.joints.at(2 * i) - b.joints.at(2 * i);
    const double dy = a.joints.at(2 * i + 1) - b.joints.at(2 * i + 1);
    total += std::sqrt(dx * dx + dy * dy);
  }
  return total / static_cast<double>(pairs);
}

}  // namespace gaitref
