#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gaitref/adam.hpp"
#include "gaitref/fusion.hpp"
#include "gaitref/io.hpp"
#include "gaitref/synth.hpp"

namespace gaitref {

struct TrainConfig {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double margin = 0.2;
  double learning_rate = 3e-4;
  std::vector<std::int64_t> decay_milestones;  // lr ×= 0.1 when iter reaches each
  std::int64_t iterations = 1000;
  std::int64_t batch_p = 8;   // identities per batch
  std::int64_t batch_k = 4;   // sequences per identity
  std::int64_t train_frames = 30;
  std::uint64_t seed = 1;

  void validate() const {
    if (lambda1 < 0.0 || lambda2 < 0.0) throw ConfigError("loss weights must be >= 0");
    if (margin < 0.0) throw ConfigError("triplet margin must be >= 0");
    if (learning_rate < 0.0) throw ConfigError("learning rate must be >= 0");
    if (iterations < 1) throw ConfigError("iterations must be >= 1");
    if (batch_p < 2) throw ConfigError("need at least 2 identities per batch");
    if (batch_k < 2) throw ConfigError("need at least 2 sequences per identity");
    if (train_frames < 1) throw ConfigError("train_frames must be >= 1");
    for (std::int64_t m : decay_milestones) {
      if (m < 1) throw ConfigError("decay milestones must be >= 1");
    }
  }
};

struct LossRow {
  std::int64_t iter;
  double triplet;
  double cls;
  double total;
};

struct TrainResult {
  std::vector<LossRow> losses;
  std::int64_t no_triplet_batches = 0;
};

namespace detail {

struct IdentityGroup {
  std::string subject;
  std::vector<const SampleRecord*> records;
};

inline std::vector<IdentityGroup> group_by_subject(const std::vector<SampleRecord>& records) {
  std::map<std::string, std::vector<const SampleRecord*>> by_subject;
  for (const SampleRecord& r : records) by_subject[r.skeleton.subject_id].push_back(&r);
  std::vector<IdentityGroup> out;
  out.reserve(by_subject.size());
  for (auto& [subject, recs] : by_subject) out.push_back({subject, std::move(recs)});
  return out;
}

// One training sample prepared for the forward pass.
struct PreparedSample {
  SilhouetteSequence sil;
  Tensor joints;  // normalized, train_frames×K×2
};

inline PreparedSample prepare_sample(const SampleRecord& rec, std::int64_t frames) {
  PreparedSample out;
  out.sil = sample_frames(rec.silhouette, frames, SampleMode::kCenterCrop);
  SkeletonSequence skel = sample_frames(rec.skeleton, frames, SampleMode::kCenterCrop);
  out.joints = normalize_skeleton(skel).joints;
  return out;
}

}  // namespace detail

// Deterministic metric-learning loop: each iteration samples P identities ×
// K_s sequences, runs the full forward on a fresh tape, backpropagates
// λ1·triplet + λ2·classification, and applies one Adam step.
inline TrainResult train_model(Model& model, const std::vector<SampleRecord>& records,
                               const TrainConfig& cfg) {
  cfg.validate();
  const ModelConfig& mc = model.config();
  std::vector<detail::IdentityGroup> ids = detail::group_by_subject(records);
  if (static_cast<std::int64_t>(ids.size()) < cfg.batch_p) {
    throw ConfigError("dataset has " + std::to_string(ids.size()) +
                      " identities, batch needs " + std::to_string(cfg.batch_p));
  }
  for (const auto& g : ids) {
    if (g.records.size() < 2) {
      throw ConfigError("subject " + g.subject +
                        " has fewer than 2 sequences; triplets need positives");
    }
  }
  const bool use_cls = cfg.lambda2 > 0.0 && mc.num_train_ids > 0;
  if (use_cls && mc.num_train_ids != static_cast<std::int64_t>(ids.size())) {
    throw ConfigError("classifier expects " + std::to_string(mc.num_train_ids) +
                      " identities, dataset has " + std::to_string(ids.size()));
  }

  Rng rng(mix_seed(cfg.seed, 0x7a11));
  Adam opt(cfg.learning_rate);
  TrainResult result;
  result.losses.reserve(static_cast<std::size_t>(cfg.iterations));

  std::vector<std::size_t> id_order(ids.size());
  for (std::size_t i = 0; i < id_order.size(); ++i) id_order[i] = i;

  for (std::int64_t iter = 1; iter <= cfg.iterations; ++iter) {
    for (std::int64_t m : cfg.decay_milestones) {
      if (iter == m) opt.set_learning_rate(opt.learning_rate() * 0.1);
    }

    rng.shuffle(id_order);
    Tape tape;
    TapeBinding bind = model.bind(tape);

    std::vector<NodeId> embeddings;
    std::vector<std::int64_t> trip_labels;
    std::vector<NodeId> logit_rows;
    std::vector<std::int64_t> cls_labels;
    for (std::int64_t p = 0; p < cfg.batch_p; ++p) {
      const std::size_t gi = id_order[static_cast<std::size_t>(p)];
      const detail::IdentityGroup& group = ids[gi];
      std::vector<std::size_t> seq_order(group.records.size());
      for (std::size_t i = 0; i < seq_order.size(); ++i) seq_order[i] = i;
      rng.shuffle(seq_order);
      for (std::int64_t s = 0; s < cfg.batch_k; ++s) {
        const std::size_t ri = seq_order[static_cast<std::size_t>(s) % seq_order.size()];
        detail::PreparedSample prep =
            detail::prepare_sample(*group.records[ri], cfg.train_frames);
        SampleForward fwd = forward_sample(tape, bind, mc, model.raw_skeleton_encoder(),
                                           &prep.sil, &prep.joints);
        embeddings.push_back(fwd.embedding);
        trip_labels.push_back(static_cast<std::int64_t>(gi));
        if (use_cls && fwd.logits != kNoNode) {
          logit_rows.push_back(fwd.logits);
          cls_labels.push_back(static_cast<std::int64_t>(gi));
        }
      }
    }

    bool no_triplet = false;
    NodeId trip = triplet_loss(tape, embeddings, trip_labels, cfg.margin, &no_triplet);
    if (no_triplet) ++result.no_triplet_batches;
    NodeId cls = use_cls && !logit_rows.empty()
                     ? classification_loss(tape, tape.concat(logit_rows, 0), cls_labels)
                     : tape.constant(Tensor::scalar(0.0));
    NodeId loss = total_loss(tape, trip, cls, cfg.lambda1, cfg.lambda2);
    tape.backward(loss);

    std::map<std::string, Tensor> grads;
    for (const auto& [name, id] : bind.ids) grads[name] = tape.gradient(id);
    opt.step(model.params(), grads);

    result.losses.push_back({iter, tape.value(trip).item(), tape.value(cls).item(),
                             tape.value(loss).item()});
  }
  return result;
}

inline std::string loss_csv(const std::vector<LossRow>& rows) {
  std::string out = "iter,triplet,cls,total\n";
  for (const LossRow& r : rows) {
    out += std::to_string(r.iter);
    out += ',';
    out += detail::format_double(r.triplet);
    out += ',';
    out += detail::format_double(r.cls);
    out += ',';
    out += detail::format_double(r.total);
    out += '\n';
  }
  return out;
}

}  // namespace gaitref
