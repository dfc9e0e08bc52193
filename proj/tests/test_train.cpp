#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "gaitref/trainer.hpp"

using namespace gaitref;

namespace {

ModelConfig small_config(ModelMode mode, std::int64_t num_ids = 0) {
  ModelConfig cfg;
  cfg.mode = mode;
  cfg.conv_stack = {{4, 3, 1, 1, true}, {8, 3, 1, 1, true}};
  cfg.skeleton_hidden = {8, 8};
  cfg.decoder_hidden = {8};
  cfg.embed_dim = 8;
  cfg.temporal_kernel = 3;
  cfg.num_train_ids = num_ids;
  return cfg;
}

std::vector<SampleRecord> make_records(int n_sub, int n_seq, std::int64_t frames) {
  SynthConfig sc;
  sc.n_frames = frames;
  sc.jitter_sigma = 0.05;
  sc.jitter_frame_prob = 0.3;
  std::vector<SampleRecord> out;
  for (int s = 0; s < n_sub; ++s) {
    const std::string subject = "s" + std::to_string(s);
    for (int q = 0; q < n_seq; ++q) {
      SampleRecord rec = synth_gait(7000 + static_cast<std::uint64_t>(s), sc,
                                    900 + static_cast<std::uint64_t>(s) * 31 +
                                        static_cast<std::uint64_t>(q));
      rec.skeleton.subject_id = subject;
      rec.silhouette.subject_id = subject;
      rec.silhouette.view_tag = "seq" + std::to_string(q);
      out.push_back(std::move(rec));
    }
  }
  return out;
}

TrainConfig fast_cfg() {
  TrainConfig cfg;
  cfg.iterations = 1;
  cfg.batch_p = 2;
  cfg.batch_k = 2;
  cfg.train_frames = 8;
  cfg.learning_rate = 1e-3;
  cfg.seed = 5;
  return cfg;
}

}  // namespace

TEST(TrainConfig, ValidateRejectsBadValues) {
  TrainConfig cfg = fast_cfg();
  cfg.iterations = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = fast_cfg();
  cfg.batch_p = 1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = fast_cfg();
  cfg.batch_k = 1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = fast_cfg();
  cfg.margin = -0.1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = fast_cfg();
  cfg.decay_milestones = {0};
  EXPECT_THROW(cfg.validate(), ConfigError);
  fast_cfg().validate();
}

TEST(Trainer, TooFewIdentitiesThrows) {
  Model model(small_config(ModelMode::kGaitMix), 3);
  auto records = make_records(1, 2, 12);
  TrainConfig cfg = fast_cfg();
  cfg.lambda2 = 0.0;
  EXPECT_THROW(train_model(model, records, cfg), ConfigError);
}

TEST(Trainer, SingleSequenceSubjectThrows) {
  Model model(small_config(ModelMode::kGaitMix), 3);
  auto records = make_records(2, 2, 12);
  records.pop_back();  // second subject now has one sequence
  TrainConfig cfg = fast_cfg();
  cfg.lambda2 = 0.0;
  EXPECT_THROW(train_model(model, records, cfg), ConfigError);
}

TEST(Trainer, ClassifierIdentityCountMismatchThrows) {
  Model model(small_config(ModelMode::kGaitMix, 5), 3);
  auto records = make_records(2, 2, 12);  // 2 identities, classifier built for 5
  EXPECT_THROW(train_model(model, records, fast_cfg()), ConfigError);
}

TEST(Trainer, ZeroLearningRateLeavesParamsUnchanged) {
  Model model(small_config(ModelMode::kGaitMix), 3);
  auto records = make_records(2, 2, 12);
  const std::map<std::string, Tensor> before = model.params();
  TrainConfig cfg = fast_cfg();
  cfg.learning_rate = 0.0;
  cfg.lambda2 = 0.0;
  TrainResult res = train_model(model, records, cfg);
  ASSERT_EQ(res.losses.size(), 1u);
  for (const auto& [name, t] : model.params()) {
    const Tensor& b = before.at(name);
    for (std::int64_t i = 0; i < t.numel(); ++i) {
      ASSERT_EQ(t.at(i), b.at(i)) << name;
    }
  }
}

TEST(Trainer, SameSeedReproducesBitwise) {
  auto records = make_records(2, 2, 12);
  TrainConfig cfg = fast_cfg();
  cfg.iterations = 2;
  cfg.lambda2 = 0.0;

  Model a(small_config(ModelMode::kGaitMix), 3);
  Model b(small_config(ModelMode::kGaitMix), 3);
  TrainResult ra = train_model(a, records, cfg);
  TrainResult rb = train_model(b, records, cfg);

  ASSERT_EQ(ra.losses.size(), rb.losses.size());
  for (std::size_t i = 0; i < ra.losses.size(); ++i) {
    EXPECT_EQ(ra.losses[i].triplet, rb.losses[i].triplet);
    EXPECT_EQ(ra.losses[i].total, rb.losses[i].total);
  }
  for (const auto& [name, t] : a.params()) {
    const Tensor& o = b.params().at(name);
    for (std::int64_t i = 0; i < t.numel(); ++i) {
      ASSERT_EQ(t.at(i), o.at(i)) << name;
    }
  }
}

TEST(Trainer, GradientReachesEveryModule) {
  // two steps: the correction head's zero-initialized projection only starts
  // routing gradient into the decoder blocks once the first step moves it
  Model model(small_config(ModelMode::kGaitRef, 2), 3);
  auto records = make_records(2, 2, 12);
  const std::map<std::string, Tensor> before = model.params();
  TrainConfig cfg = fast_cfg();
  cfg.iterations = 2;
  TrainResult res = train_model(model, records, cfg);
  EXPECT_EQ(res.no_triplet_batches, 0);
  EXPECT_GT(res.losses.front().total, 0.0);

  auto group_changed = [&](const std::string& prefix) {
    for (const auto& [name, t] : model.params()) {
      if (name.rfind(prefix, 0) != 0) continue;
      const Tensor& b = before.at(name);
      for (std::int64_t i = 0; i < t.numel(); ++i) {
        if (t.at(i) != b.at(i)) return true;
      }
    }
    return false;
  };
  EXPECT_TRUE(group_changed("sil."));
  EXPECT_TRUE(group_changed("skel."));
  EXPECT_TRUE(group_changed("scn.out"));
  EXPECT_TRUE(group_changed("scn.block"));
  EXPECT_TRUE(group_changed("fuse."));
  EXPECT_TRUE(group_changed("cls."));
}

TEST(Trainer, LossCsvFormat) {
  std::vector<LossRow> rows = {{1, 0.5, 1.25, 1.75}, {2, 0.25, 1.0, 1.25}};
  const std::string csv = loss_csv(rows);
  EXPECT_EQ(csv.substr(0, 23), "iter,triplet,cls,total\n");
  EXPECT_NE(csv.find("1,0.5,1.25,1.75\n"), std::string::npos);
  EXPECT_NE(csv.find("2,0.25,1,1.25\n"), std::string::npos);
}
