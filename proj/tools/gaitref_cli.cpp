#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gaitref/config.hpp"
#include "gaitref/evaluator.hpp"
#include "gaitref/pipeline.hpp"
#include "gaitref/refiner.hpp"
#include "gaitref/trainer.hpp"

namespace fs = std::filesystem;
using namespace gaitref;

namespace {

// Every key any subcommand understands, with its default. Commands read the
// full registry so a config emitted by one command feeds the next; typos are
// still rejected.
struct RunSettings {
  // synthesis
  std::int64_t ids = 20;
  std::int64_t seqs = 8;
  std::int64_t frames = 60;
  double jitter_sigma = 0.08;
  double jitter_prob = 0.3;
  double bag_prob = 0.35;
  // model
  ModelConfig model;
  std::vector<std::int64_t> conv_channels = {16, 32, 32};
  std::vector<std::int64_t> conv_pools = {1, 1, 0};
  // training
  TrainConfig train;
  std::vector<std::int64_t> train_seqs = {0, 1, 2, 3, 4};
  // evaluation
  std::int64_t eval_frames = 30;
  std::vector<std::int64_t> gallery_seqs = {5, 6};
  std::vector<std::int64_t> probe_seqs = {7};
  std::vector<std::int64_t> ranks = {1, 5, 10, 20};
  bool exclude_same_view = false;
  // refinement
  std::string smooth_method = "gaitref";
  std::int64_t smooth_window = 3;
  double smooth_sigma = 1.0;
  // ablation sweep axes
  std::vector<std::string> sweep_combine = {"concat"};
  std::vector<std::string> sweep_toggles = {"full"};
  std::vector<std::string> sweep_smooth = {"none"};
  std::vector<std::int64_t> sweep_seeds = {1, 2, 3};
  // common
  std::uint64_t seed = 1;
  std::string data;
  std::string checkpoint;
};

std::vector<std::string> get_string_list(const KeyValueConfig& cfg, const std::string& key,
                                         const std::vector<std::string>& def) {
  std::string joined;
  for (std::size_t i = 0; i < def.size(); ++i) {
    if (i) joined += ',';
    joined += def[i];
  }
  const std::string raw = cfg.get_string(key, joined);
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= raw.size()) {
    std::size_t comma = raw.find(',', pos);
    if (comma == std::string::npos) comma = raw.size();
    std::string item = raw.substr(pos, comma - pos);
    const auto a = item.find_first_not_of(" \t");
    if (a != std::string::npos) {
      const auto b = item.find_last_not_of(" \t");
      out.push_back(item.substr(a, b - a + 1));
    }
    pos = comma + 1;
  }
  if (out.empty()) throw ConfigError("key '" + key + "' needs at least one entry");
  return out;
}

RunSettings parse_run_settings(const KeyValueConfig& cfg) {
  RunSettings s;
  s.ids = cfg.get_int("ids", s.ids);
  s.seqs = cfg.get_int("seqs", s.seqs);
  s.frames = cfg.get_int("frames", s.frames);
  s.jitter_sigma = cfg.get_double("jitter_sigma", s.jitter_sigma);
  s.jitter_prob = cfg.get_double("jitter_prob", s.jitter_prob);
  s.bag_prob = cfg.get_double("bag_prob", s.bag_prob);

  s.model.mode = model_mode_from(cfg.get_string("mode", to_string(s.model.mode)));
  s.model.combine = combine_mode_from(cfg.get_string("combine", to_string(s.model.combine)));
  s.conv_channels = cfg.get_int_list("conv_channels", s.conv_channels);
  s.conv_pools = cfg.get_int_list("conv_pools", s.conv_pools);
  if (s.conv_pools.size() != s.conv_channels.size()) {
    throw ConfigError("conv_pools must list one 0/1 per conv_channels entry");
  }
  s.model.conv_stack.clear();
  for (std::size_t i = 0; i < s.conv_channels.size(); ++i) {
    s.model.conv_stack.push_back({s.conv_channels[i], 3, 1, 1, s.conv_pools[i] != 0});
  }
  s.model.hpp_scale = static_cast<int>(cfg.get_int("hpp_scale", s.model.hpp_scale));
  s.model.skeleton_hidden = cfg.get_int_list("skeleton_hidden", s.model.skeleton_hidden);
  s.model.temporal_kernel = cfg.get_int("temporal_kernel", s.model.temporal_kernel);
  s.model.skeleton_format = cfg.get_string("skeleton_format", s.model.skeleton_format);
  s.model.decoder_hidden = cfg.get_int_list("decoder_hidden", s.model.decoder_hidden);
  s.model.use_FJ = cfg.get_bool("use_FJ", s.model.use_FJ);
  s.model.use_FJP = cfg.get_bool("use_FJP", s.model.use_FJP);
  s.model.use_FS = cfg.get_bool("use_FS", s.model.use_FS);
  s.model.allow_bare_corrector =
      cfg.get_bool("allow_bare_corrector", s.model.allow_bare_corrector);
  s.model.detach_corrector_inputs =
      cfg.get_bool("detach_corrector_inputs", s.model.detach_corrector_inputs);
  s.model.embed_dim = cfg.get_int("embed_dim", s.model.embed_dim);

  s.train.lambda1 = cfg.get_double("lambda1", s.train.lambda1);
  s.train.lambda2 = cfg.get_double("lambda2", s.train.lambda2);
  s.train.margin = cfg.get_double("margin", s.train.margin);
  s.train.learning_rate = cfg.get_double("learning_rate", s.train.learning_rate);
  s.train.decay_milestones = cfg.get_int_list("decay_milestones", s.train.decay_milestones);
  s.train.iterations = cfg.get_int("iterations", s.train.iterations);
  s.train.batch_p = cfg.get_int("batch_p", s.train.batch_p);
  s.train.batch_k = cfg.get_int("batch_k", s.train.batch_k);
  s.train.train_frames = cfg.get_int("train_frames", s.train.train_frames);
  s.train_seqs = cfg.get_int_list("train_seqs", s.train_seqs);

  s.eval_frames = cfg.get_int("eval_frames", s.eval_frames);
  s.gallery_seqs = cfg.get_int_list("gallery_seqs", s.gallery_seqs);
  s.probe_seqs = cfg.get_int_list("probe_seqs", s.probe_seqs);
  s.ranks = cfg.get_int_list("ranks", s.ranks);
  s.exclude_same_view = cfg.get_bool("exclude_same_view", s.exclude_same_view);

  s.smooth_method = cfg.get_string("smooth_method", s.smooth_method);
  s.smooth_window = cfg.get_int("smooth_window", s.smooth_window);
  s.smooth_sigma = cfg.get_double("smooth_sigma", s.smooth_sigma);

  s.sweep_combine = get_string_list(cfg, "sweep_combine", s.sweep_combine);
  s.sweep_toggles = get_string_list(cfg, "sweep_toggles", s.sweep_toggles);
  s.sweep_smooth = get_string_list(cfg, "sweep_smooth", s.sweep_smooth);
  s.sweep_seeds = cfg.get_int_list("sweep_seeds", s.sweep_seeds);

  s.seed = static_cast<std::uint64_t>(cfg.get_int("seed", static_cast<std::int64_t>(s.seed)));
  s.data = cfg.get_string("data", s.data);
  s.checkpoint = cfg.get_string("checkpoint", s.checkpoint);

  s.train.seed = s.seed;
  cfg.reject_unknown_keys();
  return s;
}

std::string join_ints(const std::vector<std::int64_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

std::string join_strings(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += v[i];
  }
  return out;
}

// Full effective-value snapshot, written next to every emitted artifact.
std::string snapshot(const RunSettings& s) {
  KeyValueConfig out;
  out.set("ids", std::to_string(s.ids));
  out.set("seqs", std::to_string(s.seqs));
  out.set("frames", std::to_string(s.frames));
  out.set("jitter_sigma", detail::format_double(s.jitter_sigma));
  out.set("jitter_prob", detail::format_double(s.jitter_prob));
  out.set("bag_prob", detail::format_double(s.bag_prob));
  out.set("mode", to_string(s.model.mode));
  out.set("combine", to_string(s.model.combine));
  out.set("conv_channels", join_ints(s.conv_channels));
  out.set("conv_pools", join_ints(s.conv_pools));
  out.set("hpp_scale", std::to_string(s.model.hpp_scale));
  out.set("skeleton_hidden", join_ints(s.model.skeleton_hidden));
  out.set("temporal_kernel", std::to_string(s.model.temporal_kernel));
  out.set("skeleton_format", s.model.skeleton_format);
  out.set("decoder_hidden", join_ints(s.model.decoder_hidden));
  out.set("use_FJ", s.model.use_FJ ? "true" : "false");
  out.set("use_FJP", s.model.use_FJP ? "true" : "false");
  out.set("use_FS", s.model.use_FS ? "true" : "false");
  out.set("allow_bare_corrector", s.model.allow_bare_corrector ? "true" : "false");
  out.set("detach_corrector_inputs", s.model.detach_corrector_inputs ? "true" : "false");
  out.set("embed_dim", std::to_string(s.model.embed_dim));
  out.set("lambda1", detail::format_double(s.train.lambda1));
  out.set("lambda2", detail::format_double(s.train.lambda2));
  out.set("margin", detail::format_double(s.train.margin));
  out.set("learning_rate", detail::format_double(s.train.learning_rate));
  out.set("decay_milestones", join_ints(s.train.decay_milestones));
  out.set("iterations", std::to_string(s.train.iterations));
  out.set("batch_p", std::to_string(s.train.batch_p));
  out.set("batch_k", std::to_string(s.train.batch_k));
  out.set("train_frames", std::to_string(s.train.train_frames));
  out.set("train_seqs", join_ints(s.train_seqs));
  out.set("eval_frames", std::to_string(s.eval_frames));
  out.set("gallery_seqs", join_ints(s.gallery_seqs));
  out.set("probe_seqs", join_ints(s.probe_seqs));
  out.set("ranks", join_ints(s.ranks));
  out.set("exclude_same_view", s.exclude_same_view ? "true" : "false");
  out.set("smooth_method", s.smooth_method);
  out.set("smooth_window", std::to_string(s.smooth_window));
  out.set("smooth_sigma", detail::format_double(s.smooth_sigma));
  out.set("sweep_combine", join_strings(s.sweep_combine));
  out.set("sweep_toggles", join_strings(s.sweep_toggles));
  out.set("sweep_smooth", join_strings(s.sweep_smooth));
  out.set("sweep_seeds", join_ints(s.sweep_seeds));
  out.set("seed", std::to_string(s.seed));
  out.set("data", s.data);
  out.set("checkpoint", s.checkpoint);
  return out.resolved_text();
}

// Shared flag state filled by CLI11; values override the config file.
struct FlagOverrides {
  std::string config_path;
  std::string out_dir;
  std::string data_dir;
  std::map<std::string, std::string> keys;  // key = value overrides
};

RunSettings load_settings(const FlagOverrides& flags) {
  KeyValueConfig cfg;
  if (!flags.config_path.empty()) {
    cfg = KeyValueConfig::parse(detail::read_file(flags.config_path));
  }
  for (const auto& [k, v] : flags.keys) cfg.set(k, v);
  if (!flags.data_dir.empty()) cfg.set("data", flags.data_dir);
  return parse_run_settings(cfg);
}

fs::path require_out(const FlagOverrides& flags) {
  if (flags.out_dir.empty()) throw ConfigError("--out DIR is required");
  fs::create_directories(flags.out_dir);
  return flags.out_dir;
}

fs::path require_data(const RunSettings& s) {
  if (s.data.empty()) throw ConfigError("a dataset directory is required (--data or data=)");
  return s.data;
}

std::string subject_name(std::int64_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "s%03" PRId64, i);
  return buf;
}

void cmd_synth(const FlagOverrides& flags) {
  RunSettings s = load_settings(flags);
  const fs::path out = require_out(flags);
  SynthConfig sc;
  sc.n_frames = s.frames;
  sc.jitter_sigma = s.jitter_sigma;
  sc.jitter_frame_prob = s.jitter_prob;
  sc.bag_prob = s.bag_prob;
  if (s.ids < 1 || s.seqs < 1) throw ConfigError("ids and seqs must be >= 1");

  for (std::int64_t i = 0; i < s.ids; ++i) {
    const std::uint64_t identity_seed = mix_seed(s.seed, static_cast<std::uint64_t>(i));
    const std::string subject = subject_name(i);
    for (std::int64_t q = 0; q < s.seqs; ++q) {
      SampleRecord rec =
          synth_gait(identity_seed, sc, mix_seed(identity_seed, 1000 + static_cast<std::uint64_t>(q)));
      rec.skeleton.subject_id = subject;
      rec.silhouette.subject_id = subject;
      rec.silhouette.view_tag = "seq" + std::to_string(q);
      write_record(out / subject / ("seq" + std::to_string(q)), rec);
    }
  }
  detail::write_file(out / "synth_config.txt", snapshot(s));
  std::printf("wrote %" PRId64 " sequences (%" PRId64 " identities) to %s\n", s.ids * s.seqs,
              s.ids, out.string().c_str());
}

std::vector<SampleRecord> load_positions(const DatasetIndex& index,
                                         const std::vector<std::int64_t>& positions) {
  std::vector<SampleRecord> out;
  for (const auto& [subject, seq_ids] : index.by_subject) {
    for (std::int64_t p : positions) {
      if (p < 0 || p >= static_cast<std::int64_t>(seq_ids.size())) {
        throw ConfigError("sequence position " + std::to_string(p) + " out of range for subject " +
                          subject + " (" + std::to_string(seq_ids.size()) + " sequences)");
      }
      out.push_back(read_record(index.sequences[seq_ids[static_cast<std::size_t>(p)]]));
    }
  }
  return out;
}

void apply_smoothing(std::vector<SampleRecord>& records, const std::string& method,
                     std::int64_t window, double sigma) {
  if (method == "none") return;
  for (SampleRecord& rec : records) {
    if (method == "avg") {
      rec.skeleton = smooth_average(rec.skeleton, window);
    } else if (method == "gauss") {
      rec.skeleton = smooth_gaussian(rec.skeleton, window, sigma);
    } else {
      throw ConfigError("unknown smoothing method: " + method + " (want none|avg|gauss)");
    }
  }
}

Model build_model(const RunSettings& s, std::int64_t num_train_ids, std::uint64_t seed) {
  ModelConfig mc = s.model;
  mc.num_train_ids = s.train.lambda2 > 0.0 ? num_train_ids : 0;
  return Model(mc, seed);
}

Model load_model(const RunSettings& s) {
  if (s.checkpoint.empty()) throw ConfigError("a checkpoint path is required (checkpoint=)");
  const std::map<std::string, Tensor> params = read_checkpoint(s.checkpoint);
  // classifier tensors reveal how many identities the checkpoint was trained on
  std::int64_t num_ids = 0;
  auto it = params.find("cls.b");
  if (it != params.end()) num_ids = it->second.dim(1);
  ModelConfig mc = s.model;
  mc.num_train_ids = num_ids;
  Model model(mc, s.seed);
  model.load_params(params);
  return model;
}

void cmd_train(const FlagOverrides& flags) {
  RunSettings s = load_settings(flags);
  const fs::path out = require_out(flags);
  const DatasetIndex index = build_dataset_index(require_data(s));
  std::vector<SampleRecord> records = load_positions(index, s.train_seqs);

  Model model = build_model(s, static_cast<std::int64_t>(index.by_subject.size()), s.seed);
  TrainResult result = train_model(model, records, s.train);

  const fs::path ckpt = out / "checkpoint.bin";
  write_checkpoint(ckpt, model.params());
  detail::write_file(out / "loss.csv", loss_csv(result.losses));
  s.checkpoint = ckpt.string();
  detail::write_file(out / "run_config.txt", snapshot(s));

  const LossRow& last = result.losses.back();
  std::printf("trained %" PRId64 " iterations; final loss %.6f (triplet %.6f, cls %.6f)\n",
              last.iter, last.total, last.triplet, last.cls);
  if (result.no_triplet_batches > 0) {
    std::printf("warning: %" PRId64 " batches had no valid triplet\n", result.no_triplet_batches);
  }
}

void cmd_refine(const FlagOverrides& flags) {
  RunSettings s = load_settings(flags);
  const fs::path out = require_out(flags);
  const DatasetIndex index = build_dataset_index(require_data(s));

  std::optional<Model> model;
  if (s.smooth_method == "gaitref") model = load_model(s);

  std::string report = "subject,sequence,input_displacement,refined_displacement\n";
  double sum_in = 0.0, sum_ref = 0.0;
  std::int64_t with_truth = 0;
  for (const SequenceEntry& entry : index.sequences) {
    SampleRecord rec = read_record(entry);
    SkeletonSequence refined;
    if (model) {
      refined = refine_sequence(*model, rec);
    } else if (s.smooth_method == "avg") {
      refined = smooth_average(rec.skeleton, s.smooth_window);
    } else if (s.smooth_method == "gauss") {
      refined = smooth_gaussian(rec.skeleton, s.smooth_window, s.smooth_sigma);
    } else {
      throw ConfigError("unknown refine method: " + s.smooth_method +
                        " (want gaitref|avg|gauss)");
    }
    const fs::path seq_dir = out / entry.subject / entry.sequence;
    fs::create_directories(seq_dir);
    detail::write_file(seq_dir / "skel.txt",
                       encode_skeleton(refined, {"refined-by " + s.smooth_method}));
    if (rec.clean_skeleton) {
      const double d_in = mean_joint_displacement(rec.skeleton, *rec.clean_skeleton);
      const double d_ref = mean_joint_displacement(refined, *rec.clean_skeleton);
      report += entry.subject + ',' + entry.sequence + ',' + detail::format_double(d_in) + ',' +
                detail::format_double(d_ref) + '\n';
      sum_in += d_in;
      sum_ref += d_ref;
      ++with_truth;
    }
  }
  detail::write_file(out / "refine_report.csv", report);
  detail::write_file(out / "run_config.txt", snapshot(s));
  std::printf("refined %zu sequences with method %s\n", index.sequences.size(),
              s.smooth_method.c_str());
  if (with_truth > 0) {
    const double n = static_cast<double>(with_truth);
    std::printf("mean displacement to clean: input %.6f, refined %.6f\n", sum_in / n,
                sum_ref / n);
  }
}

RetrievalReport run_eval(const Model& model, const RunSettings& s, const DatasetIndex& index) {
  std::vector<SampleRecord> gallery_recs = load_positions(index, s.gallery_seqs);
  std::vector<SampleRecord> probe_recs = load_positions(index, s.probe_seqs);
  std::vector<Embedded> gallery, probes;
  for (const SampleRecord& r : gallery_recs) gallery.push_back(embed_sequence(model, r, s.eval_frames));
  for (const SampleRecord& r : probe_recs) probes.push_back(embed_sequence(model, r, s.eval_frames));
  ExcludePredicate exclude = nullptr;
  if (s.exclude_same_view) {
    exclude = [](const Embedded& p, const Embedded& g) { return p.view == g.view; };
  }
  std::vector<int> ks;
  for (std::int64_t k : s.ranks) ks.push_back(static_cast<int>(k));
  return evaluate_retrieval(probes, gallery, exclude, ks);
}

void cmd_eval(const FlagOverrides& flags) {
  RunSettings s = load_settings(flags);
  const DatasetIndex index = build_dataset_index(require_data(s));
  Model model = load_model(s);
  RetrievalReport report = run_eval(model, s, index);
  std::fputs(report_table(report).c_str(), stdout);
  if (!flags.out_dir.empty()) {
    const fs::path out = require_out(flags);
    detail::write_file(out / "report.csv", report_csv(report));
    detail::write_file(out / "traces.csv", trace_csv(report));
    detail::write_file(out / "run_config.txt", snapshot(s));
  }
}

struct ToggleSet {
  bool fj, fjp, fs;
};

ToggleSet toggle_set_from(const std::string& name) {
  if (name == "full") return {true, true, true};
  if (name == "no_FJ") return {false, true, true};
  if (name == "no_FJP") return {true, false, true};
  if (name == "no_FS") return {true, true, false};
  if (name == "none") return {false, false, false};
  throw ConfigError("unknown toggle set: " + name + " (want full|no_FJ|no_FJP|no_FS|none)");
}

void cmd_ablate(const FlagOverrides& flags) {
  RunSettings s = load_settings(flags);
  const fs::path out = require_out(flags);
  const DatasetIndex index = build_dataset_index(require_data(s));
  const std::int64_t n_ids = static_cast<std::int64_t>(index.by_subject.size());

  std::string table = "variant,rank1,mAP,mINP\n";
  for (const std::string& combine : s.sweep_combine) {
    for (const std::string& toggles : s.sweep_toggles) {
      for (const std::string& smooth : s.sweep_smooth) {
        const std::string variant = combine + "+" + toggles + "+" + smooth;
        RunSettings vs = s;
        vs.model.combine = combine_mode_from(combine);
        const ToggleSet t = toggle_set_from(toggles);
        vs.model.use_FJ = t.fj;
        vs.model.use_FJP = t.fjp;
        vs.model.use_FS = t.fs;
        vs.smooth_method = smooth;
        vs.sweep_combine = {combine};
        vs.sweep_toggles = {toggles};
        vs.sweep_smooth = {smooth};

        double rank1 = 0.0, map = 0.0, minp = 0.0;
        std::string per_seed = "seed,rank1,mAP,mINP\n";
        for (std::int64_t seed : s.sweep_seeds) {
          vs.seed = static_cast<std::uint64_t>(seed);
          vs.train.seed = vs.seed;
          std::vector<SampleRecord> records = load_positions(index, vs.train_seqs);
          apply_smoothing(records, smooth, vs.smooth_window, vs.smooth_sigma);
          Model model = build_model(vs, n_ids, vs.seed);
          train_model(model, records, vs.train);

          std::vector<SampleRecord> gallery_recs = load_positions(index, vs.gallery_seqs);
          std::vector<SampleRecord> probe_recs = load_positions(index, vs.probe_seqs);
          apply_smoothing(gallery_recs, smooth, vs.smooth_window, vs.smooth_sigma);
          apply_smoothing(probe_recs, smooth, vs.smooth_window, vs.smooth_sigma);
          std::vector<Embedded> gallery, probes;
          for (const SampleRecord& r : gallery_recs) {
            gallery.push_back(embed_sequence(model, r, vs.eval_frames));
          }
          for (const SampleRecord& r : probe_recs) {
            probes.push_back(embed_sequence(model, r, vs.eval_frames));
          }
          std::vector<int> ks;
          for (std::int64_t k : vs.ranks) ks.push_back(static_cast<int>(k));
          RetrievalReport rep = evaluate_retrieval(probes, gallery, nullptr, ks);
          const double r1 = rep.rank_k.at(static_cast<int>(vs.ranks.front()));
          rank1 += r1;
          map += rep.mAP;
          minp += rep.mINP;
          per_seed += std::to_string(seed) + ',' + detail::format_double(r1) + ',' +
                      detail::format_double(rep.mAP) + ',' + detail::format_double(rep.mINP) +
                      '\n';
        }
        const double n = static_cast<double>(s.sweep_seeds.size());
        table += variant + ',' + detail::format_double(rank1 / n) + ',' +
                 detail::format_double(map / n) + ',' + detail::format_double(minp / n) + '\n';
        const fs::path vdir = out / variant;
        fs::create_directories(vdir);
        detail::write_file(vdir / "run_config.txt", snapshot(vs));
        detail::write_file(vdir / "metrics.csv", per_seed);
        std::printf("%s: rank1 %.4f mAP %.4f mINP %.4f\n", variant.c_str(), rank1 / n, map / n,
                    minp / n);
      }
    }
  }
  detail::write_file(out / "ablation.csv", table);
}

void add_common(CLI::App* sub, FlagOverrides& flags) {
  sub->add_option("--config", flags.config_path, "key = value config file");
  sub->add_option("--out", flags.out_dir, "output directory");
  sub->add_option("--data", flags.data_dir, "dataset directory");
  sub->add_option_function<std::string>(
      "--seed", [&flags](const std::string& v) { flags.keys["seed"] = v; }, "rng seed override");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dual-modality gait recognition pipeline"};
  app.require_subcommand(1);
  FlagOverrides flags;

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic walking dataset");
  add_common(synth, flags);
  synth->add_option_function<std::string>(
      "--ids", [&](const std::string& v) { flags.keys["ids"] = v; }, "number of identities");
  synth->add_option_function<std::string>(
      "--seqs", [&](const std::string& v) { flags.keys["seqs"] = v; }, "sequences per identity");
  synth->add_option_function<std::string>(
      "--frames", [&](const std::string& v) { flags.keys["frames"] = v; }, "frames per sequence");
  synth->add_option_function<std::string>(
      "--jitter-sigma", [&](const std::string& v) { flags.keys["jitter_sigma"] = v; },
      "skeleton jitter stddev");
  synth->add_option_function<std::string>(
      "--jitter-prob", [&](const std::string& v) { flags.keys["jitter_prob"] = v; },
      "per-frame jitter probability");
  synth->callback([&] { cmd_synth(flags); });

  CLI::App* train = app.add_subcommand("train", "train a recognition model");
  add_common(train, flags);
  train->add_option_function<std::string>(
      "--iterations", [&](const std::string& v) { flags.keys["iterations"] = v; },
      "training iterations");
  train->add_option_function<std::string>(
      "--mode", [&](const std::string& v) { flags.keys["mode"] = v; },
      "silhouette-only|skeleton-only|gaitmix|gaitref");
  train->callback([&] { cmd_train(flags); });

  CLI::App* refine = app.add_subcommand("refine", "write corrected skeleton sequences");
  add_common(refine, flags);
  refine->add_option_function<std::string>(
      "--method", [&](const std::string& v) { flags.keys["smooth_method"] = v; },
      "gaitref|avg|gauss");
  refine->add_option_function<std::string>(
      "--window", [&](const std::string& v) { flags.keys["smooth_window"] = v; },
      "smoothing window (odd)");
  refine->add_option_function<std::string>(
      "--sigma", [&](const std::string& v) { flags.keys["smooth_sigma"] = v; },
      "gaussian smoothing stddev");
  refine->add_option_function<std::string>(
      "--checkpoint", [&](const std::string& v) { flags.keys["checkpoint"] = v; },
      "trained model checkpoint");
  refine->callback([&] { cmd_refine(flags); });

  CLI::App* eval = app.add_subcommand("eval", "probe/gallery retrieval evaluation");
  add_common(eval, flags);
  eval->add_option_function<std::string>(
      "--checkpoint", [&](const std::string& v) { flags.keys["checkpoint"] = v; },
      "trained model checkpoint");
  eval->callback([&] { cmd_eval(flags); });

  CLI::App* ablate = app.add_subcommand("ablate", "mechanism sweep over fusion/toggles/smoothing");
  add_common(ablate, flags);
  ablate->callback([&] { cmd_ablate(flags); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const ProtocolError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
