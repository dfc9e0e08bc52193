#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gaitref/error.hpp"
#include "gaitref/graph.hpp"
#include "gaitref/io.hpp"
#include "gaitref/rng.hpp"
#include "gaitref/tape.hpp"
#include "gaitref/tensor.hpp"

namespace gaitref {

enum class ModelMode { kSilhouetteOnly, kSkeletonOnly, kGaitMix, kGaitRef };
enum class CombineMode { kConcat, kPadding };

inline std::string to_string(ModelMode m) {
  switch (m) {
    case ModelMode::kSilhouetteOnly: return "silhouette-only";
    case ModelMode::kSkeletonOnly: return "skeleton-only";
    case ModelMode::kGaitMix: return "gaitmix";
    case ModelMode::kGaitRef: return "gaitref";
  }
  return "?";
}

inline std::string to_string(CombineMode c) {
  return c == CombineMode::kConcat ? "concat" : "padding";
}

inline ModelMode model_mode_from(const std::string& s) {
  if (s == "silhouette-only") return ModelMode::kSilhouetteOnly;
  if (s == "skeleton-only") return ModelMode::kSkeletonOnly;
  if (s == "gaitmix") return ModelMode::kGaitMix;
  if (s == "gaitref") return ModelMode::kGaitRef;
  throw ConfigError("unknown mode: " + s +
                    " (want silhouette-only|skeleton-only|gaitmix|gaitref)");
}

inline CombineMode combine_mode_from(const std::string& s) {
  if (s == "concat") return CombineMode::kConcat;
  if (s == "padding") return CombineMode::kPadding;
  throw ConfigError("unknown combine mode: " + s + " (want concat|padding)");
}

struct ConvLayerSpec {
  std::int64_t out_channels;
  std::int64_t kernel;
  std::int64_t stride;
  std::int64_t pad;
  bool pool;  // 2×2 max pool after the activation
};

struct ModelConfig {
  ModelMode mode = ModelMode::kGaitRef;
  CombineMode combine = CombineMode::kConcat;

  // silhouette encoder; strips = 2^(hpp_scale-1)
  std::vector<ConvLayerSpec> conv_stack = {{16, 3, 1, 1, true},
                                           {32, 3, 1, 1, true},
                                           {32, 3, 1, 1, false}};
  int hpp_scale = 5;

  // skeleton encoder; last entry is the shared channel width C
  std::vector<std::int64_t> skeleton_hidden = {64, 64, 128, 128, 32};
  std::int64_t temporal_kernel = 9;
  std::string skeleton_format = "coco17";

  // correction network decoder; a final zero-init projection maps to 2
  std::vector<std::int64_t> decoder_hidden = {128, 64, 64};
  bool use_FJ = true;
  bool use_FJP = true;
  bool use_FS = true;
  bool allow_bare_corrector = false;  // explicit override for the all-toggles-off case
  bool detach_corrector_inputs = false;

  std::int64_t embed_dim = 64;
  std::int64_t num_train_ids = 0;  // classifier head; 0 = no classifier

  double leaky_slope = 0.01;

  std::int64_t channels() const {
    if (skeleton_hidden.empty()) throw ConfigError("skeleton_hidden must be nonempty");
    return skeleton_hidden.back();
  }
  std::int64_t strips() const {
    if (hpp_scale < 1 || hpp_scale > 10) throw ConfigError("hpp_scale out of range");
    return std::int64_t{1} << (hpp_scale - 1);
  }
  std::int64_t corrector_input_width() const {
    std::int64_t d = 2;
    if (use_FJ) d += channels();
    if (use_FJP) d += channels();
    if (use_FS) d += strips() * channels();
    return d;
  }
  bool uses_silhouette() const { return mode != ModelMode::kSkeletonOnly; }
  bool uses_skeleton() const { return mode != ModelMode::kSilhouetteOnly; }

  std::int64_t num_parts() const {
    const std::int64_t strips_n = strips();
    switch (mode) {
      case ModelMode::kSilhouetteOnly: return strips_n;
      case ModelMode::kSkeletonOnly: return 1;
      case ModelMode::kGaitMix:
        return combine == CombineMode::kConcat ? strips_n + 1 : strips_n;
      case ModelMode::kGaitRef:
        return combine == CombineMode::kConcat ? strips_n + 2 : strips_n;
    }
    throw ContractError("unreachable");
  }

  void validate() const {
    if (conv_stack.empty() && uses_silhouette()) throw ConfigError("conv_stack must be nonempty");
    for (const auto& l : conv_stack) {
      if (l.out_channels < 1 || l.kernel < 1 || l.stride < 1 || l.pad < 0) {
        throw ConfigError("bad conv layer spec");
      }
    }
    if (channels() < 1) throw ConfigError("channel width must be >= 1");
    if (uses_silhouette() && conv_stack.back().out_channels != channels()) {
      throw ConfigError("last conv layer must emit the shared channel width C=" +
                        std::to_string(channels()));
    }
    if (temporal_kernel < 1 || temporal_kernel % 2 == 0) {
      throw ConfigError("temporal_kernel must be odd and >= 1");
    }
    if (embed_dim < 1) throw ConfigError("embed_dim must be >= 1");
    if (num_train_ids < 0) throw ConfigError("num_train_ids must be >= 0");
    if (mode == ModelMode::kGaitRef && !use_FJ && !use_FJP && !use_FS && !allow_bare_corrector) {
      throw ConfigError(
          "correction network with all feature inputs disabled; "
          "set allow_bare_corrector to force a J-only decoder");
    }
  }
};

// One skeleton encoder definition: parameter prefix plus architecture. The
// model exposes a single instance for both the raw and the refined stream.
struct SkeletonEncoderHandle {
  std::string param_prefix;
  const std::vector<std::int64_t>* hidden = nullptr;
  const SkeletonGraph* graph = nullptr;
};

// Parameter NodeIds for one tape; rebuilt every iteration.
struct TapeBinding {
  Tape* tape = nullptr;
  std::map<std::string, NodeId> ids;

  NodeId at(const std::string& name) const {
    auto it = ids.find(name);
    if (it == ids.end()) throw ContractError("no parameter named " + name);
    return it->second;
  }

  bool has(const std::string& name) const { return ids.count(name) != 0; }
};

// Trainable state: named tensors with deterministic seeded initialization.
class Model {
 public:
  Model(ModelConfig config, std::uint64_t seed)
      : config_(std::move(config)), graph_(SkeletonGraph::for_format(config_.skeleton_format)) {
    config_.validate();
    skel_encoder_ = {"skel", &config_.skeleton_hidden, &graph_};
    Rng rng(mix_seed(seed, 0x90de1));
    init_params(rng);
  }

  // the encoder handle aliases this object's own members, so moves must
  // re-point it and copies are disallowed
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;
  Model(Model&& other) noexcept
      : config_(std::move(other.config_)),
        graph_(std::move(other.graph_)),
        params_(std::move(other.params_)) {
    skel_encoder_ = {"skel", &config_.skeleton_hidden, &graph_};
  }
  Model& operator=(Model&& other) noexcept {
    config_ = std::move(other.config_);
    graph_ = std::move(other.graph_);
    params_ = std::move(other.params_);
    skel_encoder_ = {"skel", &config_.skeleton_hidden, &graph_};
    return *this;
  }

  const ModelConfig& config() const { return config_; }
  const SkeletonGraph& graph() const { return graph_; }

  // Both skeleton streams (raw J and refined J') run through this one object;
  // sharing is structural, not copied.
  const SkeletonEncoderHandle& raw_skeleton_encoder() const { return skel_encoder_; }
  const SkeletonEncoderHandle& refined_skeleton_encoder() const { return skel_encoder_; }

  std::map<std::string, Tensor>& params() { return params_; }
  const std::map<std::string, Tensor>& params() const { return params_; }

  Tensor& param(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw ContractError("no parameter named " + name);
    return it->second;
  }

  // Registers every parameter on the tape, in name order.
  TapeBinding bind(Tape& tape) const {
    TapeBinding b;
    b.tape = &tape;
    for (const auto& [name, t] : params_) b.ids[name] = tape.param(t);
    return b;
  }

  void save(const std::filesystem::path& path) const { write_checkpoint(path, params_); }

  void load(const std::filesystem::path& path) { load_params(read_checkpoint(path)); }

  void load_params(const std::map<std::string, Tensor>& loaded) {
    if (loaded.size() != params_.size()) {
      throw FormatError("checkpoint has " + std::to_string(loaded.size()) + " tensors, model has " +
                        std::to_string(params_.size()),
                        0);
    }
    for (auto& [name, t] : params_) {
      auto it = loaded.find(name);
      if (it == loaded.end()) throw FormatError("checkpoint missing tensor " + name, 0);
      if (!it->second.same_shape(t)) {
        throw FormatError("checkpoint tensor " + name + " has shape " +
                          shape_str(it->second.shape()) + ", model wants " + shape_str(t.shape()),
                          0);
      }
      t = it->second;
    }
  }

 private:
  static Tensor he_init(Rng& rng, Shape shape, std::int64_t fan_in) {
    Tensor t(std::move(shape));
    const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (std::int64_t i = 0; i < t.numel(); ++i) t.at(i) = stddev * rng.gaussian();
    return t;
  }

  void add_stgcn_block_params(Rng& rng, const std::string& prefix, std::int64_t c_in,
                              std::int64_t c_out) {
    params_[prefix + ".spatial.w"] = he_init(rng, {c_in, c_out}, c_in);
    params_[prefix + ".spatial.b"] = Tensor({c_out});
    params_[prefix + ".temporal.w"] =
        he_init(rng, {c_out, config_.temporal_kernel, c_out}, config_.temporal_kernel * c_out);
    params_[prefix + ".temporal.b"] = Tensor({c_out});
  }

  void init_params(Rng& rng) {
    const std::int64_t c = config_.channels();
    if (config_.uses_silhouette()) {
      std::int64_t in_ch = 1;
      for (std::size_t i = 0; i < config_.conv_stack.size(); ++i) {
        const ConvLayerSpec& l = config_.conv_stack[i];
        const std::string p = "sil.conv" + std::to_string(i);
        params_[p + ".w"] = he_init(rng, {l.out_channels, in_ch, l.kernel, l.kernel},
                                    in_ch * l.kernel * l.kernel);
        params_[p + ".b"] = Tensor({l.out_channels});
        in_ch = l.out_channels;
      }
    }
    if (config_.uses_skeleton()) {
      std::int64_t prev = 2;
      for (std::size_t i = 0; i < config_.skeleton_hidden.size(); ++i) {
        add_stgcn_block_params(rng, "skel.block" + std::to_string(i), prev,
                               config_.skeleton_hidden[i]);
        prev = config_.skeleton_hidden[i];
      }
    }
    if (config_.mode == ModelMode::kGaitRef) {
      std::int64_t prev = config_.corrector_input_width();
      for (std::size_t i = 0; i < config_.decoder_hidden.size(); ++i) {
        add_stgcn_block_params(rng, "scn.block" + std::to_string(i), prev,
                               config_.decoder_hidden[i]);
        prev = config_.decoder_hidden[i];
      }
      // zero-init final projection: the refiner starts as the identity
      params_["scn.out.w"] = Tensor({prev, 2});
      params_["scn.out.b"] = Tensor({2});
    }
    params_["fuse.mlp.w"] = he_init(rng, {c, config_.embed_dim}, c);
    params_["fuse.mlp.b"] = Tensor({config_.embed_dim});
    if (config_.num_train_ids > 0) {
      const std::int64_t parts = config_.num_parts();
      params_["cls.w"] =
          he_init(rng, {parts, config_.embed_dim, config_.num_train_ids}, config_.embed_dim);
      params_["cls.b"] = Tensor({parts, config_.num_train_ids});
    }
  }

  ModelConfig config_;
  SkeletonGraph graph_;
  SkeletonEncoderHandle skel_encoder_;
  std::map<std::string, Tensor> params_;
};

}  // namespace gaitref
