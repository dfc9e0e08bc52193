#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>

#include "gaitref/tensor.hpp"

namespace gaitref {

// Adam with β=(0.9, 0.999), ε=1e-8. Moments are kept per parameter name.
class Adam {
 public:
  explicit Adam(double lr) : lr_(lr) {
    if (lr < 0.0) throw ConfigError("learning rate must be >= 0");
  }

  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }
  std::int64_t steps() const { return t_; }

  // One update over a full parameter set; every parameter advances the shared
  // timestep even when its gradient is zero.
  void step(std::map<std::string, Tensor>& params, const std::map<std::string, Tensor>& grads) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (auto& [name, p] : params) {
      auto git = grads.find(name);
      if (git == grads.end()) throw ContractError("missing gradient for parameter " + name);
      const Tensor& g = git->second;
      if (!g.same_shape(p)) throw DimensionError("gradient shape mismatch for " + name);
      Tensor& m = state_slot(m_, name, p);
      Tensor& v = state_slot(v_, name, p);
      for (std::int64_t i = 0; i < p.numel(); ++i) {
        const double gi = g.at(i);
        m.at(i) = beta1_ * m.at(i) + (1.0 - beta1_) * gi;
        v.at(i) = beta2_ * v.at(i) + (1.0 - beta2_) * gi * gi;
        const double mhat = m.at(i) / bc1;
        const double vhat = v.at(i) / bc2;
        p.at(i) -= lr_ * mhat / (std::sqrt(vhat) + eps_);
      }
    }
  }

 private:
  static Tensor& state_slot(std::map<std::string, Tensor>& store, const std::string& name,
                            const Tensor& like) {
    auto it = store.find(name);
    if (it == store.end()) it = store.emplace(name, Tensor(like.shape())).first;
    return it->second;
  }

  double lr_;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  std::int64_t t_ = 0;
  std::map<std::string, Tensor> m_;
  std::map<std::string, Tensor> v_;
};

}  // namespace gaitref
