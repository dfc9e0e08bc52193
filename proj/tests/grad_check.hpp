#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "gaitref/rng.hpp"
#include "gaitref/tape.hpp"

namespace gaitref::testing {

// Builds a scalar loss from registered inputs; used both for analytic
// gradients (inputs as params) and finite-difference probes (inputs as
// constants).
using GraphBuilder = std::function<NodeId(Tape&, const std::vector<NodeId>&)>;

struct GradCheck {
  double max_rel_err = 0.0;
  std::int64_t elements = 0;
};

inline double rel_err(double a, double b) {
  const double denom = std::max({std::abs(a), std::abs(b), 1e-6});
  return std::abs(a - b) / denom;
}

// Central finite differences against reverse-mode gradients for every element
// of every input tensor.
inline GradCheck finite_difference_check(const GraphBuilder& build, std::vector<Tensor> inputs,
                                         double eps = 1e-5) {
  std::vector<Tensor> analytic;
  {
    Tape tape;
    std::vector<NodeId> ids;
    ids.reserve(inputs.size());
    for (const Tensor& t : inputs) ids.push_back(tape.param(t));
    const NodeId loss = build(tape, ids);
    tape.backward(loss);
    for (NodeId id : ids) analytic.push_back(tape.gradient(id));
  }
  auto eval = [&](const std::vector<Tensor>& xs) {
    Tape tape;
    std::vector<NodeId> ids;
    ids.reserve(xs.size());
    for (const Tensor& t : xs) ids.push_back(tape.constant(t));
    return tape.value(build(tape, ids)).item();
  };
  GradCheck result;
  for (std::size_t ti = 0; ti < inputs.size(); ++ti) {
    for (std::int64_t i = 0; i < inputs[ti].numel(); ++i) {
      const double saved = inputs[ti].at(i);
      inputs[ti].at(i) = saved + eps;
      const double up = eval(inputs);
      inputs[ti].at(i) = saved - eps;
      const double down = eval(inputs);
      inputs[ti].at(i) = saved;
      const double fd = (up - down) / (2.0 * eps);
      result.max_rel_err = std::max(result.max_rel_err, rel_err(analytic[ti].at(i), fd));
      ++result.elements;
    }
  }
  return result;
}

inline Tensor random_tensor(Rng& rng, Shape shape, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (std::int64_t i = 0; i < t.numel(); ++i) t.at(i) = scale * rng.gaussian();
  return t;
}

}  // namespace gaitref::testing
