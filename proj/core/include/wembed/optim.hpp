#pragma once

#include <functional>

#include "wembed/ot.hpp"

namespace wembed {

struct AdamConfig {
  double lr = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

// One state per parameter vector; mutated by exactly one owner between steps.
struct AdamState {
  Vector first_moment;
  Vector second_moment;
  long step_count = 0;
  AdamConfig hyper;

  explicit AdamState(Eigen::Index n_params, AdamConfig cfg = {})
      : first_moment(Vector::Zero(n_params)),
        second_moment(Vector::Zero(n_params)),
        hyper(cfg) {
    hyper.validate();
  }
};

// Standard Adam with bias correction, applied once in place.
// Throws on NaN gradients, naming the first offending index.
void adam_step(Vector& params, const Vector& grads, AdamState& state);

// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h per coordinate.
// The gradient validation oracle used across the test suites.
Vector finite_diff(const std::function<double(const Vector&)>& f,
                   const Vector& x, double h = 1e-5);

// Returns v unchanged if ||v|| <= 1 - eps, else rescaled to that radius.
// Keeps Poincare-ball parameters strictly inside the unit ball.
Vector project_ball(const Vector& v, double eps = 1e-5);

}  // namespace wembed
