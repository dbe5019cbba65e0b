#include "wembed/optim.hpp"

#include <cmath>

namespace wembed {

void AdamConfig::validate() const {
  if (!(lr > 0.0)) throw Error::format("adam lr must be positive, got {}", lr);
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw Error::format("adam betas must lie in [0,1), got {}, {}", beta1,
                        beta2);
  }
  if (!(epsilon > 0.0)) {
    throw Error::format("adam epsilon must be positive, got {}", epsilon);
  }
}

void adam_step(Vector& params, const Vector& grads, AdamState& state) {
  if (params.size() != grads.size() ||
      params.size() != state.first_moment.size()) {
    throw Error::format(
        "adam_step: size mismatch (params {}, grads {}, state {})",
        params.size(), grads.size(), state.first_moment.size());
  }
  for (Eigen::Index i = 0; i < grads.size(); ++i) {
    if (std::isnan(grads[i])) {
      throw Error::format("adam_step: NaN gradient at index {}", i);
    }
  }
  const AdamConfig& h = state.hyper;
  state.step_count += 1;
  state.first_moment =
      h.beta1 * state.first_moment + (1.0 - h.beta1) * grads;
  state.second_moment = h.beta2 * state.second_moment.array() +
                        (1.0 - h.beta2) * grads.array().square();
  const double bc1 =
      1.0 - std::pow(h.beta1, static_cast<double>(state.step_count));
  const double bc2 =
      1.0 - std::pow(h.beta2, static_cast<double>(state.step_count));
  Vector m_hat = state.first_moment / bc1;
  Vector v_hat = state.second_moment / bc2;
  params.array() -= h.lr * m_hat.array() / (v_hat.array().sqrt() + h.epsilon);
}

Vector finite_diff(const std::function<double(const Vector&)>& f,
                   const Vector& x, double h) {
  if (!(h > 0.0)) throw Error("finite_diff: h must be positive");
  Vector grad(x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    double fp = f(probe);
    probe[i] = x[i] - h;
    double fm = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw Error::format("finite_diff: non-finite evaluation at index {}", i);
    }
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

Vector project_ball(const Vector& v, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw Error::format("project_ball: eps must lie in (0,1), got {}", eps);
  }
  const double norm = v.norm();
  const double radius = 1.0 - eps;
  if (norm <= radius) return v;
  return v * (radius / norm);
}

}  // namespace wembed
