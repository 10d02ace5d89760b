#include "fisher_pinn/optimize.hpp"

#include <cmath>
#include <string>

#include "fisher_pinn/errors.hpp"

namespace fisher_pinn::optimize {

void AdamState::reset() {
  m.setZero();
  v.setZero();
  step_count = 0;
}

void LrSchedule::validate() const {
  if (!(initial_lr > 0.0)) throw ConfigError("initial learning rate must be > 0");
  if (!(decay_factor > 0.0 && decay_factor <= 1.0)) throw ConfigError("decay factor must lie in (0, 1]");
  if (decay_every < 1) throw ConfigError("decay interval must be >= 1 iteration");
}

double lr_at(const LrSchedule& schedule, std::int64_t iteration) {
  if (iteration < 0) throw ConfigError("iteration must be >= 0");
  const std::int64_t decays = iteration / schedule.decay_every;
  return schedule.initial_lr * std::pow(schedule.decay_factor, static_cast<double>(decays));
}

void adam_update(AdamState& state, Eigen::Ref<Vector> params, const Eigen::Ref<const Vector>& grads, double lr) {
  const Eigen::Index n = params.size();
  if (grads.size() != n || state.m.size() != n || state.v.size() != n) {
    throw ConfigError("adam: length mismatch (params " + std::to_string(n) + ", grads " +
                      std::to_string(grads.size()) + ", moments " + std::to_string(state.m.size()) + ")");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(grads[i])) {
      throw NumericalError("adam: non-finite gradient component at index " + std::to_string(i));
    }
  }
  ++state.step_count;
  const double k = static_cast<double>(state.step_count);
  const double c1 = 1.0 - std::pow(state.beta1, k);
  const double c2 = 1.0 - std::pow(state.beta2, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double g = grads[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
}

std::pair<Vector, AdamState> adam_step(const AdamState& state, const Vector& params, const Vector& grads, double lr) {
  std::pair<Vector, AdamState> out{params, state};
  adam_update(out.second, out.first, grads, lr);
  return out;
}

}  // namespace fisher_pinn::optimize
