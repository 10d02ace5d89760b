#pragma once

// Adam with bias correction and an explicit, serializable state, plus a
// step-wise exponential learning-rate schedule.

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>

#include "fisher_pinn/types.hpp"

namespace fisher_pinn::optimize {

struct AdamState {
  Vector m;
  Vector v;
  std::int64_t step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  AdamState() = default;
  explicit AdamState(std::size_t n) : m(Vector::Zero(static_cast<Eigen::Index>(n))), v(Vector::Zero(static_cast<Eigen::Index>(n))) {}

  /// Forget the accumulated moments and step count; hyperparameters stay.
  void reset();

  bool operator==(const AdamState& o) const {
    return m == o.m && v == o.v && step_count == o.step_count && beta1 == o.beta1 && beta2 == o.beta2 &&
           epsilon == o.epsilon;
  }
};

struct LrSchedule {
  double initial_lr = 1e-3;
  double decay_factor = 0.99;
  std::int64_t decay_every = 100;

  void validate() const;
  [[nodiscard]] static LrSchedule constant(double lr) { return {lr, 1.0, 1}; }
};

/// initial_lr * decay_factor^floor(iteration / decay_every).
[[nodiscard]] double lr_at(const LrSchedule& schedule, std::int64_t iteration);

/// In-place update of `params` and `state`. Throws NumericalError naming the
/// first non-finite gradient component; nothing is modified in that case.
void adam_update(AdamState& state, Eigen::Ref<Vector> params, const Eigen::Ref<const Vector>& grads, double lr);

/// Value-returning form of `adam_update`.
[[nodiscard]] std::pair<Vector, AdamState> adam_step(const AdamState& state, const Vector& params,
                                                     const Vector& grads, double lr);

}  // namespace fisher_pinn::optimize
