#pragma once

// Fisher-KPP problem instance: u_t = D u_xx + R u (1 - u) on a rectangle,
// with initial and Dirichlet data taken from the sigmoid traveling wave.
//
// The functions are templates over the scalar so the same formulas serve
// plain doubles and autodiff expressions.

#include <cmath>

#include "fisher_pinn/errors.hpp"

namespace fisher_pinn {

struct PdeParams {
  double diffusion = 0.01;  // D
  double reaction = 1.0;    // R

  void validate() const {
    if (!(diffusion > 0.0)) throw ConfigError("diffusion coefficient D must be > 0");
    if (!(reaction > 0.0)) throw ConfigError("reaction rate R must be > 0");
  }

  /// Steepness of the sigmoid profile, sqrt(R / 2D).
  [[nodiscard]] double steepness() const { return std::sqrt(reaction / (2.0 * diffusion)); }
  /// Front speed c = sqrt(2 D R).
  [[nodiscard]] double wave_speed() const { return std::sqrt(2.0 * diffusion * reaction); }
};

struct Domain {
  double x_min = 0.0;
  double x_max = 1.0;
  double t_min = 0.0;
  double t_max = 1.0;

  void validate() const {
    if (!(x_min < x_max)) throw ConfigError("domain requires x_min < x_max");
    if (!(t_min < t_max)) throw ConfigError("domain requires t_min < t_max");
  }
  [[nodiscard]] double length() const { return x_max - x_min; }
  [[nodiscard]] double horizon() const { return t_max - t_min; }
};

enum class Side { Left, Right };

template <typename T>
T exact_solution(const PdeParams& p, const T& x, const T& t) {
  using std::exp;
  return 1.0 / (1.0 + exp(p.steepness() * (x - p.wave_speed() * t)));
}

inline double initial_condition(const PdeParams& p, double x) { return exact_solution(p, x, 0.0); }

inline double boundary_condition(const PdeParams& p, const Domain& domain, Side side, double t) {
  return exact_solution(p, side == Side::Left ? domain.x_min : domain.x_max, t);
}

/// u_t - D u_xx - R u (1 - u).
template <typename T>
T residual_operator(const PdeParams& p, const T& u_t, const T& u_xx, const T& u) {
  return u_t - p.diffusion * u_xx - p.reaction * u * (1.0 - u);
}

}  // namespace fisher_pinn
