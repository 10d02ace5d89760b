#pragma once

// Explicit forward-Euler / central-difference solver for the Fisher-KPP
// equation with Dirichlet data from the traveling-wave formula.

#include <cstddef>

#include "fisher_pinn/errors.hpp"
#include "fisher_pinn/physics.hpp"
#include "fisher_pinn/types.hpp"

namespace fisher_pinn::fdm {

struct Grid {
  std::size_t nx = 201;   // spatial nodes, including both boundaries
  std::size_t nt = 1600;  // time steps
  double dx = 0.005;
  double dt = 0.000625;

  /// Uniform grid: dx = L / (nx - 1), dt = T / nt.
  [[nodiscard]] static Grid uniform(const Domain& domain, std::size_t nx, std::size_t nt);

  [[nodiscard]] double x(const Domain& domain, std::size_t i) const;
  [[nodiscard]] double t(const Domain& domain, std::size_t n) const;
};

/// Solution values at one time level.
using Field = Vector;

class CflViolation : public NumericalError {
 public:
  CflViolation(double dt, double limit, std::size_t min_nt);
  [[nodiscard]] double dt() const noexcept { return dt_; }
  [[nodiscard]] double limit() const noexcept { return limit_; }
  [[nodiscard]] std::size_t min_nt() const noexcept { return min_nt_; }

 private:
  double dt_;
  double limit_;
  std::size_t min_nt_;
};

/// Diffusive stability bound dx^2 / (2 D).
[[nodiscard]] double cfl_limit(const PdeParams& p, double dx);

/// Smallest step count whose dt meets the bound.
[[nodiscard]] std::size_t min_stable_steps(const PdeParams& p, const Domain& domain, double dx);

/// Throws CflViolation when grid.dt exceeds the bound.
void check_stability(const PdeParams& p, const Domain& domain, const Grid& grid);

/// One explicit step from t_n to t_n + dt; boundary nodes are set from the
/// Dirichlet data at the new time after the interior update.
[[nodiscard]] Field step(const PdeParams& p, const Domain& domain, const Grid& grid, const Field& field, double t_n);
/// Same, with the new time level given explicitly (used by `solve` so that
/// boundary values match the grid's time nodes exactly).
[[nodiscard]] Field step(const PdeParams& p, const Domain& domain, const Grid& grid, const Field& field, double t_n,
                         double t_next);

/// Initial condition sampled on the grid nodes.
[[nodiscard]] Field initial_field(const PdeParams& p, const Domain& domain, const Grid& grid);

/// Full history: (nt + 1) x nx, row n is time level n.
[[nodiscard]] Matrix solve(const PdeParams& p, const Domain& domain, const Grid& grid);

/// Final time level only, for grids too large to keep in memory.
[[nodiscard]] Field solve_final(const PdeParams& p, const Domain& domain, const Grid& grid);

}  // namespace fisher_pinn::fdm
