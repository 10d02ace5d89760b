#include "fisher_pinn/fdm.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace fisher_pinn::fdm {

namespace {

std::string cfl_message(double dt, double limit, std::size_t min_nt) {
  std::ostringstream os;
  os.precision(17);
  os << "explicit scheme unstable: dt = " << dt << " exceeds the diffusion limit dx^2/(2D) = " << limit
     << "; use nt >= " << min_nt;
  return os.str();
}

}  // namespace

CflViolation::CflViolation(double dt, double limit, std::size_t min_nt)
    : NumericalError(cfl_message(dt, limit, min_nt)), dt_(dt), limit_(limit), min_nt_(min_nt) {}

Grid Grid::uniform(const Domain& domain, std::size_t nx, std::size_t nt) {
  domain.validate();
  if (nx < 3) throw ConfigError("nx must be >= 3, got " + std::to_string(nx));
  if (nt < 1) throw ConfigError("nt must be >= 1");
  Grid g;
  g.nx = nx;
  g.nt = nt;
  g.dx = domain.length() / static_cast<double>(nx - 1);
  g.dt = domain.horizon() / static_cast<double>(nt);
  return g;
}

double Grid::x(const Domain& domain, std::size_t i) const {
  if (i + 1 == nx) return domain.x_max;
  return domain.x_min + static_cast<double>(i) * dx;
}

double Grid::t(const Domain& domain, std::size_t n) const {
  if (n == nt) return domain.t_max;
  return domain.t_min + static_cast<double>(n) * dt;
}

double cfl_limit(const PdeParams& p, double dx) {
  if (!(dx > 0.0)) throw ConfigError("dx must be > 0");
  return dx * dx / (2.0 * p.diffusion);
}

std::size_t min_stable_steps(const PdeParams& p, const Domain& domain, double dx) {
  const double limit = cfl_limit(p, dx);
  auto n = static_cast<std::size_t>(std::ceil(domain.horizon() / limit));
  while (n > 1 && domain.horizon() / static_cast<double>(n - 1) <= limit) --n;
  while (domain.horizon() / static_cast<double>(n) > limit) ++n;
  return n;
}

void check_stability(const PdeParams& p, const Domain& domain, const Grid& grid) {
  const double limit = cfl_limit(p, grid.dx);
  if (grid.dt > limit) throw CflViolation(grid.dt, limit, min_stable_steps(p, domain, grid.dx));
}

Field step(const PdeParams& p, const Domain& domain, const Grid& grid, const Field& field, double t_n) {
  return step(p, domain, grid, field, t_n, t_n + grid.dt);
}

Field step(const PdeParams& p, const Domain& domain, const Grid& grid, const Field& field, double /*t_n*/,
           double t_next) {
  const auto nx = static_cast<Eigen::Index>(grid.nx);
  if (field.size() != nx) throw ConfigError("field length does not match grid.nx");
  Field next(nx);
  const double coef = p.diffusion / (grid.dx * grid.dx);
  for (Eigen::Index i = 1; i + 1 < nx; ++i) {
    const double u = field[i];
    const double lap = field[i + 1] - 2.0 * u + field[i - 1];
    next[i] = u + grid.dt * (coef * lap + p.reaction * u * (1.0 - u));
  }
  next[0] = boundary_condition(p, domain, Side::Left, t_next);
  next[nx - 1] = boundary_condition(p, domain, Side::Right, t_next);
  return next;
}

Field initial_field(const PdeParams& p, const Domain& domain, const Grid& grid) {
  Field f(static_cast<Eigen::Index>(grid.nx));
  for (std::size_t i = 0; i < grid.nx; ++i) f[static_cast<Eigen::Index>(i)] = initial_condition(p, grid.x(domain, i));
  return f;
}

Matrix solve(const PdeParams& p, const Domain& domain, const Grid& grid) {
  p.validate();
  check_stability(p, domain, grid);
  Matrix out(static_cast<Eigen::Index>(grid.nt + 1), static_cast<Eigen::Index>(grid.nx));
  Field u = initial_field(p, domain, grid);
  out.row(0) = u.transpose();
  for (std::size_t n = 0; n < grid.nt; ++n) {
    u = step(p, domain, grid, u, grid.t(domain, n), grid.t(domain, n + 1));
    out.row(static_cast<Eigen::Index>(n + 1)) = u.transpose();
  }
  return out;
}

Field solve_final(const PdeParams& p, const Domain& domain, const Grid& grid) {
  p.validate();
  check_stability(p, domain, grid);
  Field u = initial_field(p, domain, grid);
  for (std::size_t n = 0; n < grid.nt; ++n) u = step(p, domain, grid, u, grid.t(domain, n), grid.t(domain, n + 1));
  return u;
}

}  // namespace fisher_pinn::fdm
