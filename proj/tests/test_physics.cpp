#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fisher_pinn/autodiff.hpp"
#include "fisher_pinn/errors.hpp"
#include "fisher_pinn/physics.hpp"

using namespace fisher_pinn;

TEST(ExactSolution, Origin) { EXPECT_EQ(exact_solution(PdeParams{}, 0.0, 0.0), 0.5); }

TEST(ExactSolution, RightEdgeAtStart) {
  EXPECT_NEAR(exact_solution(PdeParams{}, 1.0, 0.0), 1.0 / (1.0 + std::exp(std::sqrt(50.0))), 1e-18);
  EXPECT_NEAR(exact_solution(PdeParams{}, 1.0, 0.0), 8.486049627111868e-4, 1e-7);
}

TEST(ExactSolution, HalfOnWavefront) {
  const PdeParams p;
  for (double t : {0.0, 0.25, 0.5, 1.0, 3.0}) {
    EXPECT_NEAR(exact_solution(p, p.wave_speed() * t, t), 0.5, 1e-15);
  }
}

TEST(ExactSolution, BoundedAndMonotone) {
  const PdeParams p;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const double x = u(rng);
    const double t = u(rng);
    const double v = exact_solution(p, x, t);
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
    EXPECT_LT(exact_solution(p, x + 1e-3, t), v);
    EXPECT_GT(exact_solution(p, x, t + 1e-3), v);
  }
}

TEST(ExactSolution, OverflowSaturates) {
  EXPECT_EQ(exact_solution(PdeParams{}, 1e6, 0.0), 0.0);
  EXPECT_EQ(exact_solution(PdeParams{}, -1e6, 0.0), 1.0);
}

TEST(InitialCondition, Values) {
  const PdeParams p;
  EXPECT_EQ(initial_condition(p, 0.0), 0.5);
  EXPECT_NEAR(initial_condition(p, 0.5), 0.02831791854264570, 1e-5);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const double x = u(rng);
    EXPECT_EQ(initial_condition(p, x), exact_solution(p, x, 0.0));
  }
}

TEST(BoundaryCondition, Values) {
  const PdeParams p;
  const Domain d;
  EXPECT_EQ(boundary_condition(p, d, Side::Left, 0.0), 0.5);
  EXPECT_NEAR(boundary_condition(p, d, Side::Right, 0.0), 8.486049627111868e-4, 1e-7);
  EXPECT_NEAR(boundary_condition(p, d, Side::Left, 1.0), 1.0 / (1.0 + std::exp(-1.0)), 1e-15);
  EXPECT_NEAR(boundary_condition(p, d, Side::Left, 1.0), 0.73106, 1e-5);
  EXPECT_EQ(boundary_condition(p, d, Side::Right, 0.3), exact_solution(p, d.x_max, 0.3));
}

TEST(ResidualOperator, Equilibria) {
  const PdeParams p;
  EXPECT_EQ(residual_operator(p, 0.0, 0.0, 0.0), 0.0);
  EXPECT_EQ(residual_operator(p, 0.0, 0.0, 1.0), 0.0);
  EXPECT_EQ(residual_operator(p, 0.0, 0.0, 0.5), -0.25);
  EXPECT_EQ(residual_operator(p, 1.0, 2.0, 0.0), 1.0 - 0.02);
}

TEST(Params, Validation) {
  EXPECT_THROW((PdeParams{0.0, 1.0}.validate()), ConfigError);
  EXPECT_THROW((PdeParams{0.01, -1.0}.validate()), ConfigError);
  EXPECT_THROW((Domain{1.0, 0.0, 0.0, 1.0}.validate()), ConfigError);
  EXPECT_THROW((Domain{0.0, 1.0, 1.0, 1.0}.validate()), ConfigError);
  EXPECT_NO_THROW(PdeParams{}.validate());
}

// Substituting the closed form into the operator, with every derivative taken
// by the expression engine, leaves -R/2 * u (1 - u) (1 - 2u), which peaks at
// R sqrt(3) / 36. The first-power logistic profile is not a travelling wave of
// this equation.
TEST(ResidualOperator, ClosedFormResidualIsCubicInU) {
  using namespace fisher_pinn::autodiff;
  const PdeParams p;
  Graph g;
  Expr x = g.variable("x");
  Expr t = g.variable("t");
  const Expr u = exact_solution(p, x, t);
  const Expr r = residual_operator(p, derivative(u, t), derivative(derivative(u, x), x), u);
  Bindings b(g);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    b.set(x, unit(rng));
    b.set(t, unit(rng));
    const double uv = evaluate(u, b);
    const double rv = evaluate(r, b);
    EXPECT_NEAR(rv, -0.5 * p.reaction * uv * (1 - uv) * (1 - 2 * uv), 1e-13);
    worst = std::max(worst, std::abs(rv));
  }
  EXPECT_LE(worst, p.reaction * std::sqrt(3.0) / 36.0 + 1e-15);
  EXPECT_GT(worst, 0.04);
}
