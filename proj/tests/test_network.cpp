#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fisher_pinn/autodiff.hpp"
#include "fisher_pinn/errors.hpp"
#include "fisher_pinn/network.hpp"
#include "oracle.hpp"

using namespace fisher_pinn;
using autodiff::Expr;

namespace {

Architecture small(int layers, int width) {
  Architecture a;
  a.hidden_layers = layers;
  a.hidden_width = width;
  return a;
}

Parameters all_ones_2_1_1() {
  const Architecture a = small(1, 1);
  Parameters p(a);
  p.values() << 1.0, 1.0, 0.0, 1.0, 0.0;  // w0 = [1 1], b0 = 0, w1 = [1], b1 = 0
  return p;
}

double eval_forward(const Parameters& params, double t, double x) {
  autodiff::Graph g;
  const auto theta = parameter_variables(g, params.architecture());
  Expr tv = g.variable("t");
  Expr xv = g.variable("x");
  const Expr u = forward(params.architecture(), theta, tv, xv);
  autodiff::Bindings b(g);
  bind_parameters(b, theta, params);
  b.set(tv, t);
  b.set(xv, x);
  return autodiff::evaluate(u, b);
}

}  // namespace

TEST(Architecture, DefaultsAndCounts) {
  const Architecture a;
  EXPECT_EQ(a.hidden_layers, 7);
  EXPECT_EQ(a.hidden_width, 50);
  EXPECT_EQ(a.parameter_count(), 2u * 50 + 50 + 6 * (50 * 50 + 50) + 50 + 1);
  EXPECT_EQ(small(2, 8).parameter_count(), 2u * 8 + 8 + 8 * 8 + 8 + 8 + 1);
}

TEST(Architecture, Validation) {
  EXPECT_THROW(small(0, 5).validate(), ConfigError);
  EXPECT_THROW(small(2, 0).validate(), ConfigError);
  Architecture a;
  a.input_dim = 3;
  EXPECT_THROW(a.validate(), ConfigError);
  EXPECT_THROW((void)activation_from_string("relu"), ConfigError);
}

TEST(Layout, SlicesAreContiguous) {
  const auto slices = layer_slices(small(2, 8));
  ASSERT_EQ(slices.size(), 3u);
  EXPECT_EQ(slices[0].weight_offset, 0u);
  EXPECT_EQ(slices[0].bias_offset, 16u);
  EXPECT_EQ(slices[1].weight_offset, 24u);
  EXPECT_EQ(slices[2].bias_offset, slices[2].weight_offset + 8);
  EXPECT_EQ(slices[2].bias_offset + 1, small(2, 8).parameter_count());
}

TEST(Parameters, LengthMismatchNamesBothLengths) {
  try {
    Parameters p(small(2, 8), Vector::Zero(10));
    FAIL();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("105"), std::string::npos);
    EXPECT_NE(msg.find("10"), std::string::npos);
  }
}

TEST(XavierInit, BiasesZero) {
  for (std::uint64_t seed : {0u, 1u, 42u}) {
    const Parameters p = xavier_init(Architecture{}, seed);
    for (std::size_t l = 0; l < p.layers().size(); ++l) {
      EXPECT_TRUE((p.bias(l).array() == 0.0).all());
    }
  }
}

TEST(XavierInit, WeightSpread) {
  // 2 -> 50 weights pooled over 100 seeds: 10,000 draws.
  const Architecture a = small(1, 50);
  std::vector<double> draws;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Parameters p = xavier_init(a, seed);
    const auto w = p.weights(0);
    for (Eigen::Index i = 0; i < w.size(); ++i) draws.push_back(w.data()[i]);
  }
  ASSERT_EQ(draws.size(), 10000u);
  double mean = 0;
  for (double d : draws) mean += d;
  mean /= static_cast<double>(draws.size());
  double var = 0;
  for (double d : draws) var += (d - mean) * (d - mean);
  const double sd = std::sqrt(var / static_cast<double>(draws.size() - 1));
  const double expected = std::sqrt(2.0 / 52.0);
  EXPECT_GT(sd, expected * 0.95);
  EXPECT_LT(sd, expected * 1.05);
  EXPECT_LT(std::abs(mean), 4 * expected / 100.0);
}

TEST(XavierInit, Deterministic) {
  EXPECT_EQ(xavier_init(Architecture{}, 7), xavier_init(Architecture{}, 7));
  EXPECT_FALSE(xavier_init(Architecture{}, 7) == xavier_init(Architecture{}, 8));
}

TEST(Forward, ZeroParameters) {
  const Parameters p(Architecture{});
  EXPECT_EQ(eval_forward(p, 0.3, 0.8), 0.0);
  EXPECT_EQ(forward_value(p, 0.3, 0.8), 0.0);
}

TEST(Forward, HandEvaluatedUnit) {
  const Parameters p = all_ones_2_1_1();
  EXPECT_NEAR(eval_forward(p, 0.5, 0.5), 0.7615941559557649, 1e-16);
  EXPECT_EQ(eval_forward(p, 0.0, 0.0), 0.0);
}

TEST(Forward, LengthMismatch) {
  autodiff::Graph g;
  const auto theta = parameter_variables(g, small(1, 1));
  Expr t = g.variable("t");
  EXPECT_THROW((void)forward(small(2, 8), theta, t, t), ConfigError);
}

TEST(Forward, MatchesIndependentNetwork) {
  const Parameters p = xavier_init(small(3, 6), 4);
  const std::vector<double> theta(p.values().data(), p.values().data() + p.size());
  for (double t : {0.0, 0.3, 0.9}) {
    for (double x : {0.1, 0.55}) {
      EXPECT_NEAR(forward_value(p, t, x), oracle::network(small(3, 6).layer_sizes(), theta, t, x).v, 1e-14);
    }
  }
}

TEST(Forward, Continuity) {
  const Parameters p = xavier_init(Architecture{}, 2);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const double t = u(rng);
    const double x = u(rng);
    EXPECT_LT(std::abs(forward_value(p, t + 1e-9, x - 1e-9) - forward_value(p, t, x)), 1e-6);
  }
}

TEST(Forward, ParameterGradientMatchesFiniteDifferences) {
  const Architecture a = small(2, 8);
  const Parameters p = xavier_init(a, 3);
  autodiff::Graph g;
  const auto theta = parameter_variables(g, a);
  Expr tv = g.variable("t");
  Expr xv = g.variable("x");
  const Expr u = forward(a, theta, tv, xv);
  autodiff::Bindings b(g);
  bind_parameters(b, theta, p);
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    const double t = unit(rng);
    const double x = unit(rng);
    b.set(tv, t);
    b.set(xv, x);
    std::vector<double> ad(p.size());
    autodiff::grad_into(u, theta, b, ad);
    const std::vector<double> start(p.values().data(), p.values().data() + p.size());
    const auto fd = oracle::fd_gradient(
        [&](const std::vector<double>& th) { return oracle::network(a.layer_sizes(), th, t, x).v; }, start, 1e-4);
    for (std::size_t i = 0; i < ad.size(); ++i) {
      EXPECT_LT(oracle::rel_err(ad[i], fd[i], 1e-8), 1e-6) << "parameter " << i;
    }
  }
}

TEST(PredictGrid, ZeroParameters) {
  const Parameters p(Architecture{});
  const std::vector<double> ts = {0.0, 1.0};
  const std::vector<double> xs = {0.0, 1.0};
  EXPECT_TRUE((predict_grid(p, ts, xs).array() == 0.0).all());
}

TEST(PredictGrid, HandEvaluatedUnit) {
  const Parameters p = all_ones_2_1_1();
  const std::vector<double> ts = {0.0, 0.5};
  const std::vector<double> xs = {0.0, 0.5};
  const Matrix m = predict_grid(p, ts, xs);
  EXPECT_EQ(m(0, 0), 0.0);
  EXPECT_NEAR(m(1, 1), 0.7615941559557649, 1e-16);
}

TEST(PredictGrid, EqualsPointwiseForwardExactly) {
  const Parameters p = xavier_init(Architecture{}, 5);
  const std::vector<double> ts = {0.0, 0.37, 1.0};
  const std::vector<double> xs = {0.0, 0.21, 0.5, 1.0};
  const Matrix m = predict_grid(p, ts, xs);
  ASSERT_EQ(m.rows(), 3);
  ASSERT_EQ(m.cols(), 4);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    for (std::size_t j = 0; j < xs.size(); ++j) {
      const auto r = static_cast<Eigen::Index>(i);
      const auto c = static_cast<Eigen::Index>(j);
      EXPECT_EQ(m(r, c), eval_forward(p, ts[i], xs[j]));
      EXPECT_EQ(m(r, c), forward_value(p, ts[i], xs[j]));
    }
  }
}
