#pragma once

// Batched network evaluation for training.
//
// Each hidden layer carries four channels per point: the activation and its
// derivatives d/dt, d/dx, d2/dx2 (a second-order jet in the inputs). Channels
// are stored side by side as column blocks of one width x 4n matrix so every
// layer is a single GEMM. The reverse sweep through the jets yields exact
// parameter gradients of losses built from u, u_t and u_xx.
//
// This is the fast counterpart of building `forward` as an expression graph
// and differentiating it; the test suite checks one against the other.

#include <span>
#include <vector>

#include <Eigen/Core>

#include "fisher_pinn/network.hpp"
#include "fisher_pinn/physics.hpp"

namespace fisher_pinn {

using ColMatrix = Eigen::MatrixXd;

struct JetValues {
  Vector u;
  Vector u_t;
  Vector u_x;
  Vector u_xx;
};

/// Reusable buffers for one batch; one per worker thread.
class JetWorkspace {
 public:
  JetWorkspace() = default;

 private:
  friend class JetEvaluator;
  std::vector<ColMatrix> pre;   // per hidden layer: pre-activation channels
  std::vector<ColMatrix> post;  // per hidden layer: activation channels
  ColMatrix input;              // 2 x n
  ColMatrix upstream;
  ColMatrix scratch;
  Eigen::ArrayXXd slope;       // 1 - tanh^2 of the current layer
  Eigen::ArrayXXd act_slope;
  Eigen::RowVectorXd out;       // output channels, 1 x (channels * n)
  Eigen::RowVectorXd out_grad;
};

class JetEvaluator {
 public:
  explicit JetEvaluator(const Parameters& params) : params_(params) {}

  /// u and its input derivatives at each point.
  [[nodiscard]] JetValues evaluate(std::span<const double> t, std::span<const double> x, JetWorkspace& ws) const;

  /// u at each point (value channel only).
  [[nodiscard]] Vector values(std::span<const double> t, std::span<const double> x, JetWorkspace& ws) const;

  /// Sum over points of residual^2; adds d(sum)/d theta into `grad`.
  double residual_sum_squares(const PdeParams& pde, std::span<const double> t, std::span<const double> x,
                              JetWorkspace& ws, Eigen::Ref<Vector> grad) const;

  /// Sum over points of (u - target)^2; adds d(sum)/d theta into `grad`.
  double data_sum_squares(std::span<const double> t, std::span<const double> x, std::span<const double> target,
                          JetWorkspace& ws, Eigen::Ref<Vector> grad) const;

 private:
  void forward_pass(std::span<const double> t, std::span<const double> x, bool jets, JetWorkspace& ws) const;
  void backward_pass(bool jets, JetWorkspace& ws, Eigen::Ref<Vector> grad) const;

  const Parameters& params_;
};

}  // namespace fisher_pinn
