#pragma once

// Physics-informed loss and training loop.
//
//   L = w_ic * L_ic + w_bc * L_bc + w_res * L_res
//
// with each component a mean squared error over its own point set. The
// residual term uses u_t and u_xx of the network itself.

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fisher_pinn/autodiff.hpp"
#include "fisher_pinn/errors.hpp"
#include "fisher_pinn/jet.hpp"
#include "fisher_pinn/network.hpp"
#include "fisher_pinn/optimize.hpp"
#include "fisher_pinn/physics.hpp"

namespace fisher_pinn::pinn {

struct Problem {
  PdeParams pde;
  Domain domain;
};

struct SamplingConfig {
  std::size_t n_collocation = 10'000;
  std::size_t n_ic = 1'000;
  std::size_t n_bc_per_side = 1'000;
  std::uint64_t seed = 0;
  bool resample_collocation = true;

  void validate() const;
};

/// Struct-of-arrays point sets. Boundary points hold n_bc_per_side left-side
/// points followed by as many right-side points.
struct PointSet {
  std::vector<double> col_t;
  std::vector<double> col_x;
  std::vector<double> ic_x;
  std::vector<double> bc_t;
  std::vector<Side> bc_side;
};

/// Collocation points are i.i.d. uniform over the open domain and depend on
/// (seed, iteration) when resampling, else on seed alone. Initial and boundary
/// points depend on the seed only.
[[nodiscard]] PointSet sample_points(const SamplingConfig& cfg, const Domain& domain, std::int64_t iteration);

/// Collocation points only; cheaper than sample_points in the training loop.
void sample_collocation(const SamplingConfig& cfg, const Domain& domain, std::int64_t iteration, PointSet& points);

struct LossComponents {
  double ic = 0.0;
  double bc = 0.0;
  double res = 0.0;
};

enum class WeightMode { Fixed, Adaptive };

struct LossWeights {
  double w_ic = 1.0;
  double w_bc = 1.0;
  double w_res = 1.0;
  WeightMode mode = WeightMode::Adaptive;
  double ceiling = 1e4;
  double smoothing = 0.1;  // alpha of the exponential moving average

  bool operator==(const LossWeights&) const = default;
};

[[nodiscard]] double total_loss(const LossComponents& c, const LossWeights& w);

/// Per-component gradient magnitudes feeding the adaptive rule.
struct GradNorms {
  double ic = 0.0;
  double bc = 0.0;
  double res = 0.0;
};

/// Statistic used to turn component gradients into GradNorms.
[[nodiscard]] GradNorms gradient_norms(const Vector& grad_ic, const Vector& grad_bc, const Vector& grad_res);

/// w_k <- clamp((1 - alpha) w_k + alpha * g_res / g_k, 1, ceiling) for k in
/// {ic, bc}; w_res stays 1. Leaves w_k alone when g_k is zero or non-finite.
/// No-op in fixed mode.
[[nodiscard]] LossWeights update_adaptive_weights(const LossWeights& weights, const GradNorms& norms);

struct LossGradients {
  LossComponents loss;
  Vector ic;
  Vector bc;
  Vector res;
};

/// Batched evaluation of the three loss components and their parameter
/// gradients. Points are processed in fixed-size chunks whose partial sums
/// are reduced in chunk order, so results do not depend on the thread count.
class LossEvaluator {
 public:
  explicit LossEvaluator(Problem problem);

  [[nodiscard]] LossComponents components(const Parameters& params, const PointSet& points);
  [[nodiscard]] LossGradients gradients(const Parameters& params, const PointSet& points);

  static constexpr std::size_t kChunk = 100;

 private:
  double sum_residual(const Parameters& params, const PointSet& points, Vector* grad);
  double sum_data(const Parameters& params, std::span<const double> t, std::span<const double> x,
                  std::span<const double> target, Vector* grad);
  void prepare_targets(const PointSet& points);

  Problem problem_;
  std::vector<JetWorkspace> workspaces_;
  std::vector<Vector> chunk_grads_;
  std::vector<double> chunk_sums_;
  std::vector<double> ic_t_, ic_target_, bc_x_, bc_target_;
};

/// Batched route for the three loss components.
[[nodiscard]] LossComponents loss_components(const Parameters& params, const Problem& problem, const PointSet& points);

/// Expression-graph route: the network, u_t and u_xx are built symbolically
/// once and every point is evaluated on the same graph. Slow; used as the
/// reference the batched route is checked against.
class ExprLoss {
 public:
  ExprLoss(const Architecture& arch, Problem problem);

  [[nodiscard]] LossComponents components(const Parameters& params, const PointSet& points);
  [[nodiscard]] LossGradients gradients(const Parameters& params, const PointSet& points);

  /// u, u_t, u_x, u_xx at one point.
  [[nodiscard]] std::array<double, 4> jet(const Parameters& params, double t, double x);

 private:
  LossGradients run(const Parameters& params, const PointSet& points, bool want_grad);

  Architecture arch_;
  Problem problem_;
  autodiff::Graph graph_;
  std::vector<autodiff::Expr> theta_;
  autodiff::Expr t_, x_, target_;
  autodiff::Expr u_, u_t_, u_x_, u_xx_;
  autodiff::Expr residual_sq_;
  autodiff::Expr data_sq_;
};

struct HistoryEntry {
  std::int64_t iteration = 0;
  double lr = 0.0;
  double total = 0.0;
  double ic = 0.0;
  double bc = 0.0;
  double res = 0.0;
  double w_ic = 0.0;
  double w_bc = 0.0;

  bool operator==(const HistoryEntry&) const = default;
};

struct TrainState {
  Parameters params;
  optimize::AdamState adam;
  LossWeights weights;
  std::int64_t iteration = 0;
  std::vector<HistoryEntry> history;
  double seconds = 0.0;  // wall clock, informational only

  [[nodiscard]] static TrainState fresh(Parameters params, LossWeights weights);
};

/// Thrown when the loss or a gradient turns non-finite; carries the state as
/// it was after the last completed iteration.
class TrainingDiverged : public NumericalError {
 public:
  TrainingDiverged(const std::string& what, TrainState last_good)
      : NumericalError(what), last_good_(std::make_shared<TrainState>(std::move(last_good))) {}
  [[nodiscard]] const TrainState& last_good() const noexcept { return *last_good_; }

 private:
  std::shared_ptr<const TrainState> last_good_;
};

using ProgressFn = std::function<void(const HistoryEntry&)>;

/// Runs `iterations` optimizer steps. Iteration k (counted from the state's
/// own counter) samples collocation points, evaluates the loss and its
/// gradients, updates adaptive weights, then takes an Adam step with
/// lr_at(schedule, k - schedule_origin).
[[nodiscard]] TrainState train(TrainState state, const Problem& problem, const SamplingConfig& sampling,
                               const optimize::LrSchedule& schedule, std::int64_t iterations,
                               const ProgressFn& progress = {}, std::int64_t schedule_origin = 0);

/// Continues training from `state` at a constant learning rate. Without
/// `preserve_optimizer` the Adam moments and step count are reset first.
/// Throws ConfigError if the state's architecture differs from `expected`.
[[nodiscard]] TrainState retrain(TrainState state, const Architecture& expected, const Problem& problem,
                                 const SamplingConfig& sampling, double lr, std::int64_t iterations,
                                 bool preserve_optimizer, const ProgressFn& progress = {});

/// Relative L2 error of the network against the closed form at t = t_max on
/// `nx` uniform nodes.
[[nodiscard]] double final_time_error(const Parameters& params, const Problem& problem, std::size_t nx);

/// Mean of `total` over consecutive blocks of `block` entries (a trailing
/// partial block is dropped).
[[nodiscard]] std::vector<double> block_means(const std::vector<HistoryEntry>& history, std::size_t block);

[[nodiscard]] std::string_view to_string(WeightMode mode);
[[nodiscard]] WeightMode weight_mode_from_string(std::string_view name);

}  // namespace fisher_pinn::pinn
