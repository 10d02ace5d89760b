#include "fisher_pinn/pinn.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "fisher_pinn/metrics.hpp"
#include "fisher_pinn/parallel.hpp"

namespace fisher_pinn::pinn {

using autodiff::Expr;

namespace {

enum class Stream : std::uint32_t { Collocation = 1, Initial = 2, Boundary = 3 };

std::mt19937_64 make_rng(std::uint64_t seed, Stream stream, std::int64_t iteration) {
  const auto it = static_cast<std::uint64_t>(iteration);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(it),
                    static_cast<std::uint32_t>(it >> 32)};
  return std::mt19937_64(seq);
}

// Uniform on the open interval (lo, hi).
double open_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  for (;;) {
    const double v = dist(rng);
    if (v > lo && v < hi) return v;
  }
}

std::string point_text(double t, double x) {
  std::ostringstream os;
  os.precision(17);
  os << "(t=" << t << ", x=" << x << ")";
  return os.str();
}

}  // namespace

void SamplingConfig::validate() const {
  if (n_collocation < 1 || n_ic < 1 || n_bc_per_side < 1) throw ConfigError("all point counts must be >= 1");
}

void sample_collocation(const SamplingConfig& cfg, const Domain& domain, std::int64_t iteration, PointSet& points) {
  auto rng = make_rng(cfg.seed, Stream::Collocation, cfg.resample_collocation ? iteration : 0);
  points.col_t.resize(cfg.n_collocation);
  points.col_x.resize(cfg.n_collocation);
  for (std::size_t i = 0; i < cfg.n_collocation; ++i) {
    points.col_t[i] = open_uniform(rng, domain.t_min, domain.t_max);
    points.col_x[i] = open_uniform(rng, domain.x_min, domain.x_max);
  }
}

PointSet sample_points(const SamplingConfig& cfg, const Domain& domain, std::int64_t iteration) {
  cfg.validate();
  domain.validate();
  PointSet points;
  sample_collocation(cfg, domain, iteration, points);

  auto ic_rng = make_rng(cfg.seed, Stream::Initial, 0);
  std::uniform_real_distribution<double> x_dist(domain.x_min, domain.x_max);
  points.ic_x.resize(cfg.n_ic);
  for (auto& x : points.ic_x) x = x_dist(ic_rng);

  auto bc_rng = make_rng(cfg.seed, Stream::Boundary, 0);
  std::uniform_real_distribution<double> t_dist(domain.t_min, domain.t_max);
  points.bc_t.resize(2 * cfg.n_bc_per_side);
  points.bc_side.resize(2 * cfg.n_bc_per_side);
  for (std::size_t i = 0; i < points.bc_t.size(); ++i) {
    points.bc_t[i] = t_dist(bc_rng);
    points.bc_side[i] = i < cfg.n_bc_per_side ? Side::Left : Side::Right;
  }
  return points;
}

double total_loss(const LossComponents& c, const LossWeights& w) {
  return w.w_ic * c.ic + w.w_bc * c.bc + w.w_res * c.res;
}

GradNorms gradient_norms(const Vector& grad_ic, const Vector& grad_bc, const Vector& grad_res) {
  return {grad_ic.norm(), grad_bc.norm(), grad_res.norm()};
}

LossWeights update_adaptive_weights(const LossWeights& weights, const GradNorms& norms) {
  if (weights.mode != WeightMode::Adaptive) return weights;
  LossWeights out = weights;
  const auto update = [&](double w, double g) {
    if (!(g > 0.0) || !std::isfinite(g) || !std::isfinite(norms.res)) return w;
    const double blended = (1.0 - weights.smoothing) * w + weights.smoothing * (norms.res / g);
    return std::clamp(blended, 1.0, weights.ceiling);
  };
  out.w_ic = update(weights.w_ic, norms.ic);
  out.w_bc = update(weights.w_bc, norms.bc);
  out.w_res = 1.0;
  return out;
}

LossEvaluator::LossEvaluator(Problem problem) : problem_(problem) {
  problem_.pde.validate();
  problem_.domain.validate();
}

double LossEvaluator::sum_residual(const Parameters& params, const PointSet& points, Vector* grad) {
  const std::size_t n = points.col_t.size();
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  const std::size_t workers = std::min(thread_count(), std::max<std::size_t>(chunks, 1));
  if (workspaces_.size() < workers) workspaces_.resize(workers);
  chunk_sums_.assign(chunks, 0.0);
  if (chunk_grads_.size() < chunks) chunk_grads_.resize(chunks);
  const JetEvaluator net(params);
  const auto np = static_cast<Eigen::Index>(params.size());

  parallel_for(chunks, [&](std::size_t c, std::size_t w) {
    const std::size_t begin = c * kChunk;
    const std::size_t len = std::min(kChunk, n - begin);
    const std::span<const double> t(points.col_t.data() + begin, len);
    const std::span<const double> x(points.col_x.data() + begin, len);
    Vector& g = chunk_grads_[c];
    g.setZero(np);
    chunk_sums_[c] = net.residual_sum_squares(problem_.pde, t, x, workspaces_[w], g);
  });

  double sum = 0.0;
  for (std::size_t c = 0; c < chunks; ++c) {
    if (!std::isfinite(chunk_sums_[c])) {
      const std::size_t begin = c * kChunk;
      for (std::size_t i = begin; i < std::min(begin + kChunk, n); ++i) {
        if (!std::isfinite(forward_value(params, points.col_t[i], points.col_x[i]))) {
          throw NumericalError("non-finite network output at collocation point " +
                               point_text(points.col_t[i], points.col_x[i]));
        }
      }
      throw NumericalError("non-finite residual in collocation chunk " + std::to_string(c));
    }
    sum += chunk_sums_[c];
  }
  if (grad != nullptr) {
    grad->setZero(np);
    for (std::size_t c = 0; c < chunks; ++c) *grad += chunk_grads_[c];
  }
  return sum;
}

double LossEvaluator::sum_data(const Parameters& params, std::span<const double> t, std::span<const double> x,
                               std::span<const double> target, Vector* grad) {
  const std::size_t n = t.size();
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  const std::size_t workers = std::min(thread_count(), std::max<std::size_t>(chunks, 1));
  if (workspaces_.size() < workers) workspaces_.resize(workers);
  chunk_sums_.assign(chunks, 0.0);
  if (chunk_grads_.size() < chunks) chunk_grads_.resize(chunks);
  const JetEvaluator net(params);
  const auto np = static_cast<Eigen::Index>(params.size());

  parallel_for(chunks, [&](std::size_t c, std::size_t w) {
    const std::size_t begin = c * kChunk;
    const std::size_t len = std::min(kChunk, n - begin);
    Vector& g = chunk_grads_[c];
    g.setZero(np);
    chunk_sums_[c] = net.data_sum_squares(t.subspan(begin, len), x.subspan(begin, len), target.subspan(begin, len),
                                          workspaces_[w], g);
  });

  double sum = 0.0;
  for (std::size_t c = 0; c < chunks; ++c) {
    if (!std::isfinite(chunk_sums_[c])) {
      for (std::size_t i = c * kChunk; i < std::min((c + 1) * kChunk, n); ++i) {
        if (!std::isfinite(forward_value(params, t[i], x[i]))) {
          throw NumericalError("non-finite network output at data point " + point_text(t[i], x[i]));
        }
      }
      throw NumericalError("non-finite data loss in chunk " + std::to_string(c));
    }
    sum += chunk_sums_[c];
  }
  if (grad != nullptr) {
    grad->setZero(np);
    for (std::size_t c = 0; c < chunks; ++c) *grad += chunk_grads_[c];
  }
  return sum;
}

void LossEvaluator::prepare_targets(const PointSet& points) {
  const Domain& d = problem_.domain;
  ic_t_.assign(points.ic_x.size(), d.t_min);
  ic_target_.resize(points.ic_x.size());
  for (std::size_t i = 0; i < points.ic_x.size(); ++i) ic_target_[i] = initial_condition(problem_.pde, points.ic_x[i]);
  bc_x_.resize(points.bc_t.size());
  bc_target_.resize(points.bc_t.size());
  for (std::size_t i = 0; i < points.bc_t.size(); ++i) {
    bc_x_[i] = points.bc_side[i] == Side::Left ? d.x_min : d.x_max;
    bc_target_[i] = boundary_condition(problem_.pde, d, points.bc_side[i], points.bc_t[i]);
  }
}

LossGradients LossEvaluator::gradients(const Parameters& params, const PointSet& points) {
  prepare_targets(points);
  LossGradients out;
  const auto n_ic = static_cast<double>(points.ic_x.size());
  const auto n_bc = static_cast<double>(points.bc_t.size());
  const auto n_res = static_cast<double>(points.col_t.size());
  out.loss.ic = sum_data(params, ic_t_, points.ic_x, ic_target_, &out.ic) / n_ic;
  out.ic /= n_ic;
  out.loss.bc = sum_data(params, points.bc_t, bc_x_, bc_target_, &out.bc) / n_bc;
  out.bc /= n_bc;
  out.loss.res = sum_residual(params, points, &out.res) / n_res;
  out.res /= n_res;
  return out;
}

LossComponents LossEvaluator::components(const Parameters& params, const PointSet& points) {
  // The gradient comes for free with the batched sweep; discard it.
  return gradients(params, points).loss;
}

LossComponents loss_components(const Parameters& params, const Problem& problem, const PointSet& points) {
  LossEvaluator eval(problem);
  return eval.components(params, points);
}

ExprLoss::ExprLoss(const Architecture& arch, Problem problem) : arch_(arch), problem_(problem) {
  theta_ = parameter_variables(graph_, arch_);
  t_ = graph_.variable("t");
  x_ = graph_.variable("x");
  target_ = graph_.variable("target");
  u_ = forward(arch_, theta_, t_, x_);
  const Expr inputs[] = {t_, x_};
  const auto first = autodiff::derivatives(u_, inputs);
  u_t_ = first[0];
  u_x_ = first[1];
  u_xx_ = autodiff::derivative(u_x_, x_);
  const Expr r = residual_operator(problem_.pde, u_t_, u_xx_, u_);
  residual_sq_ = r * r;
  const Expr diff = u_ - target_;
  data_sq_ = diff * diff;
}

std::array<double, 4> ExprLoss::jet(const Parameters& params, double t, double x) {
  autodiff::Bindings b(graph_);
  bind_parameters(b, theta_, params);
  b.set(t_, t);
  b.set(x_, x);
  b.set(target_, 0.0);
  return {autodiff::evaluate(u_, b), autodiff::evaluate(u_t_, b), autodiff::evaluate(u_x_, b),
          autodiff::evaluate(u_xx_, b)};
}

LossGradients ExprLoss::run(const Parameters& params, const PointSet& points, bool want_grad) {
  if (!(params.architecture() == arch_)) throw ConfigError("parameters do not match the graph's architecture");
  const Domain& d = problem_.domain;
  autodiff::Bindings b(graph_);
  bind_parameters(b, theta_, params);
  const auto np = static_cast<Eigen::Index>(params.size());
  LossGradients out;
  out.ic = Vector::Zero(np);
  out.bc = Vector::Zero(np);
  out.res = Vector::Zero(np);
  Vector g(np);

  auto accumulate = [&](Expr e, double& sum, Vector& grad) {
    sum += autodiff::evaluate(e, b);
    if (want_grad) {
      autodiff::grad_into(e, theta_, b, {g.data(), static_cast<std::size_t>(np)});
      grad += g;
    }
  };

  b.set(target_, 0.0);
  for (std::size_t i = 0; i < points.col_t.size(); ++i) {
    b.set(t_, points.col_t[i]);
    b.set(x_, points.col_x[i]);
    accumulate(residual_sq_, out.loss.res, out.res);
  }
  for (double x : points.ic_x) {
    b.set(t_, d.t_min);
    b.set(x_, x);
    b.set(target_, initial_condition(problem_.pde, x));
    accumulate(data_sq_, out.loss.ic, out.ic);
  }
  for (std::size_t i = 0; i < points.bc_t.size(); ++i) {
    b.set(t_, points.bc_t[i]);
    b.set(x_, points.bc_side[i] == Side::Left ? d.x_min : d.x_max);
    b.set(target_, boundary_condition(problem_.pde, d, points.bc_side[i], points.bc_t[i]));
    accumulate(data_sq_, out.loss.bc, out.bc);
  }
  const auto n_ic = static_cast<double>(points.ic_x.size());
  const auto n_bc = static_cast<double>(points.bc_t.size());
  const auto n_res = static_cast<double>(points.col_t.size());
  out.loss.ic /= n_ic;
  out.loss.bc /= n_bc;
  out.loss.res /= n_res;
  out.ic /= n_ic;
  out.bc /= n_bc;
  out.res /= n_res;
  return out;
}

LossComponents ExprLoss::components(const Parameters& params, const PointSet& points) {
  return run(params, points, false).loss;
}

LossGradients ExprLoss::gradients(const Parameters& params, const PointSet& points) {
  return run(params, points, true);
}

TrainState TrainState::fresh(Parameters params, LossWeights weights) {
  const std::size_t n = params.size();
  return TrainState{std::move(params), optimize::AdamState(n), weights, 0, {}, 0.0};
}

TrainState train(TrainState state, const Problem& problem, const SamplingConfig& sampling,
                 const optimize::LrSchedule& schedule, std::int64_t iterations, const ProgressFn& progress,
                 std::int64_t schedule_origin) {
  if (iterations < 0) throw ConfigError("iterations must be >= 0");
  sampling.validate();
  schedule.validate();
  if (iterations == 0) return state;

  const auto start = std::chrono::steady_clock::now();
  LossEvaluator evaluator(problem);
  PointSet points = sample_points(sampling, problem.domain, state.iteration);
  Vector grad(static_cast<Eigen::Index>(state.params.size()));
  state.history.reserve(state.history.size() + static_cast<std::size_t>(iterations));

  for (std::int64_t step = 0; step < iterations; ++step) {
    const std::int64_t k = state.iteration;
    if (step > 0 && sampling.resample_collocation) sample_collocation(sampling, problem.domain, k, points);

    LossGradients lg;
    try {
      lg = evaluator.gradients(state.params, points);
    } catch (const NumericalError& e) {
      throw TrainingDiverged(std::string("iteration ") + std::to_string(k) + ": " + e.what(), state);
    }
    const LossWeights weights = update_adaptive_weights(state.weights, gradient_norms(lg.ic, lg.bc, lg.res));
    const double total = total_loss(lg.loss, weights);
    if (!std::isfinite(total)) {
      std::ostringstream os;
      os.precision(17);
      os << "iteration " << k << ": non-finite loss (L_ic=" << lg.loss.ic << ", L_bc=" << lg.loss.bc
         << ", L_res=" << lg.loss.res << ")";
      throw TrainingDiverged(os.str(), state);
    }
    grad = weights.w_ic * lg.ic + weights.w_bc * lg.bc + weights.w_res * lg.res;
    const double lr = optimize::lr_at(schedule, std::max<std::int64_t>(0, k - schedule_origin));

    optimize::AdamState adam = state.adam;
    Vector theta = state.params.values();
    try {
      optimize::adam_update(adam, theta, grad, lr);
    } catch (const NumericalError& e) {
      throw TrainingDiverged(std::string("iteration ") + std::to_string(k) + ": " + e.what(), state);
    }
    state.params.values() = std::move(theta);
    state.adam = std::move(adam);
    state.weights = weights;
    state.iteration = k + 1;
    HistoryEntry entry{k, lr, total, lg.loss.ic, lg.loss.bc, lg.loss.res, weights.w_ic, weights.w_bc};
    state.history.push_back(entry);
    if (progress) progress(entry);
  }
  state.seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return state;
}

TrainState retrain(TrainState state, const Architecture& expected, const Problem& problem,
                   const SamplingConfig& sampling, double lr, std::int64_t iterations, bool preserve_optimizer,
                   const ProgressFn& progress) {
  if (!(state.params.architecture() == expected)) {
    throw ConfigError("checkpoint architecture does not match the configured architecture");
  }
  if (!preserve_optimizer) state.adam.reset();
  return train(std::move(state), problem, sampling, optimize::LrSchedule::constant(lr), iterations, progress);
}

double final_time_error(const Parameters& params, const Problem& problem, std::size_t nx) {
  if (nx < 2) throw ConfigError("need at least two evaluation nodes");
  const Domain& d = problem.domain;
  std::vector<double> approx(nx);
  std::vector<double> exact(nx);
  const double dx = d.length() / static_cast<double>(nx - 1);
  for (std::size_t i = 0; i < nx; ++i) {
    const double x = i + 1 == nx ? d.x_max : d.x_min + static_cast<double>(i) * dx;
    approx[i] = forward_value(params, d.t_max, x);
    exact[i] = exact_solution(problem.pde, x, d.t_max);
  }
  return metrics::relative_l2(approx, exact);
}

std::vector<double> block_means(const std::vector<HistoryEntry>& history, std::size_t block) {
  std::vector<double> out;
  if (block == 0) return out;
  for (std::size_t start = 0; start + block <= history.size(); start += block) {
    double sum = 0.0;
    for (std::size_t i = start; i < start + block; ++i) sum += history[i].total;
    out.push_back(sum / static_cast<double>(block));
  }
  return out;
}

std::string_view to_string(WeightMode mode) { return mode == WeightMode::Fixed ? "fixed" : "adaptive"; }

WeightMode weight_mode_from_string(std::string_view name) {
  if (name == "fixed") return WeightMode::Fixed;
  if (name == "adaptive") return WeightMode::Adaptive;
  throw ConfigError("weight mode must be 'fixed' or 'adaptive', got '" + std::string(name) + "'");
}

}  // namespace fisher_pinn::pinn
