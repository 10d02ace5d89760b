#include "fisher_pinn/jet.hpp"

#include <stdexcept>

namespace fisher_pinn {

namespace {

constexpr Eigen::Index kJetChannels = 4;

// tanh(z) = 1 - 2 / (exp(2z) + 1) through Eigen's vectorized exp; absolute
// error is a few 1e-16. Saturates correctly when exp overflows or underflows.
template <typename In, typename Out>
void fast_tanh(const In& z, Eigen::ArrayXXd& scratch, Out&& out) {
  scratch = (2.0 * z).exp();
  out = 1.0 - 2.0 / (scratch + 1.0);
}

}  // namespace

void JetEvaluator::forward_pass(std::span<const double> t, std::span<const double> x, bool jets,
                                JetWorkspace& ws) const {
  if (t.size() != x.size()) throw std::invalid_argument("t and x batches differ in length");
  const auto n = static_cast<Eigen::Index>(t.size());
  const Eigen::Index channels = jets ? kJetChannels : 1;
  const auto& layers = params_.layers();
  const std::size_t hidden = layers.size() - 1;

  ws.input.resize(2, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    ws.input(0, j) = t[static_cast<std::size_t>(j)];
    ws.input(1, j) = x[static_cast<std::size_t>(j)];
  }
  ws.pre.resize(hidden);
  ws.post.resize(hidden);

  for (std::size_t l = 0; l < hidden; ++l) {
    const auto w = params_.weights(l);
    const auto b = params_.bias(l);
    ColMatrix& z = ws.pre[l];
    z.resize(w.rows(), channels * n);
    if (l == 0) {
      z.leftCols(n).noalias() = w * ws.input;
      if (jets) {
        // d/dt and d/dx of the first pre-activation are the weight columns.
        z.middleCols(n, n) = w.col(0).replicate(1, n);
        z.middleCols(2 * n, n) = w.col(1).replicate(1, n);
        z.rightCols(n).setZero();
      }
    } else {
      z.noalias() = w * ws.post[l - 1];
    }
    z.leftCols(n).colwise() += b;

    ColMatrix& a = ws.post[l];
    a.resize(z.rows(), channels * n);
    fast_tanh(z.leftCols(n).array(), ws.act_slope, a.leftCols(n).array());
    if (jets) {
      const auto act = a.leftCols(n).array();
      const auto z_t = z.middleCols(n, n).array();
      const auto z_x = z.middleCols(2 * n, n).array();
      const auto z_xx = z.rightCols(n).array();
      ws.slope = 1.0 - act.square();
      const auto& slope = ws.slope;
      a.middleCols(n, n).array() = slope * z_t;
      a.middleCols(2 * n, n).array() = slope * z_x;
      a.rightCols(n).array() = slope * (z_xx - 2.0 * act * z_x.square());
    }
  }

  const auto w_out = params_.weights(hidden);
  ws.out.resize(channels * n);
  ws.out.noalias() = w_out * ws.post[hidden - 1];
  ws.out.leftCols(n).array() += params_.bias(hidden)(0);
}

void JetEvaluator::backward_pass(bool jets, JetWorkspace& ws, Eigen::Ref<Vector> grad) const {
  const auto& layers = params_.layers();
  const std::size_t hidden = layers.size() - 1;
  const Eigen::Index channels = jets ? kJetChannels : 1;
  const Eigen::Index n = ws.out.size() / channels;

  {
    const LayerSlice& s = layers[hidden];
    RowMajorMap g_w(grad.data() + s.weight_offset, s.fan_out, s.fan_in);
    g_w.noalias() += ws.out_grad * ws.post[hidden - 1].transpose();
    grad[static_cast<Eigen::Index>(s.bias_offset)] += ws.out_grad.leftCols(n).sum();
    ws.upstream.noalias() = params_.weights(hidden).transpose() * ws.out_grad;
  }

  for (std::size_t l = hidden; l-- > 0;) {
    const LayerSlice& s = layers[l];
    const ColMatrix& z = ws.pre[l];
    const ColMatrix& a = ws.post[l];
    ColMatrix& dz = ws.scratch;
    dz.resize(a.rows(), a.cols());

    const auto act = a.leftCols(n).array();
    ws.slope = 1.0 - act.square();
    const auto& slope = ws.slope;
    const auto d_act = ws.upstream.leftCols(n).array();
    if (!jets) {
      dz.leftCols(n).array() = d_act * slope;
    } else {
      const auto z_t = z.middleCols(n, n).array();
      const auto z_x = z.middleCols(2 * n, n).array();
      const auto z_xx = z.rightCols(n).array();
      const auto d_t = ws.upstream.middleCols(n, n).array();
      const auto d_x = ws.upstream.middleCols(2 * n, n).array();
      const auto d_xx = ws.upstream.rightCols(n).array();
      // With s = 1 - a^2: ds/dz = -2 a s and d(a s)/dz = s (1 - 3 a^2).
      ws.act_slope = act * slope;
      const auto& as = ws.act_slope;
      dz.leftCols(n).array() =
          d_act * slope - 2.0 * as * (d_t * z_t + d_x * z_x + d_xx * z_xx) -
          2.0 * d_xx * z_x.square() * slope * (1.0 - 3.0 * act.square());
      dz.middleCols(n, n).array() = d_t * slope;
      dz.middleCols(2 * n, n).array() = d_x * slope - 4.0 * as * z_x * d_xx;
      dz.rightCols(n).array() = d_xx * slope;
    }

    RowMajorMap g_w(grad.data() + s.weight_offset, s.fan_out, s.fan_in);
    Eigen::Map<Vector> g_b(grad.data() + s.bias_offset, s.fan_out);
    g_b += dz.leftCols(n).rowwise().sum();
    if (l > 0) {
      g_w.noalias() += dz * ws.post[l - 1].transpose();
      ws.upstream.noalias() = params_.weights(l).transpose() * dz;
    } else {
      g_w.noalias() += dz.leftCols(n) * ws.input.transpose();
      if (jets) {
        g_w.col(0) += dz.middleCols(n, n).rowwise().sum();
        g_w.col(1) += dz.middleCols(2 * n, n).rowwise().sum();
      }
    }
  }
}

JetValues JetEvaluator::evaluate(std::span<const double> t, std::span<const double> x, JetWorkspace& ws) const {
  forward_pass(t, x, true, ws);
  const auto n = static_cast<Eigen::Index>(t.size());
  JetValues out;
  out.u = ws.out.leftCols(n).transpose();
  out.u_t = ws.out.middleCols(n, n).transpose();
  out.u_x = ws.out.middleCols(2 * n, n).transpose();
  out.u_xx = ws.out.rightCols(n).transpose();
  return out;
}

Vector JetEvaluator::values(std::span<const double> t, std::span<const double> x, JetWorkspace& ws) const {
  forward_pass(t, x, false, ws);
  return ws.out.transpose();
}

double JetEvaluator::residual_sum_squares(const PdeParams& pde, std::span<const double> t,
                                          std::span<const double> x, JetWorkspace& ws,
                                          Eigen::Ref<Vector> grad) const {
  forward_pass(t, x, true, ws);
  const auto n = static_cast<Eigen::Index>(t.size());
  const auto u = ws.out.leftCols(n).array();
  const auto u_t = ws.out.middleCols(n, n).array();
  const auto u_xx = ws.out.rightCols(n).array();
  const Eigen::Array<double, 1, Eigen::Dynamic> r = u_t - pde.diffusion * u_xx - pde.reaction * u * (1.0 - u);

  ws.out_grad.resize(kJetChannels * n);
  ws.out_grad.leftCols(n).array() = (-2.0 * pde.reaction) * r * (1.0 - 2.0 * u);
  ws.out_grad.middleCols(n, n).array() = 2.0 * r;
  ws.out_grad.middleCols(2 * n, n).setZero();
  ws.out_grad.rightCols(n).array() = (-2.0 * pde.diffusion) * r;
  backward_pass(true, ws, grad);
  return r.square().sum();
}

double JetEvaluator::data_sum_squares(std::span<const double> t, std::span<const double> x,
                                      std::span<const double> target, JetWorkspace& ws,
                                      Eigen::Ref<Vector> grad) const {
  if (target.size() != t.size()) throw std::invalid_argument("target batch differs in length");
  forward_pass(t, x, false, ws);
  const auto n = static_cast<Eigen::Index>(t.size());
  const Eigen::Map<const Eigen::RowVectorXd> y(target.data(), n);
  const Eigen::RowVectorXd diff = ws.out - y;
  ws.out_grad = 2.0 * diff;
  backward_pass(false, ws, grad);
  return diff.squaredNorm();
}

}  // namespace fisher_pinn
