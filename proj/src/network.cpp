#include "fisher_pinn/network.hpp"

#include <cmath>
#include <random>
#include <string>

#include "fisher_pinn/errors.hpp"

namespace fisher_pinn {

using autodiff::Expr;

void Architecture::validate() const {
  if (input_dim != 2) throw ConfigError("input_dim must be 2 for (t, x), got " + std::to_string(input_dim));
  if (output_dim != 1) throw ConfigError("output_dim must be 1, got " + std::to_string(output_dim));
  if (hidden_layers < 1) throw ConfigError("hidden_layers must be >= 1, got " + std::to_string(hidden_layers));
  if (hidden_width < 1) throw ConfigError("hidden_width must be >= 1, got " + std::to_string(hidden_width));
}

std::vector<int> Architecture::layer_sizes() const {
  std::vector<int> sizes;
  sizes.reserve(static_cast<std::size_t>(hidden_layers) + 2);
  sizes.push_back(input_dim);
  for (int i = 0; i < hidden_layers; ++i) sizes.push_back(hidden_width);
  sizes.push_back(output_dim);
  return sizes;
}

std::size_t Architecture::parameter_count() const {
  const auto sizes = layer_sizes();
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    n += static_cast<std::size_t>(sizes[l]) * static_cast<std::size_t>(sizes[l + 1]) +
         static_cast<std::size_t>(sizes[l + 1]);
  }
  return n;
}

std::vector<LayerSlice> layer_slices(const Architecture& arch) {
  const auto sizes = arch.layer_sizes();
  std::vector<LayerSlice> out;
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    LayerSlice s;
    s.fan_in = sizes[l];
    s.fan_out = sizes[l + 1];
    s.weight_offset = offset;
    s.bias_offset = offset + static_cast<std::size_t>(s.fan_in) * static_cast<std::size_t>(s.fan_out);
    offset = s.bias_offset + static_cast<std::size_t>(s.fan_out);
    out.push_back(s);
  }
  return out;
}

Parameters::Parameters(Architecture arch)
    : arch_(arch), layers_(layer_slices(arch)), theta_(Vector::Zero(static_cast<Eigen::Index>(arch.parameter_count()))) {
  arch_.validate();
}

Parameters::Parameters(Architecture arch, Vector theta)
    : arch_(arch), layers_(layer_slices(arch)), theta_(std::move(theta)) {
  arch_.validate();
  if (static_cast<std::size_t>(theta_.size()) != arch_.parameter_count()) {
    throw ConfigError("parameter vector length mismatch: expected " + std::to_string(arch_.parameter_count()) +
                      ", got " + std::to_string(theta_.size()));
  }
}

ConstRowMajorMap Parameters::weights(std::size_t layer) const {
  const LayerSlice& s = layers_.at(layer);
  return {theta_.data() + s.weight_offset, s.fan_out, s.fan_in};
}

RowMajorMap Parameters::weights(std::size_t layer) {
  const LayerSlice& s = layers_.at(layer);
  return {theta_.data() + s.weight_offset, s.fan_out, s.fan_in};
}

Eigen::Map<const Vector> Parameters::bias(std::size_t layer) const {
  const LayerSlice& s = layers_.at(layer);
  return {theta_.data() + s.bias_offset, s.fan_out};
}

Eigen::Map<Vector> Parameters::bias(std::size_t layer) {
  const LayerSlice& s = layers_.at(layer);
  return {theta_.data() + s.bias_offset, s.fan_out};
}

Parameters xavier_init(const Architecture& arch, std::uint64_t seed) {
  Parameters params(arch);
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < params.layers().size(); ++l) {
    const LayerSlice& s = params.layers()[l];
    const double sigma = std::sqrt(2.0 / static_cast<double>(s.fan_in + s.fan_out));
    std::normal_distribution<double> normal(0.0, sigma);
    auto w = params.weights(l);
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = normal(rng);
    }
  }
  return params;
}

std::vector<Expr> parameter_variables(autodiff::Graph& graph, const Architecture& arch) {
  arch.validate();
  std::vector<Expr> vars;
  const std::size_t n = arch.parameter_count();
  vars.reserve(n);
  for (std::size_t i = 0; i < n; ++i) vars.push_back(graph.variable("theta[" + std::to_string(i) + "]"));
  return vars;
}

std::vector<Expr> parameter_constants(autodiff::Graph& graph, const Parameters& params) {
  std::vector<Expr> out;
  out.reserve(params.size());
  for (Eigen::Index i = 0; i < params.values().size(); ++i) out.push_back(graph.constant(params.values()[i]));
  return out;
}

void bind_parameters(autodiff::Bindings& bindings, std::span<const Expr> vars, const Parameters& params) {
  if (vars.size() != params.size()) {
    throw ConfigError("parameter binding mismatch: expected " + std::to_string(params.size()) + " variables, got " +
                      std::to_string(vars.size()));
  }
  for (std::size_t i = 0; i < vars.size(); ++i) bindings.set(vars[i], params.values()[static_cast<Eigen::Index>(i)]);
}

Expr forward(const Architecture& arch, std::span<const Expr> theta, Expr t, Expr x) {
  arch.validate();
  if (theta.size() != arch.parameter_count()) {
    throw ConfigError("parameter vector length mismatch: expected " + std::to_string(arch.parameter_count()) +
                      ", got " + std::to_string(theta.size()));
  }
  const auto layers = layer_slices(arch);
  std::vector<Expr> act = {t, x};
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const LayerSlice& s = layers[l];
    const bool hidden = l + 1 < layers.size();
    std::vector<Expr> next;
    next.reserve(static_cast<std::size_t>(s.fan_out));
    for (int i = 0; i < s.fan_out; ++i) {
      const std::size_t row = s.weight_offset + static_cast<std::size_t>(i) * static_cast<std::size_t>(s.fan_in);
      Expr z = theta[row] * act[0];
      for (int j = 1; j < s.fan_in; ++j) z = z + theta[row + static_cast<std::size_t>(j)] * act[static_cast<std::size_t>(j)];
      z = z + theta[s.bias_offset + static_cast<std::size_t>(i)];
      next.push_back(hidden ? autodiff::tanh(z) : z);
    }
    act = std::move(next);
  }
  return act.front();
}

double forward_value(const Parameters& params, double t, double x) {
  const auto& layers = params.layers();
  const Vector& theta = params.values();
  std::vector<double> act = {t, x};
  std::vector<double> next;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const LayerSlice& s = layers[l];
    const bool hidden = l + 1 < layers.size();
    next.assign(static_cast<std::size_t>(s.fan_out), 0.0);
    for (int i = 0; i < s.fan_out; ++i) {
      const auto row = static_cast<Eigen::Index>(s.weight_offset) + static_cast<Eigen::Index>(i) * s.fan_in;
      double z = theta[row] * act[0];
      for (int j = 1; j < s.fan_in; ++j) z = z + theta[row + j] * act[static_cast<std::size_t>(j)];
      z = z + theta[static_cast<Eigen::Index>(s.bias_offset) + i];
      next[static_cast<std::size_t>(i)] = hidden ? std::tanh(z) : z;
    }
    act.swap(next);
  }
  return act.front();
}

Matrix predict_grid(const Parameters& params, std::span<const double> times, std::span<const double> positions) {
  Matrix out(static_cast<Eigen::Index>(times.size()), static_cast<Eigen::Index>(positions.size()));
  for (std::size_t i = 0; i < times.size(); ++i) {
    for (std::size_t j = 0; j < positions.size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = forward_value(params, times[i], positions[j]);
    }
  }
  return out;
}

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::Tanh: return "tanh";
  }
  return "tanh";
}

Activation activation_from_string(std::string_view name) {
  if (name == "tanh" || name == "Tanh") return Activation::Tanh;
  throw ConfigError("unsupported activation '" + std::string(name) + "'");
}

}  // namespace fisher_pinn
