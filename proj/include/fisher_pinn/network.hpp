#pragma once

// Fully connected Tanh network u(t, x; theta) with a linear output layer.
//
// Parameter layout (frozen; checkpoints depend on it): for each layer in
// order from input to output, the weight matrix of shape fan_out x fan_in in
// row-major order, followed by its fan_out biases.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "fisher_pinn/autodiff.hpp"
#include "fisher_pinn/types.hpp"

namespace fisher_pinn {

enum class Activation { Tanh };

struct Architecture {
  int input_dim = 2;
  int hidden_layers = 7;
  int hidden_width = 50;
  int output_dim = 1;
  Activation activation = Activation::Tanh;

  void validate() const;

  /// {input_dim, hidden_width, ..., hidden_width, output_dim}.
  [[nodiscard]] std::vector<int> layer_sizes() const;
  [[nodiscard]] std::size_t layer_count() const { return static_cast<std::size_t>(hidden_layers) + 1; }
  [[nodiscard]] std::size_t parameter_count() const;

  bool operator==(const Architecture&) const = default;
};

/// Offsets of one layer inside the flat parameter vector.
struct LayerSlice {
  std::size_t weight_offset = 0;
  std::size_t bias_offset = 0;
  int fan_in = 0;
  int fan_out = 0;
};

[[nodiscard]] std::vector<LayerSlice> layer_slices(const Architecture& arch);

using RowMajorMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstRowMajorMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

class Parameters {
 public:
  /// All-zero parameters.
  explicit Parameters(Architecture arch);
  Parameters(Architecture arch, Vector theta);

  [[nodiscard]] const Architecture& architecture() const noexcept { return arch_; }
  [[nodiscard]] const std::vector<LayerSlice>& layers() const noexcept { return layers_; }
  [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(theta_.size()); }

  [[nodiscard]] const Vector& values() const noexcept { return theta_; }
  [[nodiscard]] Vector& values() noexcept { return theta_; }

  [[nodiscard]] ConstRowMajorMap weights(std::size_t layer) const;
  [[nodiscard]] RowMajorMap weights(std::size_t layer);
  [[nodiscard]] Eigen::Map<const Vector> bias(std::size_t layer) const;
  [[nodiscard]] Eigen::Map<Vector> bias(std::size_t layer);

  bool operator==(const Parameters& other) const { return arch_ == other.arch_ && theta_ == other.theta_; }

 private:
  Architecture arch_;
  std::vector<LayerSlice> layers_;
  Vector theta_;
};

/// Weights ~ N(0, 2 / (fan_in + fan_out)) per layer, biases zero.
[[nodiscard]] Parameters xavier_init(const Architecture& arch, std::uint64_t seed);

// Expression-graph route.

/// One variable per parameter, named theta[i].
[[nodiscard]] std::vector<autodiff::Expr> parameter_variables(autodiff::Graph& graph, const Architecture& arch);
/// One constant node per parameter.
[[nodiscard]] std::vector<autodiff::Expr> parameter_constants(autodiff::Graph& graph, const Parameters& params);
void bind_parameters(autodiff::Bindings& bindings, std::span<const autodiff::Expr> vars, const Parameters& params);

/// u(t, x) as an expression. `theta` must have arch.parameter_count() entries.
[[nodiscard]] autodiff::Expr forward(const Architecture& arch, std::span<const autodiff::Expr> theta,
                                     autodiff::Expr t, autodiff::Expr x);

// Plain double route; performs the same operations in the same order as
// evaluating `forward`, so the two agree bit for bit.

[[nodiscard]] double forward_value(const Parameters& params, double t, double x);

/// Rows follow `times`, columns follow `positions`.
[[nodiscard]] Matrix predict_grid(const Parameters& params, std::span<const double> times,
                                  std::span<const double> positions);

[[nodiscard]] std::string_view to_string(Activation a);
[[nodiscard]] Activation activation_from_string(std::string_view name);

}  // namespace fisher_pinn
