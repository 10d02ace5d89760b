#pragma once

#include <cstddef>
#include <span>

#include "fisher_pinn/types.hpp"

namespace fisher_pinn::metrics {

struct ErrorReport {
  double relative_l2 = 0.0;
  double max_abs_error = 0.0;
  double argmax_t = 0.0;
  double argmax_x = 0.0;
  std::size_t n_points = 0;
};

/// ||approx - exact||_2 / ||exact||_2, summed in index order.
[[nodiscard]] double relative_l2(std::span<const double> approx, std::span<const double> exact);

struct ErrorField {
  Matrix abs_error;
  ErrorReport report;
};

/// Pointwise |approx - exact|. `times` and `positions` label rows and columns
/// for the argmax location; when empty, row/column indices are reported.
[[nodiscard]] ErrorField error_field(const Matrix& approx, const Matrix& exact, std::span<const double> times = {},
                                     std::span<const double> positions = {});

struct Comparison {
  ErrorReport fdm_vs_exact;
  ErrorReport pinn_vs_exact;
  ErrorReport pinn_vs_fdm;  // FDM is the reference (denominator)
};

[[nodiscard]] Comparison compare_all(const Matrix& pinn, const Matrix& fdm, const Matrix& exact,
                                     std::span<const double> times = {}, std::span<const double> positions = {});

}  // namespace fisher_pinn::metrics
