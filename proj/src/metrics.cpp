#include "fisher_pinn/metrics.hpp"

#include <cmath>
#include <string>

#include "fisher_pinn/errors.hpp"

namespace fisher_pinn::metrics {

double relative_l2(std::span<const double> approx, std::span<const double> exact) {
  if (approx.size() != exact.size()) {
    throw ConfigError("relative_l2: length mismatch (" + std::to_string(approx.size()) + " vs " +
                      std::to_string(exact.size()) + ")");
  }
  if (exact.empty()) throw ConfigError("relative_l2: empty input");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < exact.size(); ++k) {
    const double d = approx[k] - exact[k];
    num += d * d;
    den += exact[k] * exact[k];
  }
  if (!(den > 0.0)) throw NumericalError("relative_l2: reference vector has zero norm");
  return std::sqrt(num) / std::sqrt(den);
}

ErrorField error_field(const Matrix& approx, const Matrix& exact, std::span<const double> times,
                       std::span<const double> positions) {
  if (approx.rows() != exact.rows() || approx.cols() != exact.cols()) {
    throw ConfigError("error_field: shape mismatch (" + std::to_string(approx.rows()) + "x" +
                      std::to_string(approx.cols()) + " vs " + std::to_string(exact.rows()) + "x" +
                      std::to_string(exact.cols()) + ")");
  }
  if (!times.empty() && times.size() != static_cast<std::size_t>(exact.rows())) {
    throw ConfigError("error_field: time labels do not match row count");
  }
  if (!positions.empty() && positions.size() != static_cast<std::size_t>(exact.cols())) {
    throw ConfigError("error_field: position labels do not match column count");
  }
  ErrorField out;
  out.abs_error = (approx - exact).cwiseAbs();
  const auto n = static_cast<std::size_t>(exact.size());
  out.report.n_points = n;
  out.report.relative_l2 = relative_l2({approx.data(), n}, {exact.data(), n});
  Eigen::Index r = 0;
  Eigen::Index c = 0;
  out.report.max_abs_error = n == 0 ? 0.0 : out.abs_error.maxCoeff(&r, &c);
  out.report.argmax_t = times.empty() ? static_cast<double>(r) : times[static_cast<std::size_t>(r)];
  out.report.argmax_x = positions.empty() ? static_cast<double>(c) : positions[static_cast<std::size_t>(c)];
  return out;
}

Comparison compare_all(const Matrix& pinn, const Matrix& fdm, const Matrix& exact, std::span<const double> times,
                       std::span<const double> positions) {
  Comparison out;
  out.fdm_vs_exact = error_field(fdm, exact, times, positions).report;
  out.pinn_vs_exact = error_field(pinn, exact, times, positions).report;
  out.pinn_vs_fdm = error_field(pinn, fdm, times, positions).report;
  return out;
}

}  // namespace fisher_pinn::metrics
