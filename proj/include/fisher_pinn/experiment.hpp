#pragma once

// Run configuration, checkpoints and artifact files.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fisher_pinn/fdm.hpp"
#include "fisher_pinn/metrics.hpp"
#include "fisher_pinn/network.hpp"
#include "fisher_pinn/optimize.hpp"
#include "fisher_pinn/pinn.hpp"

namespace fisher_pinn::io {

struct ExperimentConfig {
  pinn::Problem problem;
  Architecture architecture;
  pinn::SamplingConfig sampling;
  optimize::LrSchedule schedule;
  std::size_t fdm_nx = 201;
  std::size_t fdm_nt = 1600;
  std::int64_t iterations = 10'000;
  pinn::WeightMode weight_mode = pinn::WeightMode::Adaptive;
  double weight_ceiling = 1e4;
  double retrain_lr = 1e-4;
  std::int64_t retrain_iterations = 20'000;
  std::int64_t retrain_phases = 1;
  std::size_t eval_nt = 101;  // time nodes of the whole-domain evaluation grid
  std::size_t eval_nx = 201;
  std::string out_dir = "out";

  void validate() const;
  [[nodiscard]] fdm::Grid fdm_grid() const;
  [[nodiscard]] pinn::LossWeights initial_weights() const;
};

[[nodiscard]] std::string config_to_json(const ExperimentConfig& cfg);
/// Missing keys keep their defaults; unknown keys and wrong types are
/// ConfigErrors.
[[nodiscard]] ExperimentConfig config_from_json(const std::string& text);
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  int format_version = kCheckpointVersion;
  Parameters params{Architecture{}};
  std::optional<optimize::AdamState> adam;
  std::int64_t iteration = 0;
  pinn::LossWeights weights;
  std::uint64_t seed = 0;
  std::string created;  // UTC timestamp, metadata only
  double seconds = 0.0;

  [[nodiscard]] static Checkpoint from_state(const pinn::TrainState& state, std::uint64_t seed);
  /// Training state with an empty history.
  [[nodiscard]] pinn::TrainState to_state() const;
};

/// Doubles are written in shortest round-trip form, so save, load, save
/// reproduces the same bytes.
[[nodiscard]] std::string checkpoint_to_json(const Checkpoint& ckpt);
[[nodiscard]] Checkpoint checkpoint_from_json(const std::string& text);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
[[nodiscard]] Checkpoint load_checkpoint(const std::filesystem::path& path);

/// "%.17g" rendering used by every CSV writer.
[[nodiscard]] std::string format_double(double v);

/// Header row "t,<x_0>,...", then one row per time: "<t_i>,<values...>".
[[nodiscard]] std::string grid_csv(const Matrix& values, std::span<const double> times,
                                   std::span<const double> positions);
/// Every `stride`-th history entry, plus the last one.
[[nodiscard]] std::string history_csv(const std::vector<pinn::HistoryEntry>& history, std::size_t stride = 10);

[[nodiscard]] std::string report_to_json(const metrics::ErrorReport& report);

void write_text(const std::filesystem::path& path, const std::string& text);
[[nodiscard]] std::string read_text(const std::filesystem::path& path);

/// n uniform nodes lo + i * step on [lo, hi], the last equal to hi (same
/// placement as the finite-difference grid).
[[nodiscard]] std::vector<double> linspace(double lo, double hi, std::size_t n);

/// Closed form sampled on a (times x positions) grid.
[[nodiscard]] Matrix exact_grid(const PdeParams& p, std::span<const double> times, std::span<const double> positions);

[[nodiscard]] std::string utc_timestamp();

}  // namespace fisher_pinn::io
