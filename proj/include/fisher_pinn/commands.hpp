#pragma once

// The four driver commands. Each writes its artifacts plus the config it ran
// with into an output directory and returns the headline numbers. Errors are
// ConfigError (bad input, IO) or NumericalError (CFL, divergence).

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <vector>

#include "fisher_pinn/experiment.hpp"
#include "fisher_pinn/metrics.hpp"
#include "fisher_pinn/pinn.hpp"

namespace fisher_pinn::cli {

struct RunOptions {
  std::ostream* log = nullptr;  // progress lines; silent when null
  std::int64_t log_every = 500;
};

struct TrainResult {
  pinn::TrainState state;
  metrics::ErrorReport final_time;  // against the closed form at t_max
};

/// checkpoint.json, loss_history.csv, pinn_grid.csv, report.json, config.json.
TrainResult cmd_train(const io::ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                      const RunOptions& opts = {});

struct RetrainOptions {
  double lr = 1e-4;
  std::int64_t iterations = 20'000;  // per phase
  std::int64_t phases = 1;
  bool preserve_optimizer = false;
};

struct RetrainResult {
  pinn::TrainState state;
  double initial_error = 0.0;
  std::vector<double> phase_errors;
};

/// Same artifacts as cmd_train plus retrain_report.json. In reset mode the
/// optimizer is reset at the start of every phase.
RetrainResult cmd_retrain(const std::filesystem::path& checkpoint, const io::ExperimentConfig& cfg,
                          const RetrainOptions& retrain, const std::filesystem::path& out_dir,
                          const RunOptions& opts = {});

/// fdm_grid.csv, report.json, config.json. Returns the final-row report.
metrics::ErrorReport cmd_fdm(const io::ExperimentConfig& cfg, const std::filesystem::path& out_dir);

struct CompareResult {
  metrics::Comparison final_time;  // slices at t_max on the FDM nodes
  metrics::Comparison field;       // over the sampled space-time grid
};

/// comparison.json and one absolute-error CSV per pair.
CompareResult cmd_compare(const std::filesystem::path& checkpoint, const io::ExperimentConfig& cfg,
                          const std::filesystem::path& out_dir);

}  // namespace fisher_pinn::cli
