#include "fisher_pinn/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <string>

#include "fisher_pinn/errors.hpp"
#include "fisher_pinn/fdm.hpp"
#include "json.hpp"

namespace fisher_pinn::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

json report_json(const metrics::ErrorReport& r) {
  return {{"relative_l2", r.relative_l2},
          {"max_abs_error", r.max_abs_error},
          {"argmax_t", r.argmax_t},
          {"argmax_x", r.argmax_x},
          {"n_points", r.n_points}};
}

json comparison_json(const metrics::Comparison& c) {
  return {{"fdm_vs_exact", report_json(c.fdm_vs_exact)},
          {"pinn_vs_exact", report_json(c.pinn_vs_exact)},
          {"pinn_vs_fdm", report_json(c.pinn_vs_fdm)}};
}

void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory '" + dir.string() + "'");
}

std::vector<double> fdm_positions(const io::ExperimentConfig& cfg, const fdm::Grid& grid) {
  std::vector<double> xs(grid.nx);
  for (std::size_t i = 0; i < grid.nx; ++i) xs[i] = grid.x(cfg.problem.domain, i);
  return xs;
}

metrics::ErrorReport final_time_report(const io::ExperimentConfig& cfg, const Parameters& params) {
  const auto& d = cfg.problem.domain;
  const std::vector<double> t = {d.t_max};
  const auto xs = fdm_positions(cfg, cfg.fdm_grid());
  return metrics::error_field(predict_grid(params, t, xs), io::exact_grid(cfg.problem.pde, t, xs), t, xs).report;
}

pinn::ProgressFn progress_printer(const RunOptions& opts) {
  if (opts.log == nullptr || opts.log_every <= 0) return {};
  return [&opts](const pinn::HistoryEntry& h) {
    if (h.iteration % opts.log_every != 0) return;
    char buf[256];
    std::snprintf(buf, sizeof buf, "iter %6lld  L=%.4e  L_ic=%.3e  L_bc=%.3e  L_res=%.3e  w_ic=%.4g  w_bc=%.4g  lr=%.3e\n",
                  static_cast<long long>(h.iteration), h.total, h.ic, h.bc, h.res, h.w_ic, h.w_bc, h.lr);
    *opts.log << buf << std::flush;
  };
}

json last_loss_json(const pinn::TrainState& s) {
  if (s.history.empty()) return nullptr;
  const auto& h = s.history.back();
  return {{"iteration", h.iteration}, {"L", h.total}, {"L_IC", h.ic}, {"L_BC", h.bc},
          {"L_Res", h.res},           {"w_ic", h.w_ic}, {"w_bc", h.w_bc}};
}

// Shared artifact set of train and retrain.
metrics::ErrorReport write_training_artifacts(const io::ExperimentConfig& cfg, const pinn::TrainState& state,
                                              const fs::path& out_dir) {
  const auto& d = cfg.problem.domain;
  io::save_checkpoint(io::Checkpoint::from_state(state, cfg.sampling.seed), out_dir / "checkpoint.json");
  io::write_text(out_dir / "loss_history.csv", io::history_csv(state.history));

  const auto times = io::linspace(d.t_min, d.t_max, cfg.eval_nt);
  const auto positions = io::linspace(d.x_min, d.x_max, cfg.eval_nx);
  const Matrix grid = predict_grid(state.params, times, positions);
  io::write_text(out_dir / "pinn_grid.csv", io::grid_csv(grid, times, positions));

  const metrics::ErrorReport final_time = final_time_report(cfg, state.params);
  const metrics::ErrorReport field =
      metrics::error_field(grid, io::exact_grid(cfg.problem.pde, times, positions), times, positions).report;
  json report = report_json(final_time);
  report["t"] = d.t_max;
  report["field"] = report_json(field);
  report["iterations"] = state.iteration;
  report["final_loss"] = last_loss_json(state);
  report["metadata"] = {{"created", io::utc_timestamp()}, {"seconds", state.seconds}};
  io::write_text(out_dir / "report.json", report.dump(2) + "\n");
  io::write_text(out_dir / "config.json", io::config_to_json(cfg));
  return final_time;
}

template <typename Fn>
pinn::TrainState guarded(const io::ExperimentConfig& cfg, const fs::path& out_dir, Fn&& run) {
  try {
    return run();
  } catch (const pinn::TrainingDiverged& e) {
    io::save_checkpoint(io::Checkpoint::from_state(e.last_good(), cfg.sampling.seed), out_dir / "checkpoint.json");
    io::write_text(out_dir / "config.json", io::config_to_json(cfg));
    throw;
  }
}

}  // namespace

TrainResult cmd_train(const io::ExperimentConfig& cfg, const fs::path& out_dir, const RunOptions& opts) {
  cfg.validate();
  prepare_dir(out_dir);
  pinn::TrainState start =
      pinn::TrainState::fresh(xavier_init(cfg.architecture, cfg.sampling.seed), cfg.initial_weights());
  pinn::TrainState state = guarded(cfg, out_dir, [&] {
    return pinn::train(std::move(start), cfg.problem, cfg.sampling, cfg.schedule, cfg.iterations,
                       progress_printer(opts));
  });
  TrainResult out{std::move(state), {}};
  out.final_time = write_training_artifacts(cfg, out.state, out_dir);
  return out;
}

RetrainResult cmd_retrain(const fs::path& checkpoint, const io::ExperimentConfig& cfg, const RetrainOptions& retrain,
                          const fs::path& out_dir, const RunOptions& opts) {
  cfg.validate();
  if (!(retrain.lr > 0.0)) throw ConfigError("retraining lr must be > 0");
  if (retrain.iterations < 0) throw ConfigError("retraining iterations must be >= 0");
  if (retrain.phases < 1) throw ConfigError("retraining needs at least one phase");
  const io::Checkpoint ckpt = io::load_checkpoint(checkpoint);
  if (!(ckpt.params.architecture() == cfg.architecture)) {
    throw ConfigError("checkpoint architecture (" + std::to_string(ckpt.params.architecture().hidden_layers) + "x" +
                      std::to_string(ckpt.params.architecture().hidden_width) +
                      ") does not match the configured architecture (" +
                      std::to_string(cfg.architecture.hidden_layers) + "x" +
                      std::to_string(cfg.architecture.hidden_width) + ")");
  }
  if (retrain.preserve_optimizer && !ckpt.adam) {
    throw ConfigError("--preserve-optimizer requires a checkpoint with optimizer state, '" + checkpoint.string() +
                      "' has none");
  }
  prepare_dir(out_dir);

  RetrainResult out{ckpt.to_state(), 0.0, {}};
  out.initial_error = pinn::final_time_error(out.state.params, cfg.problem, cfg.fdm_nx);
  json phases = json::array();
  for (std::int64_t p = 0; p < retrain.phases; ++p) {
    const std::size_t before = out.state.history.size();
    out.state = guarded(cfg, out_dir, [&] {
      return pinn::retrain(std::move(out.state), cfg.architecture, cfg.problem, cfg.sampling, retrain.lr,
                           retrain.iterations, retrain.preserve_optimizer, progress_printer(opts));
    });
    const double err = pinn::final_time_error(out.state.params, cfg.problem, cfg.fdm_nx);
    out.phase_errors.push_back(err);

    const std::vector<pinn::HistoryEntry> phase_history(out.state.history.begin() + static_cast<std::ptrdiff_t>(before),
                                                        out.state.history.end());
    const auto means = pinn::block_means(phase_history, 1000);
    json entry = {{"phase", p + 1}, {"iterations", retrain.iterations}, {"relative_l2", err},
                  {"end_iteration", out.state.iteration}};
    entry["block_means_1000"] = means;
    phases.push_back(entry);
  }

  write_training_artifacts(cfg, out.state, out_dir);
  const double final_error = out.phase_errors.back();
  json report = {{"mode", retrain.preserve_optimizer ? "preserve" : "reset"},
                 {"lr", retrain.lr},
                 {"iterations_per_phase", retrain.iterations},
                 {"checkpoint_iteration", ckpt.iteration},
                 {"initial_relative_l2", out.initial_error},
                 {"phases", phases},
                 {"final_relative_l2", final_error},
                 {"improved", final_error < out.initial_error}};
  report["metadata"] = {{"created", io::utc_timestamp()}, {"seconds", out.state.seconds}};
  io::write_text(out_dir / "retrain_report.json", report.dump(2) + "\n");
  return out;
}

metrics::ErrorReport cmd_fdm(const io::ExperimentConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  const fdm::Grid grid = cfg.fdm_grid();
  const auto start = std::chrono::steady_clock::now();
  const Matrix u = fdm::solve(cfg.problem.pde, cfg.problem.domain, grid);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  prepare_dir(out_dir);

  std::vector<double> times(grid.nt + 1);
  for (std::size_t n = 0; n <= grid.nt; ++n) times[n] = grid.t(cfg.problem.domain, n);
  const auto xs = fdm_positions(cfg, grid);
  io::write_text(out_dir / "fdm_grid.csv", io::grid_csv(u, times, xs));

  const std::vector<double> t_final = {times.back()};
  const Matrix last = u.bottomRows(1);
  const metrics::ErrorReport final_time =
      metrics::error_field(last, io::exact_grid(cfg.problem.pde, t_final, xs), t_final, xs).report;
  const metrics::ErrorReport field =
      metrics::error_field(u, io::exact_grid(cfg.problem.pde, times, xs), times, xs).report;

  json report = report_json(final_time);
  report["t"] = t_final.front();
  report["field"] = report_json(field);
  report["dt"] = grid.dt;
  report["dx"] = grid.dx;
  report["cfl_limit"] = fdm::cfl_limit(cfg.problem.pde, grid.dx);
  report["metadata"] = {{"created", io::utc_timestamp()}, {"seconds", seconds}};
  io::write_text(out_dir / "report.json", report.dump(2) + "\n");
  io::write_text(out_dir / "config.json", io::config_to_json(cfg));
  return final_time;
}

CompareResult cmd_compare(const fs::path& checkpoint, const io::ExperimentConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  const io::Checkpoint ckpt = io::load_checkpoint(checkpoint);
  const fdm::Grid grid = cfg.fdm_grid();
  const Matrix u = fdm::solve(cfg.problem.pde, cfg.problem.domain, grid);
  prepare_dir(out_dir);
  const auto xs = fdm_positions(cfg, grid);

  // FDM rows sampled at roughly the evaluation-grid time resolution; the last
  // row is always included.
  const std::size_t stride = std::max<std::size_t>(1, grid.nt / (cfg.eval_nt - 1));
  std::vector<std::size_t> rows;
  for (std::size_t n = 0; n < grid.nt; n += stride) rows.push_back(n);
  rows.push_back(grid.nt);
  std::vector<double> times(rows.size());
  Matrix fdm_rows(static_cast<Eigen::Index>(rows.size()), u.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    times[i] = grid.t(cfg.problem.domain, rows[i]);
    fdm_rows.row(static_cast<Eigen::Index>(i)) = u.row(static_cast<Eigen::Index>(rows[i]));
  }
  const Matrix pinn_rows = predict_grid(ckpt.params, times, xs);
  const Matrix exact_rows = io::exact_grid(cfg.problem.pde, times, xs);

  CompareResult out;
  const std::vector<double> t_final = {times.back()};
  out.final_time = metrics::compare_all(pinn_rows.bottomRows(1), fdm_rows.bottomRows(1), exact_rows.bottomRows(1),
                                        t_final, xs);
  out.field = metrics::compare_all(pinn_rows, fdm_rows, exact_rows, times, xs);

  const auto write_field = [&](const char* name, const Matrix& a, const Matrix& b) {
    io::write_text(out_dir / name, io::grid_csv(metrics::error_field(a, b).abs_error, times, xs));
  };
  write_field("error_fdm_vs_exact.csv", fdm_rows, exact_rows);
  write_field("error_pinn_vs_exact.csv", pinn_rows, exact_rows);
  write_field("error_pinn_vs_fdm.csv", pinn_rows, fdm_rows);

  json report;
  report["t"] = t_final.front();
  report["final_time"] = comparison_json(out.final_time);
  report["field"] = comparison_json(out.field);
  report["fdm_more_accurate_than_pinn"] =
      out.final_time.fdm_vs_exact.relative_l2 < out.final_time.pinn_vs_exact.relative_l2;
  report["checkpoint_iteration"] = ckpt.iteration;
  report["metadata"] = {{"created", io::utc_timestamp()}};
  io::write_text(out_dir / "comparison.json", report.dump(2) + "\n");
  io::write_text(out_dir / "config.json", io::config_to_json(cfg));
  return out;
}

}  // namespace fisher_pinn::cli
