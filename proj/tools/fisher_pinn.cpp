#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fisher_pinn/commands.hpp"
#include "fisher_pinn/errors.hpp"
#include "fisher_pinn/experiment.hpp"

using namespace fisher_pinn;

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> iterations;
  std::optional<double> lr;
  std::optional<std::string> weight_mode;
  std::optional<std::size_t> nt;
  std::optional<std::size_t> nx;
  std::optional<std::int64_t> phases;
  std::string checkpoint;
  bool preserve_optimizer = false;
  bool quiet = false;
};

io::ExperimentConfig resolve(const Flags& f) {
  io::ExperimentConfig cfg = f.config.empty() ? io::ExperimentConfig{} : io::load_config(f.config);
  if (!f.out.empty()) cfg.out_dir = f.out;
  if (f.seed) cfg.sampling.seed = *f.seed;
  if (f.weight_mode) cfg.weight_mode = pinn::weight_mode_from_string(*f.weight_mode);
  if (f.nt) cfg.fdm_nt = *f.nt;
  if (f.nx) cfg.fdm_nx = *f.nx;
  cfg.validate();
  return cfg;
}

void print_report(const char* label, const metrics::ErrorReport& r) {
  std::cout << label << ": relative_l2=" << io::format_double(r.relative_l2)
            << " max_abs_error=" << io::format_double(r.max_abs_error) << " at (t=" << r.argmax_t
            << ", x=" << r.argmax_x << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fisher-KPP solver: physics-informed network training and finite differences"};
  app.require_subcommand(1);
  Flags f;

  const auto common = [&f](CLI::App* cmd) {
    cmd->add_option("--config", f.config, "JSON experiment config")->check(CLI::ExistingFile);
    cmd->add_option("--out", f.out, "output directory (default: config out_dir)");
  };
  const auto training = [&f](CLI::App* cmd) {
    cmd->add_option("--seed", f.seed, "seed for initialization and sampling");
    cmd->add_option("--iterations", f.iterations, "optimizer steps")->check(CLI::NonNegativeNumber);
    cmd->add_option("--lr", f.lr, "learning rate")->check(CLI::PositiveNumber);
    cmd->add_option("--weight-mode", f.weight_mode, "adaptive or fixed")
        ->check(CLI::IsMember({"adaptive", "fixed"}));
    cmd->add_flag("--quiet", f.quiet, "no progress output");
  };
  const auto grid = [&f](CLI::App* cmd) {
    cmd->add_option("--nt", f.nt, "time steps")->check(CLI::PositiveNumber);
    cmd->add_option("--nx", f.nx, "spatial nodes")->check(CLI::Range(3, 1 << 24));
  };

  CLI::App* train = app.add_subcommand("train", "train a network from Xavier initialization");
  common(train);
  training(train);

  CLI::App* retrain = app.add_subcommand("retrain", "continue training from a checkpoint at constant lr");
  common(retrain);
  training(retrain);
  retrain->add_option("--checkpoint", f.checkpoint, "checkpoint.json to start from")
      ->required()
      ->check(CLI::ExistingFile);
  retrain->add_option("--phases", f.phases, "consecutive retraining phases")->check(CLI::PositiveNumber);
  retrain->add_flag("--preserve-optimizer", f.preserve_optimizer, "keep Adam moments instead of resetting them");

  CLI::App* fdm = app.add_subcommand("fdm", "explicit finite-difference reference solution");
  common(fdm);
  grid(fdm);

  CLI::App* compare = app.add_subcommand("compare", "three-way error comparison: exact, FDM, network");
  common(compare);
  grid(compare);
  compare->add_option("--checkpoint", f.checkpoint, "trained checkpoint.json")
      ->required()
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    io::ExperimentConfig cfg = resolve(f);
    cli::RunOptions run;
    if (!f.quiet) run.log = &std::cerr;

    if (train->parsed()) {
      if (f.iterations) cfg.iterations = *f.iterations;
      if (f.lr) cfg.schedule.initial_lr = *f.lr;
      cfg.validate();
      const auto result = cli::cmd_train(cfg, cfg.out_dir, run);
      print_report("network vs exact at t_max", result.final_time);
    } else if (retrain->parsed()) {
      cli::RetrainOptions opts;
      opts.lr = f.lr.value_or(cfg.retrain_lr);
      opts.iterations = f.iterations.value_or(cfg.retrain_iterations);
      opts.phases = f.phases.value_or(cfg.retrain_phases);
      opts.preserve_optimizer = f.preserve_optimizer;
      cfg.retrain_lr = opts.lr;
      cfg.retrain_iterations = opts.iterations;
      cfg.retrain_phases = opts.phases;
      const auto result = cli::cmd_retrain(f.checkpoint, cfg, opts, cfg.out_dir, run);
      std::cout << "before retraining: relative_l2=" << io::format_double(result.initial_error) << "\n";
      for (std::size_t i = 0; i < result.phase_errors.size(); ++i) {
        std::cout << "after phase " << i + 1 << ": relative_l2=" << io::format_double(result.phase_errors[i]) << "\n";
      }
    } else if (fdm->parsed()) {
      print_report("FDM vs exact at t_max", cli::cmd_fdm(cfg, cfg.out_dir));
    } else if (compare->parsed()) {
      const auto result = cli::cmd_compare(f.checkpoint, cfg, cfg.out_dir);
      print_report("FDM vs exact", result.final_time.fdm_vs_exact);
      print_report("network vs exact", result.final_time.pinn_vs_exact);
      print_report("network vs FDM", result.final_time.pinn_vs_fdm);
    }
    std::cout << "wrote " << cfg.out_dir << "\n";
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
