#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

#include <gtest/gtest.h>

#include "fisher_pinn/commands.hpp"
#include "fisher_pinn/errors.hpp"
#include "fisher_pinn/experiment.hpp"
#include "json.hpp"

using namespace fisher_pinn;
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("fisher_pinn_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  [[nodiscard]] const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

io::ExperimentConfig tiny_config() {
  io::ExperimentConfig c;
  c.architecture.hidden_layers = 2;
  c.architecture.hidden_width = 6;
  c.sampling.n_collocation = 64;
  c.sampling.n_ic = 16;
  c.sampling.n_bc_per_side = 8;
  c.sampling.seed = 4;
  c.iterations = 12;
  c.eval_nt = 11;
  c.eval_nx = 21;
  return c;
}

json without_metadata(const std::string& text) {
  json j = json::parse(text);
  j.erase("metadata");
  return j;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Config, RoundTrip) {
  io::ExperimentConfig c = tiny_config();
  c.weight_mode = pinn::WeightMode::Fixed;
  c.schedule.initial_lr = 3e-4;
  c.sampling.resample_collocation = false;
  c.retrain_phases = 3;
  const std::string text = io::config_to_json(c);
  const io::ExperimentConfig back = io::config_from_json(text);
  EXPECT_EQ(io::config_to_json(back), text);
  EXPECT_EQ(back.weight_mode, pinn::WeightMode::Fixed);
  EXPECT_EQ(back.architecture, c.architecture);
  EXPECT_EQ(back.schedule.initial_lr, 3e-4);
}

TEST(Config, MissingKeysKeepDefaults) {
  const io::ExperimentConfig c = io::config_from_json(R"({"training": {"iterations": 7}})");
  EXPECT_EQ(c.iterations, 7);
  EXPECT_EQ(c.fdm_nt, 1600u);
  EXPECT_EQ(c.problem.pde.diffusion, 0.01);
  EXPECT_EQ(c.architecture.hidden_width, 50);
  EXPECT_EQ(c.sampling.n_collocation, 10000u);
}

TEST(Config, RejectsUnknownKeysAndWrongTypes) {
  try {
    (void)io::config_from_json(R"({"pde": {"difusion": 0.02}})");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("pde.difusion"), std::string::npos);
  }
  EXPECT_THROW((void)io::config_from_json(R"({"fdm": {"nt": "many"}})"), ConfigError);
  EXPECT_THROW((void)io::config_from_json(R"({"fdm": {"nt": 2.5}})"), ConfigError);
  EXPECT_THROW((void)io::config_from_json(R"({"training": {"weight_mode": "often"}})"), ConfigError);
  EXPECT_THROW((void)io::config_from_json(R"({"pde": {"diffusion": -1}})"), ConfigError);
  EXPECT_THROW((void)io::config_from_json("{not json"), ConfigError);
  EXPECT_THROW((void)io::load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Checkpoint, SaveLoadSaveIsByteIdentical) {
  TempDir dir;
  const Architecture a = tiny_config().architecture;
  pinn::TrainState s = pinn::TrainState::fresh(xavier_init(a, 3), pinn::LossWeights{});
  s.adam.m.setConstant(1.0 / 3.0);
  s.adam.v.setConstant(2.0 / 7.0);
  s.adam.step_count = 41;
  s.iteration = 41;
  s.weights.w_ic = 123.456789;
  const io::Checkpoint c = io::Checkpoint::from_state(s, 9);
  io::save_checkpoint(c, dir.path() / "a.json");
  const io::Checkpoint back = io::load_checkpoint(dir.path() / "a.json");
  io::save_checkpoint(back, dir.path() / "b.json");
  EXPECT_EQ(io::read_text(dir.path() / "a.json"), io::read_text(dir.path() / "b.json"));
  EXPECT_EQ(back.params, c.params);
  ASSERT_TRUE(back.adam.has_value());
  EXPECT_EQ(*back.adam, s.adam);
  EXPECT_EQ(back.weights, s.weights);
  EXPECT_EQ(back.seed, 9u);
  const pinn::TrainState restored = back.to_state();
  EXPECT_EQ(restored.iteration, 41);
  EXPECT_TRUE(restored.history.empty());
}

TEST(Checkpoint, NullOptimizerState) {
  io::Checkpoint c;
  c.params = xavier_init(tiny_config().architecture, 1);
  const io::Checkpoint back = io::checkpoint_from_json(io::checkpoint_to_json(c));
  EXPECT_FALSE(back.adam.has_value());
  EXPECT_EQ(back.params, c.params);
}

TEST(Checkpoint, Validation) {
  io::Checkpoint c;
  c.params = xavier_init(tiny_config().architecture, 1);
  json j = json::parse(io::checkpoint_to_json(c));

  json bad_version = j;
  bad_version["format_version"] = 99;
  try {
    (void)io::checkpoint_from_json(bad_version.dump());
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("99"), std::string::npos);
  }

  json short_params = j;
  short_params["parameters"].erase(0);
  EXPECT_THROW((void)io::checkpoint_from_json(short_params.dump()), ConfigError);

  json missing = j;
  missing.erase("iteration");
  EXPECT_THROW((void)io::checkpoint_from_json(missing.dump()), ConfigError);

  json other_arch = j;
  other_arch["architecture"]["hidden_width"] = 7;
  EXPECT_THROW((void)io::checkpoint_from_json(other_arch.dump()), ConfigError);
}

TEST(Csv, GridFormat) {
  Matrix v(2, 2);
  v << 0.1, 0.2, 1.0 / 3.0, 1e-300;
  const std::vector<double> ts = {0.0, 1.0};
  const std::vector<double> xs = {0.0, 0.5};
  const std::string s = io::grid_csv(v, ts, xs);
  EXPECT_EQ(s, "t,0,0.5\n0,0.10000000000000001,0.20000000000000001\n1,0.33333333333333331,1e-300\n");
  EXPECT_EQ(s.find('\r'), std::string::npos);
  EXPECT_THROW((void)io::grid_csv(v, xs, std::vector<double>{0.0}), ConfigError);
  EXPECT_EQ(std::stod(io::format_double(0.1)), 0.1);
}

TEST(Csv, HistoryStrideKeepsLastEntry) {
  std::vector<pinn::HistoryEntry> h(25);
  for (std::size_t i = 0; i < h.size(); ++i) h[i].iteration = static_cast<std::int64_t>(i);
  const std::string s = io::history_csv(h);
  EXPECT_EQ(s.substr(0, s.find('\n')), "iteration,lr,L,L_IC,L_BC,L_Res,w_ic,w_bc");
  EXPECT_EQ(count_lines(s), 1u + 4u);  // 0, 10, 20, 24
  EXPECT_NE(s.find("\n24,"), std::string::npos);
  EXPECT_EQ(count_lines(io::history_csv(h, 1)), 26u);
  EXPECT_THROW((void)io::history_csv(h, 0), ConfigError);
}

TEST(Linspace, EndpointsAndSpacing) {
  const auto v = io::linspace(0.0, 1.0, 201);
  EXPECT_EQ(v.front(), 0.0);
  EXPECT_EQ(v.back(), 1.0);
  EXPECT_EQ(v[100], 100 * 0.005);
  const fdm::Grid g = fdm::Grid::uniform(Domain{}, 201, 1600);
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v[i], g.x(Domain{}, i));
}

TEST(Commands, TrainWithZeroIterationsWritesInitialState) {
  TempDir dir;
  io::ExperimentConfig c = tiny_config();
  c.iterations = 0;
  const cli::TrainResult r = cli::cmd_train(c, dir.path());
  const io::Checkpoint ck = io::load_checkpoint(dir.path() / "checkpoint.json");
  EXPECT_EQ(ck.params, xavier_init(c.architecture, c.sampling.seed));
  EXPECT_EQ(ck.iteration, 0);
  for (const char* f : {"checkpoint.json", "loss_history.csv", "pinn_grid.csv", "report.json", "config.json"}) {
    EXPECT_TRUE(fs::exists(dir.path() / f)) << f;
  }
  EXPECT_EQ(count_lines(io::read_text(dir.path() / "pinn_grid.csv")), c.eval_nt + 1);
  const json report = json::parse(io::read_text(dir.path() / "report.json"));
  EXPECT_EQ(report["relative_l2"].get<double>(), r.final_time.relative_l2);
  EXPECT_EQ(report["n_points"].get<std::size_t>(), c.fdm_nx);
  EXPECT_EQ(io::load_config(dir.path() / "config.json").architecture, c.architecture);
}

TEST(Commands, TrainIsByteDeterministic) {
  TempDir a;
  TempDir b;
  const io::ExperimentConfig c = tiny_config();
  (void)cli::cmd_train(c, a.path());
  (void)cli::cmd_train(c, b.path());
  for (const char* f : {"loss_history.csv", "pinn_grid.csv", "config.json"}) {
    EXPECT_EQ(io::read_text(a.path() / f), io::read_text(b.path() / f)) << f;
  }
  for (const char* f : {"checkpoint.json", "report.json"}) {
    EXPECT_EQ(without_metadata(io::read_text(a.path() / f)), without_metadata(io::read_text(b.path() / f))) << f;
  }
}

TEST(Commands, FdmArtifactsAndCfl) {
  TempDir dir;
  io::ExperimentConfig c;
  c.fdm_nt = 800;
  const metrics::ErrorReport r = cli::cmd_fdm(c, dir.path());
  EXPECT_EQ(r.n_points, 201u);
  const std::string grid = io::read_text(dir.path() / "fdm_grid.csv");
  EXPECT_EQ(count_lines(grid), 802u);
  EXPECT_EQ(std::count(grid.begin(), grid.begin() + static_cast<std::ptrdiff_t>(grid.find('\n')), ','), 201);
  const json report = json::parse(io::read_text(dir.path() / "report.json"));
  EXPECT_EQ(report["cfl_limit"].get<double>(), 0.00125);
  c.fdm_nt = 500;
  EXPECT_THROW((void)cli::cmd_fdm(c, dir.path()), fdm::CflViolation);
}

TEST(Commands, RetrainChecks) {
  TempDir dir;
  io::ExperimentConfig c = tiny_config();
  io::Checkpoint no_adam;
  no_adam.params = xavier_init(c.architecture, 0);
  io::save_checkpoint(no_adam, dir.path() / "plain.json");
  cli::RetrainOptions opts;
  opts.iterations = 3;
  opts.preserve_optimizer = true;
  EXPECT_THROW((void)cli::cmd_retrain(dir.path() / "plain.json", c, opts, dir.path() / "out"), ConfigError);

  io::ExperimentConfig wider = c;
  wider.architecture.hidden_width = 7;
  opts.preserve_optimizer = false;
  EXPECT_THROW((void)cli::cmd_retrain(dir.path() / "plain.json", wider, opts, dir.path() / "out"), ConfigError);

  opts.phases = 2;
  const cli::RetrainResult r = cli::cmd_retrain(dir.path() / "plain.json", c, opts, dir.path() / "out");
  EXPECT_EQ(r.phase_errors.size(), 2u);
  EXPECT_EQ(r.state.iteration, 6);
  const json report = json::parse(io::read_text(dir.path() / "out" / "retrain_report.json"));
  EXPECT_EQ(report["mode"], "reset");
  EXPECT_EQ(report["phases"].size(), 2u);
  EXPECT_EQ(report["final_relative_l2"].get<double>(), r.phase_errors.back());
}

TEST(Commands, CompareBoundsAndFiles) {
  TempDir dir;
  io::ExperimentConfig c = tiny_config();
  c.iterations = 5;
  (void)cli::cmd_train(c, dir.path() / "train");
  const cli::CompareResult r = cli::cmd_compare(dir.path() / "train" / "checkpoint.json", c, dir.path() / "cmp");
  for (const auto* cmp : {&r.final_time, &r.field}) {
    EXPECT_GE(cmp->fdm_vs_exact.relative_l2, 0.0);
    EXPECT_GE(cmp->pinn_vs_exact.max_abs_error, 0.0);
    // Pointwise triangle inequality on the largest deviation.
    EXPECT_LE(cmp->pinn_vs_exact.max_abs_error,
              cmp->pinn_vs_fdm.max_abs_error + cmp->fdm_vs_exact.max_abs_error + 1e-15);
  }
  EXPECT_EQ(r.final_time.fdm_vs_exact.n_points, 201u);
  EXPECT_NEAR(r.final_time.fdm_vs_exact.relative_l2, 0.09784216473631907, 1e-12);
  EXPECT_EQ(r.field.fdm_vs_exact.n_points, 201u * 11u);
  for (const char* f : {"comparison.json", "error_fdm_vs_exact.csv", "error_pinn_vs_exact.csv",
                        "error_pinn_vs_fdm.csv", "config.json"}) {
    EXPECT_TRUE(fs::exists(dir.path() / "cmp" / f)) << f;
  }
  EXPECT_THROW((void)cli::cmd_compare(dir.path() / "missing.json", c, dir.path() / "cmp"), ConfigError);
}
