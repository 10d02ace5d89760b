#include <cstdlib>
#include <filesystem>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include <gtest/gtest.h>

#include "fisher_pinn/experiment.hpp"

namespace fs = std::filesystem;
using namespace fisher_pinn;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(FISHER_PINN_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("fisher_pinn_cli_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    io::ExperimentConfig c;
    c.architecture.hidden_layers = 2;
    c.architecture.hidden_width = 5;
    c.sampling.n_collocation = 32;
    c.sampling.n_ic = 8;
    c.sampling.n_bc_per_side = 4;
    c.iterations = 3;
    c.retrain_iterations = 2;
    c.eval_nt = 6;
    c.eval_nx = 11;
    io::write_text(dir_ / "tiny.json", io::config_to_json(c));
  }
  void TearDown() override { fs::remove_all(dir_); }

  [[nodiscard]] std::string cfg() const { return "--config " + (dir_ / "tiny.json").string(); }
  [[nodiscard]] std::string out(const char* name) const { return "--out " + (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("frobnicate"), 1);
  EXPECT_EQ(run("train --weight-mode sometimes " + cfg()), 1);
  EXPECT_EQ(run("compare " + cfg()), 1);  // --checkpoint is required
  EXPECT_EQ(run("train --config " + (dir_ / "absent.json").string()), 1);
}

TEST_F(Cli, TrainRetrainCompare) {
  ASSERT_EQ(run("train --quiet --seed 2 " + cfg() + " " + out("t")), 0);
  EXPECT_TRUE(fs::exists(dir_ / "t" / "checkpoint.json"));
  const std::string ck = "--checkpoint " + (dir_ / "t" / "checkpoint.json").string();
  EXPECT_EQ(run("retrain --quiet --phases 2 " + ck + " " + cfg() + " " + out("r")), 0);
  EXPECT_TRUE(fs::exists(dir_ / "r" / "retrain_report.json"));
  EXPECT_EQ(run("retrain --quiet --preserve-optimizer " + ck + " " + cfg() + " " + out("p")), 0);
  EXPECT_EQ(run("compare " + ck + " " + cfg() + " " + out("c")), 0);
  EXPECT_TRUE(fs::exists(dir_ / "c" / "comparison.json"));
}

TEST_F(Cli, BadConfigContentIsConfigError) {
  io::write_text(dir_ / "bad.json", R"({"fdm": {"nx": 201, "bogus": 1}})");
  EXPECT_EQ(run("fdm --config " + (dir_ / "bad.json").string() + " " + out("f")), 1);
}

TEST_F(Cli, UnstableGridIsNumericalError) {
  EXPECT_EQ(run("fdm --nt 500 " + out("f")), 2);
  EXPECT_EQ(run("fdm --nt 800 " + out("f")), 0);
  EXPECT_TRUE(fs::exists(dir_ / "f" / "fdm_grid.csv"));
}
