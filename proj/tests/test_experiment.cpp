#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tiprel/data.hpp"
#include "tiprel/errors.hpp"
#include "tiprel/experiment.hpp"

using namespace tiprel;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tiprel_test_exp_" + name);
  fs::remove_all(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(TIPREL_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_table(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

const std::string kQuadratic =
    "--potential quadratic --quadratic.precision 2,0.5,0.5,1 --quadratic.mean 1,-1 --chains 64 "
    "--ground_truth.n 500 --schedule.h 0.05";

}  // namespace

TEST(Build, Potentials) {
  ExperimentConfig cfg;
  cfg.potential = "quadratic";
  cfg.quadratic_precision = {2.0, 3.0};
  cfg.quadratic_mean = {0.0, 1.0};
  cfg.validate();
  PotentialPtr q = build_potential(cfg);
  EXPECT_EQ(q->dim(), 2u);
  EXPECT_DOUBLE_EQ(q->value(Eigen::Vector2d(1.0, 1.0)), 1.0);
  EXPECT_DOUBLE_EQ(default_constant_scale(*q), 1.0 / 3.0);

  cfg.potential = "logistic";
  cfg.ground_truth = "auto";
  cfg.logistic_n = 20;
  cfg.logistic_d = 3;
  cfg.validate();
  PotentialPtr l = build_potential(cfg);
  EXPECT_EQ(l->dim(), 3u);

  cfg.logistic_data = std::string(TIPREL_DATA_DIR) + "/processed.cleveland.data";
  EXPECT_EQ(build_potential(cfg)->dim(), 13u);
  cfg.logistic_data = "/nonexistent/heart.csv";
  EXPECT_THROW(build_potential(cfg), Error);
}

TEST(Build, GroundTruthAndPreconditioners) {
  ExperimentConfig cfg;
  cfg.potential = "quadratic";
  cfg.quadratic_precision = {4.0, 1.0};
  cfg.quadratic_mean = {1.0, 2.0};
  cfg.ground_truth_n = 4000;
  cfg.validate();
  const PotentialPtr pot = build_potential(cfg);
  const GroundTruth gt = build_ground_truth(cfg, *pot);
  EXPECT_EQ(gt.samples.size(), 4000u);
  EXPECT_EQ(gt.mean, Vector(Eigen::Vector2d(1.0, 2.0)));
  EXPECT_NEAR(gt.samples.samples.col(0).mean(), 1.0, 5 * 0.5 / std::sqrt(4000.0));

  const PreconditionerPtr fisher = build_preconditioner(cfg, "fisher", pot, gt);
  const SymMatrix b = fisher->evaluate(0.0, Eigen::Vector2d(0, 0)).matrix;
  EXPECT_NEAR(b(0, 0), 0.25, 1e-14);
  EXPECT_NEAR(b(1, 1), 1.0, 1e-14);

  const PreconditionerPtr cov = build_preconditioner(cfg, "covariance", pot, gt);
  EXPECT_NEAR(cov->evaluate(0.0, Eigen::Vector2d(0, 0)).matrix(0, 0), 0.25, 0.02);

  const PreconditionerPtr constant = build_preconditioner(cfg, "constant", pot, gt);
  EXPECT_DOUBLE_EQ(constant->evaluate(0.0, Eigen::Vector2d(0, 0)).matrix(0, 0), 0.25);
  cfg.precond_c = "0.7";
  EXPECT_DOUBLE_EQ(build_preconditioner(cfg, "constant", pot, gt)->evaluate(0.0, Eigen::Vector2d(0, 0)).matrix(1, 1), 0.7);

  ExperimentConfig none = cfg;
  none.ground_truth = "none";
  none.validate();
  EXPECT_TRUE(build_ground_truth(none, *pot).empty());
  EXPECT_THROW(build_preconditioner(none, "covariance", pot, GroundTruth{}), UsageError);
}

TEST(Build, GroundTruthFromFile) {
  const fs::path dir = fresh_dir("gtfile");
  fs::create_directories(dir);
  const RowMatrix rows = (RowMatrix(3, 2) << 1, 2, 3, 4, 5, 6).finished();
  save_samples(make_sample_set(rows), (dir / "gt.csv").string());
  ExperimentConfig cfg;
  cfg.ground_truth = "file";
  cfg.ground_truth_path = (dir / "gt.csv").string();
  cfg.validate();
  const PotentialPtr pot = build_potential(cfg);
  const GroundTruth gt = build_ground_truth(cfg, *pot);
  EXPECT_TRUE(gt.samples.samples == rows);
  EXPECT_EQ(gt.mean, Vector(Eigen::Vector2d(3, 4)));

  cfg.potential = "quadratic";
  cfg.quadratic_precision = {1, 1, 1};
  cfg.quadratic_mean = {0, 0, 0};
  EXPECT_THROW(build_ground_truth(cfg, *build_potential(cfg)), Error);
  fs::remove_all(dir);
}

TEST(Build, InitAndPlan) {
  ExperimentConfig cfg;
  cfg.init = "dirac";
  cfg.init_point = {50.0};
  cfg.validate();
  const InitSpec d = build_init(cfg, 2, GroundTruth{});
  EXPECT_EQ(initialize(d, 1, 0).positions(0, 1), 50.0);
  cfg.init_point = {1.0, 2.0, 3.0};
  EXPECT_THROW(build_init(cfg, 2, GroundTruth{}), UsageError);

  cfg.steps = 10;
  cfg.record = "every";
  cfg.record_stride = 4;
  EXPECT_EQ(build_plan(cfg).steps, (std::vector<std::int64_t>{0, 4, 8, 10}));
}

TEST(Cli, SampleWritesReparseableOutputs) {
  const fs::path dir = fresh_dir("sample");
  ASSERT_EQ(run_cli("sample " + kQuadratic + " --steps 40 --out " + dir.string()), 0);
  const SampleSet s = load_samples((dir / "samples.csv").string());
  EXPECT_EQ(s.size(), 64u);
  EXPECT_EQ(s.dim(), 2u);
  EXPECT_EQ(s.steps, std::vector<std::int64_t>(64, 40));
  const MetricsSeries m = MetricsSeries::load((dir / "metrics.csv").string());
  EXPECT_EQ(m.metric("w2_avg").front().step, 0);
  EXPECT_EQ(m.metric("w2_avg").back().step, 40);
  EXPECT_EQ(*m.last("diverged"), 0.0);
  EXPECT_TRUE(m.last("mean_sq_error").has_value());

  // The echo reproduces the run on its own.
  const fs::path again = fresh_dir("sample_again");
  ASSERT_EQ(run_cli("sample --config " + (dir / "resolved_config").string() + " --out " + again.string()), 0);
  EXPECT_EQ(slurp(dir / "samples.csv"), slurp(again / "samples.csv"));
  EXPECT_EQ(slurp(dir / "metrics.csv"), slurp(again / "metrics.csv"));
  fs::remove_all(dir);
  fs::remove_all(again);
}

TEST(Cli, ZeroStepsRecordsOnlyStepZero) {
  const fs::path dir = fresh_dir("k0");
  ASSERT_EQ(run_cli("sample " + kQuadratic + " --steps 0 --out " + dir.string()), 0);
  const MetricsSeries m = MetricsSeries::load((dir / "metrics.csv").string());
  ASSERT_FALSE(m.records().empty());
  for (const auto& r : m.records()) EXPECT_EQ(r.step, 0);
  fs::remove_all(dir);
}

TEST(Cli, RerunsAreByteIdenticalAcrossWorkerCounts) {
  const std::string args = "sample --precond curvature --precond.epsilon 1e-2 --chains 200 --steps 100 "
                           "--ground_truth.n 1000 --schedule.h 6e-3 --seed 5";
  std::vector<fs::path> dirs;
  for (int w : {1, 3, 1}) {
    dirs.push_back(fresh_dir("rerun" + std::to_string(dirs.size())));
    ASSERT_EQ(run_cli("--workers " + std::to_string(w) + " " + args + " --out " + dirs.back().string()), 0);
  }
  for (const char* f : {"samples.csv", "metrics.csv"}) {
    EXPECT_EQ(slurp(dirs[0] / f), slurp(dirs[1] / f)) << f;
    EXPECT_EQ(slurp(dirs[0] / f), slurp(dirs[2] / f)) << f;
  }
  // resolved_config differs only in the out line.
  auto without_out = [](std::string text) {
    const auto at = text.find("\nout = ");
    return text.erase(at, text.find('\n', at + 1) - at);
  };
  EXPECT_EQ(without_out(slurp(dirs[0] / "resolved_config")), without_out(slurp(dirs[1] / "resolved_config")));
  const fs::path other = fresh_dir("rerun_seed");
  ASSERT_EQ(run_cli(args + " --seed 6 --out " + other.string()), 0);
  EXPECT_NE(slurp(dirs[0] / "samples.csv"), slurp(other / "samples.csv"));
  for (const auto& d : dirs) fs::remove_all(d);
  fs::remove_all(other);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = fresh_dir("codes");
  EXPECT_EQ(run_cli("sample --no_such_key 1 --out " + dir.string()), 2);
  EXPECT_EQ(run_cli("sample --steps abc --out " + dir.string()), 2);
  EXPECT_EQ(run_cli("sample --schedule.h 0 --out " + dir.string()), 2);
  EXPECT_EQ(run_cli("sample --config /nonexistent/cfg --out " + dir.string()), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_EQ(run_cli(""), 2);
  EXPECT_EQ(run_cli("--help"), 0);
  // sqrt(2h) overflows: every chain turns non-finite on the first step.
  EXPECT_EQ(run_cli("sample --schedule.h 1e308 --steps 3 --chains 20 --ground_truth.n 100 --out " + dir.string()), 3);
  EXPECT_EQ(run_cli("sample --potential logistic --logistic.data /nonexistent.csv --out " + dir.string()), 3);
  fs::remove_all(dir);
}

TEST(Cli, SweepGridAndFailedCell) {
  const fs::path dir = fresh_dir("sweep");
  EXPECT_EQ(run_cli("sweep " + kQuadratic + " --steps 20 --sweep.h 1e-3 --out " + dir.string()), 2);
  ASSERT_EQ(run_cli("sweep " + kQuadratic + " --steps 20 --sweep.h 1e-3,1e308 --sweep.preconds constant,curvature "
                    "--out " + dir.string()),
            0);
  const auto rows = read_table(dir / "sweep.csv");
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"preconditioner", "h", "final_metric"}));
  EXPECT_EQ(rows[1][0], "constant");
  EXPECT_EQ(rows[1][1], "0.001");
  EXPECT_GT(std::stod(rows[1][2]), 0.0);
  EXPECT_EQ(rows[2][1], "1e+308");
  EXPECT_EQ(rows[2][2], "");
  EXPECT_EQ(rows[3][0], "curvature");
  EXPECT_EQ(rows[4][2], "");
  fs::remove_all(dir);
}

TEST(Cli, FrozenAcfIsOne) {
  const fs::path dir = fresh_dir("acf");
  ASSERT_EQ(run_cli("acf --schedule.h 0 --steps 6 --acf.max_lag 4 --chains 50 --ground_truth.n 500 --out " +
                    dir.string()),
            0);
  const auto rows = read_table(dir / "acf.csv");
  EXPECT_EQ(rows[0], (std::vector<std::string>{"preconditioner", "lag", "coordinate", "correlation"}));
  std::size_t checked = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    ASSERT_EQ(rows[i].size(), 4u);
    EXPECT_NEAR(std::stod(rows[i][3]), 1.0, 1e-12) << i;
    ++checked;
  }
  // 2 preconditioners x 5 lags x (2 coordinates + average)
  EXPECT_EQ(checked, 30u);
  EXPECT_EQ(run_cli("acf --steps 4 --acf.max_lag 4 --out " + dir.string()), 2);
  fs::remove_all(dir);
}

TEST(Cli, ReferenceOnQuadratic) {
  const fs::path dir = fresh_dir("reference");
  const std::string args = "reference " + kQuadratic + " --mala.chains 400 --mala.iters 200 --out ";
  ASSERT_EQ(run_cli(args + dir.string()), 0);
  const Matrix mean = load_matrix((dir / "reference_mean.csv").string());
  const SampleSet s = load_samples((dir / "reference_samples.csv").string());
  ASSERT_EQ(s.size(), 400u);
  // Covariance is inverse([[2, .5], [.5, 1]]) = [[4, -2], [-2, 8]] / 7.
  EXPECT_NEAR(mean(0, 0), 1.0, 3 * std::sqrt(4.0 / 7.0 / 400));
  EXPECT_NEAR(mean(0, 1), -1.0, 3 * std::sqrt(8.0 / 7.0 / 400));
  const Matrix fisher = load_matrix((dir / "reference_fisher_inv.csv").string());
  EXPECT_NEAR(fisher(0, 0), 4.0 / 7.0, 1e-12);
  EXPECT_NEAR(fisher(0, 1), -2.0 / 7.0, 1e-12);
  const Matrix cov = load_matrix((dir / "reference_cov.csv").string());
  EXPECT_NEAR(cov(1, 1), 8.0 / 7.0, 0.25);
  const auto info = read_table(dir / "reference_info.csv");
  ASSERT_GE(info.size(), 4u);
  EXPECT_EQ(info[2][0], "tune_acceptance");
  EXPECT_NEAR(std::stod(info[2][1]), 0.5, 0.05);

  const fs::path again = fresh_dir("reference_again");
  ASSERT_EQ(run_cli(args + again.string()), 0);
  for (const char* f : {"reference_samples.csv", "reference_mean.csv", "reference_cov.csv",
                        "reference_fisher_inv.csv", "reference_info.csv"}) {
    EXPECT_EQ(slurp(dir / f), slurp(again / f)) << f;
  }
  fs::remove_all(dir);
  fs::remove_all(again);
}
