#include <gtest/gtest.h>

#include <sstream>

#include "tiprel/config.hpp"
#include "tiprel/errors.hpp"

using namespace tiprel;

namespace {

KeyValues parse(const std::string& text) {
  std::istringstream in(text);
  return parse_key_values(in);
}

void expect_usage_error(ExperimentConfig cfg, const KeyValues& kv, const std::string& key) {
  try {
    cfg.apply(kv);
    cfg.validate();
    FAIL() << "expected UsageError for " << key;
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find(key), std::string::npos) << e.what();
  }
}

}  // namespace

TEST(KeyValueText, Syntax) {
  const KeyValues kv = parse("# comment\n\n  potential = logistic  # trailing\nsteps=5\r\nsteps = 7\nsweep.h = 1e-3, 1e-2\n");
  EXPECT_EQ(kv.size(), 3u);
  EXPECT_EQ(kv.at("potential"), "logistic");
  EXPECT_EQ(kv.at("steps"), "7");
  EXPECT_EQ(kv.at("sweep.h"), "1e-3, 1e-2");
  EXPECT_THROW(parse("steps 5\n"), ParseError);
  EXPECT_THROW(parse(" = 5\n"), ParseError);
  EXPECT_THROW(load_key_values("/nonexistent/config"), UsageError);
}

TEST(ExperimentConfig, ApplyParsesEveryKind) {
  ExperimentConfig cfg;
  cfg.apply(parse(
      "potential = quadratic\nquadratic.precision = 2, 0.5, 0.5, 3\nquadratic.mean = 1,-1\n"
      "precond = curvature\nprecond.epsilon = 0.1\nprecond.clamp = false\nsteps = 12\nlogistic.standardize = yes\n"
      "metrics = w2, diverged\nschedule = decay\nschedule.gamma = 0.75\n"));
  cfg.validate();
  EXPECT_EQ(cfg.potential, "quadratic");
  EXPECT_EQ(cfg.quadratic_precision, (std::vector<double>{2, 0.5, 0.5, 3}));
  EXPECT_EQ(cfg.quadratic_mean, (std::vector<double>{1, -1}));
  EXPECT_EQ(cfg.precond_epsilon, 0.1);
  EXPECT_FALSE(cfg.precond_clamp);
  EXPECT_TRUE(cfg.logistic_standardize);
  EXPECT_EQ(cfg.steps, 12);
  EXPECT_EQ(cfg.metrics, (std::vector<std::string>{"w2", "diverged"}));
  EXPECT_EQ(cfg.schedule_gamma, 0.75);
  EXPECT_EQ(cfg.ground_truth, "exact");
}

TEST(ExperimentConfig, GroundTruthAutoResolution) {
  for (auto [pot, gt] : {std::pair{"rosenbrock", "ancestral"}, {"quadratic", "exact"}, {"logistic", "mala"}}) {
    ExperimentConfig cfg;
    cfg.potential = pot;
    cfg.validate();
    EXPECT_EQ(cfg.ground_truth, gt);
  }
}

TEST(ExperimentConfig, ErrorsNameTheField) {
  const ExperimentConfig base;
  expect_usage_error(base, {{"no_such_key", "1"}}, "no_such_key");
  expect_usage_error(base, {{"steps", "ten"}}, "steps");
  expect_usage_error(base, {{"steps", "3.5"}}, "steps");
  expect_usage_error(base, {{"schedule.h", "0"}}, "schedule.h");
  expect_usage_error(base, {{"schedule.h", "-1e-3"}}, "schedule.h");
  expect_usage_error(base, {{"schedule", "decay"}, {"schedule.gamma", "0.5"}}, "schedule.gamma");
  expect_usage_error(base, {{"schedule", "decay"}, {"schedule.gamma", "1.5"}}, "schedule.gamma");
  expect_usage_error(base, {{"chains", "0"}}, "chains");
  expect_usage_error(base, {{"precond", "magic"}}, "precond");
  expect_usage_error(base, {{"precond.c", "-2"}}, "precond.c");
  expect_usage_error(base, {{"precond.clamp", "maybe"}}, "precond.clamp");
  expect_usage_error(base, {{"potential", "logistic"}, {"ground_truth", "ancestral"}}, "ground_truth");
  expect_usage_error(base, {{"potential", "quadratic"}, {"quadratic.precision", "1,2,3"}}, "quadratic.precision");
  expect_usage_error(base, {{"mala.target_accept", "1"}}, "mala.target_accept");

  ExperimentConfig frozen;
  frozen.schedule_h = 0.0;
  EXPECT_NO_THROW(frozen.validate(/*allow_zero_step=*/true));
  EXPECT_THROW(frozen.validate(), UsageError);
}

TEST(ExperimentConfig, TextRoundTrip) {
  ExperimentConfig cfg;
  cfg.apply({{"potential", "logistic"}, {"precond.epsilon", "0.30000000000000004"}, {"sweep.h", "1e-4,0.1"},
             {"ground_truth.path", "/tmp/x.csv"}, {"precond.c", "0.5"}});
  cfg.validate();
  const std::string text = cfg.to_text();
  ExperimentConfig back;
  back.apply(parse(text));
  EXPECT_EQ(back.to_text(), text);
  EXPECT_EQ(back.precond_epsilon, 0.1 + 0.2);
  EXPECT_EQ(back.ground_truth, "mala");

  // Every key appears, each on its own line, sorted.
  std::istringstream lines(text);
  std::vector<std::string> seen;
  for (std::string line; std::getline(lines, line);) seen.push_back(line.substr(0, line.find(" = ")));
  auto keys = ExperimentConfig::keys();
  std::sort(keys.begin(), keys.end());
  EXPECT_EQ(seen, keys);
}

TEST(ExperimentConfig, EmptyListsAndValues) {
  ExperimentConfig cfg;
  cfg.apply({{"ground_truth.path", ""}, {"metrics", ""}});
  EXPECT_TRUE(cfg.metrics.empty());
  EXPECT_TRUE(cfg.ground_truth_path.empty());
  const std::string text = cfg.to_text();
  ExperimentConfig back;
  back.apply(parse(text));
  EXPECT_EQ(back.to_text(), text);
}
