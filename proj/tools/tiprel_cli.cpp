// Command-line front end: tiprel <sample|sweep|reference|acf> [options]
//
// Options other than the ones declared below are read as config overrides,
// e.g. `--precond curvature --schedule.h 6e-3`.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <omp.h>

#include "CLI11.hpp"
#include "tiprel/config.hpp"
#include "tiprel/errors.hpp"
#include "tiprel/experiment.hpp"

namespace {

constexpr int kUsageError = 2;
constexpr int kRunError = 3;

tiprel::KeyValues parse_overrides(const std::vector<std::string>& extras) {
  tiprel::KeyValues kv;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& arg = extras[i];
    if (arg.rfind("--", 0) != 0 || arg.size() == 2) {
      throw tiprel::UsageError("unexpected argument '" + arg + "'");
    }
    std::string key = arg.substr(2);
    if (const auto eq = key.find('='); eq != std::string::npos) {
      kv[key.substr(0, eq)] = key.substr(eq + 1);
      continue;
    }
    if (i + 1 >= extras.size()) throw tiprel::UsageError("missing value for --" + key);
    kv[key] = extras[++i];
  }
  return kv;
}

int default_workers() {
  if (const char* env = std::getenv("TIPREL_NUM_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
    std::cerr << "ignoring TIPREL_NUM_THREADS='" << env << "'\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tamed preconditioned Langevin sampling experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out;
  std::int64_t seed = -1;
  int workers = default_workers();
  app.add_option("--config", config_path, "key = value config file");
  app.add_option("--seed", seed, "random seed (overrides the config)");
  app.add_option("--out", out, "output directory (overrides the config)");
  app.add_option("--workers", workers, "OpenMP threads (default: TIPREL_NUM_THREADS or all cores)");

  struct Command {
    const char* name;
    const char* help;
    void (*run)(tiprel::ExperimentConfig);
  };
  const Command commands[] = {
      {"sample", "run the sampler and write samples.csv and metrics.csv", tiprel::cmd_sample},
      {"sweep", "final metric over a step-size grid per preconditioner (sweep.csv)", tiprel::cmd_sweep},
      {"reference", "MALA reference samples, mean, covariance and Fisher inverse", tiprel::cmd_reference},
      {"acf", "autocorrelation of chains started in the target (acf.csv)", tiprel::cmd_acf},
  };
  std::vector<CLI::App*> subs;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->allow_extras();
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  std::size_t which = 0;
  while (!subs[which]->parsed()) ++which;

  tiprel::ExperimentConfig cfg;
  try {
    tiprel::KeyValues overrides = parse_overrides(subs[which]->remaining());
    // Global options given after the subcommand land among the extras.
    if (auto it = overrides.find("config"); it != overrides.end()) {
      config_path = it->second;
      overrides.erase(it);
    }
    if (auto it = overrides.find("workers"); it != overrides.end()) {
      try {
        workers = std::stoi(it->second);
      } catch (const std::exception&) {
        throw tiprel::UsageError("--workers: expected an integer, got '" + it->second + "'");
      }
      overrides.erase(it);
    }
    if (!config_path.empty()) cfg.apply(tiprel::load_key_values(config_path));
    cfg.apply(overrides);
    if (seed >= 0) cfg.seed = seed;
    if (!out.empty()) cfg.out = out;
  } catch (const tiprel::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  }
  if (workers > 0) omp_set_num_threads(workers);

  try {
    commands[which].run(cfg);
  } catch (const tiprel::UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRunError;
  }
  return 0;
}
