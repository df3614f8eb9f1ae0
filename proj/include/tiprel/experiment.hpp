#pragma once

#include <cstdint>
#include <string>

#include "tiprel/config.hpp"
#include "tiprel/mala.hpp"
#include "tiprel/metrics.hpp"
#include "tiprel/precond.hpp"
#include "tiprel/sampler.hpp"

namespace tiprel {

/// Samples from the target (or the best available stand-in) plus their mean.
/// Empty when the config asks for no ground truth.
struct GroundTruth {
  SampleSet samples;
  Vector mean;

  bool empty() const { return samples.size() == 0; }
};

struct MalaReference {
  SampleSet samples;
  double h = 0.0;
  double tune_acceptance = 0.0;
  /// Mean acceptance over the production iterations.
  double acceptance = 0.0;
};

/// Tunes MALA to `target` acceptance, then runs `chains` chains started from
/// `init` for `iters` steps and returns their final positions.
MalaReference mala_reference(const Potential& pot, const InitSpec& init, std::int64_t chains,
                             std::int64_t iters, double target, std::uint64_t seed,
                             double h_init = 1e-2);

/// Seed used for everything that produces ground truth, kept apart from the
/// seed that drives the sampled chains.
std::uint64_t ground_truth_seed(std::uint64_t seed);

PotentialPtr build_potential(const ExperimentConfig& cfg);
GroundTruth build_ground_truth(const ExperimentConfig& cfg, const Potential& pot);
/// 1/L: Rosenbrock uses the largest Hessian norm over exact samples falling
/// in [-2,4] x [-1,15], logistic the closed-form bound, quadratic the largest
/// precision eigenvalue.
double default_constant_scale(const Potential& pot);
PreconditionerPtr build_preconditioner(const ExperimentConfig& cfg, const std::string& name,
                                       const PotentialPtr& pot, const GroundTruth& gt);
InitSpec build_init(const ExperimentConfig& cfg, std::size_t dim, const GroundTruth& gt);
StepSchedule build_schedule(const ExperimentConfig& cfg);
RecordingPlan build_plan(const ExperimentConfig& cfg);

/// Appends the configured metrics of the live chains of `ens` to `series`.
void evaluate_metrics(const ExperimentConfig& cfg, const ChainEnsemble& ens,
                      const GroundTruth& gt, MetricsSeries& series);

struct SampleOutcome {
  MetricsSeries metrics;
  ChainEnsemble final;
};

/// One TIPreL run with `cfg.precond`, metrics at every recorded step.
SampleOutcome run_sample(const ExperimentConfig& cfg, const PotentialPtr& pot,
                         const GroundTruth& gt);

/// The CLI subcommands. Each validates `cfg`, writes its files into
/// `cfg.out` together with `resolved_config`, and throws on failure
/// (UsageError for configuration problems).
void cmd_sample(ExperimentConfig cfg);
void cmd_sweep(ExperimentConfig cfg);
void cmd_reference(ExperimentConfig cfg);
void cmd_acf(ExperimentConfig cfg);

}  // namespace tiprel
