#include "tiprel/experiment.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "tiprel/csv.hpp"
#include "tiprel/data.hpp"
#include "tiprel/errors.hpp"

namespace tiprel {

MalaReference mala_reference(const Potential& pot, const InitSpec& init, std::int64_t chains,
                             std::int64_t iters, double target, std::uint64_t seed,
                             double h_init) {
  if (chains < 1 || iters < 0) throw InvalidInput("mala_reference: bad chain/iteration count");
  MalaTuneOptions opts;
  opts.initial_h = h_init;
  const MalaTuneResult tuned = mala_tune(pot, init, target, seed, opts);

  MalaReference ref;
  ref.h = tuned.h;
  ref.tune_acceptance = tuned.pilot_acceptance;
  // The production chains get their own seed so that they do not replay the
  // tuning chains' random numbers.
  MalaChains run(initialize(init, static_cast<std::size_t>(chains), seed + 1), pot);
  double total = 0.0;
  for (std::int64_t s = 0; s < iters; ++s) total += run.step(pot, tuned.h);
  ref.acceptance = iters > 0 ? total / static_cast<double>(iters) : 0.0;
  const ChainEnsemble& ens = run.ensemble();
  ref.samples = make_sample_set(ens.finite_positions(), "mala");
  ref.samples.chains = ens.finite_chain_ids();
  return ref;
}

std::uint64_t ground_truth_seed(std::uint64_t seed) { return seed ^ 0x9E3779B97F4A7C15ULL; }

namespace {

Vector broadcast(const std::vector<double>& v, std::size_t d, const std::string& key) {
  if (v.size() == 1) return Vector::Constant(static_cast<Eigen::Index>(d), v[0]);
  if (v.size() != d) {
    throw UsageError(key + ": needs 1 or " + std::to_string(d) + " values, got " +
                     std::to_string(v.size()));
  }
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(d));
}

QuadraticParams quadratic_params(const ExperimentConfig& cfg) {
  const std::size_t d = cfg.quadratic_mean.size();
  QuadraticParams q;
  q.mean = Eigen::Map<const Vector>(cfg.quadratic_mean.data(), static_cast<Eigen::Index>(d));
  const auto& p = cfg.quadratic_precision;
  if (p.size() == d) {
    q.precision = SymMatrix::diagonal(Eigen::Map<const Vector>(p.data(), static_cast<Eigen::Index>(d)));
  } else {
    Matrix full(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        full(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = p[i * d + j];
      }
    }
    if (full != full.transpose()) throw UsageError("quadratic.precision: matrix is not symmetric");
    q.precision = SymMatrix::from_upper(full);
  }
  return q;
}

InitSpec mala_init(const ExperimentConfig& cfg, const Potential& pot) {
  const std::size_t d = pot.dim();
  if (cfg.mala_init == "laplace") return laplace_init(pot, Vector::Zero(static_cast<Eigen::Index>(d)));
  if (cfg.mala_init == "gaussian") return InitSpec::gaussian(broadcast(cfg.init_mean, d, "init.mean"), cfg.init_std);
  return InitSpec::dirac(broadcast(cfg.init_point, d, "init.point"));
}

bool needs_ground_truth(const std::string& precond) {
  return precond == "covariance" || precond == "fisher" || precond == "interpolated";
}

void prepare_output(const ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.out);
  std::ofstream out(std::filesystem::path(cfg.out) / "resolved_config", std::ios::binary);
  if (!out) throw Error("cannot write resolved_config in " + cfg.out);
  out << cfg.to_text();
}

std::string out_path(const ExperimentConfig& cfg, const char* name) {
  return (std::filesystem::path(cfg.out) / name).string();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw Error("failed writing " + path);
}

}  // namespace

PotentialPtr build_potential(const ExperimentConfig& cfg) {
  if (cfg.potential == "rosenbrock") {
    return std::make_shared<Rosenbrock>(RosenbrockParams{cfg.rosenbrock_a, cfg.rosenbrock_b});
  }
  if (cfg.potential == "logistic") {
    LogisticModel m = cfg.logistic_data == "synthetic"
                          ? make_synthetic_logistic(static_cast<std::size_t>(cfg.logistic_n),
                                                    static_cast<std::size_t>(cfg.logistic_d),
                                                    static_cast<std::uint64_t>(cfg.logistic_data_seed))
                                .model
                          : load_heart_csv(cfg.logistic_data);
    if (cfg.logistic_standardize) m = standardize_features(std::move(m));
    return std::make_shared<LogisticPosterior>(std::move(m));
  }
  return std::make_shared<Quadratic>(quadratic_params(cfg));
}

GroundTruth build_ground_truth(const ExperimentConfig& cfg, const Potential& pot) {
  GroundTruth gt;
  const auto seed = ground_truth_seed(static_cast<std::uint64_t>(cfg.seed));
  const auto n = static_cast<std::size_t>(cfg.ground_truth_n);
  if (cfg.ground_truth == "none") return gt;
  if (cfg.ground_truth == "ancestral") {
    const auto& ros = dynamic_cast<const Rosenbrock&>(pot);
    gt.samples = make_sample_set(ancestral_rosenbrock(ros.params(), n, seed), "ancestral");
  } else if (cfg.ground_truth == "exact") {
    const auto& quad = dynamic_cast<const Quadratic&>(pot);
    gt.samples = make_sample_set(
        gaussian_samples(quad.params().mean, spd_inverse(quad.params().precision), n, seed), "exact");
    gt.mean = quad.params().mean;
    return gt;
  } else if (cfg.ground_truth == "mala") {
    gt.samples = mala_reference(pot, mala_init(cfg, pot), cfg.mala_chains, cfg.mala_iters,
                                cfg.mala_target_accept, seed, cfg.mala_h_init)
                     .samples;
  } else {
    gt.samples = load_samples(cfg.ground_truth_path);
    if (gt.samples.dim() != pot.dim()) {
      throw UsageError("ground_truth.path: samples have dimension " +
                       std::to_string(gt.samples.dim()) + ", potential has " +
                       std::to_string(pot.dim()));
    }
  }
  gt.mean = sample_mean(gt.samples);
  return gt;
}

double default_constant_scale(const Potential& pot) {
  if (const auto* ros = dynamic_cast<const Rosenbrock*>(&pot)) {
    const RowMatrix samples = ancestral_rosenbrock(ros->params(), 20000, 0);
    return 1.0 / rosenbrock_lipschitz_samples(ros->params(), Box2{-2.0, 4.0, -1.0, 15.0}, samples);
  }
  if (const auto* log = dynamic_cast<const LogisticPosterior*>(&pot)) {
    return 1.0 / logistic_lipschitz_bound(log->model());
  }
  if (const auto* quad = dynamic_cast<const Quadratic*>(&pot)) {
    return 1.0 / spectral_norm(quad->params().precision);
  }
  throw UsageError("precond.c: no automatic value for this potential");
}

PreconditionerPtr build_preconditioner(const ExperimentConfig& cfg, const std::string& name,
                                       const PotentialPtr& pot, const GroundTruth& gt) {
  if (needs_ground_truth(name) && gt.empty()) {
    throw UsageError("precond: '" + name + "' is estimated from a ground truth, but ground_truth = none");
  }
  const std::size_t d = pot->dim();
  auto global = [&](const std::string& kind) {
    return kind == "covariance" ? fixed_matrix(estimate_covariance(gt.samples))
                                : fixed_matrix(estimate_fisher_inverse(gt.samples, *pot));
  };
  auto local = [&] {
    const DivergenceMode mode = cfg.precond_divergence == "analytic" ? DivergenceMode::analytic
                                : cfg.precond_divergence == "fd"     ? DivergenceMode::finite_difference
                                                                     : DivergenceMode::automatic;
    // The logistic Hessian is SPD everywhere, so it is inverted unclamped.
    std::optional<ClampSpec> clamp;
    if (cfg.precond_clamp && !dynamic_cast<const LogisticPosterior*>(pot.get())) {
      clamp = ClampSpec{cfg.precond_epsilon};
    }
    return curvature_aware(pot, clamp, mode);
  };

  if (name == "constant") {
    const double c = cfg.precond_c == "auto" ? default_constant_scale(*pot)
                                             : csv::parse_double(cfg.precond_c, 0);
    return constant_scalar(c, d);
  }
  if (name == "covariance" || name == "fisher") return global(name);
  if (name == "curvature") return local();
  const double h = build_schedule(cfg).base();
  // Without steps (or with frozen dynamics) time never advances and lambda stays 0.
  const Schedule ramp = cfg.steps > 0 && h > 0.0
                            ? Schedule::linear_ramp(static_cast<double>(cfg.steps), h)
                            : Schedule::constant(0.0);
  return interpolated(global(cfg.precond_global), local(), ramp);
}

InitSpec build_init(const ExperimentConfig& cfg, std::size_t dim, const GroundTruth& gt) {
  if (cfg.init == "dirac") return InitSpec::dirac(broadcast(cfg.init_point, dim, "init.point"));
  if (cfg.init == "gaussian") {
    return InitSpec::gaussian(broadcast(cfg.init_mean, dim, "init.mean"), cfg.init_std);
  }
  if (gt.empty()) throw UsageError("init: ground_truth initialization needs a ground truth");
  return InitSpec::from_samples(gt.samples.samples);
}

StepSchedule build_schedule(const ExperimentConfig& cfg) {
  return cfg.schedule == "constant" ? StepSchedule::constant(cfg.schedule_h)
                                    : StepSchedule::polynomial_decay(cfg.schedule_h0, cfg.schedule_gamma);
}

RecordingPlan build_plan(const ExperimentConfig& cfg) {
  if (cfg.record == "every") return RecordingPlan::every(cfg.steps, cfg.record_stride);
  if (cfg.record == "endpoints") return RecordingPlan::endpoints(cfg.steps);
  return RecordingPlan::geometric(cfg.steps, cfg.record_ratio);
}

void evaluate_metrics(const ExperimentConfig& cfg, const ChainEnsemble& ens,
                      const GroundTruth& gt, MetricsSeries& series) {
  const SampleSet live = make_sample_set(ens.finite_positions());
  const bool any = live.size() > 0;
  const std::size_t d = ens.dim();
  auto add = [&](const std::string& name, double v) { series.add(ens.step, ens.time, name, v); };

  for (const auto& m : cfg.metrics) {
    if (m == "w2") {
      if (any) {
        const MarginalW2 w = w2_marginals(live, gt.samples);
        add("w2_avg", w.average);
        add("w2_max", w.max);
        add("w2_min", w.min);
        for (std::size_t j = 0; j < d; ++j) add("w2_dim_" + std::to_string(j), w.per_coord[j]);
      } else {
        add("w2_avg", kMissing);
      }
    } else if (m == "mean_error") {
      add("mean_sq_error", any ? mean_error(live, gt.mean) : kMissing);
    } else if (m == "cosine") {
      if (d != 2) throw UsageError("metrics: cosine observables need a 2-dimensional target");
      for (int g1 = 0; g1 <= 2; ++g1) {
        for (int g2 = 0; g2 <= 2; ++g2) {
          const Observable f = cosine_observable(g1, g2);
          add("cos_" + std::to_string(g1) + "_" + std::to_string(g2),
              any ? observable_error(live, f, observable_mean(gt.samples, f)) : kMissing);
        }
      }
    } else if (m == "diverged") {
      add("diverged", static_cast<double>(ens.num_diverged()));
    }
  }
}

SampleOutcome run_sample(const ExperimentConfig& cfg, const PotentialPtr& pot,
                         const GroundTruth& gt) {
  for (const auto& m : cfg.metrics) {
    if (m != "diverged" && gt.empty()) {
      throw UsageError("metrics: '" + m + "' needs a ground truth, but ground_truth = none");
    }
  }
  const PreconditionerPtr pc = build_preconditioner(cfg, cfg.precond, pot, gt);
  SampleOutcome out;
  RunOptions opts;
  opts.keep_snapshots = false;
  opts.on_record = [&](const ChainEnsemble& ens) { evaluate_metrics(cfg, ens, gt, out.metrics); };
  Trajectory traj = run_chain(build_init(cfg, pot->dim(), gt), static_cast<std::size_t>(cfg.chains),
                              *pot, *pc, build_schedule(cfg), cfg.steps, build_plan(cfg),
                              static_cast<std::uint64_t>(cfg.seed), opts);
  out.final = std::move(traj.final);
  return out;
}

void cmd_sample(ExperimentConfig cfg) {
  cfg.validate();
  const PotentialPtr pot = build_potential(cfg);
  const GroundTruth gt = build_ground_truth(cfg, *pot);
  prepare_output(cfg);
  const SampleOutcome res = run_sample(cfg, pot, gt);

  SampleSet final = make_sample_set(res.final.finite_positions(), cfg.precond);
  final.chains = res.final.finite_chain_ids();
  final.steps.assign(final.chains.size(), res.final.step);
  if (final.size() > 0) {
    save_samples(final, out_path(cfg, "samples.csv"));
  } else {
    write_text(out_path(cfg, "samples.csv"), "");
  }
  res.metrics.save(out_path(cfg, "metrics.csv"));
}

void cmd_sweep(ExperimentConfig cfg) {
  cfg.validate();
  if (cfg.sweep_h.size() < 2) throw UsageError("sweep.h: needs at least two step sizes");
  if (cfg.sweep_preconds.empty()) throw UsageError("sweep.preconds: must not be empty");
  const PotentialPtr pot = build_potential(cfg);
  const GroundTruth gt = build_ground_truth(cfg, *pot);
  prepare_output(cfg);

  std::string table = "preconditioner,h,final_metric\n";
  for (const auto& p : cfg.sweep_preconds) {
    for (double h : cfg.sweep_h) {
      ExperimentConfig cell = cfg;
      cell.precond = p;
      cell.schedule = "constant";
      cell.schedule_h = h;
      double value = kMissing;
      try {
        value = run_sample(cell, pot, gt).metrics.last(cfg.sweep_metric).value_or(kMissing);
      } catch (const UsageError&) {
        throw;
      } catch (const std::exception& e) {
        std::cerr << "sweep: " << p << " at h = " << csv::format(h) << " failed: " << e.what() << '\n';
      }
      table += p + "," + csv::format(h) + "," + csv::format(value) + "\n";
    }
  }
  write_text(out_path(cfg, "sweep.csv"), table);
}

void cmd_reference(ExperimentConfig cfg) {
  cfg.validate();
  const PotentialPtr pot = build_potential(cfg);
  prepare_output(cfg);
  const MalaReference ref = mala_reference(*pot, mala_init(cfg, *pot), cfg.mala_chains,
                                           cfg.mala_iters, cfg.mala_target_accept,
                                           ground_truth_seed(static_cast<std::uint64_t>(cfg.seed)),
                                           cfg.mala_h_init);
  save_samples(ref.samples, out_path(cfg, "reference_samples.csv"));
  save_matrix(sample_mean(ref.samples).transpose(), out_path(cfg, "reference_mean.csv"));
  save_matrix(estimate_covariance(ref.samples).dense(), out_path(cfg, "reference_cov.csv"));
  save_matrix(estimate_fisher_inverse(ref.samples, *pot).dense(),
              out_path(cfg, "reference_fisher_inv.csv"));
  write_text(out_path(cfg, "reference_info.csv"),
             "key,value\nh," + csv::format(ref.h) + "\ntune_acceptance," +
                 csv::format(ref.tune_acceptance) + "\nacceptance," + csv::format(ref.acceptance) +
                 "\nchains," + std::to_string(ref.samples.size()) + "\n");
}

void cmd_acf(ExperimentConfig cfg) {
  cfg.validate(/*allow_zero_step=*/true);
  if (cfg.schedule != "constant") throw UsageError("schedule: acf runs use a constant step size");
  if (cfg.steps <= cfg.acf_max_lag) throw UsageError("steps: must exceed acf.max_lag");
  const PotentialPtr pot = build_potential(cfg);
  const GroundTruth gt = build_ground_truth(cfg, *pot);
  if (gt.empty()) throw UsageError("ground_truth: acf runs start from ground-truth samples");
  prepare_output(cfg);

  std::string table = "preconditioner,lag,coordinate,correlation\n";
  for (const auto& p : cfg.acf_preconds) {
    const PreconditionerPtr pc = build_preconditioner(cfg, p, pot, gt);
    const Trajectory traj =
        run_chain(InitSpec::from_samples(gt.samples.samples), static_cast<std::size_t>(cfg.chains),
                  *pot, *pc, StepSchedule::constant(cfg.schedule_h), cfg.steps,
                  RecordingPlan::every(cfg.steps), static_cast<std::uint64_t>(cfg.seed));
    if (traj.num_diverged > 0) throw DivergenceError("acf: chains diverged with precond " + p);
    std::vector<RowMatrix> snaps;
    snaps.reserve(traj.snapshots.size());
    for (const auto& s : traj.snapshots) snaps.push_back(s.positions);
    const AcfResult r = acf(snaps, static_cast<std::size_t>(cfg.acf_max_lag));
    for (Eigen::Index lag = 0; lag < r.average.size(); ++lag) {
      for (Eigen::Index c = 0; c < r.per_coord.rows(); ++c) {
        table += p + "," + std::to_string(lag) + "," + std::to_string(c) + "," +
                 csv::format(r.per_coord(c, lag)) + "\n";
      }
      table += p + "," + std::to_string(lag) + ",avg," + csv::format(r.average(lag)) + "\n";
    }
  }
  write_text(out_path(cfg, "acf.csv"), table);
}

}  // namespace tiprel
