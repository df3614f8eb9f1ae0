#pragma once

#include <cstdint>
#include <utility>

#include "tiprel/sampler.hpp"

namespace tiprel {

/// Ensemble of MALA chains with the potential value and gradient at the
/// current positions cached between steps.
class MalaChains {
 public:
  MalaChains(ChainEnsemble ens, const Potential& pot, Exec exec = Exec::parallel);

  /// One Metropolis-adjusted Langevin step of size h for every chain:
  /// proposal y' = y - h grad(y) + sqrt(2h) z, accepted with probability
  /// min(1, exp(Psi(y) - Psi(y') + |y'-y+h grad(y)|^2/4h - |y-y'+h grad(y')|^2/4h)).
  /// Returns the fraction of live chains that accepted.
  double step(const Potential& pot, double h, Exec exec = Exec::parallel);

  const ChainEnsemble& ensemble() const { return ens_; }

 private:
  ChainEnsemble ens_;
  Vector psi_;
  RowMatrix grad_;
};

/// log acceptance probability of moving from y to y_new (log-space, so
/// overflow in exp() never occurs).
double mala_log_accept(double psi, const Vector& grad, const Vector& y, double psi_new,
                       const Vector& grad_new, const Vector& y_new, double h);

/// Functional form of MalaChains::step (no value/gradient cache).
std::pair<ChainEnsemble, double> mala_step(const ChainEnsemble& ens, const Potential& pot,
                                           double h, Exec exec = Exec::parallel);

struct MalaTuneOptions {
  std::size_t chains = 100;
  std::int64_t warmup_steps = 300;
  std::int64_t pilot_steps = 50;
  double initial_h = 1e-2;
  /// Bisection stops once the pilot acceptance is this close to the target.
  double tolerance = 0.02;
  int max_bracket_steps = 60;
  int max_bisection_steps = 60;
};

struct MalaTuneResult {
  double h = 0.0;
  double pilot_acceptance = 0.0;
  /// Chains after warm-up; a good starting point for production runs.
  ChainEnsemble warm;
};

/// Finds a step size whose measured acceptance rate is within
/// [target - 0.05, target + 0.05]: adaptive warm-up, then bracketing by
/// doubling/halving and log-scale bisection on pilot runs that share their
/// random numbers. Throws Error when no bracket is found within the limits.
MalaTuneResult mala_tune(const Potential& pot, const InitSpec& init, double target_rate,
                         std::uint64_t seed, const MalaTuneOptions& opts = {});

/// Mean acceptance over `steps` MALA steps of size h from `start`.
double mala_acceptance(const ChainEnsemble& start, const Potential& pot, double h,
                       std::int64_t steps, Exec exec = Exec::parallel);

/// Damped Newton iteration for argmin Psi. Needs an SPD Hessian along the
/// path (true for the logistic posterior).
Vector find_mode(const Potential& pot, const Vector& start, int max_iters = 200);

/// N(mode, Hess(mode)^{-1}).
InitSpec laplace_init(const Potential& pot, const Vector& start);

}  // namespace tiprel
