#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "tiprel/linalg.hpp"
#include "tiprel/potentials.hpp"
#include "tiprel/precond.hpp"
#include "tiprel/rng.hpp"

namespace tiprel {

/// How the per-chain loop of an ensemble kernel is executed. Both paths run
/// the same per-chain code; `serial` is kept as the reference the OpenMP path
/// is tested against.
enum class Exec { serial, parallel };

/// N chains in R^d advanced in lockstep. `time` is the sum of the step sizes
/// taken so far and `step` their count. Diverged chains hold NaN rows and are
/// never advanced again.
struct ChainEnsemble {
  RowMatrix positions;
  double time = 0.0;
  std::int64_t step = 0;
  std::uint64_t seed = 0;
  std::vector<std::uint8_t> diverged;

  std::size_t num_chains() const { return static_cast<std::size_t>(positions.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(positions.cols()); }
  std::size_t num_diverged() const;
  /// Rows of chains that have not diverged, in chain order.
  RowMatrix finite_positions() const;
  std::vector<std::int64_t> finite_chain_ids() const;
};

/// h_k = h (constant) or h_k = h0 / (1 + k)^gamma (polynomial decay; with
/// gamma in (1/2, 1] the steps are not summable but square-summable).
struct StepSchedule {
  enum class Kind { constant, polynomial_decay };

  Kind kind = Kind::constant;
  double h = 1e-2;
  double h0 = 1e-2;
  double gamma = 1.0;

  static StepSchedule constant(double h);
  static StepSchedule polynomial_decay(double h0, double gamma);

  double step_size(std::int64_t k) const;
  /// h for constant schedules, h0 otherwise.
  double base() const { return kind == Kind::constant ? h : h0; }
};

/// Initial law of the chains.
struct InitSpec {
  enum class Kind { dirac, gaussian, gaussian_full, samples };

  Kind kind = Kind::dirac;
  Vector point;        // dirac
  Vector mean;         // gaussian, gaussian_full
  double std = 1.0;    // gaussian
  SymMatrix cov_sqrt;  // gaussian_full
  RowMatrix samples;   // samples: chain i starts at row i mod n

  static InitSpec dirac(Vector c);
  static InitSpec gaussian(Vector mean, double std);
  /// N(mean, cov); throws NotSpd unless cov is SPD.
  static InitSpec gaussian_full(Vector mean, const SymMatrix& cov);
  static InitSpec from_samples(RowMatrix samples);

  std::size_t dim() const;
};

ChainEnsemble initialize(const InitSpec& init, std::size_t num_chains, std::uint64_t seed);

/// b / (1 + h |b|). The result has norm <= min(|b|, 1/h).
Vector tame(const Vector& b, double h);

/// One tamed Euler-Maruyama update of a single chain given its noise z:
/// y + h tame(b(t,y), h) + sqrt(2h) B^{1/2}(t,y) z.
Vector tiprel_update(const Potential& pot, const Preconditioner& pc, double t, const Vector& y,
                     double h, const Vector& z);

/// Advances every live chain by one step of size h (h >= 0; h = 0 leaves
/// positions unchanged) and bumps time/step. Chains whose new position is
/// not finite are marked diverged.
void tiprel_advance(ChainEnsemble& ens, const Potential& pot, const Preconditioner& pc, double h,
                    Exec exec = Exec::parallel);

ChainEnsemble tiprel_step(const ChainEnsemble& ens, const Potential& pot,
                          const Preconditioner& pc, double h, Exec exec = Exec::parallel);

/// Steps at which the ensemble is stored. Always sorted and unique.
struct RecordingPlan {
  std::vector<std::int64_t> steps;

  /// 0, 1, then roughly multiplying by `ratio`, and always K.
  static RecordingPlan geometric(std::int64_t total_steps, double ratio = 1.3);
  static RecordingPlan every(std::int64_t total_steps, std::int64_t stride = 1);
  static RecordingPlan endpoints(std::int64_t total_steps);

  bool contains(std::int64_t step) const;
};

struct Snapshot {
  std::int64_t step = 0;
  double time = 0.0;
  RowMatrix positions;
  std::vector<std::uint8_t> diverged;
};

struct Trajectory {
  std::vector<Snapshot> snapshots;
  std::size_t num_diverged = 0;
  /// The ensemble after the last step.
  ChainEnsemble final;
};

struct RunOptions {
  Exec exec = Exec::parallel;
  /// The run aborts with DivergenceError once more than this fraction of
  /// chains has diverged.
  double max_diverged_fraction = 0.01;
  /// Called on every recorded ensemble (after it is stored).
  std::function<void(const ChainEnsemble&)> on_record;
  /// With false, recorded ensembles only reach `on_record`.
  bool keep_snapshots = true;
};

/// Runs K steps from `ens` and stores the ensembles named in `plan`.
Trajectory run_ensemble(ChainEnsemble ens, const Potential& pot, const Preconditioner& pc,
                        const StepSchedule& sched, std::int64_t total_steps,
                        const RecordingPlan& plan, const RunOptions& opts = {});

Trajectory run_chain(const InitSpec& init, std::size_t num_chains, const Potential& pot,
                     const Preconditioner& pc, const StepSchedule& sched,
                     std::int64_t total_steps, const RecordingPlan& plan, std::uint64_t seed,
                     const RunOptions& opts = {});

/// Exact samples of the Rosenbrock Gibbs density:
/// X1 ~ N(a, 1/2), X2 | X1 ~ N(X1^2, 1/(2b)).
RowMatrix ancestral_rosenbrock(const RosenbrockParams& p, std::size_t n, std::uint64_t seed);

/// Exact samples of N(mean, cov).
RowMatrix gaussian_samples(const Vector& mean, const SymMatrix& cov, std::size_t n,
                           std::uint64_t seed);

}  // namespace tiprel
