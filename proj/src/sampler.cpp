#include "tiprel/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>

#include "tiprel/errors.hpp"

namespace tiprel {

// --- ChainEnsemble ---------------------------------------------------------

std::size_t ChainEnsemble::num_diverged() const {
  return static_cast<std::size_t>(std::count(diverged.begin(), diverged.end(), std::uint8_t{1}));
}

RowMatrix ChainEnsemble::finite_positions() const {
  RowMatrix out(static_cast<Eigen::Index>(num_chains() - num_diverged()), positions.cols());
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < positions.rows(); ++i) {
    if (!diverged[static_cast<std::size_t>(i)]) out.row(r++) = positions.row(i);
  }
  return out;
}

std::vector<std::int64_t> ChainEnsemble::finite_chain_ids() const {
  std::vector<std::int64_t> ids;
  for (std::size_t i = 0; i < diverged.size(); ++i) {
    if (!diverged[i]) ids.push_back(static_cast<std::int64_t>(i));
  }
  return ids;
}

// --- StepSchedule ----------------------------------------------------------

StepSchedule StepSchedule::constant(double h) {
  if (!(h >= 0.0) || !std::isfinite(h)) throw InvalidInput("StepSchedule: h must be >= 0");
  StepSchedule s;
  s.kind = Kind::constant;
  s.h = h;
  return s;
}

StepSchedule StepSchedule::polynomial_decay(double h0, double gamma) {
  if (!(h0 > 0.0)) throw InvalidInput("StepSchedule: h0 must be positive");
  if (!(gamma > 0.5 && gamma <= 1.0)) throw InvalidInput("StepSchedule: gamma must be in (1/2, 1]");
  StepSchedule s;
  s.kind = Kind::polynomial_decay;
  s.h0 = h0;
  s.gamma = gamma;
  return s;
}

double StepSchedule::step_size(std::int64_t k) const {
  if (kind == Kind::constant) return h;
  return h0 / std::pow(1.0 + static_cast<double>(k), gamma);
}

// --- InitSpec --------------------------------------------------------------

InitSpec InitSpec::dirac(Vector c) {
  InitSpec s;
  s.kind = Kind::dirac;
  s.point = std::move(c);
  return s;
}

InitSpec InitSpec::gaussian(Vector mean, double std) {
  if (!(std > 0.0)) throw InvalidInput("InitSpec: gaussian std must be positive");
  InitSpec s;
  s.kind = Kind::gaussian;
  s.mean = std::move(mean);
  s.std = std;
  return s;
}

InitSpec InitSpec::gaussian_full(Vector mean, const SymMatrix& cov) {
  InitSpec s;
  s.kind = Kind::gaussian_full;
  s.mean = std::move(mean);
  s.cov_sqrt = spd_sqrt(cov);
  if (s.cov_sqrt.dim() != static_cast<std::size_t>(s.mean.size())) {
    throw InvalidInput("InitSpec: covariance and mean dimensions differ");
  }
  return s;
}

InitSpec InitSpec::from_samples(RowMatrix samples) {
  if (samples.rows() == 0) throw InvalidInput("InitSpec: empty sample set");
  InitSpec s;
  s.kind = Kind::samples;
  s.samples = std::move(samples);
  return s;
}

std::size_t InitSpec::dim() const {
  switch (kind) {
    case Kind::dirac:
      return static_cast<std::size_t>(point.size());
    case Kind::gaussian:
    case Kind::gaussian_full:
      return static_cast<std::size_t>(mean.size());
    case Kind::samples:
      return static_cast<std::size_t>(samples.cols());
  }
  return 0;
}

ChainEnsemble initialize(const InitSpec& init, std::size_t num_chains, std::uint64_t seed) {
  const std::size_t d = init.dim();
  if (d == 0) throw InvalidInput("initialize: zero-dimensional init");
  ChainEnsemble ens;
  ens.seed = seed;
  ens.positions.resize(static_cast<Eigen::Index>(num_chains), static_cast<Eigen::Index>(d));
  ens.diverged.assign(num_chains, 0);
  const CounterRng rng(seed);
  Vector z(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < num_chains; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    switch (init.kind) {
      case InitSpec::Kind::dirac:
        ens.positions.row(row) = init.point.transpose();
        break;
      case InitSpec::Kind::gaussian:
        rng.normals(Stream::initialization, i, 0, {z.data(), d});
        ens.positions.row(row) = (init.mean + init.std * z).transpose();
        break;
      case InitSpec::Kind::gaussian_full:
        rng.normals(Stream::initialization, i, 0, {z.data(), d});
        ens.positions.row(row) = (init.mean + init.cov_sqrt * z).transpose();
        break;
      case InitSpec::Kind::samples:
        ens.positions.row(row) = init.samples.row(row % init.samples.rows());
        break;
    }
  }
  if (!ens.positions.allFinite()) throw InvalidInput("initialize: non-finite initial positions");
  return ens;
}

// --- kernels ---------------------------------------------------------------

Vector tame(const Vector& b, double h) {
  double sq = 0.0;
  for (Eigen::Index i = 0; i < b.size(); ++i) sq += b(i) * b(i);
  return b / (1.0 + h * std::sqrt(sq));
}

Vector tiprel_update(const Potential& pot, const Preconditioner& pc, double t, const Vector& y,
                     double h, const Vector& z) {
  const PrecondEval eval = pc.evaluate(t, y);
  const Vector b = drift(pot.gradient(y), eval);
  const Vector tamed = tame(b, h);
  const Vector noise = eval.sqrt * z;
  const double scale = std::sqrt(2.0 * h);
  Vector next(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) next(i) = y(i) + h * tamed(i) + scale * noise(i);
  return next;
}

namespace {

// Returns false if the chain diverged.
bool advance_one(ChainEnsemble& ens, std::size_t chain, const Potential& pot,
                 const Preconditioner& pc, double h, const CounterRng& rng) {
  const auto row = static_cast<Eigen::Index>(chain);
  const std::size_t d = ens.dim();
  const Vector y = ens.positions.row(row).transpose();
  Vector z(static_cast<Eigen::Index>(d));
  rng.normals(Stream::langevin_noise, chain, static_cast<std::uint64_t>(ens.step), {z.data(), d});
  Vector next;
  try {
    next = tiprel_update(pot, pc, ens.time, y, h, z);
  } catch (const InvalidInput&) {
    // Non-finite derived quantities (overflowing Hessian, etc.).
    next = Vector::Constant(y.size(), std::numeric_limits<double>::quiet_NaN());
  }
  if (!next.allFinite()) {
    ens.positions.row(row).setConstant(std::numeric_limits<double>::quiet_NaN());
    return false;
  }
  ens.positions.row(row) = next.transpose();
  return true;
}

}  // namespace

void tiprel_advance(ChainEnsemble& ens, const Potential& pot, const Preconditioner& pc, double h,
                    Exec exec) {
  if (!(h >= 0.0)) throw InvalidInput("tiprel_step: h must be >= 0");
  if (pot.dim() != ens.dim() || pc.dim() != ens.dim()) {
    throw InvalidInput("tiprel_step: dimension mismatch between ensemble, potential and preconditioner");
  }
  const CounterRng rng(ens.seed);
  const auto n = static_cast<std::int64_t>(ens.num_chains());

  if (exec == Exec::serial) {
    for (std::int64_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(i);
      if (ens.diverged[c]) continue;
      if (!advance_one(ens, c, pot, pc, h, rng)) ens.diverged[c] = 1;
    }
  } else {
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 8)
    for (std::int64_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(i);
      if (ens.diverged[c]) continue;
      try {
        if (!advance_one(ens, c, pot, pc, h, rng)) ens.diverged[c] = 1;
      } catch (...) {
#pragma omp critical(tiprel_advance_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  }
  ens.time += h;
  ens.step += 1;
}

ChainEnsemble tiprel_step(const ChainEnsemble& ens, const Potential& pot,
                          const Preconditioner& pc, double h, Exec exec) {
  ChainEnsemble next = ens;
  tiprel_advance(next, pot, pc, h, exec);
  return next;
}

// --- recording / runs ------------------------------------------------------

RecordingPlan RecordingPlan::geometric(std::int64_t total_steps, double ratio) {
  if (!(ratio > 1.0)) throw InvalidInput("RecordingPlan: ratio must exceed 1");
  RecordingPlan plan;
  plan.steps.push_back(0);
  std::int64_t cur = 1;
  while (cur < total_steps) {
    plan.steps.push_back(cur);
    cur = std::max(cur + 1, static_cast<std::int64_t>(std::ceil(static_cast<double>(cur) * ratio)));
  }
  if (total_steps > 0) plan.steps.push_back(total_steps);
  return plan;
}

RecordingPlan RecordingPlan::every(std::int64_t total_steps, std::int64_t stride) {
  if (stride < 1) throw InvalidInput("RecordingPlan: stride must be >= 1");
  RecordingPlan plan;
  for (std::int64_t k = 0; k <= total_steps; k += stride) plan.steps.push_back(k);
  if (plan.steps.back() != total_steps) plan.steps.push_back(total_steps);
  return plan;
}

RecordingPlan RecordingPlan::endpoints(std::int64_t total_steps) {
  RecordingPlan plan;
  plan.steps.push_back(0);
  if (total_steps > 0) plan.steps.push_back(total_steps);
  return plan;
}

bool RecordingPlan::contains(std::int64_t step) const {
  return std::binary_search(steps.begin(), steps.end(), step);
}

namespace {

void record(Trajectory& traj, const ChainEnsemble& ens, const RunOptions& opts) {
  if (opts.keep_snapshots) traj.snapshots.push_back({ens.step, ens.time, ens.positions, ens.diverged});
  if (opts.on_record) opts.on_record(ens);
}

}  // namespace

Trajectory run_ensemble(ChainEnsemble ens, const Potential& pot, const Preconditioner& pc,
                        const StepSchedule& sched, std::int64_t total_steps,
                        const RecordingPlan& plan, const RunOptions& opts) {
  if (total_steps < 0) throw InvalidInput("run_chain: K must be >= 0");
  Trajectory traj;
  if (plan.contains(0)) record(traj, ens, opts);
  const std::int64_t start = ens.step;
  const auto limit = static_cast<std::size_t>(
      std::floor(opts.max_diverged_fraction * static_cast<double>(ens.num_chains())));
  for (std::int64_t k = 0; k < total_steps; ++k) {
    tiprel_advance(ens, pot, pc, sched.step_size(ens.step), opts.exec);
    const std::size_t bad = ens.num_diverged();
    if (bad > limit) {
      std::ostringstream msg;
      msg << "run diverged: " << bad << " of " << ens.num_chains()
          << " chains produced non-finite positions by step " << ens.step;
      throw DivergenceError(msg.str());
    }
    if (plan.contains(ens.step - start)) record(traj, ens, opts);
  }
  traj.num_diverged = ens.num_diverged();
  traj.final = std::move(ens);
  return traj;
}

Trajectory run_chain(const InitSpec& init, std::size_t num_chains, const Potential& pot,
                     const Preconditioner& pc, const StepSchedule& sched,
                     std::int64_t total_steps, const RecordingPlan& plan, std::uint64_t seed,
                     const RunOptions& opts) {
  return run_ensemble(initialize(init, num_chains, seed), pot, pc, sched, total_steps, plan, opts);
}

// --- exact samplers --------------------------------------------------------

RowMatrix ancestral_rosenbrock(const RosenbrockParams& p, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InvalidInput("ancestral_rosenbrock: n must be >= 1");
  if (!(p.b > 0.0)) throw InvalidInput("ancestral_rosenbrock: b must be positive");
  const CounterRng rng(seed);
  const double sd1 = std::sqrt(0.5);
  const double sd2 = std::sqrt(1.0 / (2.0 * p.b));
  RowMatrix out(static_cast<Eigen::Index>(n), 2);
  double z[2];
  for (std::size_t i = 0; i < n; ++i) {
    rng.normals(Stream::ancestral, i, 0, z);
    const double x1 = p.a + sd1 * z[0];
    out(static_cast<Eigen::Index>(i), 0) = x1;
    out(static_cast<Eigen::Index>(i), 1) = x1 * x1 + sd2 * z[1];
  }
  return out;
}

RowMatrix gaussian_samples(const Vector& mean, const SymMatrix& cov, std::size_t n,
                           std::uint64_t seed) {
  const SymMatrix root = spd_sqrt(cov);
  const std::size_t d = root.dim();
  if (static_cast<std::size_t>(mean.size()) != d) {
    throw InvalidInput("gaussian_samples: mean/covariance dimension mismatch");
  }
  const CounterRng rng(seed);
  RowMatrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  Vector z(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    rng.normals(Stream::reference, i, 0, {z.data(), d});
    out.row(static_cast<Eigen::Index>(i)) = (mean + root * z).transpose();
  }
  return out;
}

}  // namespace tiprel
