// Acceptance suite: `tiprel_acceptance <id>` runs one criterion, no argument
// runs all of them. Each criterion prints one PASS/FAIL line; the exit code
// is 0 iff every criterion that ran passed.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tiprel/data.hpp"
#include "tiprel/errors.hpp"
#include "tiprel/experiment.hpp"
#include "tiprel/metrics.hpp"
#include "tiprel/precond.hpp"
#include "tiprel/rng.hpp"
#include "tiprel/sampler.hpp"

using namespace tiprel;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const std::string kHeart = std::string(TIPREL_DATA_DIR) + "/processed.cleveland.data";

// ---------------------------------------------------------------------------

Outcome taming_bound() {
  std::mt19937_64 gen(1);
  std::uniform_int_distribution<int> dim(1, 16);
  std::uniform_real_distribution<double> u(0.0, 1.0), logmag(-8.0, 8.0);
  std::normal_distribution<double> nd;
  std::size_t violations = 0;
  const std::size_t trials = 100000;
  for (std::size_t t = 0; t < trials; ++t) {
    Vector b(dim(gen));
    const double mag = std::pow(10.0, logmag(gen));
    for (auto& v : b) v = nd(gen) * mag;
    if (t % 1000 == 0) b.setZero();
    const double h = 1.0 - u(gen);
    const double n = tame(b, h).norm();
    if (!(n <= b.norm() && n <= 1.0 / h)) ++violations;
  }
  return {violations == 0, fmt("%zu random (b, h), %zu violations", trials, violations)};
}

// Central differences with step 1e-5 (1 + |x_j|).
Vector fd_gradient(const Potential& pot, const Vector& x) {
  Vector g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double s = 1e-5 * (1.0 + std::abs(x(j)));
    Vector a = x, b = x;
    a(j) += s;
    b(j) -= s;
    g(j) = (pot.value(a) - pot.value(b)) / (a(j) - b(j));
  }
  return g;
}

Matrix fd_hessian(const Potential& pot, const Vector& x) {
  Matrix h(x.size(), x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double s = 1e-5 * (1.0 + std::abs(x(j)));
    Vector a = x, b = x;
    a(j) += s;
    b(j) -= s;
    h.col(j) = (pot.gradient(a) - pot.gradient(b)) / (a(j) - b(j));
  }
  return h;
}

// |analytic - fd|_inf / |analytic|_inf
double rel(const Matrix& analytic, const Matrix& fd) {
  return (analytic - fd).cwiseAbs().maxCoeff() / std::max(analytic.cwiseAbs().maxCoeff(), 1e-300);
}

Outcome derivative_oracles() {
  std::mt19937_64 gen(2);
  struct Case {
    std::string name;
    PotentialPtr pot;
    std::function<Vector()> point;
  };
  std::uniform_real_distribution<double> x1(-2, 4), x2(-1, 15), unit(-1, 1), tiny(-0.05, 0.05);
  const auto synthetic = std::make_shared<LogisticPosterior>(make_synthetic_logistic(300, 13, 1).model);
  const auto heart = std::make_shared<LogisticPosterior>(load_heart_csv(kHeart));
  const std::vector<Case> cases{
      {"rosenbrock", std::make_shared<Rosenbrock>(), [&] { return Vector(Eigen::Vector2d(x1(gen), x2(gen))); }},
      {"logistic-synthetic", synthetic, [&] { return Vector(Vector::NullaryExpr(13, [&] { return unit(gen); })); }},
      {"logistic-heart", heart, [&] { return Vector(Vector::NullaryExpr(13, [&] { return tiny(gen); })); }},
  };
  bool pass = true;
  std::string detail;
  for (const auto& c : cases) {
    double worst_g = 0.0, worst_h = 0.0;
    for (int i = 0; i < 100; ++i) {
      const Vector x = c.point();
      worst_g = std::max(worst_g, rel(c.pot->gradient(x), fd_gradient(*c.pot, x)));
      worst_h = std::max(worst_h, rel(c.pot->hessian(x).dense(), fd_hessian(*c.pot, x)));
    }
    pass = pass && worst_g <= 1e-5 && worst_h <= 1e-4;
    detail += fmt("%s grad %.1e hess %.1e; ", c.name.c_str(), worst_g, worst_h);
  }
  detail.resize(detail.size() - 2);
  return {pass, "max relative error: " + detail};
}

Outcome rosenbrock_lipschitz() {
  const RosenbrockParams p{1.0, 100.0};
  const Box2 box{-2.0, 4.0, -1.0, 15.0};
  const double grid = rosenbrock_lipschitz_grid(p, box, 200);
  const double sampled = rosenbrock_lipschitz_samples(p, box, ancestral_rosenbrock(p, 20000, 0));
  return {grid >= 11400.0 && grid <= 11900.0,
          fmt("200x200 grid max %.1f, required [11400, 11900] (max over 2e4 exact samples in the box: %.1f)",
              grid, sampled)};
}

Outcome ancestral_moments() {
  const std::size_t n = 100000;
  const RowMatrix s = ancestral_rosenbrock({1.0, 100.0}, n, 4);
  const double nn = static_cast<double>(n);
  const double m1 = s.col(0).mean();
  const Vector r = s.col(1) - s.col(0).cwiseAbs2();
  const double rv = (r.array() - r.mean()).square().sum() / (nn - 1.0);
  const double tol_m = 3.0 * std::sqrt(0.5 / nn);
  const double tol_v = 5.0 * 0.005 * std::sqrt(2.0 / (nn - 1.0));
  return {std::abs(m1 - 1.0) <= tol_m && std::abs(rv - 0.005) <= tol_v,
          fmt("mean X1 %.5f (1 +- %.5f), var(X2 - X1^2) %.6f (0.005 +- %.6f)", m1, tol_m, rv, tol_v)};
}

Outcome divergence_correction() {
  const auto pot = std::make_shared<Quadratic>(QuadraticParams{SymMatrix::identity(2), Vector::Zero(2)});
  const MatrixField field = [](double, const Vector& x) {
    return SymMatrix::diagonal(Eigen::Vector2d(1.0 + 1.0 / (1.0 + x(0) * x(0)), 1.0));
  };
  const VectorField div = [](double, const Vector& x) {
    const double q = 1.0 + x(0) * x(0);
    return Vector(Eigen::Vector2d(-2.0 * x(0) / (q * q), 0.0));
  };
  const auto corrected = std::make_shared<FieldPreconditioner>(2, field, div);
  const auto zeroed = std::make_shared<WithoutDivergence>(corrected);

  const std::int64_t k = 20000;
  const RecordingPlan plan = RecordingPlan::every(k, 1000);
  // Pooled over the stationary second half of the run (11 snapshots).
  auto score = [&](const Preconditioner& pc, double& final_only) {
    const Trajectory t = run_chain(InitSpec::gaussian(Vector::Zero(2), 1.0), 1000, *pot, pc,
                                   StepSchedule::constant(1e-3), k, plan, 5);
    std::vector<RowMatrix> late;
    for (const auto& s : t.snapshots) {
      if (s.step >= k / 2) late.push_back(s.positions);
    }
    RowMatrix pooled(static_cast<Eigen::Index>(late.size()) * 1000, 2);
    for (std::size_t i = 0; i < late.size(); ++i) pooled.middleRows(static_cast<Eigen::Index>(i) * 1000, 1000) = late[i];
    final_only = w2_marginals_to_std_normal(make_sample_set(t.final.positions)).average;
    return w2_marginals_to_std_normal(make_sample_set(pooled)).average;
  };
  double fc = 0.0, fz = 0.0;
  const double wc = score(*corrected, fc);
  const double wz = score(*zeroed, fz);
  return {wc <= 0.05 && wc < wz,
          fmt("avg marginal W2 to N(0,1): corrected %.4f, div B zeroed %.4f (final snapshot only: %.4f vs %.4f)",
              wc, wz, fc, fz)};
}

Outcome fd_divergence_accuracy() {
  const MatrixField f1 = [](double, const Vector& x) {
    return SymMatrix::diagonal(Eigen::Vector2d(1.0 + x(0) * x(0), 1.0));
  };
  const MatrixField f2 = [](double, const Vector& x) {
    Matrix m(2, 2);
    m << 1.0, x(0) * x(1), x(0) * x(1), 2.0;
    return SymMatrix::from_upper(m);
  };
  auto d1 = [](const Vector& x) { return Vector(Eigen::Vector2d(2.0 * x(0), 0.0)); };
  auto d2 = [](const Vector& x) { return Vector(Eigen::Vector2d(x(0), x(1))); };

  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> u(-3, 3);
  std::vector<Vector> points{Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 2)};
  for (int i = 0; i < 200; ++i) points.push_back(Eigen::Vector2d(u(gen), u(gen)));
  double e1 = 0.0, e2 = 0.0;
  for (const auto& x : points) {
    e1 = std::max(e1, (fd_divergence(f1, 0.0, x, 1e-5) - d1(x)).cwiseAbs().maxCoeff());
    e2 = std::max(e2, (fd_divergence(f2, 0.0, x, 1e-5) - d2(x)).cwiseAbs().maxCoeff());
  }
  return {e1 < 1e-6 && e2 < 1e-6,
          fmt("max abs error over %zu points: diag(1+x1^2, 1) %.1e, [[1, x1 x2], [x1 x2, 2]] %.1e",
              points.size(), e1, e2)};
}

// Tamed ULA for B = c I written independently of the library's update.
Vector tamed_ula(const Potential& pot, double c, const Vector& y, double h, const Vector& z) {
  const Vector g = pot.gradient(y);
  Vector b(y.size());
  double sq = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    b(i) = -(c * g(i));
    sq += b(i) * b(i);
  }
  const double denom = 1.0 + h * std::sqrt(sq);
  const double scale = std::sqrt(2.0 * h);
  const double root_c = std::sqrt(c);
  Vector out(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) out(i) = y(i) + h * (b(i) / denom) + scale * (root_c * z(i));
  return out;
}

Outcome ula_equivalence() {
  const Rosenbrock pot;
  const std::uint64_t seed = 7;
  const double h = 6e-3;
  bool pass = true;
  std::string detail;
  for (double c : {1.0, 0.3, 1.0 / 11655.0, 7.5}) {
    const auto pc = fixed_matrix(SymMatrix::scaled_identity(2, c));
    ChainEnsemble ens = initialize(InitSpec::gaussian(Eigen::Vector2d(1, 1), 1.0), 200, seed);
    std::size_t mismatched = 0;
    double worst = 0.0;
    for (int step = 0; step < 50; ++step) {
      const ChainEnsemble next = tiprel_step(ens, pot, *pc, h);
      for (Eigen::Index i = 0; i < 200; ++i) {
        Vector z(2);
        for (Eigen::Index j = 0; j < 2; ++j) {
          z(j) = normal_stream(seed, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(step),
                               static_cast<std::uint64_t>(j));
        }
        const Vector want = tamed_ula(pot, c, ens.positions.row(i).transpose(), h, z);
        const Vector got = next.positions.row(i).transpose();
        if (got != want) ++mismatched;
        worst = std::max(worst, (got - want).cwiseAbs().maxCoeff() / want.cwiseAbs().maxCoeff());
      }
      ens = next;
    }
    pass = pass && (c == 1.0 ? mismatched == 0 : worst <= 1e-14);
    detail += fmt("c=%.3g: %zu/10000 not bitwise, max rel %.1e; ", c, mismatched, worst);
  }
  detail.resize(detail.size() - 2);
  return {pass, detail};
}

Outcome gaussian_convergence() {
  const Quadratic pot({SymMatrix::diagonal(Eigen::Vector2d(1.0, 4.0)), Vector::Zero(2)});
  const auto pc = fixed_matrix(SymMatrix::diagonal(Eigen::Vector2d(1.0, 0.25)));
  const std::int64_t k = 1000;
  std::vector<double> times, errors;
  RunOptions opts;
  opts.keep_snapshots = false;
  opts.on_record = [&](const ChainEnsemble& e) {
    times.push_back(e.time);
    errors.push_back(mean_error(make_sample_set(e.positions), Vector::Zero(2)));
  };
  run_chain(InitSpec::dirac(Eigen::Vector2d(5, 5)), 2000, pot, *pc, StepSchedule::constant(1e-2), k,
            RecordingPlan::every(k, 10), 8, opts);

  // Trailing 10-point moving average; the decay phase runs until it first
  // drops below 1e-2.
  const std::size_t w = 10;
  std::vector<double> smooth;
  for (std::size_t i = w - 1; i < errors.size(); ++i) {
    smooth.push_back(std::accumulate(errors.begin() + static_cast<long>(i + 1 - w),
                                     errors.begin() + static_cast<long>(i + 1), 0.0) / w);
  }
  std::size_t end = 0;
  while (end < smooth.size() && smooth[end] >= 1e-2) ++end;
  bool monotone = true;
  for (std::size_t i = 1; i <= std::min(end, smooth.size() - 1); ++i) monotone = monotone && smooth[i] <= smooth[i - 1];

  // Least squares of log(error) on time over the raw points of the decay phase.
  const std::size_t n = std::min(end + w, errors.size());
  double st = 0, sl = 0, stt = 0, stl = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double l = std::log(errors[i]);
    st += times[i];
    sl += l;
    stt += times[i] * times[i];
    stl += times[i] * l;
  }
  const double slope = (n * stl - st * sl) / (n * stt - st * st);
  const double final_err = errors.back();
  const bool reached = end < smooth.size() && smooth.back() < 1e-2 && final_err < 1e-2;
  return {monotone && reached && slope < 0.0,
          fmt("error %.3g -> %.2e (smoothed below 1e-2 at t = %.2f), decay phase monotone: %s, "
              "log-linear slope %.3f per unit time",
              errors.front(), final_err, end < smooth.size() ? times[end + w - 1] : NAN,
              monotone ? "yes" : "no", slope)};
}

ExperimentConfig rosenbrock_config() {
  ExperimentConfig cfg;
  cfg.potential = "rosenbrock";
  cfg.steps = 10000;
  cfg.chains = 2000;
  cfg.schedule_h = 6e-3;
  cfg.init = "gaussian";
  cfg.init_mean = {0.0};
  cfg.init_std = 1.0;
  cfg.metrics = {"w2", "diverged"};
  cfg.record = "endpoints";
  cfg.seed = 0;
  cfg.validate();
  return cfg;
}

Outcome rosenbrock_ordering() {
  ExperimentConfig cfg = rosenbrock_config();
  const PotentialPtr pot = build_potential(cfg);
  const GroundTruth gt = build_ground_truth(cfg, *pot);
  std::map<std::string, double> w2;
  for (const char* p : {"constant", "curvature", "interpolated"}) {
    cfg.precond = p;
    w2[p] = *run_sample(cfg, pot, gt).metrics.last("w2_avg");
  }
  const double c = w2["constant"], cu = w2["curvature"], in = w2["interpolated"];
  return {cu < c && in < c && in <= 1.5 * cu,
          fmt("final avg marginal W2: constant %.4f, curvature %.4f, interpolated %.4f (ratio %.2f)", c, cu, in,
              in / cu)};
}

Outcome step_size_sweep() {
  ExperimentConfig cfg = rosenbrock_config();
  const PotentialPtr pot = build_potential(cfg);
  const GroundTruth gt = build_ground_truth(cfg, *pot);
  const std::vector<double> grid{1e-4, 1e-3, 6e-3, 3e-2, 1e-1};
  const std::vector<std::string> methods{"constant", "curvature", "interpolated"};
  std::map<std::string, std::vector<double>> w2;
  std::map<std::string, std::vector<double>> diverged;
  for (const auto& p : methods) {
    for (double h : grid) {
      cfg.precond = p;
      cfg.schedule_h = h;
      double value = NAN, div = NAN;
      try {
        const SampleOutcome r = run_sample(cfg, pot, gt);
        value = *r.metrics.last("w2_avg");
        div = *r.metrics.last("diverged");
      } catch (const DivergenceError&) {
      }
      w2[p].push_back(value);
      diverged[p].push_back(div);
    }
  }
  bool dominated = true;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (const char* p : {"curvature", "interpolated"}) {
      const double c = w2["constant"][i], o = w2[p][i];
      if (std::isfinite(c) && std::isfinite(o) && !(c > o)) dominated = false;
    }
  }
  bool tradeoff = false;
  for (const auto& p : methods) {
    for (std::size_t i = 1; i < grid.size(); ++i) {
      const double now = w2[p][i], before = w2[p][i - 1];
      if (!std::isfinite(now) || diverged[p][i] > 0 || (std::isfinite(before) && now > before)) tradeoff = true;
    }
  }
  std::string table;
  for (const auto& p : methods) {
    table += p + " [";
    for (std::size_t i = 0; i < grid.size(); ++i) table += fmt(i ? " %.3g" : "%.3g", w2[p][i]);
    table += "] ";
  }
  return {dominated && tradeoff,
          fmt("constant worse at every common h: %s, divergence or W2 increase at larger h: %s; ",
              dominated ? "yes" : "no", tradeoff ? "yes" : "no") +
              "final W2 over h = 1e-4..1e-1: " + table};
}

ExperimentConfig heart_config() {
  ExperimentConfig cfg;
  cfg.potential = "logistic";
  cfg.logistic_data = kHeart;
  cfg.logistic_standardize = true;
  cfg.ground_truth = "mala";
  cfg.mala_chains = 1000;
  cfg.mala_iters = 2000;
  cfg.mala_target_accept = 0.5;
  cfg.mala_init = "laplace";
  cfg.seed = 0;
  cfg.validate();
  return cfg;
}

Outcome mala_tuner() {
  const ExperimentConfig cfg = heart_config();
  const PotentialPtr pot = build_potential(cfg);
  const InitSpec init = laplace_init(*pot, Vector::Zero(static_cast<Eigen::Index>(pot->dim())));
  const MalaReference ref = mala_reference(*pot, init, 1000, 500, 0.5, 11, cfg.mala_h_init);
  return {ref.acceptance >= 0.45 && ref.acceptance <= 0.55,
          fmt("standardized heart posterior (N = %zu, d = %zu): tuned h = %.3e, tuning acceptance %.3f, measured over "
              "1000 chains x 500 iterations %.3f",
              dynamic_cast<const LogisticPosterior&>(*pot).model().num_data(), pot->dim(), ref.h,
              ref.tune_acceptance, ref.acceptance)};
}

Outcome logistic_ordering() {
  ExperimentConfig cfg = heart_config();
  cfg.chains = 1000;
  cfg.steps = 5000;
  cfg.schedule_h = 5e-3;
  cfg.init = "dirac";
  cfg.init_point = {1.0};
  cfg.metrics = {"mean_error", "diverged"};
  cfg.record = "endpoints";
  auto clock = std::chrono::steady_clock::now();
  auto lap = [&clock] {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - clock).count();
    clock = now;
    return s;
  };
  const PotentialPtr pot = build_potential(cfg);
  const GroundTruth gt = build_ground_truth(cfg, *pot);
  std::string timing = fmt("reference %.0f s", lap());
  std::map<std::string, double> mse;
  const std::vector<std::string> methods{"constant", "covariance", "fisher", "curvature", "interpolated"};
  for (const auto& p : methods) {
    cfg.precond = p;
    try {
      mse[p] = *run_sample(cfg, pot, gt).metrics.last("mean_sq_error");
    } catch (const DivergenceError&) {
      mse[p] = NAN;
    }
    timing += fmt(", %s %.0f s", p.c_str(), lap());
  }
  bool pass = std::isfinite(mse["constant"]);
  std::string detail = "standardized heart, squared mean error after 5000 steps:";
  for (const auto& p : methods) {
    if (p != "constant") pass = pass && mse[p] < 0.1 * mse["constant"];
    detail += fmt(" %s %.3e", p.c_str(), mse[p]);
  }
  return {pass, detail + " (" + timing + ")"};
}

Outcome w2_oracle() {
  std::mt19937_64 gen(13);
  std::uniform_int_distribution<int> size(1, 8), value(-50, 50);
  std::size_t mismatches = 0;
  for (int t = 0; t < 200; ++t) {
    const int n = size(gen);
    std::vector<double> x(n), y(n);
    for (auto& v : x) v = value(gen);
    for (auto& v : y) v = value(gen);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = INFINITY;
    do {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += (x[i] - y[perm[i]]) * (x[i] - y[perm[i]]);
      best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    if (w2_sorted(x, y) != std::sqrt(best / n)) ++mismatches;
  }
  return {mismatches == 0, fmt("200 random integer-valued pairs (n <= 8): %zu mismatches vs brute-force assignment",
                               mismatches)};
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

Outcome determinism() {
  const std::vector<std::string> configs{
      "--precond curvature --precond.epsilon 1e-3 --chains 500 --steps 2000 --schedule.h 6e-3 --ground_truth.n 2000",
      "--precond interpolated --chains 500 --steps 2000 --schedule.h 6e-3 --ground_truth.n 2000 --init dirac "
      "--init.point 0",
      "--potential quadratic --quadratic.precision 1,4 --precond covariance --schedule decay --schedule.h0 0.05 "
      "--schedule.gamma 0.75 --chains 300 --steps 500 --metrics w2,mean_error,cosine,diverged",
      "--potential logistic --logistic.n 100 --logistic.d 4 --precond fisher --mala.chains 100 --mala.iters 100 "
      "--chains 200 --steps 300 --schedule.h 5e-3",
  };
  const fs::path root = fs::temp_directory_path() / "tiprel_acceptance_determinism";
  fs::remove_all(root);
  std::size_t identical = 0, total = 0;
  bool ok = true;
  for (std::size_t c = 0; c < configs.size(); ++c) {
    std::vector<fs::path> dirs;
    for (int workers : {1, 4, 1}) {
      dirs.push_back(root / fmt("c%zu_run%zu", c, dirs.size()));
      if (run_cli(fmt("sample --workers %d --seed 3 --out ", workers) + dirs.back().string() + " " + configs[c]) != 0) {
        ok = false;
      }
    }
    for (const char* f : {"samples.csv", "metrics.csv"}) {
      const std::string ref = slurp(dirs[0] / f);
      for (std::size_t r = 1; r < dirs.size(); ++r) {
        ++total;
        if (!ref.empty() && slurp(dirs[r] / f) == ref) ++identical;
      }
    }
  }
  fs::remove_all(root);
  return {ok && identical == total,
          fmt("%zu sample configs run with 1, 4 and 1 workers: %zu/%zu CSV comparisons byte-identical", configs.size(),
              identical, total)};
}

Outcome heart_dataset() {
  const LogisticModel m = load_heart_csv(kHeart);
  return {m.num_data() == 297 && m.dim() == 13, fmt("N = %zu, d = %zu", m.num_data(), m.dim())};
}

struct Criterion {
  int id;
  const char* slug;
  double budget_s;  // 0: no runtime bound
  Outcome (*run)();
};

const Criterion kCriteria[] = {
    {1, "taming_bound", 1, taming_bound},
    {2, "derivative_oracles", 5, derivative_oracles},
    {3, "rosenbrock_lipschitz", 5, rosenbrock_lipschitz},
    {4, "ancestral_moments", 1, ancestral_moments},
    {5, "divergence_correction", 60, divergence_correction},
    {6, "fd_divergence", 0, fd_divergence_accuracy},
    {7, "ula_equivalence", 0, ula_equivalence},
    {8, "gaussian_convergence", 30, gaussian_convergence},
    {9, "rosenbrock_ordering", 300, rosenbrock_ordering},
    {10, "step_size_sweep", 900, step_size_sweep},
    {11, "mala_tuner", 60, mala_tuner},
    {12, "logistic_ordering", 300, logistic_ordering},
    {13, "w2_oracle", 0, w2_oracle},
    {14, "determinism", 0, determinism},
    {15, "heart_dataset", 0, heart_dataset},
};

bool run(const Criterion& c) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = c.run();
  } catch (const std::exception& e) {
    o = {false, std::string("error: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = c.budget_s == 0 || secs < c.budget_s;
  const bool pass = o.pass && in_time;
  std::string timing = fmt("%.2f s", secs);
  if (c.budget_s > 0) timing += fmt(" of %.0f s%s", c.budget_s, in_time ? "" : ", over budget");
  std::cout << (pass ? "PASS" : "FAIL") << fmt(" %2d %-22s ", c.id, c.slug) << o.detail << " [" << timing << "]"
            << std::endl;
  return pass;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
  bool all = true;
  for (const auto& c : kCriteria) {
    if (ids.empty() || std::find(ids.begin(), ids.end(), c.id) != ids.end()) all = run(c) && all;
  }
  return all ? 0 : 1;
}
