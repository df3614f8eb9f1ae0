#include "tiprel/mala.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <string>

#include "tiprel/errors.hpp"

namespace tiprel {

double mala_log_accept(double psi, const Vector& grad, const Vector& y, double psi_new,
                       const Vector& grad_new, const Vector& y_new, double h) {
  const double forward = (y_new - y + h * grad).squaredNorm();
  const double backward = (y - y_new + h * grad_new).squaredNorm();
  return psi - psi_new + forward / (4.0 * h) - backward / (4.0 * h);
}

MalaChains::MalaChains(ChainEnsemble ens, const Potential& pot, Exec exec) : ens_(std::move(ens)) {
  if (pot.dim() != ens_.dim()) throw InvalidInput("MalaChains: dimension mismatch");
  const auto n = static_cast<std::int64_t>(ens_.num_chains());
  psi_.resize(n);
  grad_.resize(n, ens_.positions.cols());
  auto prime = [&](std::int64_t i) {
    const Vector y = ens_.positions.row(i).transpose();
    psi_(i) = pot.value(y);
    grad_.row(i) = pot.gradient(y).transpose();
  };
  if (exec == Exec::serial) {
    for (std::int64_t i = 0; i < n; ++i) prime(i);
  } else {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) prime(i);
  }
  for (std::int64_t i = 0; i < n; ++i) {
    if (!std::isfinite(psi_(i)) || !grad_.row(i).allFinite()) {
      throw InvalidInput("MalaChains: potential not finite at chain " + std::to_string(i));
    }
  }
}

double MalaChains::step(const Potential& pot, double h, Exec exec) {
  if (!(h > 0.0)) throw InvalidInput("mala_step: h must be positive");
  const CounterRng rng(ens_.seed);
  const auto n = static_cast<std::int64_t>(ens_.num_chains());
  const std::size_t d = ens_.dim();
  const auto k = static_cast<std::uint64_t>(ens_.step);
  const double scale = std::sqrt(2.0 * h);
  std::vector<std::uint8_t> accepted(static_cast<std::size_t>(n), 0);

  auto one = [&](std::int64_t i) {
    const auto c = static_cast<std::size_t>(i);
    if (ens_.diverged[c]) return;
    const Vector y = ens_.positions.row(i).transpose();
    const Vector g = grad_.row(i).transpose();
    Vector z(static_cast<Eigen::Index>(d));
    rng.normals(Stream::mala_proposal, c, k, {z.data(), d});
    const Vector proposal = y - h * g + scale * z;
    if (!proposal.allFinite()) return;
    const double psi_new = pot.value(proposal);
    if (!std::isfinite(psi_new)) return;
    const Vector g_new = pot.gradient(proposal);
    if (!g_new.allFinite()) return;
    const double log_alpha = mala_log_accept(psi_(i), g, y, psi_new, g_new, proposal, h);
    const double u = rng.uniform(Stream::mala_accept, c, k, 0);
    if (std::log(u) < log_alpha) {
      ens_.positions.row(i) = proposal.transpose();
      psi_(i) = psi_new;
      grad_.row(i) = g_new.transpose();
      accepted[c] = 1;
    }
  };

  if (exec == Exec::serial) {
    for (std::int64_t i = 0; i < n; ++i) one(i);
  } else {
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 8)
    for (std::int64_t i = 0; i < n; ++i) {
      try {
        one(i);
      } catch (...) {
#pragma omp critical(tiprel_mala_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  }

  ens_.time += h;
  ens_.step += 1;
  std::size_t live = 0;
  std::size_t acc = 0;
  for (std::size_t c = 0; c < accepted.size(); ++c) {
    if (ens_.diverged[c]) continue;
    ++live;
    acc += accepted[c];
  }
  return live ? static_cast<double>(acc) / static_cast<double>(live) : 0.0;
}

std::pair<ChainEnsemble, double> mala_step(const ChainEnsemble& ens, const Potential& pot,
                                           double h, Exec exec) {
  MalaChains chains(ens, pot, exec);
  const double rate = chains.step(pot, h, exec);
  return {chains.ensemble(), rate};
}

double mala_acceptance(const ChainEnsemble& start, const Potential& pot, double h,
                       std::int64_t steps, Exec exec) {
  MalaChains chains(start, pot, exec);
  double total = 0.0;
  for (std::int64_t s = 0; s < steps; ++s) total += chains.step(pot, h, exec);
  return steps > 0 ? total / static_cast<double>(steps) : 0.0;
}

MalaTuneResult mala_tune(const Potential& pot, const InitSpec& init, double target_rate,
                         std::uint64_t seed, const MalaTuneOptions& opts) {
  if (!(target_rate > 0.0 && target_rate < 1.0)) {
    throw InvalidInput("mala_tune: target rate must be in (0,1)");
  }
  if (!(opts.initial_h > 0.0)) throw InvalidInput("mala_tune: initial h must be positive");

  // Warm-up with multiplicative adaptation so the pilot runs start from a
  // region where the acceptance rate is representative.
  MalaChains chains(initialize(init, opts.chains, seed), pot);
  double h = opts.initial_h;
  for (std::int64_t s = 0; s < opts.warmup_steps; ++s) {
    const double rate = chains.step(pot, h);
    h *= std::exp(2.0 * (rate - target_rate));
  }

  MalaTuneResult result;
  result.warm = chains.ensemble();
  result.warm.step = 0;
  result.warm.time = 0.0;

  auto pilot = [&](double hh) { return mala_acceptance(result.warm, pot, hh, opts.pilot_steps); };

  double rate = pilot(h);
  double lo = h;  // acceptance(lo) >= target
  double hi = h;  // acceptance(hi) < target
  double rate_lo = rate;
  double rate_hi = rate;
  double best_h = h;
  double best_rate = rate;
  auto consider = [&](double hh, double r) {
    if (std::abs(r - target_rate) < std::abs(best_rate - target_rate)) {
      best_h = hh;
      best_rate = r;
    }
  };

  int bracket_steps = 0;
  if (rate >= target_rate) {
    do {
      lo = hi;
      rate_lo = rate_hi;
      hi *= 2.0;
      rate_hi = pilot(hi);
      consider(hi, rate_hi);
      if (++bracket_steps > opts.max_bracket_steps) {
        throw Error("mala_tune: acceptance stays above target after " +
                    std::to_string(opts.max_bracket_steps) + " doublings");
      }
    } while (rate_hi >= target_rate);
  } else {
    do {
      hi = lo;
      rate_hi = rate_lo;
      lo *= 0.5;
      rate_lo = pilot(lo);
      consider(lo, rate_lo);
      if (++bracket_steps > opts.max_bracket_steps) {
        throw Error("mala_tune: acceptance stays below target after " +
                    std::to_string(opts.max_bracket_steps) + " halvings");
      }
    } while (rate_lo < target_rate);
  }

  for (int it = 0; it < opts.max_bisection_steps; ++it) {
    if (std::abs(best_rate - target_rate) <= opts.tolerance) break;
    const double mid = std::sqrt(lo * hi);
    const double r = pilot(mid);
    consider(mid, r);
    if (r >= target_rate) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (std::abs(best_rate - target_rate) > 0.05) {
    throw Error("mala_tune: could not reach target acceptance " + std::to_string(target_rate) +
                " (best " + std::to_string(best_rate) + ")");
  }
  result.h = best_h;
  result.pilot_acceptance = best_rate;
  return result;
}

Vector find_mode(const Potential& pot, const Vector& start, int max_iters) {
  Vector x = start;
  double fx = pot.value(x);
  for (int it = 0; it < max_iters; ++it) {
    const Vector g = pot.gradient(x);
    if (g.norm() <= 1e-10 * (1.0 + std::abs(fx))) break;
    const Vector dir = -(spd_inverse(pot.hessian(x)) * g);
    double step = 1.0;
    Vector next = x + dir;
    double fnext = pot.value(next);
    while (!(fnext <= fx + 1e-4 * step * g.dot(dir)) && step > 1e-12) {
      step *= 0.5;
      next = x + step * dir;
      fnext = pot.value(next);
    }
    if (!(fnext <= fx)) break;
    const bool stalled = (next - x).norm() <= 1e-14 * (1.0 + x.norm());
    x = next;
    fx = fnext;
    if (stalled) break;
  }
  return x;
}

InitSpec laplace_init(const Potential& pot, const Vector& start) {
  const Vector mode = find_mode(pot, start);
  return InitSpec::gaussian_full(mode, spd_inverse(pot.hessian(mode)));
}

}  // namespace tiprel
