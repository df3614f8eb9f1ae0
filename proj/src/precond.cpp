#include "tiprel/precond.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tiprel/errors.hpp"

namespace tiprel {

Vector fd_divergence(const MatrixField& field, double t, const Vector& x, double step) {
  if (!(step > 0.0)) throw InvalidInput("fd_divergence: step must be positive");
  const Eigen::Index d = x.size();
  Vector div = Vector::Zero(d);
  Vector probe = x;
  for (Eigen::Index j = 0; j < d; ++j) {
    probe(j) = x(j) + step;
    const SymMatrix plus = field(t, probe);
    probe(j) = x(j) - step;
    const SymMatrix minus = field(t, probe);
    probe(j) = x(j);
    if (!plus.all_finite() || !minus.all_finite()) {
      throw InvalidInput("fd_divergence: non-finite field value");
    }
    div += (plus.dense().col(j) - minus.dense().col(j)) / (2.0 * step);
  }
  return div;
}

// --- ConstantScalar / FixedMatrix -----------------------------------------

ConstantScalar::ConstantScalar(double c, std::size_t dim) : c_(c), d_(dim) {
  if (!(c > 0.0) || !std::isfinite(c)) throw InvalidInput("constant_scalar: c must be positive");
  if (dim == 0) throw InvalidInput("constant_scalar: dimension must be positive");
  eval_.matrix = SymMatrix::scaled_identity(dim, c);
  eval_.sqrt = SymMatrix::scaled_identity(dim, std::sqrt(c));
  eval_.divergence = Vector::Zero(static_cast<Eigen::Index>(dim));
}

PrecondEval ConstantScalar::evaluate(double, const Vector&) const { return eval_; }

FixedMatrix::FixedMatrix(const SymMatrix& m) {
  eval_.matrix = m;
  eval_.sqrt = spd_sqrt(m);
  eval_.divergence = Vector::Zero(static_cast<Eigen::Index>(m.dim()));
}

PrecondEval FixedMatrix::evaluate(double, const Vector&) const { return eval_; }

// --- CurvatureAware --------------------------------------------------------

CurvatureAware::CurvatureAware(PotentialPtr pot, std::optional<ClampSpec> clamp,
                               DivergenceMode mode)
    : pot_(std::move(pot)), clamp_(clamp) {
  if (!pot_) throw InvalidInput("curvature_aware: null potential");
  if (clamp_ && !(clamp_->epsilon > 0.0)) {
    throw InvalidInput("curvature_aware: clamp epsilon must be positive");
  }
  const Vector probe = Vector::Zero(static_cast<Eigen::Index>(pot_->dim()));
  const bool has_third =
      pot_->curvature_gradients(probe, Matrix::Identity(probe.size(), 1)).has_value();
  switch (mode) {
    case DivergenceMode::automatic:
      analytic_ = has_third;
      break;
    case DivergenceMode::analytic:
      if (!has_third) {
        throw InvalidInput("curvature_aware: potential provides no third derivatives");
      }
      analytic_ = true;
      break;
    case DivergenceMode::finite_difference:
      analytic_ = false;
      break;
  }
}

double CurvatureAware::clamped(double lambda) const {
  return clamp_ ? std::max(std::abs(lambda), clamp_->epsilon) : lambda;
}

EigenPair CurvatureAware::checked_eig(const Vector& x) const {
  EigenPair eig = sym_eig(pot_->hessian(x));
  if (!clamp_ && !is_spd(eig)) {
    throw NotSpd("curvature_aware: Hessian is not positive definite and clamping is off");
  }
  return eig;
}

SymMatrix CurvatureAware::b_matrix(double, const Vector& x) const {
  return spectral_map(checked_eig(x), [this](double l) { return 1.0 / clamped(l); });
}

Vector CurvatureAware::fd_div(double t, const Vector& x) const {
  const double step = 1e-4 * (1.0 + x.cwiseAbs().maxCoeff());
  return fd_divergence([this](double tt, const Vector& y) { return b_matrix(tt, y); }, t, x, step);
}

PrecondEval CurvatureAware::evaluate(double t, const Vector& x) const {
  const EigenPair eig = checked_eig(x);
  const Eigen::Index d = eig.values.size();

  Vector inv(d);
  Vector inv_sqrt(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    inv(i) = 1.0 / clamped(eig.values(i));
    inv_sqrt(i) = std::sqrt(inv(i));
  }
  const Matrix& q = eig.vectors;

  PrecondEval out;
  out.matrix = SymMatrix::from_upper(q * inv.asDiagonal() * q.transpose());
  out.sqrt = SymMatrix::from_upper(q * inv_sqrt.asDiagonal() * q.transpose());

  if (!analytic_) {
    out.divergence = fd_div(t, x);
    return out;
  }

  if (!clamp_) {
    // B = H^-1, so div B = -B sum_l grad(v_l^T H v_l) with v_l = q_l / sqrt(lambda_l).
    const Matrix scaled = q * inv_sqrt.asDiagonal();
    out.divergence = -(out.matrix * *pot_->curvature_gradient_sum(x, scaled));
    return out;
  }

  // d/dx_j f(H) = Q (F o (Q^T dH/dx_j Q)) Q^T with F the first divided
  // differences of f(l) = 1/|l|_eps. Summing the (i,j) entries over j only
  // needs g_kl = q_k^T grad(q_l^T H q_l).
  const Matrix r = *pot_->curvature_gradients(x, q);
  const Matrix g = q.transpose() * r;
  auto deriv = [this](double l) {
    if (clamp_ && std::abs(l) <= clamp_->epsilon) return 0.0;
    return -1.0 / (l * std::abs(l));
  };
  Vector v = Vector::Zero(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    for (Eigen::Index l = 0; l < d; ++l) {
      const double lk = eig.values(k);
      const double ll = eig.values(l);
      const double gap = lk - ll;
      const double scale = std::max({1.0, std::abs(lk), std::abs(ll)});
      const double f_kl = std::abs(gap) > 1e-8 * scale ? (inv(k) - inv(l)) / gap
                                                        : deriv(0.5 * (lk + ll));
      v(k) += f_kl * g(k, l);
    }
  }
  out.divergence = q * v;
  return out;
}

PrecondEval CurvatureAware::matrix_and_divergence(double t, const Vector& x) const {
  if (clamp_ || !analytic_) return evaluate(t, x);
  // B = H^-1 = V V^T with V = L^-T from H = L L^T. The identity
  // div B = -B sum_l grad(v_l^T H v_l) holds for any such factor V.
  const SymMatrix h = pot_->hessian(x);
  if (!h.all_finite()) throw InvalidInput("curvature_aware: non-finite Hessian");
  const Eigen::LLT<Matrix> llt(h.dense());
  if (llt.info() != Eigen::Success) {
    throw NotSpd("curvature_aware: Hessian is not positive definite and clamping is off");
  }
  const Eigen::Index d = h.dense().rows();
  const Matrix v = llt.matrixL().solve(Matrix::Identity(d, d)).transpose();
  PrecondEval out;
  out.matrix = SymMatrix::from_upper(v * v.transpose());
  out.divergence = -(out.matrix * *pot_->curvature_gradient_sum(x, v));
  return out;
}

// --- Interpolated ----------------------------------------------------------

Schedule Schedule::constant(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidInput("Schedule: lambda must be in [0,1]");
  Schedule s;
  s.kind = Kind::constant;
  s.value = lambda;
  return s;
}

Schedule Schedule::linear_ramp(double total_steps, double step_size) {
  if (!(total_steps > 0.0) || !(step_size > 0.0)) {
    throw InvalidInput("Schedule: ramp needs positive K and h");
  }
  Schedule s;
  s.kind = Kind::linear_ramp;
  s.total_steps = total_steps;
  s.step_size = step_size;
  return s;
}

double Schedule::lambda(double t) const {
  if (kind == Kind::constant) return value;
  return std::clamp(2.0 * t / (total_steps * step_size), 0.0, 1.0);
}

Interpolated::Interpolated(PreconditionerPtr global, PreconditionerPtr local, Schedule sched)
    : global_(std::move(global)), local_(std::move(local)), sched_(sched) {
  if (!global_ || !local_) throw InvalidInput("interpolated: null preconditioner");
  if (global_->is_position_dependent()) {
    throw InvalidInput("interpolated: global preconditioner must be position-independent");
  }
  if (global_->dim() != local_->dim()) throw InvalidInput("interpolated: dimension mismatch");
}

SymMatrix Interpolated::b_matrix(double t, const Vector& x) const {
  const double lam = sched_.lambda(t);
  if (lam <= 0.0) return global_->b_matrix(t, x);
  if (lam >= 1.0) return local_->b_matrix(t, x);
  return global_->b_matrix(t, x) * (1.0 - lam) + local_->b_matrix(t, x) * lam;
}

PrecondEval Interpolated::evaluate(double t, const Vector& x) const {
  const double lam = sched_.lambda(t);
  if (lam <= 0.0) return global_->evaluate(t, x);
  if (lam >= 1.0) return local_->evaluate(t, x);
  const PrecondEval local = local_->matrix_and_divergence(t, x);
  PrecondEval out;
  out.matrix = global_->b_matrix(t, x) * (1.0 - lam) + local.matrix * lam;
  out.sqrt = spd_sqrt(out.matrix);
  out.divergence = lam * local.divergence;
  return out;
}

// --- FieldPreconditioner / WithoutDivergence -------------------------------

FieldPreconditioner::FieldPreconditioner(std::size_t dim, MatrixField field,
                                         std::optional<VectorField> divergence,
                                         bool position_dependent, double fd_step)
    : d_(dim),
      field_(std::move(field)),
      div_(std::move(divergence)),
      position_dependent_(position_dependent),
      fd_step_(fd_step) {
  if (dim == 0) throw InvalidInput("FieldPreconditioner: dimension must be positive");
  if (!field_) throw InvalidInput("FieldPreconditioner: empty field");
}

PrecondEval FieldPreconditioner::evaluate(double t, const Vector& x) const {
  PrecondEval out;
  out.matrix = field_(t, x);
  out.sqrt = spd_sqrt(out.matrix);
  if (!position_dependent_) {
    out.divergence = Vector::Zero(static_cast<Eigen::Index>(d_));
  } else if (div_) {
    out.divergence = (*div_)(t, x);
  } else {
    out.divergence = fd_divergence(field_, t, x, fd_step_);
  }
  return out;
}

PrecondEval WithoutDivergence::evaluate(double t, const Vector& x) const {
  PrecondEval out = inner_->evaluate(t, x);
  out.divergence.setZero();
  return out;
}

// --- factories / drift -----------------------------------------------------

PreconditionerPtr constant_scalar(double c, std::size_t dim) {
  return std::make_shared<ConstantScalar>(c, dim);
}

PreconditionerPtr fixed_matrix(const SymMatrix& m) { return std::make_shared<FixedMatrix>(m); }

PreconditionerPtr curvature_aware(PotentialPtr pot, std::optional<ClampSpec> clamp,
                                  DivergenceMode mode) {
  return std::make_shared<CurvatureAware>(std::move(pot), clamp, mode);
}

PreconditionerPtr interpolated(PreconditionerPtr global, PreconditionerPtr local, Schedule sched) {
  return std::make_shared<Interpolated>(std::move(global), std::move(local), sched);
}

Vector drift(const Vector& grad, const PrecondEval& eval) {
  Vector b = -(eval.matrix * grad);
  b += eval.divergence;
  return b;
}

Vector drift(const Potential& pot, const Preconditioner& pc, double t, const Vector& x) {
  if (pot.dim() != pc.dim()) throw InvalidInput("drift: potential/preconditioner dimension mismatch");
  return drift(pot.gradient(x), pc.evaluate(t, x));
}

}  // namespace tiprel
