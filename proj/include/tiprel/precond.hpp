#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>

#include "tiprel/linalg.hpp"
#include "tiprel/potentials.hpp"

namespace tiprel {

/// B(t,x), its symmetric square root and its row-wise divergence
/// (div B)_i = sum_j d/dx_j B_ij, evaluated at one (t,x).
struct PrecondEval {
  SymMatrix matrix;
  SymMatrix sqrt;
  Vector divergence;
};

/// SPD matrix field B(t,x) used to precondition Langevin dynamics.
///
/// `evaluate` is the hot path: it returns all three quantities and lets
/// implementations share one eigendecomposition between them. Implementations
/// are immutable and safe for concurrent evaluation. Position-independent
/// preconditioners report an exactly zero divergence.
class Preconditioner {
 public:
  virtual ~Preconditioner() = default;

  virtual std::size_t dim() const = 0;
  virtual bool is_position_dependent() const = 0;
  virtual PrecondEval evaluate(double t, const Vector& x) const = 0;
  /// B and div B only; `sqrt` may be left empty. For callers that build
  /// their own square root.
  virtual PrecondEval matrix_and_divergence(double t, const Vector& x) const { return evaluate(t, x); }

  virtual SymMatrix b_matrix(double t, const Vector& x) const { return evaluate(t, x).matrix; }
  virtual SymMatrix b_sqrt(double t, const Vector& x) const { return evaluate(t, x).sqrt; }
  virtual Vector b_div(double t, const Vector& x) const { return evaluate(t, x).divergence; }
};

using PreconditionerPtr = std::shared_ptr<const Preconditioner>;
using MatrixField = std::function<SymMatrix(double t, const Vector& x)>;
using VectorField = std::function<Vector(double t, const Vector& x)>;

/// Central-difference row-wise divergence of `field` at (t,x):
/// (div B)_i = sum_j [B_ij(x + step e_j) - B_ij(x - step e_j)] / (2 step).
/// Throws InvalidInput if any evaluation is non-finite or step <= 0.
Vector fd_divergence(const MatrixField& field, double t, const Vector& x, double step);

/// B == c I. Throws InvalidInput for c <= 0.
class ConstantScalar final : public Preconditioner {
 public:
  ConstantScalar(double c, std::size_t dim);

  double scale() const { return c_; }
  std::size_t dim() const override { return d_; }
  bool is_position_dependent() const override { return false; }
  PrecondEval evaluate(double t, const Vector& x) const override;

 private:
  double c_;
  std::size_t d_;
  PrecondEval eval_;
};

/// B == M for a fixed SPD matrix M; the square root is computed once.
class FixedMatrix final : public Preconditioner {
 public:
  explicit FixedMatrix(const SymMatrix& m);

  std::size_t dim() const override { return eval_.matrix.dim(); }
  bool is_position_dependent() const override { return false; }
  PrecondEval evaluate(double t, const Vector& x) const override;

 private:
  PrecondEval eval_;
};

/// |.|_eps = max(|.|, eps) applied to Hessian eigenvalues.
struct ClampSpec {
  double epsilon = 1e-3;
};

enum class DivergenceMode {
  /// Spectral (Daleckii-Krein) derivative of Q f(Lambda) Q^T using the
  /// potential's third derivatives; falls back to finite differences when the
  /// potential does not provide them.
  automatic,
  analytic,
  finite_difference,
};

/// B(x) = Q(x) diag(1/|lambda_i|_eps) Q(x)^T from the Hessian eigensystem.
/// Without a clamp, the Hessian must be SPD at every queried point (NotSpd
/// otherwise) and B is its inverse.
class CurvatureAware final : public Preconditioner {
 public:
  CurvatureAware(PotentialPtr pot, std::optional<ClampSpec> clamp,
                 DivergenceMode mode = DivergenceMode::automatic);

  std::size_t dim() const override { return pot_->dim(); }
  bool is_position_dependent() const override { return true; }
  PrecondEval evaluate(double t, const Vector& x) const override;
  PrecondEval matrix_and_divergence(double t, const Vector& x) const override;
  SymMatrix b_matrix(double t, const Vector& x) const override;

  /// Divergence through finite differences of b_matrix, step
  /// 1e-4 * (1 + |x|_inf).
  Vector fd_div(double t, const Vector& x) const;
  bool uses_analytic_divergence() const { return analytic_; }

 private:
  // Clamped eigenvalue magnitude used in place of lambda.
  double clamped(double lambda) const;
  EigenPair checked_eig(const Vector& x) const;

  PotentialPtr pot_;
  std::optional<ClampSpec> clamp_;
  bool analytic_;
};

/// lambda_t schedule of the global-to-local interpolation.
struct Schedule {
  enum class Kind { constant, linear_ramp };

  Kind kind = Kind::linear_ramp;
  double value = 1.0;       // constant
  double total_steps = 1;   // linear_ramp: K
  double step_size = 1.0;   // linear_ramp: h

  static Schedule constant(double lambda);
  /// lambda_t = min(2 t / (K h), 1).
  static Schedule linear_ramp(double total_steps, double step_size);

  double lambda(double t) const;
};

/// B(t,x) = (1 - lambda_t) G + lambda_t L(t,x) for a position-independent G.
/// The divergence is lambda_t div L; the square root is recomputed from the
/// combined matrix.
class Interpolated final : public Preconditioner {
 public:
  Interpolated(PreconditionerPtr global, PreconditionerPtr local, Schedule sched);

  std::size_t dim() const override { return global_->dim(); }
  bool is_position_dependent() const override { return local_->is_position_dependent(); }
  PrecondEval evaluate(double t, const Vector& x) const override;
  SymMatrix b_matrix(double t, const Vector& x) const override;

  const Schedule& schedule() const { return sched_; }

 private:
  PreconditionerPtr global_;
  PreconditionerPtr local_;
  Schedule sched_;
};

/// Arbitrary SPD field given as a callable, with an optional analytic
/// divergence (finite differences with `fd_step` otherwise).
class FieldPreconditioner final : public Preconditioner {
 public:
  FieldPreconditioner(std::size_t dim, MatrixField field, std::optional<VectorField> divergence,
                      bool position_dependent = true, double fd_step = 1e-5);

  std::size_t dim() const override { return d_; }
  bool is_position_dependent() const override { return position_dependent_; }
  PrecondEval evaluate(double t, const Vector& x) const override;
  SymMatrix b_matrix(double t, const Vector& x) const override { return field_(t, x); }

 private:
  std::size_t d_;
  MatrixField field_;
  std::optional<VectorField> div_;
  bool position_dependent_;
  double fd_step_;
};

/// Wraps a preconditioner and reports a zero divergence. Only meaningful for
/// experiments that demonstrate what the correction term does.
class WithoutDivergence final : public Preconditioner {
 public:
  explicit WithoutDivergence(PreconditionerPtr inner) : inner_(std::move(inner)) {}

  std::size_t dim() const override { return inner_->dim(); }
  bool is_position_dependent() const override { return inner_->is_position_dependent(); }
  PrecondEval evaluate(double t, const Vector& x) const override;
  SymMatrix b_matrix(double t, const Vector& x) const override { return inner_->b_matrix(t, x); }

 private:
  PreconditionerPtr inner_;
};

PreconditionerPtr constant_scalar(double c, std::size_t dim);
PreconditionerPtr fixed_matrix(const SymMatrix& m);
PreconditionerPtr curvature_aware(PotentialPtr pot, std::optional<ClampSpec> clamp,
                                  DivergenceMode mode = DivergenceMode::automatic);
PreconditionerPtr interpolated(PreconditionerPtr global, PreconditionerPtr local, Schedule sched);

/// b(t,x) = -B(t,x) grad Psi(x) + div B(t,x).
Vector drift(const Potential& pot, const Preconditioner& pc, double t, const Vector& x);
/// Same as drift() but reusing an already evaluated preconditioner.
Vector drift(const Vector& grad, const PrecondEval& eval);

}  // namespace tiprel
