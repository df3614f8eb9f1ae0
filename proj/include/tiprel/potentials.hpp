#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>

#include "tiprel/linalg.hpp"

namespace tiprel {

/// Potential Psi of a Gibbs density p(x) ~ exp(-Psi(x)) on R^d. Normalizing
/// constants are dropped: only differences of values and the derivatives
/// enter any sampler.
///
/// Implementations are immutable; every member is safe to call concurrently.
class Potential {
 public:
  virtual ~Potential() = default;

  virtual std::size_t dim() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;
  virtual SymMatrix hessian(const Vector& x) const = 0;

  /// Column l of the result is grad_x (u_l^T Hess(x) u_l) for the l-th column
  /// u_l of `directions`, i.e. the third derivative contracted twice with
  /// u_l. Potentials that do not provide third derivatives return nullopt.
  virtual std::optional<Matrix> curvature_gradients(const Vector& x,
                                                    const Matrix& directions) const {
    (void)x;
    (void)directions;
    return std::nullopt;
  }

  /// Row sums of curvature_gradients(x, directions).
  virtual std::optional<Vector> curvature_gradient_sum(const Vector& x,
                                                       const Matrix& directions) const {
    if (auto r = curvature_gradients(x, directions)) return Vector(r->rowwise().sum());
    return std::nullopt;
  }
};

using PotentialPtr = std::shared_ptr<const Potential>;

// --- Rosenbrock ----------------------------------------------------------

struct RosenbrockParams {
  double a = 1.0;
  double b = 100.0;
};

double rosenbrock_value(const RosenbrockParams& p, const Vector& x);
Vector rosenbrock_gradient(const RosenbrockParams& p, const Vector& x);
SymMatrix rosenbrock_hessian(const RosenbrockParams& p, const Vector& x);

/// Psi(x1, x2) = (a - x1)^2 + b (x2 - x1^2)^2.
class Rosenbrock final : public Potential {
 public:
  explicit Rosenbrock(RosenbrockParams p = {});

  const RosenbrockParams& params() const { return p_; }
  std::size_t dim() const override { return 2; }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  SymMatrix hessian(const Vector& x) const override;
  std::optional<Matrix> curvature_gradients(const Vector& x,
                                            const Matrix& directions) const override;

 private:
  RosenbrockParams p_;
};

/// Log normalizer of exp(-Psi) for the Rosenbrock potential: Z = pi / sqrt(b).
double rosenbrock_log_partition(const RosenbrockParams& p);

struct Box2 {
  double x1_lo, x1_hi, x2_lo, x2_hi;
};

/// Max of ||Hess(x)||_2 over an n x n uniform grid covering `box` (corners
/// included).
double rosenbrock_lipschitz_grid(const RosenbrockParams& p, const Box2& box, std::size_t n);

/// Max of ||Hess(x)||_2 over the rows of `samples` that fall inside `box`.
double rosenbrock_lipschitz_samples(const RosenbrockParams& p, const Box2& box,
                                    const RowMatrix& samples);

// --- Bayesian logistic regression ----------------------------------------

/// Design matrix rows are feature vectors; labels are 0/1; prior is
/// N(0, diag(prior_vars)).
struct LogisticModel {
  RowMatrix design;
  Vector labels;
  Vector prior_vars;

  std::size_t num_data() const { return static_cast<std::size_t>(design.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(prior_vars.size()); }
  /// Throws InvalidInput unless dimensions agree, labels are binary and prior
  /// variances are positive.
  void validate() const;
};

double softplus(double u);
double sigmoid(double u);

double logistic_value(const LogisticModel& m, const Vector& beta);
Vector logistic_gradient(const LogisticModel& m, const Vector& beta);
SymMatrix logistic_hessian(const LogisticModel& m, const Vector& beta);
/// 1/4 lambda_max(X^T X) + max_j 1/sigma_j^2.
double logistic_lipschitz_bound(const LogisticModel& m);

class LogisticPosterior final : public Potential {
 public:
  explicit LogisticPosterior(LogisticModel model);

  const LogisticModel& model() const { return m_; }
  std::size_t dim() const override { return m_.dim(); }
  double value(const Vector& beta) const override;
  Vector gradient(const Vector& beta) const override;
  SymMatrix hessian(const Vector& beta) const override;
  std::optional<Matrix> curvature_gradients(const Vector& beta,
                                            const Matrix& directions) const override;
  std::optional<Vector> curvature_gradient_sum(const Vector& beta,
                                               const Matrix& directions) const override;

  /// Per-point quantities shared by value, gradient and curvature at the
  /// same beta: logits u and e = exp(-|u|).
  struct Terms {
    std::uint64_t owner = 0;
    Vector beta;
    Eigen::ArrayXd u;
    Eigen::ArrayXd e;
  };

 private:
  const Terms& terms(const Vector& beta) const;

  LogisticModel m_;
  Matrix x_;  // column-major copy of the design
  std::uint64_t id_;
};

// --- Quadratic (Gaussian) --------------------------------------------------

struct QuadraticParams {
  SymMatrix precision;
  Vector mean;
};

double quadratic_value(const QuadraticParams& q, const Vector& x);
Vector quadratic_gradient(const QuadraticParams& q, const Vector& x);
SymMatrix quadratic_hessian(const QuadraticParams& q, const Vector& x);

/// Psi(x) = 1/2 (x - m)^T A (x - m), the potential of N(m, A^{-1}).
class Quadratic final : public Potential {
 public:
  /// Throws NotSpd unless the precision is SPD.
  explicit Quadratic(QuadraticParams q);

  const QuadraticParams& params() const { return q_; }
  std::size_t dim() const override { return q_.precision.dim(); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  SymMatrix hessian(const Vector& x) const override;
  std::optional<Matrix> curvature_gradients(const Vector& x,
                                            const Matrix& directions) const override;

 private:
  QuadraticParams q_;
};

}  // namespace tiprel
