#include "tiprel/potentials.hpp"

#include <atomic>
#include <cmath>
#include <numbers>

#include "tiprel/errors.hpp"

namespace tiprel {

namespace {

void require_dim(const Vector& x, std::size_t d, const char* who) {
  if (static_cast<std::size_t>(x.size()) != d) {
    throw InvalidInput(std::string(who) + ": expected dimension " + std::to_string(d) +
                       ", got " + std::to_string(x.size()));
  }
}

}  // namespace

// --- Rosenbrock ----------------------------------------------------------

double rosenbrock_value(const RosenbrockParams& p, const Vector& x) {
  require_dim(x, 2, "rosenbrock_value");
  const double r = p.a - x(0);
  const double v = x(1) - x(0) * x(0);
  return r * r + p.b * v * v;
}

Vector rosenbrock_gradient(const RosenbrockParams& p, const Vector& x) {
  require_dim(x, 2, "rosenbrock_gradient");
  const double v = x(1) - x(0) * x(0);
  Vector g(2);
  g(0) = -2.0 * (p.a - x(0)) - 4.0 * p.b * x(0) * v;
  g(1) = 2.0 * p.b * v;
  return g;
}

SymMatrix rosenbrock_hessian(const RosenbrockParams& p, const Vector& x) {
  require_dim(x, 2, "rosenbrock_hessian");
  SymMatrix h(2);
  h.set(0, 0, 2.0 + 12.0 * p.b * x(0) * x(0) - 4.0 * p.b * x(1));
  h.set(0, 1, -4.0 * p.b * x(0));
  h.set(1, 1, 2.0 * p.b);
  return h;
}

Rosenbrock::Rosenbrock(RosenbrockParams p) : p_(p) {
  if (!(p_.b > 0.0)) throw InvalidInput("Rosenbrock: b must be positive");
}

double Rosenbrock::value(const Vector& x) const { return rosenbrock_value(p_, x); }
Vector Rosenbrock::gradient(const Vector& x) const { return rosenbrock_gradient(p_, x); }
SymMatrix Rosenbrock::hessian(const Vector& x) const { return rosenbrock_hessian(p_, x); }

std::optional<Matrix> Rosenbrock::curvature_gradients(const Vector& x,
                                                      const Matrix& directions) const {
  require_dim(x, 2, "Rosenbrock::curvature_gradients");
  // Nonzero third derivatives: d111 = 24 b x1, d112 = d121 = d211 = -4 b.
  const double b = p_.b;
  Matrix out(2, directions.cols());
  for (Eigen::Index l = 0; l < directions.cols(); ++l) {
    const double u1 = directions(0, l);
    const double u2 = directions(1, l);
    out(0, l) = 24.0 * b * x(0) * u1 * u1 - 8.0 * b * u1 * u2;
    out(1, l) = -4.0 * b * u1 * u1;
  }
  return out;
}

double rosenbrock_log_partition(const RosenbrockParams& p) {
  return std::log(std::numbers::pi / std::sqrt(p.b));
}

double rosenbrock_lipschitz_grid(const RosenbrockParams& p, const Box2& box, std::size_t n) {
  if (n < 2) throw InvalidInput("rosenbrock_lipschitz_grid: need at least 2 points per axis");
  double best = 0.0;
  Vector x(2);
  const double denom = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    x(0) = box.x1_lo + (box.x1_hi - box.x1_lo) * static_cast<double>(i) / denom;
    for (std::size_t j = 0; j < n; ++j) {
      x(1) = box.x2_lo + (box.x2_hi - box.x2_lo) * static_cast<double>(j) / denom;
      best = std::max(best, spectral_norm(rosenbrock_hessian(p, x)));
    }
  }
  return best;
}

double rosenbrock_lipschitz_samples(const RosenbrockParams& p, const Box2& box,
                                    const RowMatrix& samples) {
  if (samples.cols() != 2) throw InvalidInput("rosenbrock_lipschitz_samples: need 2 columns");
  double best = 0.0;
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    const Vector x = samples.row(i).transpose();
    if (x(0) < box.x1_lo || x(0) > box.x1_hi || x(1) < box.x2_lo || x(1) > box.x2_hi) continue;
    best = std::max(best, spectral_norm(rosenbrock_hessian(p, x)));
  }
  return best;
}

// --- Bayesian logistic regression ----------------------------------------

void LogisticModel::validate() const {
  if (prior_vars.size() == 0) throw InvalidInput("LogisticModel: dimension must be positive");
  if (design.rows() > 0 && static_cast<std::size_t>(design.cols()) != dim()) {
    throw InvalidInput("LogisticModel: design has " + std::to_string(design.cols()) +
                       " columns but prior has dimension " + std::to_string(dim()));
  }
  if (labels.size() != design.rows()) {
    throw InvalidInput("LogisticModel: label count does not match design rows");
  }
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels(i) != 0.0 && labels(i) != 1.0) throw InvalidInput("LogisticModel: labels must be 0 or 1");
  }
  if (!((prior_vars.array() > 0.0).all())) {
    throw InvalidInput("LogisticModel: prior variances must be positive");
  }
}

double softplus(double u) {
  if (u > 30.0) return u + std::log1p(std::exp(-u));
  return std::log1p(std::exp(u));
}

double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

namespace {

// (phi(u), phi(-u)) from a single exponential.
std::pair<double, double> sigmoid_pair(double u) {
  const double e = std::exp(-std::abs(u));
  const double big = 1.0 / (1.0 + e);
  const double small = e / (1.0 + e);
  return u >= 0.0 ? std::pair{big, small} : std::pair{small, big};
}

Vector logits(const LogisticModel& m, const Vector& beta) {
  require_dim(beta, m.dim(), "logistic");
  if (m.num_data() == 0) return Vector(0);
  return m.design * beta;
}

}  // namespace

double logistic_value(const LogisticModel& m, const Vector& beta) {
  const Vector u = logits(m, beta);
  double total = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) total += softplus(u(i)) - m.labels(i) * u(i);
  total += 0.5 * (beta.array().square() / m.prior_vars.array()).sum();
  return total;
}

Vector logistic_gradient(const LogisticModel& m, const Vector& beta) {
  const Vector u = logits(m, beta);
  Vector g = (beta.array() / m.prior_vars.array()).matrix();
  if (u.size() == 0) return g;
  Vector resid(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) resid(i) = sigmoid(u(i)) - m.labels(i);
  g.noalias() += m.design.transpose() * resid;
  return g;
}

SymMatrix logistic_hessian(const LogisticModel& m, const Vector& beta) {
  const Vector u = logits(m, beta);
  Matrix h = m.prior_vars.cwiseInverse().asDiagonal();
  if (u.size() > 0) {
    Vector root_w(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      const auto [p, q] = sigmoid_pair(u(i));
      root_w(i) = std::sqrt(p * q);
    }
    const Matrix scaled = (root_w.asDiagonal() * m.design).transpose();
    h.selfadjointView<Eigen::Upper>().rankUpdate(scaled);
  }
  return SymMatrix::from_upper(h);
}

double logistic_lipschitz_bound(const LogisticModel& m) {
  const double prior_term = m.prior_vars.cwiseInverse().maxCoeff();
  if (m.num_data() == 0) return prior_term;
  const SymMatrix gram = SymMatrix::from_upper(m.design.transpose() * m.design);
  const EigenPair eig = sym_eig(gram);
  return 0.25 * eig.values(eig.values.size() - 1) + prior_term;
}

namespace {

std::atomic<std::uint64_t> next_posterior_id{1};

}  // namespace

LogisticPosterior::LogisticPosterior(LogisticModel model)
    : m_(std::move(model)), x_(m_.design), id_(next_posterior_id++) {
  m_.validate();
}

// One entry per thread: a sampler step asks for the gradient, Hessian and
// curvature terms at the same point back to back.
const LogisticPosterior::Terms& LogisticPosterior::terms(const Vector& beta) const {
  thread_local Terms cache;
  require_dim(beta, m_.dim(), "logistic");
  if (cache.owner == id_ && cache.beta.size() == beta.size() && cache.beta == beta) return cache;
  cache.owner = 0;
  cache.beta = beta;
  cache.u = m_.num_data() == 0 ? Eigen::ArrayXd(0) : Eigen::ArrayXd(x_ * beta);
  cache.e = (-cache.u.abs()).exp();
  cache.owner = id_;
  return cache;
}

double LogisticPosterior::value(const Vector& beta) const {
  const Terms& t = terms(beta);
  // softplus(u) = max(u, 0) + log1p(exp(-|u|))
  const double data = (t.u.max(0.0) + t.e.log1p() - m_.labels.array() * t.u).sum();
  return data + 0.5 * (beta.array().square() / m_.prior_vars.array()).sum();
}

Vector LogisticPosterior::gradient(const Vector& beta) const {
  const Terms& t = terms(beta);
  Vector g = (beta.array() / m_.prior_vars.array()).matrix();
  if (t.u.size() == 0) return g;
  const Eigen::ArrayXd inv = (1.0 + t.e).inverse();
  const Eigen::ArrayXd p = (t.u >= 0.0).select(inv, t.e * inv);
  g.noalias() += x_.transpose() * (p - m_.labels.array()).matrix();
  return g;
}

SymMatrix LogisticPosterior::hessian(const Vector& beta) const {
  const Terms& t = terms(beta);
  Matrix h = m_.prior_vars.cwiseInverse().asDiagonal();
  if (t.u.size() == 0) return SymMatrix::from_upper(h);
  // sqrt(phi(u) phi(-u)) = sqrt(e) / (1 + e)
  const Eigen::ArrayXd root_w = t.e.sqrt() / (1.0 + t.e);
  const Matrix scaled = root_w.matrix().asDiagonal() * x_;
  for (Eigen::Index k = 0; k < h.cols(); ++k) {
    for (Eigen::Index j = 0; j <= k; ++j) h(j, k) += scaled.col(j).dot(scaled.col(k));
  }
  return SymMatrix::from_upper(h);
}

namespace {

// s'(u) for s = phi(u) phi(-u): sign(u) e (e - 1) / (1 + e)^3.
Eigen::ArrayXd curvature_weights(const LogisticPosterior::Terms& t) {
  const Eigen::ArrayXd mag = t.e * (t.e - 1.0) / (1.0 + t.e).cube();
  return (t.u >= 0.0).select(mag, -mag);
}

}  // namespace

std::optional<Matrix> LogisticPosterior::curvature_gradients(const Vector& beta,
                                                             const Matrix& directions) const {
  // grad_beta (v^T H v) = sum_i s'(u_i) (x_i^T v)^2 x_i
  const Terms& t = terms(beta);
  if (t.u.size() == 0) return Matrix::Zero(m_.dim(), directions.cols());
  Matrix proj = x_ * directions;
  proj = curvature_weights(t).matrix().asDiagonal() * proj.cwiseAbs2();
  return Matrix(x_.transpose() * proj);
}

std::optional<Vector> LogisticPosterior::curvature_gradient_sum(const Vector& beta,
                                                                const Matrix& directions) const {
  const Terms& t = terms(beta);
  if (t.u.size() == 0) return Vector::Zero(m_.dim());
  const Matrix proj = x_ * directions;
  const Vector w = (curvature_weights(t) * proj.cwiseAbs2().rowwise().sum().array()).matrix();
  return Vector(x_.transpose() * w);
}

// --- Quadratic (Gaussian) --------------------------------------------------

double quadratic_value(const QuadraticParams& q, const Vector& x) {
  require_dim(x, q.precision.dim(), "quadratic_value");
  return 0.5 * quad_form(q.precision, x - q.mean);
}

Vector quadratic_gradient(const QuadraticParams& q, const Vector& x) {
  require_dim(x, q.precision.dim(), "quadratic_gradient");
  return q.precision * (x - q.mean);
}

SymMatrix quadratic_hessian(const QuadraticParams& q, const Vector& x) {
  require_dim(x, q.precision.dim(), "quadratic_hessian");
  return q.precision;
}

Quadratic::Quadratic(QuadraticParams q) : q_(std::move(q)) {
  if (static_cast<std::size_t>(q_.mean.size()) != q_.precision.dim()) {
    throw InvalidInput("Quadratic: mean and precision dimensions differ");
  }
  if (!is_spd(sym_eig(q_.precision))) throw NotSpd("Quadratic: precision is not SPD");
}

double Quadratic::value(const Vector& x) const { return quadratic_value(q_, x); }
Vector Quadratic::gradient(const Vector& x) const { return quadratic_gradient(q_, x); }
SymMatrix Quadratic::hessian(const Vector& x) const { return quadratic_hessian(q_, x); }

std::optional<Matrix> Quadratic::curvature_gradients(const Vector& x,
                                                     const Matrix& directions) const {
  require_dim(x, dim(), "Quadratic::curvature_gradients");
  return Matrix::Zero(dim(), directions.cols());
}

}  // namespace tiprel
