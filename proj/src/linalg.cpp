#include "tiprel/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "tiprel/errors.hpp"

namespace tiprel {

SymMatrix::SymMatrix(std::size_t dim) : m_(Matrix::Zero(dim, dim)) {}

SymMatrix SymMatrix::from_upper(const Matrix& m) {
  if (m.rows() != m.cols()) throw InvalidInput("SymMatrix: matrix is not square");
  SymMatrix s;
  s.m_ = m.triangularView<Eigen::Upper>();
  s.m_.triangularView<Eigen::StrictlyLower>() = s.m_.transpose();
  return s;
}

SymMatrix SymMatrix::identity(std::size_t dim) { return scaled_identity(dim, 1.0); }

SymMatrix SymMatrix::scaled_identity(std::size_t dim, double c) {
  SymMatrix s(dim);
  s.m_.diagonal().setConstant(c);
  return s;
}

SymMatrix SymMatrix::diagonal(const Vector& diag) {
  SymMatrix s(static_cast<std::size_t>(diag.size()));
  s.m_.diagonal() = diag;
  return s;
}

void SymMatrix::set(std::size_t i, std::size_t j, double v) {
  m_(i, j) = v;
  m_(j, i) = v;
}

SymMatrix SymMatrix::operator+(const SymMatrix& o) const {
  SymMatrix s;
  s.m_ = m_ + o.m_;
  return s;
}

SymMatrix SymMatrix::operator-(const SymMatrix& o) const {
  SymMatrix s;
  s.m_ = m_ - o.m_;
  return s;
}

SymMatrix SymMatrix::operator*(double f) const {
  SymMatrix s;
  s.m_ = m_ * f;
  return s;
}

namespace {

// One sweep over all (p,q) pairs, p < q. Rotations zero a(p,q) and keep `a`
// exactly symmetric since both triangles are written with the same value.
void jacobi_sweep(Matrix& a, Matrix& v) {
  const Eigen::Index n = a.rows();
  for (Eigen::Index p = 0; p < n - 1; ++p) {
    for (Eigen::Index q = p + 1; q < n; ++q) {
      const double apq = a(p, q);
      if (apq == 0.0) continue;
      const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
      double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
      if (theta < 0.0) t = -t;
      const double c = 1.0 / std::sqrt(t * t + 1.0);
      const double s = t * c;

      a(p, p) -= t * apq;
      a(q, q) += t * apq;
      a(p, q) = 0.0;
      a(q, p) = 0.0;
      for (Eigen::Index r = 0; r < n; ++r) {
        if (r == p || r == q) continue;
        const double arp = a(r, p);
        const double arq = a(r, q);
        const double np = c * arp - s * arq;
        const double nq = s * arp + c * arq;
        a(r, p) = np;
        a(p, r) = np;
        a(r, q) = nq;
        a(q, r) = nq;
      }
      for (Eigen::Index r = 0; r < n; ++r) {
        const double vrp = v(r, p);
        const double vrq = v(r, q);
        v(r, p) = c * vrp - s * vrq;
        v(r, q) = s * vrp + c * vrq;
      }
    }
  }
}

// Cyclic Jacobi beats tridiagonal QR up to about this size.
constexpr Eigen::Index kJacobiMaxDim = 4;

double off_diagonal_sq(const Matrix& a) {
  double off = 0.0;
  for (Eigen::Index q = 1; q < a.cols(); ++q)
    for (Eigen::Index p = 0; p < q; ++p) off += a(p, q) * a(p, q);
  return off;
}

}  // namespace

EigenPair sym_eig(const SymMatrix& input) {
  if (input.dim() == 0) throw InvalidInput("sym_eig: empty matrix");
  if (!input.all_finite()) throw InvalidInput("sym_eig: non-finite entries");

  const Eigen::Index n = static_cast<Eigen::Index>(input.dim());
  Vector values;
  Matrix vectors;
  if (n <= kJacobiMaxDim) {
    Matrix a = input.dense();
    vectors = Matrix::Identity(n, n);
    const double scale_sq = a.squaredNorm();
    constexpr int kMaxSweeps = 100;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
      const double off = off_diagonal_sq(a);
      if (off == 0.0 || off <= 1e-32 * scale_sq) break;
      jacobi_sweep(a, vectors);
    }
    values = a.diagonal();
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(input.dense());
    if (solver.info() != Eigen::Success) throw InvalidInput("sym_eig: no convergence");
    values = solver.eigenvalues();
    vectors = solver.eigenvectors();
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&values](Eigen::Index i, Eigen::Index j) { return values(i) < values(j); });

  EigenPair out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    out.values(k) = values(src);
    Eigen::Index pivot = 0;
    vectors.col(src).cwiseAbs().maxCoeff(&pivot);
    const double sign = vectors(pivot, src) < 0.0 ? -1.0 : 1.0;
    out.vectors.col(k) = sign * vectors.col(src);
  }
  return out;
}

SymMatrix spectral_map(const EigenPair& eig, const std::function<double(double)>& f) {
  const Eigen::Index n = eig.values.size();
  Vector mapped(n);
  for (Eigen::Index i = 0; i < n; ++i) mapped(i) = f(eig.values(i));
  const Matrix scaled = eig.vectors * mapped.asDiagonal();
  return SymMatrix::from_upper(scaled * eig.vectors.transpose());
}

double spd_threshold(const EigenPair& eig) {
  return 1e-12 * std::max(1.0, eig.values(eig.values.size() - 1));
}

bool is_spd(const EigenPair& eig) { return eig.values(0) > spd_threshold(eig); }

namespace {

EigenPair checked_spd_eig(const SymMatrix& a, const char* op) {
  EigenPair eig = sym_eig(a);
  if (!is_spd(eig)) {
    throw NotSpd(std::string(op) + ": matrix is not positive definite (min eigenvalue " +
                 std::to_string(eig.values(0)) + ")");
  }
  return eig;
}

}  // namespace

SymMatrix spd_sqrt(const SymMatrix& a) {
  return spectral_map(checked_spd_eig(a, "spd_sqrt"), [](double l) { return std::sqrt(l); });
}

SymMatrix spd_inverse(const SymMatrix& a) {
  return spectral_map(checked_spd_eig(a, "spd_inverse"), [](double l) { return 1.0 / l; });
}

double quad_form(const SymMatrix& a, const Vector& v) { return v.dot(a * v); }

double spectral_norm(const SymMatrix& a) {
  const EigenPair eig = sym_eig(a);
  return std::max(std::abs(eig.values(0)), std::abs(eig.values(eig.values.size() - 1)));
}

}  // namespace tiprel
