#pragma once

#include <cstddef>
#include <functional>

#include <Eigen/Dense>

namespace tiprel {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
/// Row-major so that each chain / sample occupies a contiguous row.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Dense symmetric matrix. Only the upper triangle supplied at construction is
/// read; the stored matrix is mirrored so that (i,j) == (j,i) holds exactly.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t dim);

  /// Builds from the upper triangle of `m` (which must be square).
  static SymMatrix from_upper(const Matrix& m);
  static SymMatrix identity(std::size_t dim);
  static SymMatrix scaled_identity(std::size_t dim, double c);
  static SymMatrix diagonal(const Vector& diag);

  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  void set(std::size_t i, std::size_t j, double v);

  const Matrix& dense() const { return m_; }
  bool all_finite() const { return m_.allFinite(); }
  double max_abs() const { return m_.cwiseAbs().maxCoeff(); }
  double trace() const { return m_.trace(); }

  Vector operator*(const Vector& v) const { return m_ * v; }
  SymMatrix operator+(const SymMatrix& o) const;
  SymMatrix operator-(const SymMatrix& o) const;
  SymMatrix operator*(double s) const;
  friend SymMatrix operator*(double s, const SymMatrix& a) { return a * s; }

  bool operator==(const SymMatrix& o) const { return m_ == o.m_; }

 private:
  Matrix m_;
};

/// Eigenvalues in non-decreasing order with the matching orthonormal
/// eigenvectors stored as the columns of `vectors`.
struct EigenPair {
  Vector values;
  Matrix vectors;
};

/// Eigenvalues ascending, each eigenvector signed so that its largest-magnitude
/// entry is positive. Cyclic Jacobi for d <= 4, Eigen's tridiagonal QR above.
/// Deterministic for identical input. Throws InvalidInput on non-finite entries.
EigenPair sym_eig(const SymMatrix& a);

/// Q diag(f(lambda_i)) Q^T, symmetric by construction.
SymMatrix spectral_map(const EigenPair& eig, const std::function<double(double)>& f);

/// Smallest eigenvalue accepted as positive: 1e-12 * max(1, lambda_max).
double spd_threshold(const EigenPair& eig);
bool is_spd(const EigenPair& eig);

/// Symmetric square root Q Lambda^{1/2} Q^T. Throws NotSpd.
SymMatrix spd_sqrt(const SymMatrix& a);

/// Inverse Q Lambda^{-1} Q^T. Throws NotSpd.
SymMatrix spd_inverse(const SymMatrix& a);

double quad_form(const SymMatrix& a, const Vector& v);

/// Largest absolute eigenvalue, i.e. the spectral norm for symmetric input.
double spectral_norm(const SymMatrix& a);

}  // namespace tiprel
