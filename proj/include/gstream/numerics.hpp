#pragma once

/// Dense linear-algebra kernels used by the subspace tracker: orthonormalization,
/// least squares through an orthogonal factorization, small SVDs and projections.

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace gstream {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class NumericsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical rank fell below the column count.
class RankDeficient : public NumericsError {
 public:
  using NumericsError::NumericsError;
};

class DimensionMismatch : public NumericsError {
 public:
  using NumericsError::NumericsError;
};

class NonFiniteInput : public NumericsError {
 public:
  using NumericsError::NumericsError;
};

/// Default relative rank tolerance for least squares.
inline constexpr double kLeastSquaresRankTolerance = 1e-10;
/// Default relative rank tolerance for orthonormalization.
inline constexpr double kOrthonormalizeRankTolerance = 1e-12;

/// n x d matrix with orthonormal columns, verified on construction.
class OrthonormalBasis {
 public:
  static constexpr double kDefaultTolerance = 1e-10;

  /// Throws NumericsError if the columns are not orthonormal within `tolerance`
  /// (Frobenius norm of U^T U - I) or if d > n.
  explicit OrthonormalBasis(Matrix columns, double tolerance = kDefaultTolerance);

  Eigen::Index ambient_dim() const { return columns_.rows(); }
  Eigen::Index rank() const { return columns_.cols(); }
  const Matrix& matrix() const { return columns_; }

 private:
  Matrix columns_;
};

/// ||U^T U - I||_F.
double orthonormality_error(const Matrix& u);

bool all_finite(const Matrix& m);

/// Orthonormal basis for the column span of `m` (Householder QR, columns signed so
/// that diag(R) > 0). Throws RankDeficient when sigma_min <= rank_tolerance * sigma_max.
OrthonormalBasis orthonormalize(const Matrix& m,
                                double rank_tolerance = kOrthonormalizeRankTolerance);

/// Same factorization without the rank test or the basis wrapper; used on the
/// hot path where the input is already known to be close to orthonormal.
Matrix orthonormalize_unchecked(const Matrix& m);

/// Least-squares solver bound to one coefficient matrix.
///
/// Factorizes B = QR once and rejects B whose smallest singular value is at or
/// below `rank_tolerance` times the largest (or that has fewer rows than columns).
class LeastSquares {
 public:
  explicit LeastSquares(const Matrix& b, double rank_tolerance = kLeastSquaresRankTolerance);

  /// argmin_w ||B w - x||.
  Vector solve(const Vector& x) const;

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }

 private:
  Eigen::HouseholderQR<Matrix> qr_;
  Eigen::Index rows_;
  Eigen::Index cols_;
};

Vector least_squares(const Matrix& b, const Vector& x,
                     double rank_tolerance = kLeastSquaresRankTolerance);

/// Singular values in descending order.
Vector singular_values(const Matrix& m);

struct Projection {
  Vector parallel;
  Vector perp;
};

/// Splits v into U U^T v and the remainder.
Projection project(const OrthonormalBasis& u, const Vector& v);
Projection project(const Matrix& u, const Vector& v);

}  // namespace gstream
