#include "gstream/numerics.hpp"

#include <cmath>
#include <sstream>

namespace gstream {

namespace {

void require_finite(const Matrix& m, const char* what) {
  if (!all_finite(m)) {
    throw NonFiniteInput(std::string(what) + ": non-finite entry");
  }
}

// Singular values of B from the R factor of its QR; identical up to rounding and
// d x d instead of m x d.
Vector triangular_singular_values(const Matrix& packed, Eigen::Index d) {
  Matrix r = packed.topLeftCorner(d, d).triangularView<Eigen::Upper>();
  return Eigen::JacobiSVD<Matrix>(r).singularValues();
}

Matrix signed_thin_q(const Eigen::HouseholderQR<Matrix>& qr, Eigen::Index n, Eigen::Index d) {
  Matrix q = qr.householderQ() * Matrix::Identity(n, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    if (qr.matrixQR()(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

}  // namespace

bool all_finite(const Matrix& m) { return m.allFinite(); }

double orthonormality_error(const Matrix& u) {
  const auto d = u.cols();
  return (u.transpose() * u - Matrix::Identity(d, d)).norm();
}

OrthonormalBasis::OrthonormalBasis(Matrix columns, double tolerance)
    : columns_(std::move(columns)) {
  if (columns_.rows() < 1 || columns_.cols() < 1) {
    throw DimensionMismatch("OrthonormalBasis: empty matrix");
  }
  if (columns_.cols() > columns_.rows()) {
    throw DimensionMismatch("OrthonormalBasis: rank exceeds ambient dimension");
  }
  require_finite(columns_, "OrthonormalBasis");
  const double err = orthonormality_error(columns_);
  if (!(err <= tolerance)) {
    std::ostringstream os;
    os << "OrthonormalBasis: ||U^T U - I||_F = " << err << " exceeds " << tolerance;
    throw NumericsError(os.str());
  }
}

Matrix orthonormalize_unchecked(const Matrix& m) {
  Eigen::HouseholderQR<Matrix> qr(m);
  return signed_thin_q(qr, m.rows(), m.cols());
}

OrthonormalBasis orthonormalize(const Matrix& m, double rank_tolerance) {
  if (m.rows() < 1 || m.cols() < 1) throw DimensionMismatch("orthonormalize: empty matrix");
  if (m.cols() > m.rows()) throw RankDeficient("orthonormalize: more columns than rows");
  require_finite(m, "orthonormalize");

  const auto d = m.cols();
  Eigen::HouseholderQR<Matrix> qr(m);
  const Vector sv = triangular_singular_values(qr.matrixQR(), d);
  if (!(sv(d - 1) > rank_tolerance * sv(0))) {
    throw RankDeficient("orthonormalize: numerical rank below column count");
  }
  return OrthonormalBasis(signed_thin_q(qr, m.rows(), d));
}

LeastSquares::LeastSquares(const Matrix& b, double rank_tolerance)
    : rows_(b.rows()), cols_(b.cols()) {
  if (cols_ < 1) throw DimensionMismatch("least_squares: no columns");
  if (rows_ < cols_) throw RankDeficient("least_squares: fewer rows than columns");
  qr_.compute(b);
  const Vector sv = triangular_singular_values(qr_.matrixQR(), cols_);
  if (!(sv(cols_ - 1) > rank_tolerance * sv(0))) {
    throw RankDeficient("least_squares: coefficient matrix is numerically rank deficient");
  }
}

Vector LeastSquares::solve(const Vector& x) const {
  if (x.size() != rows_) throw DimensionMismatch("least_squares: right-hand side length");
  Vector qtx = qr_.householderQ().transpose() * x;
  return qr_.matrixQR()
      .topLeftCorner(cols_, cols_)
      .triangularView<Eigen::Upper>()
      .solve(qtx.head(cols_));
}

Vector least_squares(const Matrix& b, const Vector& x, double rank_tolerance) {
  if (b.rows() != x.size()) throw DimensionMismatch("least_squares: row count mismatch");
  return LeastSquares(b, rank_tolerance).solve(x);
}

Vector singular_values(const Matrix& m) {
  require_finite(m, "singular_values");
  if (m.size() == 0) return Vector();
  return Eigen::JacobiSVD<Matrix>(m).singularValues();
}

Projection project(const Matrix& u, const Vector& v) {
  if (u.rows() != v.size()) throw DimensionMismatch("project: dimension mismatch");
  Projection out;
  out.parallel = u * (u.transpose() * v);
  out.perp = v - out.parallel;
  return out;
}

Projection project(const OrthonormalBasis& u, const Vector& v) { return project(u.matrix(), v); }

}  // namespace gstream
