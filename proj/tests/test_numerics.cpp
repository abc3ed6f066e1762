#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gstream/numerics.hpp"
#include "support.hpp"

#include <limits>

using namespace gstream;
using gstream::testing::gaussian;
using gstream::testing::gaussian_vector;
using gstream::testing::random_orthogonal;
using gstream::testing::test_rng;

TEST_CASE("orthonormalize keeps an already orthonormal matrix") {
  const Matrix m = Matrix::Identity(3, 2);
  const OrthonormalBasis b = orthonormalize(m);
  CHECK((b.matrix() - m).norm() <= 1e-15);
}

TEST_CASE("orthonormalize removes column scaling") {
  Matrix m(3, 2);
  m << 2, 0, 0, 3, 0, 0;
  const Matrix q = orthonormalize(m).matrix();
  CHECK((q.cwiseAbs() - Matrix::Identity(3, 2)).norm() <= 1e-15);
}

TEST_CASE("orthonormalize of a Gaussian matrix spans the same space") {
  Rng rng = test_rng(1);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix m = gaussian(6, 3, rng);
    const Matrix b = orthonormalize(m).matrix();
    CHECK(orthonormality_error(b) <= 1e-12);
    const Matrix resid = m - b * (b.transpose() * m);
    CHECK(resid.norm() <= 1e-10 * m.norm());
  }
}

TEST_CASE("orthonormalize rejects rank-deficient input") {
  Matrix m(3, 2);
  m << 1, 2, 1, 2, 1, 2;
  CHECK_THROWS_AS(orthonormalize(m), RankDeficient);
  CHECK_THROWS_AS(orthonormalize(Matrix::Zero(4, 2)), RankDeficient);
}

TEST_CASE("OrthonormalBasis checks its input") {
  CHECK_NOTHROW(OrthonormalBasis(Matrix::Identity(4, 2)));
  CHECK_THROWS_AS(OrthonormalBasis(2.0 * Matrix::Identity(4, 2)), NumericsError);
  CHECK_THROWS_AS(OrthonormalBasis(Matrix::Identity(2, 3)), NumericsError);
  Matrix bad = Matrix::Identity(3, 1);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(OrthonormalBasis{bad}, NumericsError);
}

TEST_CASE("least squares with orthonormal columns is B^T x") {
  Rng rng = test_rng(2);
  const Matrix b = gstream::testing::random_basis(8, 3, rng);
  const Vector x = gaussian_vector(8, rng);
  CHECK((least_squares(b, x) - b.transpose() * x).norm() <= 1e-13);
}

TEST_CASE("least squares scalar case") {
  Matrix b(1, 1);
  b << 2;
  Vector x(1);
  x << 4;
  CHECK(least_squares(b, x)(0) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("least squares rejects singular and underdetermined systems") {
  Matrix b(2, 2);
  b << 1, 1, 1, 1;
  CHECK_THROWS_AS(least_squares(b, Vector::Ones(2)), RankDeficient);
  CHECK_THROWS_AS(LeastSquares(Matrix::Ones(2, 3)), RankDeficient);
}

TEST_CASE("least squares residual is orthogonal to the columns") {
  Rng rng = test_rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    const Matrix b = gaussian(30, 5, rng);
    const Vector x = gaussian_vector(30, rng);
    const Vector w = least_squares(b, x);
    const double bound = 1e-10 * singular_values(b)(0) * x.norm();
    CHECK((b.transpose() * (x - b * w)).norm() <= bound);
  }
}

TEST_CASE("LeastSquares solves many right-hand sides with one factorization") {
  Rng rng = test_rng(4);
  const Matrix b = gaussian(12, 4, rng);
  const LeastSquares ls(b);
  for (int rep = 0; rep < 5; ++rep) {
    const Vector x = gaussian_vector(12, rng);
    CHECK((ls.solve(x) - least_squares(b, x)).norm() <= 1e-13);
  }
  CHECK_THROWS_AS(ls.solve(Vector::Ones(5)), DimensionMismatch);
}

TEST_CASE("singular values of simple matrices") {
  CHECK((singular_values(Matrix::Identity(4, 4)) - Vector::Ones(4)).norm() <= 1e-15);
  CHECK(singular_values(Matrix::Zero(3, 3)).norm() == 0.0);
  Matrix m(2, 2);
  m << 0, 1, 3, 0;
  const Vector s = singular_values(m);
  CHECK(s(0) == doctest::Approx(3.0));
  CHECK(s(1) == doctest::Approx(1.0));
}

TEST_CASE("singular values are orthogonally invariant and match the Frobenius norm") {
  Rng rng = test_rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix m = gaussian(6, 6, rng);
    const Vector s = singular_values(m);
    for (Eigen::Index k = 1; k < s.size(); ++k) CHECK(s(k) <= s(k - 1));
    CHECK(std::abs(s.squaredNorm() - m.squaredNorm()) <= 1e-10 * m.squaredNorm());
    const Vector s2 = singular_values(random_orthogonal(6, rng) * m * random_orthogonal(6, rng));
    CHECK((s2 - s).cwiseAbs().maxCoeff() <= 1e-10 * s(0));
  }
}

TEST_CASE("singular values reject non-finite input") {
  Matrix m = Matrix::Identity(2, 2);
  m(1, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(singular_values(m), NonFiniteInput);
}

TEST_CASE("project splits a vector") {
  Matrix e1 = Matrix::Zero(2, 1);
  e1(0, 0) = 1.0;
  Vector v(2);
  v << 1, 1;
  const Projection p = project(OrthonormalBasis(e1), v);
  CHECK(p.parallel(0) == 1.0);
  CHECK(p.parallel(1) == 0.0);
  CHECK(p.perp(0) == 0.0);
  CHECK(p.perp(1) == 1.0);
}

TEST_CASE("project of a vector in the span has no residual and is idempotent") {
  Rng rng = test_rng(6);
  const OrthonormalBasis u(gstream::testing::random_basis(10, 3, rng));
  for (int rep = 0; rep < 20; ++rep) {
    const Vector v = gaussian_vector(10, rng);
    const Projection p = project(u, v);
    CHECK((p.parallel + p.perp - v).norm() <= 1e-15 * std::max(1.0, v.norm()));
    CHECK(std::abs(p.parallel.dot(p.perp)) <= 1e-10 * v.squaredNorm());
    const Projection again = project(u, p.parallel);
    CHECK((again.parallel - p.parallel).norm() <= 1e-10 * v.norm());
    CHECK(again.perp.norm() <= 1e-10 * v.norm());
  }
  CHECK_THROWS_AS(project(u, Vector::Ones(4)), DimensionMismatch);
}
