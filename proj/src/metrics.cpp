#include "gstream/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gstream {

namespace {

void require_same_shape(const Matrix& u, const Matrix& ubar, const char* what) {
  if (u.rows() != ubar.rows() || u.cols() != ubar.cols()) {
    throw DimensionMismatch(std::string(what) + ": bases have different shapes");
  }
}

}  // namespace

Vector PrincipalAngleProfile::sines() const {
  return (1.0 - cosines.array().square()).max(0.0).sqrt().matrix();
}

double PrincipalAngleProfile::min_cosine() const {
  return cosines.size() ? cosines(cosines.size() - 1) : 1.0;
}

double PrincipalAngleProfile::max_sine() const {
  const double c = min_cosine();
  return std::sqrt(std::max(0.0, 1.0 - c * c));
}

double PrincipalAngleProfile::max_angle() const { return std::acos(min_cosine()); }

PrincipalAngleProfile profile_from_overlap(const Matrix& overlap) {
  PrincipalAngleProfile out;
  out.cosines = singular_values(overlap).cwiseMax(0.0).cwiseMin(1.0);
  double log_zeta = 0.0;
  double discrepancy = 0.0;
  bool zero = false;
  for (Eigen::Index k = 0; k < out.cosines.size(); ++k) {
    const double c = out.cosines(k);
    discrepancy += 1.0 - c * c;
    if (c <= kZeroCosine) {
      zero = true;
    } else {
      log_zeta += 2.0 * std::log(c);
    }
  }
  out.frob_discrepancy = discrepancy;
  if (zero) {
    out.log_zeta = -std::numeric_limits<double>::infinity();
    out.zeta = 0.0;
  } else {
    out.log_zeta = log_zeta;
    out.zeta = std::exp(log_zeta);
  }
  out.kappa = 1.0 - out.zeta;
  return out;
}

double log_zeta_from_overlap(const Matrix& overlap) {
  if (overlap.rows() != overlap.cols()) throw DimensionMismatch("log_zeta_from_overlap: not square");
  const Eigen::PartialPivLU<Matrix> lu(overlap);
  const Matrix& packed = lu.matrixLU();
  double log_abs_det = 0.0;
  for (Eigen::Index k = 0; k < packed.rows(); ++k) {
    const double pivot = std::abs(packed(k, k));
    if (!(pivot > 0.0)) return -std::numeric_limits<double>::infinity();
    log_abs_det += std::log(pivot);
  }
  return std::min(0.0, 2.0 * log_abs_det);
}

PrincipalAngleProfile principal_angles(const Matrix& u, const Matrix& ubar) {
  require_same_shape(u, ubar, "principal_angles");
  return profile_from_overlap(ubar.transpose() * u);
}

std::optional<double> zeta_ratio(const PrincipalAngleProfile& before,
                                 const PrincipalAngleProfile& after) {
  if (before.zeta == 0.0) return std::nullopt;
  if (after.zeta == 0.0) return 0.0;
  return std::exp(after.log_zeta - before.log_zeta);
}

double subspace_incoherence(const Matrix& u) {
  const double n = static_cast<double>(u.rows());
  const double d = static_cast<double>(u.cols());
  // ||P_U e_i||^2 is the squared norm of row i for orthonormal U.
  return n / d * u.rowwise().squaredNorm().maxCoeff();
}

double vector_incoherence(const Vector& z) {
  const double sq = z.squaredNorm();
  if (!(sq > 0.0)) throw ZeroVector("vector_incoherence: zero vector");
  const double inf = z.cwiseAbs().maxCoeff();
  return static_cast<double>(z.size()) * inf * inf / sq;
}

Matrix procrustes_alignment(const Matrix& u, const Matrix& ubar) {
  require_same_shape(u, ubar, "procrustes_alignment");
  // max_V tr(V^T Ubar^T U) over orthogonal V is attained at the polar factor.
  Eigen::JacobiSVD<Matrix> svd(ubar.transpose() * u, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

double procrustes_distance(const Matrix& u, const Matrix& ubar) {
  const Matrix v = procrustes_alignment(u, ubar);
  return (ubar * v - u).norm();
}

double local_region_radius(std::size_t n, std::size_t d, double mu0) {
  return static_cast<double>(d) * mu0 / (16.0 * static_cast<double>(n));
}

bool local_region_check(const Matrix& u, const Matrix& ubar, double mu0, double slack) {
  const auto profile = principal_angles(u, ubar);
  return profile.frob_discrepancy <=
         local_region_radius(static_cast<std::size_t>(u.rows()),
                             static_cast<std::size_t>(u.cols()), mu0) +
             slack;
}

}  // namespace gstream
