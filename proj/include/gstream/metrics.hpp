#pragma once

#include "gstream/numerics.hpp"

#include <optional>

namespace gstream {

/// Principal angles between span(U) and span(Ubar).
///
/// `cosines` are the singular values of Ubar^T U clamped to [0, 1], descending.
/// The determinant similarity zeta = prod cos^2 is accumulated in the log domain:
/// with d = 10 and n = 5000 a random start sits near 1e-62, and ratios of such
/// values must stay finite. zeta is exactly 0 when any cosine is <= 1e-300.
struct PrincipalAngleProfile {
  Vector cosines;
  double log_zeta = 0.0;
  double zeta = 1.0;
  double kappa = 0.0;
  /// sum_k sin^2(phi_k)
  double frob_discrepancy = 0.0;

  Vector sines() const;
  /// sin of the largest principal angle.
  double max_sine() const;
  /// cos of the largest principal angle.
  double min_cosine() const;
  /// Largest principal angle in radians.
  double max_angle() const;
};

inline constexpr double kZeroCosine = 1e-300;

PrincipalAngleProfile principal_angles(const Matrix& u, const Matrix& ubar);

/// Profile from a precomputed overlap Ubar^T U.
PrincipalAngleProfile profile_from_overlap(const Matrix& overlap);

/// log zeta from 2 log|det(Ubar^T U)| via LU, clamped to <= 0; -inf when singular.
/// Agrees with the SVD route for orthonormal U and costs O(d^3 / 3); used for
/// long trajectories where only zeta, not the individual angles, is needed.
double log_zeta_from_overlap(const Matrix& overlap);

/// zeta_after / zeta_before, or nullopt when zeta_before is 0.
std::optional<double> zeta_ratio(const PrincipalAngleProfile& before,
                                 const PrincipalAngleProfile& after);

/// mu(U) = (n/d) max_i ||P_U e_i||^2 for orthonormal U.
double subspace_incoherence(const Matrix& u);

class ZeroVector : public NumericsError {
 public:
  using NumericsError::NumericsError;
};

/// mu(z) = n ||z||_inf^2 / ||z||^2. Throws ZeroVector for z = 0.
double vector_incoherence(const Vector& z);

/// Best orthogonal alignment V of Ubar to U (polar factor of Ubar^T U).
Matrix procrustes_alignment(const Matrix& u, const Matrix& ubar);

/// min over orthogonal V of ||Ubar V - U||_F.
double procrustes_distance(const Matrix& u, const Matrix& ubar);

/// Whether sum sin^2(phi_k) <= d mu0 / (16 n) + slack.
bool local_region_check(const Matrix& u, const Matrix& ubar, double mu0, double slack = 1e-12);

/// The region radius d mu0 / (16 n).
double local_region_radius(std::size_t n, std::size_t d, double mu0);

}  // namespace gstream
