#pragma once

/// Incremental rank-one geodesic updates of a subspace estimate (GROUSE).

#include "gstream/numerics.hpp"
#include "gstream/random.hpp"
#include "gstream/sampling.hpp"

#include <cstddef>

namespace gstream {

enum class StepStatus {
  Updated,
  SkippedRankDeficient,
  SkippedZeroResidual,
  SkippedZeroProjection,
};

const char* to_string(StepStatus status);

/// Diagnostics of one observation.
///
/// On `Updated`, the basis moved by `direction * coefficients^T`, where
/// `direction = y/||y|| - p/||p||` and `coefficients = w/||w||`. Callers that track
/// Ubar^T U incrementally use these factors. Both are empty on skipped steps.
struct StepReport {
  StepStatus status = StepStatus::SkippedZeroProjection;
  Vector w;
  double norm_p = 0.0;
  double norm_r_tilde = 0.0;
  double norm_r = 0.0;
  double theta = 0.0;
  Vector direction;
  Vector coefficients;
  /// True when the basis was re-orthonormalized at the end of this step.
  bool reorthonormalized = false;
};

struct GrouseOptions {
  /// Re-orthonormalize after this many updates; 0 disables the cadence.
  std::size_t reorth_cadence = 100;
  /// Drift ||U^T U - I||_F that triggers an immediate re-orthonormalization.
  double drift_tolerance = 1e-9;
  /// Updates between drift measurements; 0 disables the check.
  std::size_t drift_check_interval = 10;
  double rank_tolerance = kLeastSquaresRankTolerance;
  /// Skip thresholds relative to ||x||.
  double zero_tolerance = 1e-12;
  /// Multiplies the rank-one correction. Anything other than 1 corrupts the
  /// update; only used to check that the invariant verifiers notice.
  double fault_update_scale = 1.0;
};

/// Current estimate U_t plus bookkeeping. Single writer: steps mutate in place.
class GrouseState {
 public:
  explicit GrouseState(const OrthonormalBasis& initial, GrouseOptions options = {});

  /// U_0 = orthonormalize(n x d standard normal matrix).
  static GrouseState init_random(std::size_t n, std::size_t d, Rng& rng,
                                 GrouseOptions options = {});

  const Matrix& basis() const { return u_; }
  std::size_t ambient_dim() const { return static_cast<std::size_t>(u_.rows()); }
  std::size_t rank() const { return static_cast<std::size_t>(u_.cols()); }
  std::size_t iteration() const { return t_; }
  std::size_t steps_since_reorth() const { return steps_since_reorth_; }
  const GrouseOptions& options() const { return options_; }

  /// One update with the greedy angle theta = arctan(||r|| / ||p||).
  StepReport step(const SamplingOperator& op, const Vector& x);

  /// One update with a caller-chosen angle, clamped to [0, pi/2].
  StepReport step_with_angle(const SamplingOperator& op, const Vector& x, double theta);

  /// Replaces U by orthonormalize(U); the span is unchanged.
  void reorthonormalize();

  double orthonormality_drift() const { return orthonormality_error(u_); }

 private:
  StepReport advance(const SamplingOperator& op, const Vector& x, const double* theta_override);
  void after_update(StepReport& report);

  Matrix u_;
  std::size_t t_ = 0;
  std::size_t steps_since_reorth_ = 0;
  GrouseOptions options_;
};

}  // namespace gstream
