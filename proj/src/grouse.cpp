#include "gstream/grouse.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gstream {

const char* to_string(StepStatus status) {
  switch (status) {
    case StepStatus::Updated: return "updated";
    case StepStatus::SkippedRankDeficient: return "skipped_rank_deficient";
    case StepStatus::SkippedZeroResidual: return "skipped_zero_residual";
    case StepStatus::SkippedZeroProjection: return "skipped_zero_projection";
  }
  return "unknown";
}

GrouseState::GrouseState(const OrthonormalBasis& initial, GrouseOptions options)
    : u_(initial.matrix()), options_(options) {
  if (u_.cols() >= u_.rows()) throw std::invalid_argument("GrouseState: need 1 <= d < n");
}

GrouseState GrouseState::init_random(std::size_t n, std::size_t d, Rng& rng,
                                     GrouseOptions options) {
  if (d < 1 || d >= n) throw std::invalid_argument("init_random: need 1 <= d < n");
  std::normal_distribution<double> normal;
  Matrix g(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) g(i, j) = normal(rng);
  }
  return GrouseState(orthonormalize(g), options);
}

StepReport GrouseState::step(const SamplingOperator& op, const Vector& x) {
  return advance(op, x, nullptr);
}

StepReport GrouseState::step_with_angle(const SamplingOperator& op, const Vector& x,
                                        double theta) {
  if (!std::isfinite(theta)) throw std::invalid_argument("step_with_angle: non-finite angle");
  theta = std::clamp(theta, 0.0, std::numbers::pi / 2);
  return advance(op, x, &theta);
}

StepReport GrouseState::advance(const SamplingOperator& op, const Vector& x,
                                const double* theta_override) {
  if (op.ambient_dim() != ambient_dim()) throw DimensionMismatch("step: operator ambient dim");
  if (static_cast<std::size_t>(x.size()) != op.rows()) throw DimensionMismatch("step: x length");

  StepReport report;
  ++t_;

  const Matrix au = op.restrict_basis(u_);
  try {
    report.w = LeastSquares(au, options_.rank_tolerance).solve(x);
  } catch (const RankDeficient&) {
    report.status = StepStatus::SkippedRankDeficient;
    return report;
  }

  const Vector p = u_ * report.w;
  const Vector r_tilde = x - au * report.w;
  const Vector r = op.adjoint(r_tilde);
  report.norm_p = p.norm();
  report.norm_r_tilde = r_tilde.norm();
  report.norm_r = r.norm();

  const double scale = x.norm();
  const double norm_w = report.w.norm();
  if (norm_w <= options_.zero_tolerance * scale) {
    report.status = StepStatus::SkippedZeroProjection;
    return report;
  }
  if (report.norm_r <= options_.zero_tolerance * scale) {
    report.status = StepStatus::SkippedZeroResidual;
    return report;
  }

  report.theta = theta_override ? *theta_override : std::atan2(report.norm_r, report.norm_p);
  const double c = std::cos(report.theta);
  const double s = std::sin(report.theta);

  // y/||y|| - p/||p|| = (cos(theta) - 1) p/||p|| + sin(theta) r/||r||
  report.direction = ((c - 1.0) / report.norm_p) * p + (s / report.norm_r) * r;
  report.direction *= options_.fault_update_scale;
  report.coefficients = report.w / norm_w;
  u_.noalias() += report.direction * report.coefficients.transpose();
  report.status = StepStatus::Updated;

  after_update(report);
  return report;
}

void GrouseState::after_update(StepReport& report) {
  ++steps_since_reorth_;
  bool due = options_.reorth_cadence > 0 && steps_since_reorth_ >= options_.reorth_cadence;
  if (!due && options_.drift_check_interval > 0 &&
      steps_since_reorth_ % options_.drift_check_interval == 0) {
    due = orthonormality_drift() > options_.drift_tolerance;
  }
  if (due) {
    reorthonormalize();
    report.reorthonormalized = true;
  }
}

void GrouseState::reorthonormalize() {
  u_ = orthonormalize_unchecked(u_);
  steps_since_reorth_ = 0;
}

}  // namespace gstream
