#include "gstream/theory.hpp"

#include "gstream/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gstream::theory {

namespace {

double as_double(std::size_t v) { return static_cast<double>(v); }

void require_zeta(double zeta) {
  if (!(zeta >= 0.0 && zeta <= 1.0)) throw InvalidParameter("zeta must lie in [0, 1]");
}

void require_dims(std::size_t d, std::size_t m, std::size_t n) {
  if (d < 1 || m < 1 || n < 1) throw InvalidParameter("dimensions must be positive");
  if (m > n) throw InvalidParameter("need m <= n");
}

}  // namespace

double exact_full_ratio(double norm_v_par, double norm_v_perp) {
  if (!(norm_v_par > 0.0)) throw ZeroProjection("exact_full_ratio: ||v_par|| = 0");
  const double q = norm_v_perp / norm_v_par;
  return 1.0 + q * q;
}

double expected_rate_full(double zeta, std::size_t d) {
  require_zeta(zeta);
  if (d < 1) throw InvalidParameter("d must be positive");
  return 1.0 + (1.0 - zeta) / as_double(d);
}

double key_quantity_bound(double zeta, std::size_t d) {
  require_zeta(zeta);
  if (d < 1) throw InvalidParameter("d must be positive");
  return (1.0 - zeta) / as_double(d);
}

ComplexityBound iteration_bound_full(std::size_t n, std::size_t d, double rho, double zeta_star,
                                     double c) {
  if (!(rho > 0.0 && rho < 1.0)) throw InvalidParameter("rho must lie in (0, 1)");
  if (!(zeta_star > 0.0 && zeta_star < 1.0)) throw InvalidParameter("zeta_star must lie in (0, 1)");
  if (!(c > 0.0)) throw InvalidParameter("C must be positive");
  if (n < 2 || d < 1) throw InvalidParameter("need n >= 2 and d >= 1");

  const double dd = as_double(d);
  const double log_n = std::log(as_double(n));
  const double tau0 =
      1.0 + (std::log((1.0 - rho / 2.0) / c) + dd * std::log(std::numbers::e / dd)) / (dd * log_n);
  const double k1 = (2.0 * dd * dd / rho + 1.0) * tau0 * log_n;
  const double k2 = 2.0 * dd * std::log(1.0 / (2.0 * rho * (1.0 - zeta_star)));

  ComplexityBound out;
  out.value = k1 + k2;
  out.components = {{"K1", k1},
                    {"K2", k2},
                    {"tau0", tau0},
                    {"C", c},
                    {"K1_proof", (2.0 * dd * dd / rho + dd) * tau0 * log_n}};
  return out;
}

double simplified_iteration_bound(std::size_t n, std::size_t d, double zeta_star) {
  if (!(zeta_star > 0.0 && zeta_star < 1.0)) throw InvalidParameter("zeta_star must lie in (0, 1)");
  const double dd = as_double(d);
  return dd * dd * std::log(as_double(n)) + dd * std::log(1.0 / (1.0 - zeta_star));
}

double heuristic_iterations(std::size_t n, std::size_t m, std::size_t d, double zeta_star) {
  require_dims(d, m, n);
  return as_double(n) / as_double(m) * simplified_iteration_bound(n, d, zeta_star);
}

double delta_term(const Matrix& u, const Matrix& ubar, const SamplingOperator& op,
                  const Vector& v) {
  if (u.rows() != ubar.rows() || u.cols() != ubar.cols()) {
    throw DimensionMismatch("delta_term: bases have different shapes");
  }
  const Matrix overlap = ubar.transpose() * u;
  if (profile_from_overlap(overlap).zeta == 0.0) {
    throw SingularOverlap("delta_term: Ubar^T U is singular");
  }

  const Matrix au = op.restrict_basis(u);
  const LeastSquares ls(au);
  const Vector x = op.apply(v);
  const Vector w = ls.solve(x);
  const Vector r = op.adjoint(x - au * w);

  const Vector v_perp = project(u, v).perp;
  const Vector w_perp = ls.solve(op.apply(v_perp));
  const Vector y = overlap.partialPivLu().solve(ubar.transpose() * r);
  return w_perp.dot(y);
}

double determinant_ratio(double norm_p, double norm_r_tilde, double norm_r, double delta) {
  if (!(norm_p > 0.0)) throw ZeroProjection("determinant_ratio: ||p|| = 0");
  const double p2 = norm_p * norm_p;
  return (p2 + norm_r_tilde * norm_r_tilde + delta) /
         (norm_p * std::sqrt(p2 + norm_r * norm_r));
}

double step_lower_bound_undersampled(double norm_p, double norm_r_tilde, double norm_r,
                                     double delta) {
  if (!(norm_p > 0.0)) throw ZeroProjection("step_lower_bound_undersampled: ||p|| = 0");
  const double p2 = norm_p * norm_p;
  return 1.0 + (2.0 * norm_r_tilde * norm_r_tilde - norm_r * norm_r) / p2 + 2.0 * delta / p2;
}

double cs_probability_raw(std::size_t d, std::size_t m, double delta) {
  const double dd = as_double(d);
  const double mm = as_double(m);
  const double d2 = delta * delta;
  return 1.0 - std::exp(-dd * d2 / 8.0) - std::exp(-mm * d2 / 32.0 + dd * std::log(24.0 / delta)) -
         (4.0 * dd + 2.0) * std::exp(-mm * d2 / 8.0);
}

RateBound expected_rate_cs(double zeta, std::size_t d, std::size_t m, std::size_t n,
                           double delta, double phi_d) {
  require_zeta(zeta);
  require_dims(d, m, n);
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidParameter("delta must lie in (0, 1)");
  if (!(phi_d >= 0.0 && phi_d < std::numbers::pi / 2)) {
    throw InvalidParameter("phi_d must lie in [0, pi/2)");
  }
  const double dd = as_double(d);
  const double mm = as_double(m);
  const double density = mm / as_double(n);
  const double shrink = 1.0 - 2.0 * delta * std::sqrt(density);
  if (!(shrink > 0.0)) throw InvalidParameter("delta too large: 1 - 2 delta sqrt(m/n) <= 0");

  const double spread = (1.0 + delta) / (1.0 - delta);
  const double gamma1 =
      (1.0 - delta) * shrink / std::pow(1.0 + std::sqrt(spread * dd / mm), 2.0);
  const double tan_phi = std::tan(phi_d);
  const double cos_phi = std::cos(phi_d);
  const double gamma2 =
      (1.0 + (2.0 * tan_phi + delta * dd / cos_phi) / (shrink * std::sqrt((1.0 + delta) * dd / mm))) *
      spread;
  const double gamma2_proof =
      (1.0 + 2.0 * (tan_phi + delta * dd / cos_phi) /
                 (shrink * std::sqrt((1.0 - delta * delta) * dd / mm))) *
      spread;

  const double base = density * (1.0 - zeta) / dd;
  const double raw = cs_probability_raw(d, m, delta);

  RateBound out;
  out.rate = 1.0 + gamma1 * (1.0 - gamma2 * dd / mm) * base;
  out.probability = std::clamp(raw, 0.0, 1.0);
  out.vacuous = raw < 0.0;
  out.params = {{"gamma1", gamma1},
                {"gamma2", gamma2},
                {"gamma2_proof", gamma2_proof},
                {"rate_proof", 1.0 + gamma1 * (1.0 - gamma2_proof * dd / mm) * base},
                {"rate_under_sample_condition", 1.0 + 0.5 * gamma1 * base},
                {"probability_raw", raw},
                {"delta", delta},
                {"vacuous", out.vacuous ? 1.0 : 0.0}};
  return out;
}

// Every subtracted term of the union bound decreases in delta, so the probability
// is increasing on (0, 1) and bisection finds the smallest admissible delta.
std::optional<double> find_delta_cs(std::size_t d, std::size_t m, double target) {
  constexpr double kUpper = 1.0 - 1e-9;
  if (cs_probability_raw(d, m, kUpper) < target) return std::nullopt;
  double lo = 1e-9;
  double hi = kUpper;
  if (cs_probability_raw(d, m, lo) >= target) return lo;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (cs_probability_raw(d, m, mid) >= target ? hi : lo) = mid;
  }
  return hi;
}

std::pair<double, double> best_delta_cs(std::size_t d, std::size_t m) {
  constexpr double kUpper = 1.0 - 1e-9;
  return {std::clamp(cs_probability_raw(d, m, kUpper), 0.0, 1.0), kUpper};
}

ComplexityBound sample_complexity_cs(std::size_t d, double delta, double phi_d, std::size_t n) {
  if (!(delta > 0.0 && delta < 0.5)) throw InvalidParameter("delta must lie in (0, 1/2)");
  if (!(phi_d >= 0.0 && phi_d < std::numbers::pi / 2)) {
    throw InvalidParameter("phi_d must lie in [0, pi/2)");
  }
  if (d < 1 || n < 1) throw InvalidParameter("dimensions must be positive");
  const double dd = as_double(d);
  const double beta = 8.0 * (1.0 + delta) /
                      (std::pow(1.0 - delta, 2.0) * std::pow(1.0 - 2.0 * delta, 2.0));
  const double term1 =
      32.0 / (delta * delta) * std::log(24.0 * std::pow(as_double(n), 2.0 / dd) / delta);
  const double tan_phi = std::tan(phi_d);
  const double a = tan_phi + delta * std::cos(phi_d) * dd;
  const double term2 = beta * a * (a + 0.5);
  const double a_proof = tan_phi + delta * dd / std::cos(phi_d);
  const double term2_proof = beta * a_proof * (a_proof + 0.5);

  ComplexityBound out;
  out.value = dd * std::max(term1, term2);
  out.components = {{"beta", beta},
                    {"term1", dd * term1},
                    {"term2", dd * term2},
                    {"term2_proof", dd * term2_proof}};
  return out;
}

RateBound expected_rate_missing(double zeta, std::size_t d, std::size_t m, std::size_t n) {
  require_zeta(zeta);
  require_dims(d, m, n);
  const double nn = as_double(n);
  RateBound out;
  out.rate = 1.0 + 0.25 * (as_double(m) / nn) * (1.0 - zeta) / as_double(d);
  out.probability = std::clamp(1.0 - 3.0 / (nn * nn), 0.0, 1.0);
  out.vacuous = 1.0 - 3.0 / (nn * nn) < 0.0;
  // The union bound is taken at delta = 1/n^2.
  out.params = {{"delta", 1.0 / (nn * nn)}, {"eta1_floor", 0.25}};
  return out;
}

ComplexityBound sample_complexity_missing(std::size_t d, double mu0, double mu_vperp,
                                          std::size_t n) {
  if (d < 1 || n < 2) throw InvalidParameter("need d >= 1 and n >= 2");
  const double dd = as_double(d);
  const double nn = as_double(n);
  if (!(mu0 >= 1.0 - 1e-12 && mu0 <= nn / dd + 1e-12)) throw InvalidParameter("mu0 must lie in [1, n/d]");
  if (!(mu_vperp >= 1.0 - 1e-12 && mu_vperp <= nn + 1e-12)) {
    throw InvalidParameter("mu(v_perp) must lie in [1, n]");
  }
  const double log_n = std::log(nn);
  const double term1 = 128.0 * dd * mu0 / 3.0 * std::log(std::sqrt(2.0 * dd) * nn);
  const double term2 = 64.0 * mu_vperp * mu_vperp * log_n;
  const double term3 = 52.0 * std::pow(1.0 + 2.0 * std::sqrt(mu_vperp * log_n), 2.0) * dd * mu0;

  ComplexityBound out;
  out.value = std::max({term1, term2, term3});
  out.components = {{"term1", term1},
                    {"term2", term2},
                    {"term3", term3},
                    {"term1_proof", 128.0 * dd * mu0 / 3.0 * std::log(2.0 * dd * nn * nn)}};
  return out;
}

double discrepancy_decay_factor(std::size_t d, std::size_t m, std::size_t n, double mu0) {
  require_dims(d, m, n);
  const double dd = as_double(d);
  const double nn = as_double(n);
  return 1.0 - 0.25 * (1.0 - dd * mu0 / (16.0 * nn)) * as_double(m) / (nn * dd);
}

double discrepancy_decay_missing(double kappa, std::size_t d, std::size_t m, std::size_t n,
                                 double mu0) {
  if (!(kappa >= 0.0 && kappa <= 1.0)) throw InvalidParameter("kappa must lie in [0, 1]");
  return discrepancy_decay_factor(d, m, n, mu0) * kappa;
}

double log_expected_zeta0(std::size_t n, std::size_t d, double c) {
  if (d < 1 || d >= n) throw InvalidParameter("need 1 <= d < n");
  if (!(c > 0.0)) throw InvalidParameter("C must be positive");
  const double dd = as_double(d);
  return std::log(c) + dd * (std::log(dd) - std::log(as_double(n)) - 1.0);
}

double expected_zeta0(std::size_t n, std::size_t d, double c) {
  return std::exp(log_expected_zeta0(n, d, c));
}

}  // namespace gstream::theory
