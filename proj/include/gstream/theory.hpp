#pragma once

/// Closed-form evaluators for the convergence rates, iteration counts and sample
/// complexities of GROUSE, plus the undersampling perturbation term Delta.
///
/// Where a bound's statement and its derivation disagree, the statement is the
/// returned value and the derivation's variant is stored in `params`/`components`
/// under a `*_proof` key.

#include "gstream/numerics.hpp"
#include "gstream/sampling.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>

namespace gstream::theory {

class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ZeroProjection : public NumericsError {
 public:
  using NumericsError::NumericsError;
};

/// Ubar^T U is singular (zeta = 0).
class SingularOverlap : public NumericsError {
 public:
  using NumericsError::NumericsError;
};

struct RateBound {
  /// Multiplicative lower bound on E[zeta_{t+1} / zeta_t | U].
  double rate = 1.0;
  /// Probability with which the bound holds; 1 for deterministic bounds.
  double probability = 1.0;
  /// Set when the raw union bound fell below 0 and `probability` was floored.
  bool vacuous = false;
  std::map<std::string, double> params;
};

struct ComplexityBound {
  double value = 0.0;
  std::map<std::string, double> components;
};

/// 1 + ||v_perp||^2 / ||v_par||^2. Throws ZeroProjection when norm_v_par <= 0.
double exact_full_ratio(double norm_v_par, double norm_v_perp);

/// Lower bound 1 + (1 - zeta)/d on the expected one-step ratio, full data.
double expected_rate_full(double zeta, std::size_t d);

/// Lower bound (1 - zeta)/d on E[||v_perp||^2 / ||v||^2].
double key_quantity_bound(double zeta, std::size_t d);

/// K = K1 + K2 iterations after which P(zeta_K >= zeta_star) >= 1 - 2 rho.
/// Components: K1, K2, tau0, C, K1_proof.
ComplexityBound iteration_bound_full(std::size_t n, std::size_t d, double rho, double zeta_star,
                                     double c = 1.0);

/// d^2 log n + d log(1 / (1 - zeta_star)), the simplified full-data count.
double simplified_iteration_bound(std::size_t n, std::size_t d, double zeta_star);

/// (n/m) (d^2 log n + d log(1/(1 - zeta_star))).
double heuristic_iterations(std::size_t n, std::size_t m, std::size_t d, double zeta_star);

/// Delta = w_perp^T (Ubar^T U)^{-1} Ubar^T r for observation x = A v, where w_perp is
/// the least-squares coefficient of A v_perp on A U.
double delta_term(const Matrix& u, const Matrix& ubar, const SamplingOperator& op,
                  const Vector& v);

/// det(Ubar^T U_{t+1}) / det(Ubar^T U_t) predicted from the step quantities:
/// (||p||^2 + ||r~||^2 + Delta) / (||p|| sqrt(||p||^2 + ||r||^2)).
double determinant_ratio(double norm_p, double norm_r_tilde, double norm_r, double delta);

/// 1 + (2||r~||^2 - ||r||^2)/||p||^2 + 2 Delta/||p||^2. Throws ZeroProjection.
double step_lower_bound_undersampled(double norm_p, double norm_r_tilde, double norm_r,
                                     double delta);

/// Union-bound probability for the compressive rate, unclamped.
double cs_probability_raw(std::size_t d, std::size_t m, double delta);

/// Compressive-sampling expected rate (Gaussian A with N(0, 1/n) entries).
/// params: gamma1, gamma2, gamma2_proof, rate_proof, rate_under_sample_condition,
/// probability_raw.
RateBound expected_rate_cs(double zeta, std::size_t d, std::size_t m, std::size_t n,
                           double delta, double phi_d);

/// Smallest delta on a fine grid in (0, 1) whose compressive probability reaches
/// `target`; nullopt when no delta does.
std::optional<double> find_delta_cs(std::size_t d, std::size_t m, double target);

/// Largest compressive probability over delta in (0, 1) and the maximizing delta.
std::pair<double, double> best_delta_cs(std::size_t d, std::size_t m);

/// m >= d max{term1, term2}; components hold d*term1, d*term2 and the
/// derivation's variant of term2 (delta d / cos phi instead of delta cos phi d).
ComplexityBound sample_complexity_cs(std::size_t d, double delta, double phi_d, std::size_t n);

/// Missing-data expected ratio 1 + (1/4)(m/n)(1 - zeta)/d with probability 1 - 3/n^2.
RateBound expected_rate_missing(double zeta, std::size_t d, std::size_t m, std::size_t n);

/// m > max of three terms; components term1, term2, term3 and term1_proof.
ComplexityBound sample_complexity_missing(std::size_t d, double mu0, double mu_vperp,
                                          std::size_t n);

/// 1 - (1/4)(1 - d mu0/(16 n)) m/(n d).
double discrepancy_decay_factor(std::size_t d, std::size_t m, std::size_t n, double mu0);

/// Bound on E[kappa_{t+1} | kappa_t]: factor * kappa.
double discrepancy_decay_missing(double kappa, std::size_t d, std::size_t m, std::size_t n,
                                 double mu0);

/// E[zeta_0] = C (d/(n e))^d for a random start, evaluated in the log domain.
double expected_zeta0(std::size_t n, std::size_t d, double c = 1.0);
double log_expected_zeta0(std::size_t n, std::size_t d, double c = 1.0);

}  // namespace gstream::theory
