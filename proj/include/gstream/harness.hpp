#pragma once

/// Monte Carlo driver: single trials, improvement histograms, iteration-count
/// sweeps and the per-step identity checks.

#include "gstream/datagen.hpp"
#include "gstream/grouse.hpp"
#include "gstream/metrics.hpp"
#include "gstream/sampling.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gstream {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class InitKind { Random, PerturbedWithin };

struct InitSpec {
  InitKind kind = InitKind::Random;
  /// Absolute sum of squared sines for PerturbedWithin. When unset the target is
  /// region_fraction * d mu0 / (16 n), computed from the drawn truth.
  std::optional<double> target;
  double region_fraction = 0.5;
};

enum class DiagnosticsLevel {
  /// Summary only, no per-step records.
  None,
  /// Per-step records; delta and det_lower_bound are NaN.
  Basic,
  /// Also evaluates Delta and the undersampled lower bound (keeps v around).
  Full,
};

const char* to_string(DiagnosticsLevel level);
const char* to_string(InitKind kind);

struct TrialConfig {
  std::size_t n = 100;
  std::size_t d = 5;
  /// Measurements per sample; ignored (treated as n) for full data.
  std::size_t m = 0;
  SamplingKind op_kind = SamplingKind::Full;
  bool with_replacement = true;
  TruthKind truth_kind = TruthKind::DenseGaussian;
  /// Sparse truths only; default_sparse_density(n, d) when unset.
  std::optional<double> density;
  InitSpec init;
  double zeta_star = 1.0 - 1e-4;
  std::size_t max_iters = 10000;
  /// Stop as soon as zeta >= zeta_star.
  bool stop_at_target = true;
  std::uint64_t seed = 0;
  std::uint64_t trial_index = 0;
  std::size_t reorth_cadence = 100;
  DiagnosticsLevel diagnostics = DiagnosticsLevel::Basic;
  double fault_update_scale = 1.0;

  /// m for sampled kinds, n for full data.
  std::size_t effective_m() const;
  /// Throws ConfigError.
  void validate() const;
};

struct StepRecord {
  std::size_t t = 0;
  double zeta = 0.0;
  double kappa = 1.0;
  double theta = 0.0;
  double norm_p = 0.0;
  double norm_r_tilde = 0.0;
  double norm_r = 0.0;
  double delta = 0.0;
  double det_lower_bound = 0.0;
  StepStatus status = StepStatus::Updated;
};

struct TrialSeries {
  std::vector<StepRecord> records;
  double zeta0 = 0.0;
  double mu0 = 0.0;
  double final_zeta = 0.0;
  std::size_t steps = 0;
  /// First t with zeta_t >= zeta_star; empty means DidNotConverge.
  std::optional<std::size_t> iterations_to_target;
  double wall_time_s = 0.0;

  bool converged() const { return iterations_to_target.has_value(); }
};

TrialSeries run_trial(const TrialConfig& config);

/// Runs `count` trials with trial indices config.trial_index + k on `jobs` threads
/// (0 = hardware concurrency). Results are ordered by trial index.
std::vector<TrialSeries> run_trials(const TrialConfig& config, std::size_t count,
                                    std::size_t jobs = 1);

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  double mean_zeta = 0.0;
  double mean_ratio = 0.0;
  double std_error = 0.0;
  /// Theory rate at the bin centre.
  double theory_center = 0.0;
  /// Mean of the theory rate evaluated at each sample's own zeta.
  double theory_mean = 0.0;
  /// Mean largest principal angle of the samples; feeds the compressive rate.
  double mean_max_angle = 0.0;
};

struct ImprovementHistogram {
  std::vector<HistogramBin> bins;
  std::size_t total_steps = 0;
  /// Steps with zeta_t = 0, where no ratio exists; not binned.
  std::size_t undefined_steps = 0;
  /// Compressive only: delta plugged into the rate and its union-bound probability.
  double cs_delta = 0.0;
  double cs_probability = 1.0;
};

struct HistogramOptions {
  std::size_t bins = 20;
  /// Compressive rate parameter; required for Gaussian sampling.
  std::optional<double> cs_delta;
  std::size_t jobs = 1;
};

/// Runs `num_trials` trials of exactly `num_steps` steps each and bins every step's
/// ratio zeta_{t+1}/zeta_t by zeta_t (uniform bins over [0, 1]; zeta = 1 goes into
/// the last bin). The theory overlay matches the sampling kind.
ImprovementHistogram monte_carlo_ratio(const TrialConfig& config, std::size_t num_steps,
                                       std::size_t num_trials, const HistogramOptions& options = {});

enum class BoundKind {
  /// K1 + K2 of the global convergence theorem.
  Theorem,
  /// d^2 log n + d log(1/(1 - zeta_star)).
  Simplified,
  /// (n/m) times the simplified bound.
  Heuristic,
};

const char* to_string(BoundKind kind);

struct SweepSpec {
  TrialConfig base;
  std::vector<std::size_t> ns;
  std::vector<std::size_t> ds;
  /// Ignored for full data (one cell per (n, d) with m = n).
  std::vector<std::size_t> ms;
  std::size_t trials_per_cell = 10;
  BoundKind bound = BoundKind::Heuristic;
  /// Iteration cap = ceil(cap_multiplier * heuristic_iterations(cell)).
  double cap_multiplier = 50.0;
  std::size_t jobs = 1;
  /// Theorem bound only.
  double rho = 0.1;
};

struct SweepCell {
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t m = 0;
  double bound = 0.0;
  std::size_t cap = 0;
  /// Per trial; empty entries did not converge.
  std::vector<std::optional<std::size_t>> iterations;
  /// K / bound over converged trials; NaN when none converged.
  double mean_ratio = 0.0;
  /// Sample variance (n - 1 denominator); 0 with fewer than two converged trials.
  double var_ratio = 0.0;
  double fail_frac = 0.0;
};

struct SweepResult {
  std::vector<SweepCell> cells;
  BoundKind bound = BoundKind::Heuristic;
  double cap_multiplier = 50.0;
};

double bound_for_cell(BoundKind kind, std::size_t n, std::size_t d, std::size_t m,
                      double zeta_star, double rho = 0.1);

SweepResult sweep(const SweepSpec& spec);

/// Mean, sample variance and failure fraction of K / bound.
void summarize_cell(SweepCell& cell);

struct IdentityCheck {
  std::string name;
  double tolerance = 0.0;
  /// Largest normalized violation seen; the check passes when it is <= tolerance.
  double max_violation = 0.0;
  std::size_t samples = 0;

  bool passed() const { return max_violation <= tolerance; }
};

struct VerifyReport {
  std::vector<IdentityCheck> checks;
  std::size_t steps = 0;
  std::size_t updated = 0;

  bool passed() const;
  const IdentityCheck& check(const std::string& name) const;
};

/// Drives one trial for `num_steps` steps with exact recomputation of every
/// quantity and records the worst violation of each identity:
///   full_ratio_exact, schur_determinant, undersampled_lower_bound,
///   residual_orthogonality, projection_parallel, zeta_lower_bound, perp_overlap,
///   orthonormality, skipped_unchanged, full_monotone, procrustes_sandwich,
///   local_incoherence.
/// Identities that do not apply to the sampling kind report zero samples.
VerifyReport verify_step_invariants(const TrialConfig& config, std::size_t num_steps);

}  // namespace gstream
