#include "gstream/harness.hpp"

#include "gstream/theory.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <thread>

namespace gstream {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& body) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, count);
  if (jobs <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (std::size_t j = 0; j < jobs; ++j) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (failure) std::rethrow_exception(failure);
}

GroundTruth draw_truth(const TrialConfig& c) {
  Rng rng = make_rng(c.seed, c.trial_index, StreamTag::Truth);
  if (c.truth_kind == TruthKind::Sparse) {
    return gen_sparse_truth(c.n, c.d, c.density.value_or(default_sparse_density(c.n, c.d)), rng);
  }
  return gen_dense_truth(c.n, c.d, rng);
}

GrouseState initial_state(const TrialConfig& c, const GroundTruth& truth) {
  GrouseOptions options;
  options.reorth_cadence = c.reorth_cadence;
  options.fault_update_scale = c.fault_update_scale;
  Rng rng = make_rng(c.seed, c.trial_index, StreamTag::Init);
  if (c.init.kind == InitKind::Random) return GrouseState::init_random(c.n, c.d, rng, options);
  const double target =
      c.init.target.value_or(c.init.region_fraction * local_region_radius(c.n, c.d, truth.mu0));
  return GrouseState(perturb_within_region(truth.matrix(), target, rng), options);
}

OpSpec op_spec(const TrialConfig& c) {
  return OpSpec{c.op_kind, c.effective_m(), c.with_replacement};
}

// Truth, estimate and stream of one trial. The generator points into `truth`,
// so instances stay where they were built.
struct Trial {
  explicit Trial(const TrialConfig& c, bool keep_truth)
      : truth(draw_truth(c)),
        state(initial_state(c, truth)),
        stream(truth, op_spec(c), make_rng(c.seed, c.trial_index, StreamTag::Data), keep_truth) {}
  Trial(const Trial&) = delete;
  Trial& operator=(const Trial&) = delete;

  GroundTruth truth;
  GrouseState state;
  StreamGenerator stream;
};

// Maintains M = Ubar^T U through the rank-one updates instead of an n x d x d
// product per step; exact recomputation whenever the basis is re-orthonormalized.
class OverlapTracker {
 public:
  OverlapTracker(const Matrix& ubar, const Matrix& u) : ubar_(ubar) { reset(u); }

  void reset(const Matrix& u) {
    m_.noalias() = ubar_.transpose() * u;
    refresh();
  }

  void apply(const StepReport& report, const Matrix& u) {
    if (report.status != StepStatus::Updated) return;
    if (report.reorthonormalized) {
      reset(u);
      return;
    }
    m_.noalias() += (ubar_.transpose() * report.direction) * report.coefficients.transpose();
    refresh();
  }

  double log_zeta() const { return log_zeta_; }
  double zeta() const { return std::exp(log_zeta_); }
  const Matrix& overlap() const { return m_; }

 private:
  void refresh() { log_zeta_ = log_zeta_from_overlap(m_); }

  const Matrix& ubar_;
  Matrix m_;
  double log_zeta_ = 0.0;
};

double ratio_from_logs(double before, double after) {
  if (std::isinf(before)) return kNaN;
  if (std::isinf(after)) return 0.0;
  return std::exp(after - before);
}

}  // namespace

const char* to_string(DiagnosticsLevel level) {
  switch (level) {
    case DiagnosticsLevel::None: return "none";
    case DiagnosticsLevel::Basic: return "basic";
    case DiagnosticsLevel::Full: return "full";
  }
  return "unknown";
}

const char* to_string(InitKind kind) {
  switch (kind) {
    case InitKind::Random: return "random";
    case InitKind::PerturbedWithin: return "perturbed_within";
  }
  return "unknown";
}

const char* to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::Theorem: return "theorem";
    case BoundKind::Simplified: return "simplified";
    case BoundKind::Heuristic: return "heuristic";
  }
  return "unknown";
}

std::size_t TrialConfig::effective_m() const {
  return op_kind == SamplingKind::Full ? n : m;
}

void TrialConfig::validate() const {
  if (d < 1 || d >= n) throw ConfigError("need 1 <= d < n");
  if (op_kind != SamplingKind::Full && (m < 1 || m > n)) throw ConfigError("need 1 <= m <= n");
  if (op_kind == SamplingKind::EntrywiseMissing && !with_replacement && m > n) {
    throw ConfigError("sampling without replacement needs m <= n");
  }
  if (!(zeta_star > 0.0 && zeta_star < 1.0)) throw ConfigError("zeta_star must lie in (0, 1)");
  if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (density && !(*density > 0.0 && *density <= 1.0)) throw ConfigError("density must lie in (0, 1]");
  if (init.target && !(*init.target >= 0.0)) throw ConfigError("init target must be >= 0");
  if (!(init.region_fraction >= 0.0)) throw ConfigError("region_fraction must be >= 0");
  if (!std::isfinite(fault_update_scale)) throw ConfigError("fault_update_scale must be finite");
}

TrialSeries run_trial(const TrialConfig& config) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  const bool full_diag = config.diagnostics == DiagnosticsLevel::Full;
  Trial trial(config, full_diag);
  const Matrix& ubar = trial.truth.matrix();
  OverlapTracker tracker(ubar, trial.state.basis());

  TrialSeries out;
  out.mu0 = trial.truth.mu0;
  out.zeta0 = tracker.zeta();
  out.final_zeta = out.zeta0;
  if (config.stop_at_target && out.zeta0 >= config.zeta_star) {
    out.iterations_to_target = 0;
  } else {
    if (config.diagnostics != DiagnosticsLevel::None) {
      out.records.reserve(std::min<std::size_t>(config.max_iters, 1u << 16));
    }
    for (std::size_t t = 1; t <= config.max_iters; ++t) {
      StreamSample sample = trial.stream.next();
      double delta = kNaN;
      if (full_diag && !std::isinf(tracker.log_zeta())) {
        try {
          delta = theory::delta_term(trial.state.basis(), ubar, sample.op, sample.v);
        } catch (const NumericsError&) {
          // Rank-deficient A U or singular overlap: no Delta for this step.
        }
      }
      const StepReport report = trial.state.step(sample.op, sample.x);
      tracker.apply(report, trial.state.basis());
      out.steps = t;
      out.final_zeta = tracker.zeta();

      if (config.diagnostics != DiagnosticsLevel::None) {
        StepRecord rec;
        rec.t = t;
        rec.zeta = out.final_zeta;
        rec.kappa = 1.0 - rec.zeta;
        rec.theta = report.theta;
        rec.norm_p = report.norm_p;
        rec.norm_r_tilde = report.norm_r_tilde;
        rec.norm_r = report.norm_r;
        rec.status = report.status;
        const bool updated = report.status == StepStatus::Updated;
        rec.delta = updated ? delta : kNaN;
        rec.det_lower_bound =
            updated && std::isfinite(delta)
                ? theory::step_lower_bound_undersampled(report.norm_p, report.norm_r_tilde,
                                                        report.norm_r, delta)
                : kNaN;
        out.records.push_back(rec);
      }
      if (config.stop_at_target && out.final_zeta >= config.zeta_star) {
        out.iterations_to_target = t;
        break;
      }
    }
  }
  out.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return out;
}

std::vector<TrialSeries> run_trials(const TrialConfig& config, std::size_t count, std::size_t jobs) {
  config.validate();
  std::vector<TrialSeries> out(count);
  parallel_for(count, jobs, [&](std::size_t k) {
    TrialConfig c = config;
    c.trial_index = config.trial_index + k;
    out[k] = run_trial(c);
  });
  return out;
}

namespace {

struct BinAccumulator {
  std::size_t count = 0;
  double sum_zeta = 0.0;
  double sum_ratio = 0.0;
  double sum_ratio_sq = 0.0;
  double sum_theory = 0.0;
  double sum_angle = 0.0;

  void add(double zeta, double ratio, double theory, double angle) {
    ++count;
    sum_zeta += zeta;
    sum_ratio += ratio;
    sum_ratio_sq += ratio * ratio;
    sum_theory += theory;
    sum_angle += angle;
  }

  void merge(const BinAccumulator& o) {
    count += o.count;
    sum_zeta += o.sum_zeta;
    sum_ratio += o.sum_ratio;
    sum_ratio_sq += o.sum_ratio_sq;
    sum_theory += o.sum_theory;
    sum_angle += o.sum_angle;
  }
};

struct TrialHistogram {
  std::vector<BinAccumulator> bins;
  std::size_t total = 0;
  std::size_t undefined = 0;
};

}  // namespace

ImprovementHistogram monte_carlo_ratio(const TrialConfig& config, std::size_t num_steps,
                                       std::size_t num_trials, const HistogramOptions& options) {
  config.validate();
  if (options.bins < 1) throw ConfigError("histogram needs at least one bin");
  const std::size_t n = config.n;
  const std::size_t d = config.d;
  const std::size_t m = config.effective_m();
  const bool compressive = config.op_kind == SamplingKind::GaussianCompressive;
  double cs_delta = 0.0;
  if (compressive) {
    if (!options.cs_delta) throw ConfigError("compressive histogram needs cs_delta");
    cs_delta = *options.cs_delta;
    theory::expected_rate_cs(0.5, d, m, n, cs_delta, 0.0);  // rejects bad delta up front
  }
  const double max_angle = std::nextafter(std::numbers::pi / 2, 0.0);

  auto theory_rate = [&](double zeta, double angle) {
    switch (config.op_kind) {
      case SamplingKind::Full: return theory::expected_rate_full(zeta, d);
      case SamplingKind::EntrywiseMissing: return theory::expected_rate_missing(zeta, d, m, n).rate;
      case SamplingKind::GaussianCompressive:
        return theory::expected_rate_cs(zeta, d, m, n, cs_delta, std::min(angle, max_angle)).rate;
    }
    return kNaN;
  };

  std::vector<TrialHistogram> per_trial(num_trials);
  parallel_for(num_trials, options.jobs, [&](std::size_t k) {
    TrialConfig c = config;
    c.trial_index = config.trial_index + k;
    Trial trial(c, false);
    OverlapTracker tracker(trial.truth.matrix(), trial.state.basis());
    TrialHistogram& h = per_trial[k];
    h.bins.resize(options.bins);
    for (std::size_t t = 0; t < num_steps; ++t) {
      const double log_before = tracker.log_zeta();
      const double zeta = std::exp(log_before);
      // The compressive rate depends on the largest principal angle.
      const double angle = compressive ? profile_from_overlap(tracker.overlap()).max_angle() : 0.0;
      const StreamSample sample = trial.stream.next();
      const StepReport report = trial.state.step(sample.op, sample.x);
      tracker.apply(report, trial.state.basis());
      ++h.total;
      const double ratio = ratio_from_logs(log_before, tracker.log_zeta());
      if (std::isnan(ratio)) {
        ++h.undefined;
        continue;
      }
      const auto bin = std::min<std::size_t>(
          options.bins - 1, static_cast<std::size_t>(zeta * static_cast<double>(options.bins)));
      h.bins[bin].add(zeta, ratio, theory_rate(zeta, angle), angle);
    }
  });

  std::vector<BinAccumulator> merged(options.bins);
  ImprovementHistogram out;
  for (const auto& h : per_trial) {
    for (std::size_t b = 0; b < options.bins; ++b) merged[b].merge(h.bins[b]);
    out.total_steps += h.total;
    out.undefined_steps += h.undefined;
  }
  if (compressive) {
    out.cs_delta = cs_delta;
    out.cs_probability = std::clamp(theory::cs_probability_raw(d, m, cs_delta), 0.0, 1.0);
  }
  const double width = 1.0 / static_cast<double>(options.bins);
  for (std::size_t b = 0; b < options.bins; ++b) {
    const BinAccumulator& acc = merged[b];
    HistogramBin bin;
    bin.lo = static_cast<double>(b) * width;
    bin.hi = static_cast<double>(b + 1) * width;
    bin.count = acc.count;
    const double centre = 0.5 * (bin.lo + bin.hi);
    if (acc.count > 0) {
      const double cnt = static_cast<double>(acc.count);
      bin.mean_zeta = acc.sum_zeta / cnt;
      bin.mean_ratio = acc.sum_ratio / cnt;
      bin.theory_mean = acc.sum_theory / cnt;
      bin.mean_max_angle = acc.sum_angle / cnt;
      if (acc.count > 1) {
        const double var =
            std::max(0.0, (acc.sum_ratio_sq - cnt * bin.mean_ratio * bin.mean_ratio) / (cnt - 1.0));
        bin.std_error = std::sqrt(var / cnt);
      }
      bin.theory_center = theory_rate(centre, bin.mean_max_angle);
    } else {
      bin.mean_zeta = bin.mean_ratio = bin.theory_mean = bin.mean_max_angle = kNaN;
      bin.std_error = kNaN;
      bin.theory_center = compressive ? kNaN : theory_rate(centre, 0.0);
    }
    out.bins.push_back(bin);
  }
  return out;
}

double bound_for_cell(BoundKind kind, std::size_t n, std::size_t d, std::size_t m,
                      double zeta_star, double rho) {
  switch (kind) {
    case BoundKind::Theorem: return theory::iteration_bound_full(n, d, rho, zeta_star).value;
    case BoundKind::Simplified: return theory::simplified_iteration_bound(n, d, zeta_star);
    case BoundKind::Heuristic: return theory::heuristic_iterations(n, m, d, zeta_star);
  }
  return kNaN;
}

void summarize_cell(SweepCell& cell) {
  std::vector<double> ratios;
  for (const auto& k : cell.iterations) {
    if (k) ratios.push_back(static_cast<double>(*k) / cell.bound);
  }
  const std::size_t trials = cell.iterations.size();
  cell.fail_frac = trials ? static_cast<double>(trials - ratios.size()) / static_cast<double>(trials)
                          : kNaN;
  if (ratios.empty()) {
    cell.mean_ratio = kNaN;
    cell.var_ratio = kNaN;
    return;
  }
  double sum = 0.0;
  for (double r : ratios) sum += r;
  cell.mean_ratio = sum / static_cast<double>(ratios.size());
  double ss = 0.0;
  for (double r : ratios) ss += (r - cell.mean_ratio) * (r - cell.mean_ratio);
  cell.var_ratio = ratios.size() > 1 ? ss / static_cast<double>(ratios.size() - 1) : 0.0;
}

SweepResult sweep(const SweepSpec& spec) {
  const bool full = spec.base.op_kind == SamplingKind::Full;
  if (spec.ns.empty() || spec.ds.empty() || (!full && spec.ms.empty())) {
    throw ConfigError("sweep grid is empty");
  }
  if (spec.trials_per_cell < 1) throw ConfigError("trials_per_cell must be >= 1");
  if (!(spec.cap_multiplier > 0.0)) throw ConfigError("cap_multiplier must be positive");

  SweepResult result;
  result.bound = spec.bound;
  result.cap_multiplier = spec.cap_multiplier;
  std::vector<TrialConfig> cell_configs;
  for (std::size_t n : spec.ns) {
    for (std::size_t d : spec.ds) {
      const std::vector<std::size_t> ms = full ? std::vector<std::size_t>{n} : spec.ms;
      for (std::size_t m : ms) {
        TrialConfig c = spec.base;
        c.n = n;
        c.d = d;
        c.m = m;
        c.max_iters = 1;
        c.validate();
        SweepCell cell;
        cell.n = n;
        cell.d = d;
        cell.m = c.effective_m();
        try {
          cell.bound = bound_for_cell(spec.bound, n, d, cell.m, c.zeta_star, spec.rho);
          cell.cap = static_cast<std::size_t>(std::ceil(
              spec.cap_multiplier * theory::heuristic_iterations(n, cell.m, d, c.zeta_star)));
        } catch (const theory::InvalidParameter& e) {
          throw ConfigError(e.what());
        }
        c.max_iters = std::max<std::size_t>(1, cell.cap);
        c.stop_at_target = true;
        c.diagnostics = DiagnosticsLevel::None;
        c.trial_index = spec.base.trial_index + cell_configs.size() * spec.trials_per_cell;
        cell.iterations.resize(spec.trials_per_cell);
        result.cells.push_back(cell);
        cell_configs.push_back(c);
      }
    }
  }

  const std::size_t total = cell_configs.size() * spec.trials_per_cell;
  parallel_for(total, spec.jobs, [&](std::size_t job) {
    const std::size_t cell = job / spec.trials_per_cell;
    const std::size_t k = job % spec.trials_per_cell;
    TrialConfig c = cell_configs[cell];
    c.trial_index += k;
    result.cells[cell].iterations[k] = run_trial(c).iterations_to_target;
  });
  for (auto& cell : result.cells) summarize_cell(cell);
  return result;
}

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const IdentityCheck& c) { return c.passed(); });
}

const IdentityCheck& VerifyReport::check(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return c;
  }
  throw std::out_of_range("no identity check named " + name);
}

VerifyReport verify_step_invariants(const TrialConfig& config, std::size_t num_steps) {
  config.validate();
  TrialConfig c = config;
  c.diagnostics = DiagnosticsLevel::Full;
  Trial trial(c, true);
  const Matrix& ubar = trial.truth.matrix();
  const double mu0 = trial.truth.mu0;
  const bool full = c.op_kind == SamplingKind::Full;

  VerifyReport report;
  report.checks = {
      {"full_ratio_exact", 1e-9},     {"schur_determinant", 1e-9},
      {"undersampled_lower_bound", 1e-9}, {"residual_orthogonality", 1e-10},
      {"projection_parallel", 1e-8},  {"zeta_lower_bound", 1e-12},
      {"perp_overlap", 1e-9},         {"orthonormality", 1e-8},
      {"skipped_unchanged", 0.0},     {"full_monotone", 1e-12},
      {"procrustes_sandwich", 1e-9},  {"local_incoherence", 0.0},
  };
  auto record = [&](std::size_t index, double violation) {
    IdentityCheck& chk = report.checks[index];
    ++chk.samples;
    if (std::isnan(violation)) violation = std::numeric_limits<double>::infinity();
    chk.max_violation = std::max(chk.max_violation, violation);
  };
  enum {
    kFullRatio, kSchur, kLowerBound, kResidual, kParallel, kZetaLower, kPerp, kOrtho, kSkipped,
    kMonotone, kProcrustes, kLocal
  };

  for (std::size_t step = 0; step < num_steps; ++step) {
    const Matrix u = trial.state.basis();
    const Matrix overlap = ubar.transpose() * u;
    const PrincipalAngleProfile before = profile_from_overlap(overlap);

    record(kZetaLower, std::max(0.0, (1.0 - before.frob_discrepancy) - before.zeta));
    const double dist = procrustes_distance(u, ubar);
    const double s2 = before.frob_discrepancy;
    record(kProcrustes, std::max({0.0, s2 - dist * dist, dist * dist - 2.0 * s2}));
    if (local_region_check(u, ubar, mu0)) {
      record(kLocal, std::max(0.0, subspace_incoherence(u) - 2.0 * mu0));
    }

    const StreamSample sample = trial.stream.next();
    const double norm_v = sample.v.norm();
    const Projection proj = project(u, sample.v);
    record(kPerp, std::max(0.0, (ubar.transpose() * proj.perp).norm() -
                                    before.max_sine() * proj.perp.norm()) /
                      std::max(norm_v, 1e-300));

    const Matrix au = sample.op.restrict_basis(u);
    bool full_rank = true;
    try {
      const LeastSquares ls(au);
      const Vector w_par = ls.solve(sample.op.apply(proj.parallel));
      record(kParallel, (u * w_par - proj.parallel).norm() / std::max(norm_v, 1e-300));
    } catch (const RankDeficient&) {
      full_rank = false;
    }
    double delta = kNaN;
    if (full_rank && before.zeta > 0.0) delta = theory::delta_term(u, ubar, sample.op, sample.v);

    const StepReport rep = trial.state.step(sample.op, sample.x);
    ++report.steps;
    if (rep.status != StepStatus::Updated) {
      record(kSkipped, (trial.state.basis() - u).norm());
      continue;
    }
    ++report.updated;
    const double norm_x = std::max(sample.x.norm(), 1e-300);
    const Vector r_tilde = sample.x - au * rep.w;
    record(kResidual, (au.transpose() * r_tilde).norm() / norm_x);
    record(kOrtho, orthonormality_error(trial.state.basis()));

    // The identities concern the geodesic step itself, before any re-orthonormalization.
    const Matrix raw = u + rep.direction * rep.coefficients.transpose();
    const Matrix overlap_after = ubar.transpose() * raw;
    const PrincipalAngleProfile after = profile_from_overlap(overlap_after);
    const auto ratio = zeta_ratio(before, after);

    if (full && ratio && proj.parallel.norm() > 0.0) {
      const double exact = theory::exact_full_ratio(proj.parallel.norm(), proj.perp.norm());
      record(kFullRatio, std::abs(*ratio - exact) / std::max(1.0, exact));
      record(kMonotone, std::max(0.0, before.zeta - after.zeta));
    }
    if (std::isfinite(delta)) {
      const double measured = overlap.partialPivLu().solve(overlap_after).determinant();
      const double predicted =
          theory::determinant_ratio(rep.norm_p, rep.norm_r_tilde, rep.norm_r, delta);
      record(kSchur, std::abs(measured - predicted) / std::max(1.0, std::abs(predicted)));
      if (ratio) {
        const double bound = theory::step_lower_bound_undersampled(rep.norm_p, rep.norm_r_tilde,
                                                                   rep.norm_r, delta);
        record(kLowerBound, std::max(0.0, bound - *ratio) / std::max(1.0, std::abs(bound)));
      }
    }
  }
  return report;
}

}  // namespace gstream
