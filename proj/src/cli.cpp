#include "gstream/cli.hpp"

#include "gstream/theory.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>

namespace gstream::cli {

using nlohmann::json;
namespace fs = std::filesystem;

const char* const kSeriesHeader = "t,zeta,kappa,theta,norm_p,norm_r_tilde,norm_r,delta,det_lower_bound,status";
const char* const kGridHeader = "n,d,m,mean_ratio,var_ratio,fail_frac";

namespace {

// Keys of the trial configuration itself.
const std::set<std::string> kTrialKeys = {
    "n",           "d",         "m",        "op_kind",        "with_replacement",
    "truth_kind",  "density",   "init",     "zeta_star",      "max_iters",
    "stop_at_target", "seed",   "trial_index", "reorth_cadence", "diagnostics",
    "fault_update_scale",
};

std::size_t get_size(const json& j, const char* key) {
  const json& v = j.at(key);
  if (!v.is_number_unsigned()) throw ConfigError(std::string(key) + " must be a non-negative integer");
  return v.get<std::size_t>();
}

double get_double(const json& j, const char* key) {
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(std::string(key) + " must be a number");
  return v.get<double>();
}

bool get_bool(const json& j, const char* key) {
  const json& v = j.at(key);
  if (!v.is_boolean()) throw ConfigError(std::string(key) + " must be a boolean");
  return v.get<bool>();
}

std::string get_string(const json& j, const char* key) {
  const json& v = j.at(key);
  if (!v.is_string()) throw ConfigError(std::string(key) + " must be a string");
  return v.get<std::string>();
}

std::vector<std::size_t> get_size_list(const json& j, const char* key) {
  const json& v = j.at(key);
  if (v.is_number_unsigned()) return {v.get<std::size_t>()};
  if (!v.is_array()) throw ConfigError(std::string(key) + " must be a list of integers");
  std::vector<std::size_t> out;
  for (const json& e : v) {
    if (!e.is_number_unsigned()) throw ConfigError(std::string(key) + " must hold non-negative integers");
    out.push_back(e.get<std::size_t>());
  }
  return out;
}

SamplingKind parse_op_kind(const std::string& s) {
  if (s == "full") return SamplingKind::Full;
  if (s == "gaussian" || s == "compressive") return SamplingKind::GaussianCompressive;
  if (s == "entrywise" || s == "missing") return SamplingKind::EntrywiseMissing;
  throw ConfigError("op_kind must be full, gaussian or entrywise");
}

TruthKind parse_truth_kind(const std::string& s) {
  if (s == "dense") return TruthKind::DenseGaussian;
  if (s == "sparse") return TruthKind::Sparse;
  throw ConfigError("truth_kind must be dense or sparse");
}

DiagnosticsLevel parse_diagnostics(const std::string& s) {
  if (s == "none") return DiagnosticsLevel::None;
  if (s == "basic") return DiagnosticsLevel::Basic;
  if (s == "full") return DiagnosticsLevel::Full;
  throw ConfigError("diagnostics must be none, basic or full");
}

BoundKind parse_bound(const std::string& s) {
  if (s == "theorem") return BoundKind::Theorem;
  if (s == "simplified") return BoundKind::Simplified;
  if (s == "heuristic") return BoundKind::Heuristic;
  throw ConfigError("bound must be theorem, simplified or heuristic");
}

InitSpec parse_init(const json& j) {
  InitSpec init;
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "random") return init;
    if (s == "perturbed_within") {
      init.kind = InitKind::PerturbedWithin;
      return init;
    }
    throw ConfigError("init must be random or perturbed_within");
  }
  if (!j.is_object()) throw ConfigError("init must be a string or an object");
  for (const auto& [key, _] : j.items()) {
    if (key != "kind" && key != "target" && key != "region_fraction") {
      throw ConfigError("unknown init key: " + key);
    }
  }
  init = parse_init(j.contains("kind") ? j.at("kind") : json("random"));
  if (j.contains("target")) init.target = get_double(j, "target");
  if (j.contains("region_fraction")) init.region_fraction = get_double(j, "region_fraction");
  return init;
}

TrialConfig trial_from_json(const json& j, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!kTrialKeys.count(key) && !allowed.count(key)) throw ConfigError("unknown config key: " + key);
  }
  TrialConfig c;
  if (j.contains("n")) c.n = get_size(j, "n");
  if (j.contains("d")) c.d = get_size(j, "d");
  if (j.contains("m")) c.m = get_size(j, "m");
  if (j.contains("op_kind")) c.op_kind = parse_op_kind(get_string(j, "op_kind"));
  if (j.contains("with_replacement")) c.with_replacement = get_bool(j, "with_replacement");
  if (j.contains("truth_kind")) c.truth_kind = parse_truth_kind(get_string(j, "truth_kind"));
  if (j.contains("density")) c.density = get_double(j, "density");
  if (j.contains("init")) c.init = parse_init(j.at("init"));
  if (j.contains("zeta_star")) c.zeta_star = get_double(j, "zeta_star");
  if (j.contains("max_iters")) c.max_iters = get_size(j, "max_iters");
  if (j.contains("stop_at_target")) c.stop_at_target = get_bool(j, "stop_at_target");
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("trial_index")) c.trial_index = get_size(j, "trial_index");
  if (j.contains("reorth_cadence")) c.reorth_cadence = get_size(j, "reorth_cadence");
  if (j.contains("diagnostics")) c.diagnostics = parse_diagnostics(get_string(j, "diagnostics"));
  if (j.contains("fault_update_scale")) c.fault_update_scale = get_double(j, "fault_update_scale");
  return c;
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json config_json(const TrialConfig& c) {
  json init = {{"kind", to_string(c.init.kind)}, {"region_fraction", c.init.region_fraction}};
  if (c.init.target) init["target"] = *c.init.target;
  json j = {{"n", c.n},
            {"d", c.d},
            {"m", c.effective_m()},
            {"op_kind", to_string(c.op_kind)},
            {"with_replacement", c.with_replacement},
            {"truth_kind", to_string(c.truth_kind)},
            {"init", init},
            {"zeta_star", c.zeta_star},
            {"max_iters", c.max_iters},
            {"stop_at_target", c.stop_at_target},
            {"seed", c.seed},
            {"trial_index", c.trial_index},
            {"reorth_cadence", c.reorth_cadence},
            {"diagnostics", to_string(c.diagnostics)},
            {"fault_update_scale", c.fault_update_scale}};
  if (c.density) j["density"] = *c.density;
  return j;
}

json trial_json(const TrialSeries& s, std::uint64_t trial_index) {
  return {{"trial_index", trial_index},
          {"converged", s.converged()},
          {"iterations_to_target", s.iterations_to_target ? json(*s.iterations_to_target) : json(nullptr)},
          {"steps", s.steps},
          {"zeta0", number(s.zeta0)},
          {"final_zeta", number(s.final_zeta)},
          {"mu0", number(s.mu0)},
          {"wall_time_s", s.wall_time_s}};
}

json series_json(const TrialSeries& s) {
  json rows = json::array();
  for (const auto& r : s.records) {
    rows.push_back({{"t", r.t},
                    {"zeta", number(r.zeta)},
                    {"kappa", number(r.kappa)},
                    {"theta", number(r.theta)},
                    {"norm_p", number(r.norm_p)},
                    {"norm_r_tilde", number(r.norm_r_tilde)},
                    {"norm_r", number(r.norm_r)},
                    {"delta", number(r.delta)},
                    {"det_lower_bound", number(r.det_lower_bound)},
                    {"status", to_string(r.status)}});
  }
  return rows;
}

json cell_json(const SweepCell& c) {
  json iterations = json::array();
  for (const auto& k : c.iterations) iterations.push_back(k ? json(*k) : json(nullptr));
  return {{"n", c.n},
          {"d", c.d},
          {"m", c.m},
          {"bound", number(c.bound)},
          {"cap", c.cap},
          {"mean_ratio", number(c.mean_ratio)},
          {"var_ratio", number(c.var_ratio)},
          {"fail_frac", number(c.fail_frac)},
          {"iterations", iterations}};
}

json histogram_json(const ImprovementHistogram& h) {
  json bins = json::array();
  for (const auto& b : h.bins) {
    bins.push_back({{"lo", b.lo},
                    {"hi", b.hi},
                    {"count", b.count},
                    {"mean_zeta", number(b.mean_zeta)},
                    {"mean_ratio", number(b.mean_ratio)},
                    {"std_error", number(b.std_error)},
                    {"theory_center", number(b.theory_center)},
                    {"theory_mean", number(b.theory_mean)},
                    {"mean_max_angle", number(b.mean_max_angle)}});
  }
  return {{"bins", bins},
          {"total_steps", h.total_steps},
          {"undefined_steps", h.undefined_steps},
          {"cs_delta", h.cs_delta},
          {"cs_probability", h.cs_probability}};
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << content;
  if (!f) throw ConfigError("cannot write " + path.string());
}

fs::path prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("output directory not writable: " + dir);
  return fs::path(dir);
}

struct Common {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string format = "csv";
  std::size_t jobs = 1;
};

std::string read_config(const Common& opts) {
  if (opts.config_path.empty()) throw ConfigError("--config is required");
  std::ifstream f(opts.config_path, std::ios::binary);
  if (!f) throw ConfigError("cannot read config file: " + opts.config_path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// --seed wins, then the config's own seed, then GS_SEED.
void apply_seed(TrialConfig& c, const json& j, const Common& opts) {
  if (opts.seed) {
    c.seed = *opts.seed;
    return;
  }
  if (j.contains("seed")) return;
  if (const char* env = std::getenv("GS_SEED"); env && *env) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (*end != '\0' || env[0] == '-') throw ConfigError("GS_SEED must be a non-negative integer");
    c.seed = v;
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

int cmd_run(const Common& opts, std::ostream& out) {
  const json j = parse_json(read_config(opts));
  TrialConfig c = trial_from_json(j, {"trials", "bound", "rho"});
  apply_seed(c, j, opts);
  c.validate();
  const std::size_t trials = j.contains("trials") ? get_size(j, "trials") : 1;
  if (trials < 1) throw ConfigError("trials must be >= 1");
  const BoundKind bound_kind = j.contains("bound") ? parse_bound(get_string(j, "bound")) : BoundKind::Heuristic;
  const double rho = j.contains("rho") ? get_double(j, "rho") : 0.1;
  const fs::path dir = prepare_out_dir(opts.out_dir);

  TrialConfig recorded = c;
  if (recorded.diagnostics == DiagnosticsLevel::None) recorded.diagnostics = DiagnosticsLevel::Basic;
  std::vector<TrialSeries> series = run_trials(recorded, trials, opts.jobs);

  SweepCell cell;
  cell.n = c.n;
  cell.d = c.d;
  cell.m = c.effective_m();
  try {
    cell.bound = bound_for_cell(bound_kind, c.n, c.d, cell.m, c.zeta_star, rho);
  } catch (const theory::InvalidParameter& e) {
    throw ConfigError(e.what());
  }
  cell.cap = c.max_iters;
  json per_trial = json::array();
  for (std::size_t k = 0; k < series.size(); ++k) {
    cell.iterations.push_back(series[k].iterations_to_target);
    per_trial.push_back(trial_json(series[k], c.trial_index + k));
  }
  summarize_cell(cell);

  if (opts.format == "json") {
    write_file(dir / "series.json", dump(series_json(series.front())));
  } else {
    write_file(dir / "series.csv", series_csv(series.front()));
  }
  json summary = {{"command", "run"},
                  {"config", config_json(c)},
                  {"trials", per_trial},
                  {"aggregate", cell_json(cell)},
                  {"bound_kind", to_string(bound_kind)},
                  {"failure_rule", "did not reach zeta_star within max_iters"}};
  write_file(dir / "summary.json", dump(summary));
  out << "run: " << trials << " trial(s), converged " << (1.0 - cell.fail_frac) * 100.0
      << "%, mean K/bound " << format_double(cell.mean_ratio) << "\n";
  return kOk;
}

int cmd_sweep(const Common& opts, std::ostream& out) {
  const json j = parse_json(read_config(opts));
  TrialConfig base = trial_from_json(j, {"grid", "trials_per_cell", "bound", "cap_multiplier", "rho"});
  apply_seed(base, j, opts);
  SweepSpec spec;
  spec.base = base;
  if (!j.contains("grid") || !j.at("grid").is_object()) throw ConfigError("sweep needs a grid object");
  const json& grid = j.at("grid");
  for (const auto& [key, _] : grid.items()) {
    if (key != "n" && key != "d" && key != "m") throw ConfigError("unknown grid key: " + key);
  }
  spec.ns = grid.contains("n") ? get_size_list(grid, "n") : std::vector<std::size_t>{};
  spec.ds = grid.contains("d") ? get_size_list(grid, "d") : std::vector<std::size_t>{};
  spec.ms = grid.contains("m") ? get_size_list(grid, "m") : std::vector<std::size_t>{};
  if (j.contains("trials_per_cell")) spec.trials_per_cell = get_size(j, "trials_per_cell");
  if (j.contains("bound")) spec.bound = parse_bound(get_string(j, "bound"));
  if (j.contains("cap_multiplier")) spec.cap_multiplier = get_double(j, "cap_multiplier");
  if (j.contains("rho")) spec.rho = get_double(j, "rho");
  spec.jobs = opts.jobs;

  SweepResult result = sweep(spec);
  const fs::path dir = prepare_out_dir(opts.out_dir);
  json cells = json::array();
  for (const auto& cell : result.cells) cells.push_back(cell_json(cell));
  if (opts.format == "json") {
    write_file(dir / "grid.json", dump(cells));
  } else {
    write_file(dir / "grid.csv", grid_csv(result));
  }
  json summary = {{"command", "sweep"},
                  {"config", config_json(base)},
                  {"bound_kind", to_string(result.bound)},
                  {"trials_per_cell", spec.trials_per_cell},
                  {"cap_multiplier", result.cap_multiplier},
                  {"failure_rule", "did not reach zeta_star within ceil(cap_multiplier * heuristic_iterations)"},
                  {"cells", cells}};
  write_file(dir / "summary.json", dump(summary));
  out << "sweep: " << result.cells.size() << " cell(s)\n";
  return kOk;
}

int cmd_verify(const Common& opts, std::ostream& out) {
  const json j = parse_json(read_config(opts));
  TrialConfig c = trial_from_json(j, {"num_steps", "histogram"});
  apply_seed(c, j, opts);
  c.validate();
  const std::size_t num_steps = j.contains("num_steps") ? get_size(j, "num_steps") : 500;
  const fs::path dir = prepare_out_dir(opts.out_dir);

  const VerifyReport report = verify_step_invariants(c, num_steps);
  json identities = json::array();
  for (const auto& chk : report.checks) {
    identities.push_back({{"name", chk.name},
                          {"max_violation", number(chk.max_violation)},
                          {"tolerance", chk.tolerance},
                          {"samples", chk.samples},
                          {"passed", chk.passed()}});
  }
  json doc = {{"command", "verify"},
              {"config", config_json(c)},
              {"passed", report.passed()},
              {"steps", report.steps},
              {"updated", report.updated},
              {"identities", identities}};

  if (j.contains("histogram")) {
    const json& h = j.at("histogram");
    if (!h.is_object()) throw ConfigError("histogram must be an object");
    for (const auto& [key, _] : h.items()) {
      if (key != "num_steps" && key != "num_trials" && key != "bins" && key != "cs_delta") {
        throw ConfigError("unknown histogram key: " + key);
      }
    }
    HistogramOptions ho;
    ho.jobs = opts.jobs;
    if (h.contains("bins")) ho.bins = get_size(h, "bins");
    if (h.contains("cs_delta")) ho.cs_delta = get_double(h, "cs_delta");
    const std::size_t steps = h.contains("num_steps") ? get_size(h, "num_steps") : 1000;
    const std::size_t trials = h.contains("num_trials") ? get_size(h, "num_trials") : 10;
    TrialConfig hc = c;
    hc.stop_at_target = false;
    ImprovementHistogram hist;
    try {
      hist = monte_carlo_ratio(hc, steps, trials, ho);
    } catch (const theory::InvalidParameter& e) {
      throw ConfigError(e.what());
    }
    json hj = histogram_json(hist);
    // Statistical overlay: informational, never part of the exit code.
    bool consistent = true;
    for (const auto& b : hist.bins) {
      if (b.count >= 10 && b.mean_ratio < b.theory_mean - 3.0 * b.std_error) consistent = false;
    }
    hj["above_theory_within_3se"] = consistent;
    doc["histogram"] = hj;
  }
  write_file(dir / "verify.json", dump(doc));
  for (const auto& chk : report.checks) {
    out << (chk.passed() ? "ok   " : "FAIL ") << chk.name << " max_violation="
        << format_double(chk.max_violation) << " tol=" << format_double(chk.tolerance)
        << " samples=" << chk.samples << "\n";
  }
  return report.passed() ? kOk : kVerificationFailed;
}

json complexity_json(const theory::ComplexityBound& b) {
  json comp = json::object();
  for (const auto& [k, v] : b.components) comp[k] = number(v);
  return {{"value", number(b.value)}, {"components", comp}};
}

json rate_json(const theory::RateBound& r) {
  json params = json::object();
  for (const auto& [k, v] : r.params) params[k] = number(v);
  return {{"rate", number(r.rate)},
          {"probability", number(r.probability)},
          {"vacuous", r.vacuous},
          {"params", params}};
}

int cmd_bounds(const Common& opts, std::ostream& out) {
  const json j = parse_json(read_config(opts));
  const std::set<std::string> allowed = {"n", "d", "m", "rho", "zeta_star", "zeta", "delta",
                                         "phi_d", "mu0", "mu_vperp", "c", "kappa", "prob_target"};
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown bounds key: " + key);
  }
  if (!j.contains("n") || !j.contains("d")) throw ConfigError("bounds needs n and d");
  const std::size_t n = get_size(j, "n");
  const std::size_t d = get_size(j, "d");
  if (d < 1 || d >= n) throw ConfigError("need 1 <= d < n");
  const double rho = j.contains("rho") ? get_double(j, "rho") : 0.1;
  const double zeta_star = j.contains("zeta_star") ? get_double(j, "zeta_star") : 1.0 - 1e-4;
  const double zeta = j.contains("zeta") ? get_double(j, "zeta") : 0.5;
  const double c = j.contains("c") ? get_double(j, "c") : 1.0;
  const double mu0 = j.contains("mu0") ? get_double(j, "mu0") : 1.0;
  const double mu_vperp = j.contains("mu_vperp") ? get_double(j, "mu_vperp") : 1.0;
  const double phi_d = j.contains("phi_d") ? get_double(j, "phi_d") : std::numbers::pi / 4;
  const double delta = j.contains("delta") ? get_double(j, "delta") : 0.25;
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  const double kappa = j.contains("kappa") ? get_double(j, "kappa") : 1.0 - zeta;
  const double prob_target = j.contains("prob_target") ? get_double(j, "prob_target") : 0.9;

  json doc = {{"command", "bounds"},
              {"parameters",
               {{"n", n}, {"d", d}, {"rho", rho}, {"zeta_star", zeta_star}, {"zeta", zeta}, {"c", c},
                {"mu0", mu0}, {"mu_vperp", mu_vperp}, {"phi_d", phi_d}, {"delta", delta},
                {"kappa", kappa}}}};
  try {
    doc["iteration_bound_full"] = complexity_json(theory::iteration_bound_full(n, d, rho, zeta_star, c));
    doc["simplified_iteration_bound"] = theory::simplified_iteration_bound(n, d, zeta_star);
    doc["expected_rate_full"] = theory::expected_rate_full(zeta, d);
    doc["key_quantity_bound"] = theory::key_quantity_bound(zeta, d);
    doc["expected_zeta0"] = number(theory::expected_zeta0(n, d, c));
    doc["log_expected_zeta0"] = number(theory::log_expected_zeta0(n, d, c));
    doc["local_region_radius"] = local_region_radius(n, d, mu0);
    if (j.contains("m")) {
      const std::size_t m = get_size(j, "m");
      doc["parameters"]["m"] = m;
      doc["heuristic_iterations"] = theory::heuristic_iterations(n, m, d, zeta_star);
      doc["expected_rate_cs"] = rate_json(theory::expected_rate_cs(zeta, d, m, n, delta, phi_d));
      const auto found = theory::find_delta_cs(d, m, prob_target);
      doc["cs_delta_for_probability"] = found ? json(*found) : json(nullptr);
      doc["cs_best_probability"] = theory::best_delta_cs(d, m).first;
      doc["expected_rate_missing"] = rate_json(theory::expected_rate_missing(zeta, d, m, n));
      doc["discrepancy_decay_factor"] = theory::discrepancy_decay_factor(d, m, n, mu0);
      doc["discrepancy_decay_missing"] = theory::discrepancy_decay_missing(kappa, d, m, n, mu0);
    }
    if (delta < 0.5) doc["sample_complexity_cs"] = complexity_json(theory::sample_complexity_cs(d, delta, phi_d, n));
    doc["sample_complexity_missing"] =
        complexity_json(theory::sample_complexity_missing(d, mu0, mu_vperp, n));
  } catch (const theory::InvalidParameter& e) {
    throw ConfigError(e.what());
  }

  if (!opts.out_dir.empty()) {
    const fs::path dir = prepare_out_dir(opts.out_dir);
    write_file(dir / "bounds.json", dump(doc));
  }
  if (opts.format == "json") {
    out << dump(doc);
  } else {
    const auto& k = doc["iteration_bound_full"];
    out << "quantity,value\n";
    out << "K," << format_double(k["value"].get<double>()) << "\n";
    for (const auto& [name, v] : k["components"].items()) {
      out << "K." << name << "," << (v.is_null() ? "nan" : format_double(v.get<double>())) << "\n";
    }
    for (const char* key : {"simplified_iteration_bound", "heuristic_iterations", "expected_rate_full",
                            "key_quantity_bound", "expected_zeta0", "local_region_radius",
                            "discrepancy_decay_factor", "discrepancy_decay_missing"}) {
      if (doc.contains(key) && doc[key].is_number()) {
        out << key << "," << format_double(doc[key].get<double>()) << "\n";
      }
    }
    for (const char* key : {"expected_rate_cs", "expected_rate_missing"}) {
      if (doc.contains(key)) {
        out << key << ".rate," << format_double(doc[key]["rate"].get<double>()) << "\n";
        out << key << ".probability," << format_double(doc[key]["probability"].get<double>()) << "\n";
      }
    }
    for (const char* key : {"sample_complexity_cs", "sample_complexity_missing"}) {
      if (doc.contains(key)) {
        out << key << "," << format_double(doc[key]["value"].get<double>()) << "\n";
      }
    }
  }
  return kOk;
}

}  // namespace

TrialConfig parse_trial_config(const std::string& json_text, const std::vector<std::string>& extra_keys) {
  const json j = parse_json(json_text);
  TrialConfig c = trial_from_json(j, std::set<std::string>(extra_keys.begin(), extra_keys.end()));
  c.validate();
  return c;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string series_csv(const TrialSeries& series) {
  std::string s = kSeriesHeader;
  s += '\n';
  for (const auto& r : series.records) {
    s += std::to_string(r.t);
    for (double v : {r.zeta, r.kappa, r.theta, r.norm_p, r.norm_r_tilde, r.norm_r, r.delta,
                     r.det_lower_bound}) {
      s += ',';
      s += format_double(v);
    }
    s += ',';
    s += to_string(r.status);
    s += '\n';
  }
  return s;
}

std::string grid_csv(const SweepResult& result) {
  std::string s = kGridHeader;
  s += '\n';
  for (const auto& c : result.cells) {
    s += std::to_string(c.n) + ',' + std::to_string(c.d) + ',' + std::to_string(c.m) + ',' +
         format_double(c.mean_ratio) + ',' + format_double(c.var_ratio) + ',' +
         format_double(c.fail_frac) + '\n';
  }
  return s;
}

int run_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Streaming subspace estimation experiments", "grassmann-stream"};
  app.require_subcommand(1);
  Common opts;

  auto add_common = [&](CLI::App* sub, bool out_required) {
    sub->add_option("--config", opts.config_path, "JSON configuration file");
    auto* o = sub->add_option("--out", opts.out_dir, "Output directory");
    if (out_required) o->required();
    sub->add_option("--seed", opts.seed, "Base seed (overrides config and GS_SEED)");
    sub->add_option("--format", opts.format, "Tabular output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--jobs", opts.jobs, "Parallel trials (0 = all cores)");
  };
  auto* run = app.add_subcommand("run", "Run trials and write series.csv and summary.json");
  auto* sw = app.add_subcommand("sweep", "Iteration counts over an (n, d, m) grid; writes grid.csv");
  auto* ver = app.add_subcommand("verify", "Check the per-step identities; writes verify.json");
  auto* bnd = app.add_subcommand("bounds", "Evaluate the closed-form bounds");
  add_common(run, true);
  add_common(sw, true);
  add_common(ver, true);
  add_common(bnd, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (run->parsed()) return cmd_run(opts, out);
    if (sw->parsed()) return cmd_sweep(opts, out);
    if (ver->parsed()) return cmd_verify(opts, out);
    return cmd_bounds(opts, out);
  } catch (const std::invalid_argument& e) {
    // ConfigError, theory::InvalidParameter and generator precondition failures.
    err << "config error: " << e.what() << "\n";
    return kUsageError;
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kUsageError;
  } catch (const GenerationFailed& e) {
    err << "generation failed: " << e.what() << "\n";
    return kRuntimeError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
}

}  // namespace gstream::cli
