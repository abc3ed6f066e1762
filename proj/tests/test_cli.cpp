#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gstream/cli.hpp"
#include "gstream/theory.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace gstream;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "grassmann-stream");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "gstream_cli_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path& dir, const std::string& name, const json& j) {
  const fs::path p = dir / name;
  std::ofstream(p) << j.dump();
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  const fs::path dir = scratch("usage");
  CHECK(invoke({}).code == cli::kUsageError);
  Outcome o = invoke({"run", "--out", dir.string()});
  CHECK(o.code == cli::kUsageError);
  CHECK(o.err.find("--config") != std::string::npos);
  o = invoke({"run", "--config", (dir / "missing.json").string(), "--out", dir.string()});
  CHECK(o.code == cli::kUsageError);
  CHECK(o.err.find("cannot read") != std::string::npos);
  const fs::path bad = write_config(dir, "bad.json", {{"n", 10}, {"d", 2}, {"bogus", 1}});
  CHECK(invoke({"run", "--config", bad.string(), "--out", dir.string()}).code == cli::kUsageError);
  const fs::path zero = write_config(dir, "zero.json", {{"n", 10}, {"d", 2}, {"max_iters", 0}});
  CHECK(invoke({"run", "--config", zero.string(), "--out", dir.string()}).code == cli::kUsageError);
  CHECK(invoke({"run", "--config", zero.string(), "--out", dir.string(), "--format", "xml"}).code ==
        cli::kUsageError);
  CHECK(invoke({"--help"}).code == cli::kOk);
}

TEST_CASE("run writes the documented series schema and is byte-reproducible") {
  const fs::path dir = scratch("run");
  const fs::path cfg = write_config(dir, "cfg.json", {{"n", 50}, {"d", 5}, {"max_iters", 10000}});
  REQUIRE(invoke({"run", "--config", cfg.string(), "--out", (dir / "a").string(), "--seed", "7"}).code == 0);
  REQUIRE(invoke({"run", "--config", cfg.string(), "--out", (dir / "b").string(), "--seed", "7"}).code == 0);
  REQUIRE(invoke({"run", "--config", cfg.string(), "--out", (dir / "c").string(), "--seed", "8"}).code == 0);
  const std::string a = slurp(dir / "a" / "series.csv");
  CHECK(a.rfind("t,zeta,kappa,theta,norm_p,norm_r_tilde,norm_r,delta,det_lower_bound,status\n", 0) == 0);
  CHECK(a.find('\r') == std::string::npos);
  CHECK(a == slurp(dir / "b" / "series.csv"));
  CHECK(a != slurp(dir / "c" / "series.csv"));
  const json summary = json::parse(slurp(dir / "a" / "summary.json"));
  CHECK(summary["config"]["seed"] == 7);
  CHECK(summary["trials"][0]["converged"] == true);
}

TEST_CASE("GS_SEED is the fallback seed") {
  const fs::path dir = scratch("env");
  const fs::path cfg = write_config(dir, "cfg.json", {{"n", 30}, {"d", 3}});
  ::setenv("GS_SEED", "7", 1);
  REQUIRE(invoke({"run", "--config", cfg.string(), "--out", (dir / "env").string()}).code == 0);
  ::unsetenv("GS_SEED");
  REQUIRE(invoke({"run", "--config", cfg.string(), "--out", (dir / "flag").string(), "--seed", "7"}).code == 0);
  CHECK(slurp(dir / "env" / "series.csv") == slurp(dir / "flag" / "series.csv"));
  ::setenv("GS_SEED", "x", 1);
  CHECK(invoke({"run", "--config", cfg.string(), "--out", (dir / "bad").string()}).code == cli::kUsageError);
  ::unsetenv("GS_SEED");
}

TEST_CASE("series can be written as JSON") {
  const fs::path dir = scratch("runjson");
  const fs::path cfg = write_config(dir, "cfg.json", {{"n", 30}, {"d", 3}});
  REQUIRE(invoke({"run", "--config", cfg.string(), "--out", dir.string(), "--format", "json"}).code == 0);
  const json rows = json::parse(slurp(dir / "series.json"));
  CHECK(rows.is_array());
  CHECK(rows[0].contains("det_lower_bound"));
}

TEST_CASE("a one-cell sweep equals the run aggregate") {
  const fs::path dir = scratch("sweep");
  const json base = {{"n", 80}, {"d", 4}, {"op_kind", "entrywise"}, {"m", 30}, {"zeta_star", 0.999}, {"seed", 3}};
  json run_cfg = base;
  run_cfg["trials"] = 5;
  run_cfg["max_iters"] = 200000;
  json sweep_cfg = base;
  sweep_cfg["grid"] = {{"n", {80}}, {"d", {4}}, {"m", {30}}};
  sweep_cfg["trials_per_cell"] = 5;
  REQUIRE(invoke({"run", "--config", write_config(dir, "run.json", run_cfg).string(), "--out",
                  (dir / "run").string()}).code == 0);
  REQUIRE(invoke({"sweep", "--config", write_config(dir, "sweep.json", sweep_cfg).string(), "--out",
                  (dir / "sweep").string(), "--jobs", "2"}).code == 0);
  const json agg = json::parse(slurp(dir / "run" / "summary.json"))["aggregate"];
  const std::string grid = slurp(dir / "sweep" / "grid.csv");
  CHECK(grid.rfind("n,d,m,mean_ratio,var_ratio,fail_frac\n", 0) == 0);
  const json cell = json::parse(slurp(dir / "sweep" / "summary.json"))["cells"][0];
  CHECK(cell["iterations"] == agg["iterations"]);
  CHECK(cell["mean_ratio"] == agg["mean_ratio"]);
  CHECK(grid.find("80,4,30," + cli::format_double(agg["mean_ratio"].get<double>())) != std::string::npos);

  json empty = base;
  empty["grid"] = {{"n", json::array()}, {"d", {4}}, {"m", {30}}};
  CHECK(invoke({"sweep", "--config", write_config(dir, "empty.json", empty).string(), "--out",
                (dir / "empty").string()}).code == cli::kUsageError);
}

TEST_CASE("verify: default suite passes, injected fault fails, identities listed") {
  const fs::path dir = scratch("verify");
  const fs::path ok = write_config(dir, "ok.json", {{"n", 100}, {"d", 8}, {"num_steps", 300},
                                                    {"histogram", {{"num_steps", 200}, {"num_trials", 4}}}});
  CHECK(invoke({"verify", "--config", ok.string(), "--out", (dir / "ok").string()}).code == cli::kOk);
  const json report = json::parse(slurp(dir / "ok" / "verify.json"));
  CHECK(report["passed"] == true);
  CHECK(report["identities"].size() == 12);
  for (const auto& id : report["identities"]) {
    CHECK(id.contains("max_violation"));
    CHECK(id.contains("tolerance"));
  }
  CHECK(report["histogram"]["bins"].size() == 20);

  const fs::path bad = write_config(dir, "bad.json", {{"n", 100}, {"d", 8}, {"num_steps", 100},
                                                      {"fault_update_scale", 1.02}});
  CHECK(invoke({"verify", "--config", bad.string(), "--out", (dir / "bad").string()}).code ==
        cli::kVerificationFailed);
}

TEST_CASE("bounds: table, JSON and parameter errors") {
  const fs::path dir = scratch("bounds");
  const fs::path cfg = write_config(dir, "b.json", {{"n", 5000}, {"d", 10}, {"rho", 0.1}, {"zeta_star", 0.9999}});
  Outcome o = invoke({"bounds", "--config", cfg.string(), "--format", "json", "--out", dir.string()});
  REQUIRE(o.code == 0);
  const json doc = json::parse(o.out);
  const auto k = theory::iteration_bound_full(5000, 10, 0.1, 0.9999);
  CHECK(doc["iteration_bound_full"]["value"].get<double>() == doctest::Approx(k.value).epsilon(1e-15));
  CHECK(doc["iteration_bound_full"]["components"]["K1"].get<double>() ==
        doctest::Approx(14426.167016735859).epsilon(1e-12));
  CHECK(json::parse(slurp(dir / "bounds.json")) == doc);

  o = invoke({"bounds", "--config", cfg.string()});
  CHECK(o.code == 0);
  CHECK(o.out.find("K,") != std::string::npos);

  const fs::path bad = write_config(dir, "bad.json", {{"n", 5000}, {"d", 10}, {"m", 500}, {"delta", 1.5}});
  CHECK(invoke({"bounds", "--config", bad.string()}).code == cli::kUsageError);
}

TEST_CASE("generation failures exit with 3") {
  const fs::path dir = scratch("genfail");
  const fs::path cfg = write_config(dir, "g.json", {{"n", 400}, {"d", 4}, {"truth_kind", "sparse"}, {"density", 1e-4}});
  const Outcome o = invoke({"run", "--config", cfg.string(), "--out", dir.string()});
  CHECK(o.code == cli::kRuntimeError);
  CHECK(o.err.find("generation failed") != std::string::npos);
}

TEST_CASE("number formatting round-trips") {
  CHECK(cli::format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(cli::format_double(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(cli::format_double(std::nan("")) == "nan");
}
