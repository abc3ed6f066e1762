#pragma once

/// Front end of the `grassmann-stream` tool, kept in a library so tests can drive
/// it without spawning processes.

#include "gstream/harness.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gstream::cli {

enum ExitCode : int {
  kOk = 0,
  kVerificationFailed = 1,
  kUsageError = 2,
  kRuntimeError = 3,
};

/// Parses a JSON document with TrialConfig field names. Throws ConfigError on
/// unknown keys, wrong types or invalid values. `extra_keys` are accepted and ignored.
TrialConfig parse_trial_config(const std::string& json_text,
                               const std::vector<std::string>& extra_keys = {});

/// Round-trip formatting used for every floating-point field ("%.17g"; "nan"/"inf").
std::string format_double(double v);

/// Header of series.csv.
extern const char* const kSeriesHeader;
/// Header of grid.csv.
extern const char* const kGridHeader;

std::string series_csv(const TrialSeries& series);
std::string grid_csv(const SweepResult& result);

/// Full command line, argv[0] included. Diagnostics go to `err`, tables to `out`.
int run_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gstream::cli
