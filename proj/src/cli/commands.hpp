#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "cli/problems.hpp"

namespace van::cli {

/// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;     // bad flags, bad config, IO failure
inline constexpr int kExitMaxIters = 2;  // ran fine but did not converge
inline constexpr int kExitPartial = 3;   // compare: some specs failed

/// Runs one experiment and writes its trace CSV to spec.trace_out.
/// Prints a one-line summary; errors go to `err` with kExitUsage.
int cmd_run(const RunSpec& spec, std::ostream& out, std::ostream& err);

struct CompareRequest {
  std::vector<RunSpec> specs;  // >= 2, sharing one problem
  std::string out_dir = "compare-out";
};

/// Runs every spec concurrently and in isolation, one trace file each,
/// then writes `summary.csv` (ordered by spec index). A failing spec
/// becomes an error row, not an abort.
int cmd_compare(const CompareRequest& request, std::ostream& out, std::ostream& err);

struct PlotRequest {
  std::vector<std::string> traces;
  std::vector<std::string> columns = {"f_at_mean"};
  std::string x_column = "iter";
  std::string out_svg = "plot.svg";
  std::string title;
  bool log_y = false;
};

/// Renders trace CSVs (shared schema) into one deterministic SVG.
int cmd_plot(const PlotRequest& request, std::ostream& out, std::ostream& err);

/// The full command-line program: subcommands run / compare / plot,
/// flat `key = value` config files, `--dump-config`, VAN_SEED fallback.
/// Factored out of main() so tests can drive it in-process.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace van::cli
