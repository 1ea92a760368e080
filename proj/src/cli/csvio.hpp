#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "van/optim.hpp"

namespace van::cli {

/// Column layout every trace file uses, in writing order.
inline constexpr char kTraceHeader[] =
    "iter,epoch,f_at_mean,L_estimate,grad_norm,step_norm,trace_sigma,samples_used,"
    "wallclock_ns";

/// Shortest representation that survives a text round trip: 17
/// significant digits for doubles, plain digits for integral values.
std::string format_number(double v);

void write_trace_csv(std::ostream& out, const std::vector<IterationRecord<double>>& trace);
void write_trace_csv(const std::string& path,
                     const std::vector<IterationRecord<double>>& trace);

/// A parsed numeric CSV: one named column per header field, all cells
/// read as doubles.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  Index column(const std::string& name) const;
  std::vector<double> values(const std::string& name) const;
};

CsvTable read_csv(std::istream& in, const std::string& origin = "<stream>");
CsvTable read_csv(const std::string& path);

}  // namespace van::cli
