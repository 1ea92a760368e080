#include "cli/csvio.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "van/errors.hpp"

namespace van::cli {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_trace_csv(std::ostream& out, const std::vector<IterationRecord<double>>& trace) {
  out << kTraceHeader << '\n';
  for (const auto& row : trace) {
    out << row.iter << ',' << format_number(row.epoch_fraction) << ','
        << format_number(row.f_at_mean) << ',' << format_number(row.l_estimate) << ','
        << format_number(row.grad_norm) << ',' << format_number(row.step_norm) << ','
        << format_number(row.trace_sigma) << ',' << row.samples_used << ','
        << row.wallclock_ns << '\n';
  }
}

void write_trace_csv(const std::string& path,
                     const std::vector<IterationRecord<double>>& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_trace_csv(out, trace);
  if (!out) throw Error("failed writing '" + path + "'");
}

Index CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<Index>(i);
  throw SchemaMismatch("no column named '" + name + "'");
}

std::vector<double> CsvTable::values(const std::string& name) const {
  const auto c = static_cast<std::size_t>(column(name));
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(row[c]);
  return out;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string::size_type start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_cell(const std::string& cell, const std::string& origin, std::size_t line_no,
                  std::size_t field_no) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw ParseError(line_no, field_no, origin + ": not a number: '" + cell + "'");
  return v;
}

}  // namespace

CsvTable read_csv(std::istream& in, const std::string& origin) {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (table.columns.empty()) {
      table.columns = std::move(fields);
      continue;
    }
    if (fields.size() != table.columns.size())
      throw SchemaMismatch(origin + ":" + std::to_string(line_no) + ": expected " +
                           std::to_string(table.columns.size()) + " fields, got " +
                           std::to_string(fields.size()));
    std::vector<double> row;
    row.reserve(fields.size());
    for (std::size_t f = 0; f < fields.size(); ++f)
      row.push_back(parse_cell(fields[f], origin, line_no, f + 1));
    table.rows.push_back(std::move(row));
  }
  if (table.columns.empty()) throw SchemaMismatch(origin + ": empty CSV");
  return table;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_csv(in, path);
}

}  // namespace van::cli
