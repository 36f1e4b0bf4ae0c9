#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mmpc/simulator.hpp"

namespace mmpc {

/// Header row: t, x_*, ref_*, dx_*, u_*, ud_*, solver_iters, solve_time_us.
std::vector<std::string> trace_header(const SimTrace& trace);

void write_trace_csv(std::ostream& out, const SimTrace& trace);
void write_trace_csv(const std::filesystem::path& path, const SimTrace& trace);

struct TraceTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a named column; throws std::out_of_range when absent.
  std::size_t column(const std::string& name) const;
};

TraceTable read_trace_csv(std::istream& in);
TraceTable read_trace_csv(const std::filesystem::path& path);

/// Flat JSON object with the run status and every Metrics field.
std::string summary_json(const SimTrace& trace, const Metrics& metrics);
void write_summary(const std::filesystem::path& path, const SimTrace& trace,
                   const Metrics& metrics);

}  // namespace mmpc
