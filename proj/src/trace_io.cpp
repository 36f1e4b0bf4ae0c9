#include "mmpc/trace_io.hpp"

#include <charconv>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <locale>
#include <sstream>
#include <stdexcept>

#include "mmpc/errors.hpp"

namespace mmpc {

namespace {

void append(std::vector<std::string>& out, const std::string& prefix,
            const std::vector<std::string>& labels) {
  for (const auto& l : labels) out.push_back(prefix + l);
}

void put_values(std::ostream& out, const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) out << ',' << v(i);
}

double parse_double(std::string_view field, std::size_t line) {
  double value = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw std::runtime_error("trace line " + std::to_string(line) + ": bad number '" +
                             std::string(field) + "'");
  }
  return value;
}

}  // namespace

std::vector<std::string> trace_header(const SimTrace& trace) {
  std::vector<std::string> h{"t"};
  append(h, "x_", trace.layout.state_labels);
  append(h, "ref_", trace.layout.state_labels);
  append(h, "dx_", trace.layout.error_labels);
  append(h, "u_", trace.layout.input_labels);
  append(h, "ud_", trace.layout.input_labels);
  h.emplace_back("solver_iters");
  h.emplace_back("solve_time_us");
  return h;
}

void write_trace_csv(std::ostream& out, const SimTrace& trace) {
  out.imbue(std::locale::classic());
  out.precision(std::numeric_limits<double>::max_digits10);
  const auto header = trace_header(trace);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& tick : trace.ticks) {
    out << tick.t;
    put_values(out, tick.state);
    put_values(out, tick.reference);
    put_values(out, tick.dx);
    put_values(out, tick.u);
    put_values(out, tick.u_d);
    out << ',' << tick.solver_iterations << ',' << tick.solve_time_us << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, const SimTrace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write trace file " + path.string());
  write_trace_csv(out, trace);
}

std::size_t TraceTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw std::out_of_range("trace has no column '" + name + "'");
}

TraceTable read_trace_csv(std::istream& in) {
  TraceTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("trace is empty");
  {
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) table.header.push_back(field);
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    row.reserve(table.header.size());
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      row.push_back(parse_double(rest.substr(0, comma), lineno));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (row.size() != table.header.size()) {
      throw std::runtime_error("trace line " + std::to_string(lineno) + ": expected " +
                               std::to_string(table.header.size()) + " fields");
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

TraceTable read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open trace file " + path.string());
  return read_trace_csv(in);
}

std::string summary_json(const SimTrace& trace, const Metrics& m) {
  nlohmann::ordered_json doc;
  doc["scenario"] = trace.scenario;
  doc["status"] = trace.failed ? "tracking_lost" : (trace.nonconverged_ticks > 0 ? "nonconverged" : "ok");
  doc["failure"] = trace.failure;
  doc["dt_s"] = trace.dt;
  doc["ticks"] = m.ticks;
  doc["duration_s"] = m.ticks * trace.dt;
  doc["rms_position_error_m"] = m.rms_position_error;
  doc["max_position_error_m"] = m.max_position_error;
  doc["final_position_error_m"] = m.final_position_error;
  doc["rms_attitude_error_rad"] = m.rms_attitude_error;
  doc["max_attitude_error_rad"] = m.max_attitude_error;
  doc["mean_solve_time_us"] = m.mean_solve_time_us;
  doc["p99_solve_time_us"] = m.p99_solve_time_us;
  doc["max_solve_time_us"] = m.max_solve_time_us;
  doc["mean_solver_iterations"] = m.mean_solver_iterations;
  doc["constraint_activity_rate"] = m.constraint_activity;
  doc["nonconverged_ticks"] = m.nonconverged_ticks;
  return doc.dump(2) + "\n";
}

void write_summary(const std::filesystem::path& path, const SimTrace& trace,
                   const Metrics& metrics) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write summary file " + path.string());
  out << summary_json(trace, metrics);
}

}  // namespace mmpc
