#include <gtest/gtest.h>

#include <json.hpp>
#include <sstream>

#include "mmpc/scenario.hpp"
#include "mmpc/trace_io.hpp"

using namespace mmpc;

namespace {

SimTrace short_run(const std::string& id, double duration) {
  Scenario sc = bundled_scenario(id);
  sc.duration_s = duration;
  return rollout(sc);
}

}  // namespace

TEST(TraceIo, HeaderOrder) {
  const SimTrace trace = short_run("quad-hover", 0.05);
  const auto h = trace_header(trace);
  ASSERT_EQ(h.size(), 1u + 15 + 15 + 9 + 4 + 4 + 2);
  EXPECT_EQ(h.front(), "t");
  EXPECT_EQ(h[1], "x_px");
  EXPECT_EQ(h[16], "ref_px");
  EXPECT_EQ(h[31], "dx_px");
  EXPECT_EQ(h[40], "u_thrust");
  EXPECT_EQ(h[44], "ud_thrust");
  EXPECT_EQ(h[h.size() - 2], "solver_iters");
  EXPECT_EQ(h.back(), "solve_time_us");
}

TEST(TraceIo, CsvRoundTripIsExact) {
  for (const char* id : {"quad-hover", "ugv-hill"}) {
    const SimTrace trace = short_run(id, 0.2);
    std::stringstream buf;
    write_trace_csv(buf, trace);
    EXPECT_EQ(buf.str().find('\r'), std::string::npos);
    const TraceTable table = read_trace_csv(buf);
    EXPECT_EQ(table.header, trace_header(trace));
    ASSERT_EQ(table.rows.size(), trace.ticks.size());
    for (std::size_t k = 0; k < trace.ticks.size(); ++k) {
      const TickRecord& tick = trace.ticks[k];
      const auto& row = table.rows[k];
      EXPECT_EQ(row[0], tick.t);
      for (Eigen::Index i = 0; i < tick.state.size(); ++i) {
        EXPECT_EQ(row[1 + static_cast<std::size_t>(i)], tick.state(i));
      }
      EXPECT_EQ(row[table.column("u_" + trace.layout.input_labels[0])], tick.u(0));
      EXPECT_EQ(row[table.column("solver_iters")], tick.solver_iterations);
      EXPECT_EQ(row[table.column("solve_time_us")], tick.solve_time_us);
    }
    EXPECT_THROW(table.column("nope"), std::out_of_range);
  }
}

TEST(TraceIo, ReaderRejectsMalformedRows) {
  std::stringstream short_row("a,b\n1\n");
  EXPECT_THROW(read_trace_csv(short_row), std::runtime_error);
  std::stringstream garbage("a,b\n1,x\n");
  EXPECT_THROW(read_trace_csv(garbage), std::runtime_error);
  std::stringstream empty("");
  EXPECT_THROW(read_trace_csv(empty), std::runtime_error);
}

TEST(TraceIo, SummaryIsFlatAndComplete) {
  const SimTrace trace = short_run("ugv-hill", 1.0);
  const Metrics m = compute_metrics(trace);
  const auto doc = nlohmann::json::parse(summary_json(trace, m));
  for (const char* key :
       {"scenario", "status", "dt_s", "ticks", "duration_s", "rms_position_error_m",
        "max_position_error_m", "final_position_error_m", "rms_attitude_error_rad",
        "max_attitude_error_rad", "mean_solve_time_us", "p99_solve_time_us", "max_solve_time_us",
        "mean_solver_iterations", "constraint_activity_rate", "nonconverged_ticks"}) {
    ASSERT_TRUE(doc.contains(key)) << key;
    EXPECT_FALSE(doc.at(key).is_structured()) << key;
  }
  EXPECT_EQ(doc.at("scenario"), "ugv-hill");
  EXPECT_EQ(doc.at("status"), "ok");
  EXPECT_EQ(doc.at("ticks"), 50);
  EXPECT_DOUBLE_EQ(doc.at("max_position_error_m").get<double>(), m.max_position_error);
  EXPECT_GT(doc.at("mean_solve_time_us").get<double>(), 0.0);
}
