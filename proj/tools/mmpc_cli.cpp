#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mmpc/errors.hpp"
#include "mmpc/scenario.hpp"
#include "mmpc/trace_io.hpp"

namespace {

enum ExitCode : int { kOk = 0, kConfigError = 1, kNonconverged = 2, kTrackingLost = 3 };

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> horizon;
  std::optional<double> duration;
  std::filesystem::path out_dir = ".";
  bool write_trace = true;
  bool write_summary = true;
  int verbosity = 1;
};

struct RunResult {
  int code = kOk;
  std::string log;
};

RunResult run_one(const std::string& config, const RunOverrides& ov) {
  RunResult result;
  std::ostringstream log;
  try {
    mmpc::Scenario sc = mmpc::resolve_scenario(config);
    if (ov.seed) sc.disturbance.seed = *ov.seed;
    if (ov.horizon) sc.mpc.horizon = *ov.horizon;
    if (ov.duration) sc.duration_s = *ov.duration;
    sc.validate();

    std::filesystem::create_directories(ov.out_dir);
    const mmpc::SimTrace trace = mmpc::rollout(sc);
    const mmpc::Metrics metrics = mmpc::compute_metrics(trace);
    const auto trace_path = ov.out_dir / (sc.id + "_trace.csv");
    const auto summary_path = ov.out_dir / (sc.id + "_summary.json");
    if (ov.write_trace) mmpc::write_trace_csv(trace_path, trace);
    if (ov.write_summary) mmpc::write_summary(summary_path, trace, metrics);

    if (trace.failed) {
      result.code = kTrackingLost;
      log << sc.id << ": tracking lost: " << trace.failure << '\n';
    } else if (trace.nonconverged_ticks > 0) {
      result.code = kNonconverged;
      log << sc.id << ": solver did not converge on " << trace.nonconverged_ticks << " ticks\n";
    }
    if (ov.verbosity > 0) {
      log << sc.id << ": " << metrics.ticks << " ticks, max position error "
          << metrics.max_position_error << " m, rms " << metrics.rms_position_error
          << " m, mean solve " << metrics.mean_solve_time_us << " us\n";
      if (ov.write_trace) log << "  trace   " << trace_path.string() << '\n';
      if (ov.write_summary) log << "  summary " << summary_path.string() << '\n';
    }
  } catch (const mmpc::ConfigError& e) {
    result.code = kConfigError;
    log << "config error: " << e.what() << '\n';
  } catch (const mmpc::InfeasibleReferenceError& e) {
    result.code = kConfigError;
    log << "infeasible reference: " << e.what() << '\n';
  } catch (const mmpc::DegenerateSampleError& e) {
    result.code = kConfigError;
    log << "surface samples: " << e.what() << '\n';
  } catch (const mmpc::IllConditionedWeightsError& e) {
    result.code = kNonconverged;
    log << "solver: " << e.what() << '\n';
  } catch (const std::filesystem::filesystem_error& e) {
    result.code = kConfigError;
    log << "output: " << e.what() << '\n';
  }
  result.log = log.str();
  return result;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"On-manifold trajectory-tracking MPC scenario runner", "mmpc"};
  app.require_subcommand(1);

  std::vector<std::string> configs;
  RunOverrides ov;
  std::uint64_t seed = 0;
  int horizon = 0;
  double duration = 0.0;
  std::string out_dir = ".";
  std::vector<std::string> formats{"trace", "summary"};
  int jobs = 1;
  bool quiet = false;

  auto* run = app.add_subcommand("run", "Run one or more scenarios (bundled id or config file)");
  run->add_option("config", configs, "Scenario id or path to a JSON config")->required();
  auto* seed_opt = run->add_option("--seed", seed, "Disturbance seed");
  auto* horizon_opt = run->add_option("--horizon", horizon, "Override the MPC horizon N");
  auto* duration_opt = run->add_option("--duration", duration, "Override the duration in seconds");
  run->add_option("--out", out_dir, "Output directory")->capture_default_str();
  run->add_option("--formats", formats, "Outputs to write: trace, summary")
      ->delimiter(',')
      ->check(CLI::IsMember({"trace", "summary"}));
  run->add_option("-j,--jobs", jobs, "Scenarios run in parallel")->check(CLI::PositiveNumber);
  run->add_flag("-q,--quiet", quiet, "Only report failures");

  bool ids_only = false;
  auto* list = app.add_subcommand("list-scenarios", "List bundled scenarios");
  list->add_flag("--ids", ids_only, "One id per line");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kConfigError;
  }

  if (*list) {
    for (const auto& b : mmpc::bundled_scenarios()) {
      if (ids_only) {
        std::cout << b.id << '\n';
      } else {
        std::cout << b.id << std::string(b.id.size() < 14 ? 14 - b.id.size() : 1, ' ')
                  << b.description << '\n';
      }
    }
    return kOk;
  }

  if (*seed_opt) ov.seed = seed;
  if (*horizon_opt) ov.horizon = horizon;
  if (*duration_opt) ov.duration = duration;
  ov.out_dir = out_dir;
  ov.write_trace = std::find(formats.begin(), formats.end(), "trace") != formats.end();
  ov.write_summary = std::find(formats.begin(), formats.end(), "summary") != formats.end();
  ov.verbosity = quiet ? 0 : 1;

  std::vector<RunResult> results(configs.size());
  if (jobs <= 1 || configs.size() <= 1) {
    for (std::size_t i = 0; i < configs.size(); ++i) results[i] = run_one(configs[i], ov);
  } else {
    for (std::size_t start = 0; start < configs.size(); start += static_cast<std::size_t>(jobs)) {
      std::vector<std::future<RunResult>> batch;
      const std::size_t stop = std::min(configs.size(), start + static_cast<std::size_t>(jobs));
      for (std::size_t i = start; i < stop; ++i) {
        batch.push_back(std::async(std::launch::async, run_one, configs[i], ov));
      }
      for (std::size_t i = start; i < stop; ++i) results[i] = batch[i - start].get();
    }
  }

  int code = kOk;
  for (const auto& r : results) {
    (r.code == kOk ? std::cout : std::cerr) << r.log;
    code = std::max(code, r.code);
  }
  return code;
}
