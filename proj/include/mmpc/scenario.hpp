#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mmpc/error_dynamics.hpp"
#include "mmpc/mpc.hpp"
#include "mmpc/quadrotor.hpp"
#include "mmpc/simulator.hpp"
#include "mmpc/surface.hpp"

namespace mmpc {

/// Where the terrain model of a ground vehicle comes from.
struct SurfaceSpec {
  enum class Source { Coefficients, Synthesized, File };
  Source source = Source::Coefficients;
  SurfaceModel::Coefficients coefficients{};  ///< exact model, or ground truth for synthesis
  Eigen::Vector2d lower_m = Eigen::Vector2d::Zero();
  Eigen::Vector2d upper_m = Eigen::Vector2d::Zero();
  double spacing_m = 0.5;
  double noise_std_m = 0.0;
  std::uint64_t seed = 0;
  std::filesystem::path samples_file;  ///< relative paths resolve against the config file
};

struct SystemSpec {
  std::string type = "quadrotor";  ///< "quadrotor" or "ugv"
  double gravity_mps2 = 9.81;
  std::optional<SurfaceSpec> surface;
};

/// Reference generator selection. Fields unused by a generator are ignored.
struct ReferenceSpec {
  std::string generator = "quad-hover";  ///< quad-hover, quad-circle, quad-loop, ugv-path
  Eigen::Vector3d center_m = Eigen::Vector3d::Zero();
  double radius_m = 1.0;
  double max_speed_mps = 0.0;
  double ramp_time_s = 0.0;
  YawPolicy yaw = YawPolicy::FixedZero;
  double speed_mps = 0.0;
  std::string path = "straight";  ///< straight, circle, sine
  Eigen::Vector2d origin_m = Eigen::Vector2d::Zero();
  double heading_rad = 0.0;
  double amplitude_m = 0.0;
  double wavelength_m = 1.0;
};

struct Scenario {
  std::string id;
  std::string description;
  SystemSpec system;
  MpcConfig mpc;
  ReferenceSpec reference;
  Eigen::VectorXd initial_offset;  ///< tangent vector, empty for zero
  Disturbance disturbance;
  double duration_s = 1.0;
  int substeps = 1;
  std::filesystem::path base_dir;  ///< directory of the source file, for relative paths

  /// Throws ConfigError on the first violated requirement.
  void validate() const;
};

/// Everything a rollout needs, derived from a Scenario.
struct ScenarioSetup {
  CanonicalSystem system;
  std::vector<ReferencePoint> references;
  TraceLayout layout;
  std::optional<SurfaceModel> surface;
  double surface_fit_rms = 0.0;
};

/// Parses a JSON scenario document. Throws ConfigError with the offending key.
Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);
std::string scenario_to_json(const Scenario& scenario);

struct BundledScenario {
  std::string id;
  std::string description;
  std::string_view json;
};

const std::vector<BundledScenario>& bundled_scenarios();
Scenario bundled_scenario(std::string_view id);
/// A bundled id, or else a path to a config file.
Scenario resolve_scenario(std::string_view id_or_path);

ScenarioSetup build_setup(const Scenario& scenario);
SimTrace rollout(const Scenario& scenario);

}  // namespace mmpc
