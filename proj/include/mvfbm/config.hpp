#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mvfbm/experiments.hpp"
#include "mvfbm/fgn.hpp"
#include "mvfbm/model.hpp"
#include "mvfbm/solver.hpp"

namespace mvfbm::config {

using Json = nlohmann::ordered_json;

/// Seed used whenever a config and the command line both omit one.
inline constexpr std::uint64_t kDefaultSeed = 20240917;

/// Command-line values that take precedence over the config file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool allow_brownian = false;
};

struct Common {
  std::uint64_t seed = kDefaultSeed;
  int threads = 1;
  FgnMethod method = FgnMethod::kDaviesHarte;
  bool allow_brownian = false;
};

struct SimulateConfig {
  ModelSpec model;
  TimeGrid grid{0.125, 16, 1.0};
  std::size_t particles = 200;
  double hurst = 0.7;
  Common common;
};

struct FbmConfig {
  std::size_t n = 1024;
  double dt = 1.0 / 1024.0;
  double hurst = 0.7;
  std::size_t streams = 1;
  Common common;
};

struct MaximalConfig {
  std::vector<double> hursts{0.3, 0.7};
  double p = 2.0;
  std::vector<double> horizons{0.25, 0.5, 1.0, 2.0, 4.0};
  std::size_t paths = 10000;
  std::size_t grid_points = 1024;
  Common common;
};

/// Reads a JSON config. An empty file yields an empty object. A run manifest
/// is accepted too; its recorded config (with the recorded seed and threads) is returned.
Json load(const std::filesystem::path& path);

/// Builds a model from a model block.
ModelSpec parse_model(const Json& block, double default_delay = 0.125);

SimulateConfig parse_simulate(const Json& cfg, const Overrides& overrides = {});
ConvergenceStudy parse_convergence(const Json& cfg, const Overrides& overrides = {});
ChaosStudy parse_chaos(const Json& cfg, const Overrides& overrides = {});
MaximalConfig parse_maximal(const Json& cfg, const Overrides& overrides = {});
MomentStudy parse_moments(const Json& cfg, const Overrides& overrides = {});
FbmConfig parse_fbm(const Json& cfg, const Overrides& overrides = {});

/// Validates a Hurst index for a run: (0, 1), and H = 1/2 only with the Brownian override.
void check_hurst(double hurst, bool allow_brownian);

}  // namespace mvfbm::config
