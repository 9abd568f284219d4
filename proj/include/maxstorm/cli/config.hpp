#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "maxstorm/dependence.hpp"
#include "maxstorm/inference.hpp"
#include "maxstorm/spacetime_markov.hpp"

namespace maxstorm::cli {

enum class SpatialKind { kSmith, kSchlather, kVmf };
enum class GridKind { kRegular, kRandom, kSphere };

// Every effective run parameter. Populated from an INI-style file with
// sections; keys not in the schema are rejected.
struct RunConfig {
  // [model]
  SpatialKind spatial = SpatialKind::kSmith;
  double sigma11 = 1.0, sigma12 = 0.0, sigma22 = 1.0;
  double c1 = 3.0, c2 = 1.0;
  std::size_t schlather_storms = 1000;
  double schlather_envelope = 4.0;
  double kappa = 1.0;
  double a = 0.7;
  double tau1 = -1.0, tau2 = -1.0;
  double rotation_angle = 0.0;
  double axis_x = 0.0, axis_y = 0.0, axis_z = 1.0;

  // [grid]
  GridKind grid = GridKind::kRegular;
  std::size_t nx = 10, ny = 10;
  double x0 = 0.0, y0 = 0.0, dx = 1.0, dy = 1.0;
  std::size_t n_sites = 20;
  double x_min = 0.0, x_max = 10.0, y_min = 0.0, y_max = 10.0;
  std::uint64_t grid_seed = 2024;

  // [time]
  std::size_t dates = 4;
  std::int64_t first_date = 1;

  // [run]
  std::uint64_t seed = 1;
  std::size_t threads = 0;  // 0: MAXSTORM_THREADS or logical cores

  // [dependence]
  std::vector<LagSpec> lags;

  // [fit]
  int scheme = 1;
  ThetaVector init{1.0, 0.0, 1.0, 0.7, -1.0, -1.0};
  std::size_t max_evaluations = 5000;
  double xtol = 1e-6;
  double ftol = 1e-8;
  double initial_step = 0.3;

  // [study]
  std::size_t replicates = 2;
  std::vector<int> schemes{1, 2};

  [[nodiscard]] SmithParams smith() const { return {sigma11, sigma12, sigma22}; }
  [[nodiscard]] SchlatherParams schlather() const { return {c1, c2}; }
  [[nodiscard]] VmfParams vmf() const { return VmfParams(kappa); }
  [[nodiscard]] MarkovParams markov() const { return {a, Eigen::Vector2d(tau1, tau2)}; }
  [[nodiscard]] SphereMarkovParams sphere_markov() const;
  [[nodiscard]] ThetaVector truth() const { return {sigma11, sigma12, sigma22, a, tau1, tau2}; }
  [[nodiscard]] bool is_sphere() const { return spatial == SpatialKind::kVmf; }
  [[nodiscard]] std::size_t effective_threads() const;

  // Builds every domain object once so constraint violations surface early.
  void validate() const;
  [[nodiscard]] nlohmann::ordered_json to_json() const;
};

[[nodiscard]] RunConfig parse_config(const std::string& text);
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);

// "l,h1,h2; l,h1,h2; ..."
[[nodiscard]] std::vector<LagSpec> parse_lags(const std::string& text);

[[nodiscard]] PlanarSites make_planar_grid(const RunConfig& config);
[[nodiscard]] SphereSites make_sphere_grid(const RunConfig& config);

}  // namespace maxstorm::cli
