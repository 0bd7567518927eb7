#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "hcd/raster.hpp"

namespace hcd {

struct SceneClass {
  Eigen::VectorXd optical_mean;
  Eigen::MatrixXd optical_cov;  // positive definite
  double sar_mean = 1.0;        // gamma mean (backscatter level)
};

struct MapRegion {
  int x = 0, y = 0, w = 0, h = 0;
  int class_id = 0;
};

struct ChangeRegion {
  int x = 0, y = 0, w = 0, h = 0;
  int new_class = 0;  // class at t2 inside the rectangle
};

struct SceneSpec {
  int width = 0, height = 0;
  std::vector<SceneClass> classes;
  std::vector<MapRegion> map_regions;  // painted over a class-0 background, in order
  std::vector<ChangeRegion> changes;
  double looks = 5.0;
  std::uint64_t seed = 0;
};

struct ScenePair {
  Raster optical;  // sampled from the t1 class map
  Raster sar;      // gamma speckle at the t2 backscatter levels
  Mask truth;      // pixels whose class differs between t1 and t2
};

/// Deterministic given (spec, seed): optical ~ N(mu, Sigma) of the t1 class,
/// SAR ~ Gamma(L, mean_t2 / L). Integer L uses the sum-of-exponentials
/// sampler, fractional L Marsaglia-Tsang.
ScenePair generate_pair(const SceneSpec& spec);

/// Scene spec in the key=value dialect with repeated `class.` / `change.` /
/// `map.` groups (order-sensitive: a `class.optical_mean` line opens a new
/// class, a `change.rect` line a new change region).
SceneSpec parse_scene_spec(const std::filesystem::path& path);

}  // namespace hcd
