#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hcd/change.hpp"
#include "hcd/ensemble.hpp"
#include "hcd/fcm.hpp"
#include "hcd/speckle.hpp"

namespace hcd {

struct PipelineConfig {
  std::string optical_path;
  std::string sar_path;
  std::string truth_path;  // optional
  std::string output_dir;

  int window_side = 50;
  SpeckleParams speckle{7, 0.0, 1.0};  // looks <= 0 means estimate from data
  int enl_tile = 12;

  double fuzzifier = 2.0;
  int max_iter = 100;
  double tol = 1e-5;
  double regularizer = 1e-6;
  double cov_condition_cap = 10.0;  // eigenvalue-ratio cap for adaptive metrics
  CovarianceWeight cov_weight = CovarianceWeight::plain;

  int runs = 20;
  int k_min = 4;
  int k_max = 7;
  int stacked_cap = 30;
  bool fuzzy_coassociation = false;

  // Both strict vetoes are on for the pipeline: consensus partitions
  // over-segment homogeneous regions, and the cross-image majority checks
  // discard the resulting phantom events.
  ChangeParams change{.strict_split = true, .strict_merge = true};
  std::uint64_t seed = 0;
  int workers = 1;
  bool permute_windows = false;  // process in a seeded shuffled order
};

struct WindowBounds {
  int x = 0, y = 0, w = 0, h = 0;
};

struct WindowResult {
  int id = 0;
  WindowBounds bounds;
  ConsensusPartition p_opt, p_sar, p_st;
  std::vector<ChangeEvent> events;  // pixel indices window-local
  Mask mask;                        // window-local change mask
  bool degenerate = false;
  std::string warning;
};

/// Non-overlapping cover; trailing remainders shorter than side/2 merge
/// into the neighboring window, longer ones stay as their own window.
std::vector<WindowBounds> tile(int width, int height, int side);

/// The three-view ensemble clustering of one window followed by split/merge
/// detection. `looks` is the resolved number of looks of the filtered SAR.
/// Clustering failures degrade to an all-false mask with a warning.
WindowResult process_window(const Raster& optical, const Raster& sar_filtered,
                            const WindowBounds& bounds, int window_id,
                            const PipelineConfig& cfg, double looks);

struct PipelineOutcome {
  std::vector<WindowResult> windows;
  Mask change_mask;  // stitched, full scene
  double looks = 0.0;
  bool have_metrics = false;
  std::map<std::string, double> metric_values;
};

/// Full run: fail-fast validation, global speckle filtering, parallel window
/// processing, stitching, artifact writing, optional evaluation.
PipelineOutcome run_pipeline(const PipelineConfig& cfg);

/// key=value config file; unknown keys are errors. Values not present keep
/// their documented defaults.
PipelineConfig parse_config(const std::filesystem::path& path);
void apply_config_entry(PipelineConfig& cfg, const std::string& key,
                        const std::string& value);

}  // namespace hcd
