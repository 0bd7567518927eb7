#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hcd/pipeline.hpp"
#include "hcd/speckle.hpp"
#include "hcd/synth.hpp"

using namespace hcd;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Two-class scene: horizontal strips with well-separated statistics.
SceneSpec strip_scene(int w, int h) {
  SceneSpec s;
  s.width = w;
  s.height = h;
  SceneClass c0;
  c0.optical_mean = Eigen::Vector2d(30.0, 30.0);
  c0.optical_cov = Eigen::Matrix2d::Identity() * 16.0;
  c0.sar_mean = 8.0;
  SceneClass c1;
  c1.optical_mean = Eigen::Vector2d(120.0, 60.0);
  c1.optical_cov = Eigen::Matrix2d::Identity() * 25.0;
  c1.sar_mean = 60.0;
  SceneClass c2;  // post-event backscatter class
  c2.optical_mean = Eigen::Vector2d(75.0, 45.0);
  c2.optical_cov = Eigen::Matrix2d::Identity() * 16.0;
  c2.sar_mean = 220.0;
  s.classes = {c0, c1, c2};
  s.looks = 5.0;
  s.seed = 3;
  for (int y = 0; y < h; y += 50)
    for (int band = 0; band < 1; ++band)
      s.map_regions.push_back({0, y + 25, w, std::min(25, h - y - 25), 1});
  return s;
}

// Four horizontal strips with distinct optical signatures and a geometric
// ladder of backscatter levels, plus a spare class reusing the darkest level
// for planted changes.
SceneSpec strips4_scene() {
  SceneSpec s;
  s.width = 50;
  s.height = 50;
  const double om[5][2] = {{20, 30}, {60, 120}, {120, 40}, {170, 150}, {90, 200}};
  const double sm[5] = {5, 15, 45, 135, 5};
  for (int c = 0; c < 5; ++c) {
    SceneClass cl;
    cl.optical_mean = Eigen::Vector2d(om[c][0], om[c][1]);
    cl.optical_cov = Eigen::Matrix2d::Identity() * 25.0;
    cl.sar_mean = sm[c];
    s.classes.push_back(cl);
  }
  s.looks = 5.0;
  for (int i = 1; i < 4; ++i)
    s.map_regions.push_back({0, i * 12, 50, i == 3 ? 14 : 12, i});
  return s;
}

}  // namespace

TEST_CASE("tile covers the image with the stated remainder rule") {
  {
    const auto t = tile(100, 150, 50);
    CHECK(t.size() == 6);
    for (const auto& b : t) {
      CHECK(b.w == 50);
      CHECK(b.h == 50);
    }
  }
  {
    // trailing 20 < 50/2 merges into the neighbor: widths {50, 70}
    const auto t = tile(120, 100, 50);
    REQUIRE(t.size() == 4);
    CHECK(t[0].w == 50);
    CHECK(t[1].w == 70);
    CHECK(t[1].x == 50);
  }
  {
    // trailing 30 >= 50/2 stays: widths {50, 50, 30}
    const auto t = tile(130, 100, 50);
    REQUIRE(t.size() == 6);
    CHECK(t[2].w == 30);
    CHECK(t[2].x == 100);
  }
  {
    const auto t = tile(30, 20, 50);  // image smaller than one window
    REQUIRE(t.size() == 1);
    CHECK(t[0].w == 30);
    CHECK(t[0].h == 20);
  }
  {
    // partition property: every pixel covered exactly once
    const auto t = tile(173, 97, 50);
    std::vector<int> hits(173 * 97, 0);
    for (const auto& b : t)
      for (int y = b.y; y < b.y + b.h; ++y)
        for (int x = b.x; x < b.x + b.w; ++x) ++hits[static_cast<std::size_t>(y) * 173 + x];
    for (int hcount : hits) CHECK(hcount == 1);
  }
}

TEST_CASE("parse_config: defaults, range checks, unknown keys, precedence") {
  const fs::path dir = fs::temp_directory_path() / "hcd_cfg_test";
  fs::create_directories(dir);
  const fs::path cfg_path = dir / "run.cfg";
  {
    std::ofstream out(cfg_path);
    out << "# minimal\noptical=a.hdr\nsar=b.hdr\noutput_dir=out\n";
  }
  PipelineConfig cfg = parse_config(cfg_path);
  CHECK(cfg.window_side == 50);
  CHECK(cfg.runs == 20);
  CHECK(cfg.k_min == 4);
  CHECK(cfg.k_max == 7);
  CHECK(cfg.stacked_cap == 30);
  CHECK(cfg.change.tau_split == 0.2);
  CHECK(cfg.speckle.window_side == 7);
  CHECK(cfg.speckle.looks == 0.0);  // auto-estimate
  CHECK(cfg.workers == 1);

  // flag-style override wins over the file value
  apply_config_entry(cfg, "tau_split", "0.3");
  CHECK(cfg.change.tau_split == 0.3);

  {
    std::ofstream out(cfg_path);
    out << "optical=a.hdr\nsar=b.hdr\noutput_dir=out\nwindow_side=5\n";
  }
  CHECK_THROWS(parse_config(cfg_path));
  {
    std::ofstream out(cfg_path);
    out << "optical=a.hdr\nsar=b.hdr\noutput_dir=out\nnot_a_key=1\n";
  }
  CHECK_THROWS(parse_config(cfg_path));
  CHECK_THROWS(apply_config_entry(cfg, "definitely_unknown", "x"));
  fs::remove_all(dir);
}

TEST_CASE("process_window on constant data degrades gracefully") {
  Raster optical;
  optical.header = {20, 20, 2, {BandRole::optical, BandRole::optical}};
  optical.data.assign(20 * 20 * 2, 5.0f);
  Raster sar;
  sar.header = {20, 20, 1, {BandRole::sar_intensity}};
  sar.data.assign(20 * 20, 3.0f);
  PipelineConfig cfg;
  const WindowResult res =
      process_window(optical, sar, {0, 0, 20, 20}, 0, cfg, 5.0);
  CHECK(res.degenerate);
  CHECK(res.events.empty());
  for (std::uint8_t v : res.mask.values) CHECK(v == 0);
}

TEST_CASE("process_window finds a planted split with good pixel overlap") {
  // Four strips; at t2 a rectangle inside the bottom strip drops to the
  // darkest backscatter level while its optical signature stays put.
  SceneSpec s = strips4_scene();
  s.seed = 12;
  s.changes.push_back({10, 38, 30, 9, 4});
  const ScenePair pair = generate_pair(s);

  PipelineConfig cfg;  // default configuration throughout
  const Raster filtered = enhanced_lee(pair.sar, {7, 5.0, 1.0});
  const WindowResult res =
      process_window(pair.optical, filtered, {0, 0, 50, 50}, 0, cfg, 5.0);

  bool found_split = false;
  for (const auto& ev : res.events)
    found_split = found_split || ev.kind == ChangeEvent::Kind::split;
  CHECK(found_split);

  long long inter = 0, uni = 0;
  for (int j = 0; j < 50 * 50; ++j) {
    const bool pred = res.mask.values[static_cast<std::size_t>(j)] != 0;
    const bool truth = pair.truth.values[static_cast<std::size_t>(j)] != 0;
    inter += pred && truth;
    uni += pred || truth;
  }
  REQUIRE(uni > 0);
  CHECK(static_cast<double>(inter) / static_cast<double>(uni) >= 0.7);
}

TEST_CASE("process_window finds a planted merge") {
  // Two rectangles in the bottom strip adopt the top strip's backscatter
  // level, so three optically distinct regions share one SAR cluster.
  SceneSpec s = strips4_scene();
  s.seed = 19;
  s.changes.push_back({10, 37, 30, 5, 4});
  s.changes.push_back({10, 44, 30, 5, 4});
  const ScenePair pair = generate_pair(s);

  PipelineConfig cfg;
  const Raster filtered = enhanced_lee(pair.sar, {7, 5.0, 1.0});
  const WindowResult res =
      process_window(pair.optical, filtered, {0, 0, 50, 50}, 0, cfg, 5.0);
  bool found_merge = false;
  for (const auto& ev : res.events)
    found_merge = found_merge || ev.kind == ChangeEvent::Kind::merge;
  CHECK(found_merge);

  long long inter = 0, uni = 0;
  for (int j = 0; j < 50 * 50; ++j) {
    const bool pred = res.mask.values[static_cast<std::size_t>(j)] != 0;
    const bool truth = pair.truth.values[static_cast<std::size_t>(j)] != 0;
    inter += pred && truth;
    uni += pred || truth;
  }
  REQUIRE(uni > 0);
  CHECK(static_cast<double>(inter) / static_cast<double>(uni) >= 0.7);
}

TEST_CASE("process_window flags nothing on an unchanged window") {
  SceneSpec s = strips4_scene();
  s.seed = 77;
  const ScenePair pair = generate_pair(s);

  PipelineConfig cfg;
  const Raster filtered = enhanced_lee(pair.sar, {7, 5.0, 1.0});
  const WindowResult res =
      process_window(pair.optical, filtered, {0, 0, 50, 50}, 0, cfg, 5.0);
  CHECK(res.events.empty());
  for (std::uint8_t v : res.mask.values) CHECK(v == 0);
}

TEST_CASE("run_pipeline stitches, writes artifacts and is deterministic") {
  const fs::path dir = fs::temp_directory_path() / "hcd_pipeline_test";
  fs::remove_all(dir);
  fs::create_directories(dir);

  SceneSpec scene = strip_scene(100, 100);
  scene.changes.push_back({10, 5, 25, 15, 2});  // planted change in window 0
  const ScenePair pair = generate_pair(scene);
  save_raster(pair.optical, dir / "optical.hdr");
  save_raster(pair.sar, dir / "sar.hdr");
  save_mask(pair.truth, dir / "truth.pgm");

  PipelineConfig cfg;
  cfg.optical_path = (dir / "optical.hdr").string();
  cfg.sar_path = (dir / "sar.hdr").string();
  cfg.truth_path = (dir / "truth.pgm").string();
  cfg.output_dir = (dir / "out_a").string();
  cfg.runs = 8;
  cfg.k_min = 2;
  cfg.k_max = 4;
  cfg.stacked_cap = 8;
  cfg.speckle.looks = 5.0;  // skip estimation: the scene is not homogeneous
  const PipelineOutcome a = run_pipeline(cfg);

  CHECK(a.change_mask.width == 100);
  CHECK(a.change_mask.height == 100);
  CHECK(a.windows.size() == 4);
  CHECK(a.looks == 5.0);
  CHECK(a.have_metrics);
  CHECK(a.metric_values.count("f1") == 1);
  CHECK(fs::exists(dir / "out_a" / "change_map.pgm"));
  CHECK(fs::exists(dir / "out_a" / "events.txt"));
  CHECK(fs::exists(dir / "out_a" / "metrics.txt"));
  CHECK(fs::exists(dir / "out_a" / "partition_opt_0.hdr"));
  CHECK(fs::exists(dir / "out_a" / "partition_sar_3.hdr"));
  CHECK(fs::exists(dir / "out_a" / "partition_st_2.hdr"));

  // stitched mask matches the per-window masks pixel for pixel
  for (const auto& wres : a.windows)
    for (int y = 0; y < wres.bounds.h; ++y)
      for (int x = 0; x < wres.bounds.w; ++x) {
        const std::size_t global = static_cast<std::size_t>(wres.bounds.y + y) * 100 +
                                   (wres.bounds.x + x);
        const std::size_t local = static_cast<std::size_t>(y) * wres.bounds.w + x;
        CHECK(a.change_mask.values[global] == wres.mask.values[local]);
      }

  // same inputs, different output dir, permuted order and more workers:
  // byte-identical artifacts
  PipelineConfig cfg_b = cfg;
  cfg_b.output_dir = (dir / "out_b").string();
  cfg_b.workers = 4;
  cfg_b.permute_windows = true;
  const PipelineOutcome b = run_pipeline(cfg_b);
  CHECK(slurp(dir / "out_a" / "change_map.pgm") == slurp(dir / "out_b" / "change_map.pgm"));
  CHECK(slurp(dir / "out_a" / "events.txt") == slurp(dir / "out_b" / "events.txt"));
  CHECK(slurp(dir / "out_a" / "partition_st_1.hdr") ==
        slurp(dir / "out_b" / "partition_st_1.hdr"));
  CHECK(a.change_mask.values == b.change_mask.values);

  fs::remove_all(dir);
}

TEST_CASE("run_pipeline fails fast on missing inputs") {
  PipelineConfig cfg;
  cfg.optical_path = "/nonexistent/opt.hdr";
  cfg.sar_path = "/nonexistent/sar.hdr";
  cfg.output_dir = (fs::temp_directory_path() / "hcd_never").string();
  CHECK_THROWS(run_pipeline(cfg));
}
