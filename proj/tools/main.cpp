// hcd: heterogeneous optical/SAR change detection via ensemble fuzzy
// clustering and split/merge analysis of the per-window partitions.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "hcd/change.hpp"
#include "hcd/ensemble.hpp"
#include "hcd/evaluation.hpp"
#include "hcd/models.hpp"
#include "hcd/pipeline.hpp"
#include "hcd/raster.hpp"
#include "hcd/speckle.hpp"
#include "hcd/synth.hpp"

namespace fs = std::filesystem;

namespace {

std::vector<int> labels_from_raster(const hcd::Raster& r) {
  std::vector<int> labels(r.data.size());
  for (std::size_t i = 0; i < r.data.size(); ++i)
    labels[i] = static_cast<int>(std::lround(r.data[i]));
  return labels;
}

void write_events(std::ostream& os, int window_id,
                  const std::vector<hcd::ChangeEvent>& events) {
  for (const auto& ev : events) {
    os << window_id << " "
       << (ev.kind == hcd::ChangeEvent::Kind::split ? "split" : "merge") << " "
       << ev.source << " ";
    for (std::size_t i = 0; i < ev.involved.size(); ++i)
      os << (i ? "," : "") << ev.involved[i];
    os << " " << ev.pixels.size() << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heterogeneous optical/SAR change detection"};
  app.require_subcommand(1);

  // ---- run ----------------------------------------------------------------
  auto* run = app.add_subcommand("run", "full pipeline: filter, cluster, detect");
  std::string run_config;
  run->add_option("--config", run_config, "key=value config file");
  // Flags mirror config keys; values given here override the file.
  std::map<std::string, std::string> run_overrides;
  const std::vector<std::pair<std::string, std::string>> run_keys = {
      {"optical", "--optical"},       {"sar", "--sar"},
      {"truth", "--truth"},           {"output_dir", "--out"},
      {"window_side", "--window-side"}, {"speckle_window", "--speckle-window"},
      {"speckle_looks", "--speckle-looks"}, {"speckle_damping", "--speckle-damping"},
      {"enl_tile", "--enl-tile"},     {"fuzzifier", "--fuzzifier"},
      {"max_iter", "--max-iter"},     {"tol", "--tol"},
      {"regularizer", "--regularizer"}, {"cov_weight", "--cov-weight"},
      {"cov_condition_cap", "--cov-condition-cap"},
      {"runs", "--runs"},             {"k_min", "--k-min"},
      {"k_max", "--k-max"},           {"stacked_cap", "--stacked-cap"},
      {"fuzzy_coassociation", "--fuzzy-coassociation"},
      {"tau_split", "--tau-split"},   {"tau_merge", "--tau-merge"},
      {"flag_mode", "--flag-mode"},   {"smooth", "--smooth"},
      {"strict_split", "--strict-split"}, {"strict_merge", "--strict-merge"},
      {"seed", "--seed"},
      {"workers", "--workers"},       {"permute_windows", "--permute-windows"}};
  for (const auto& [key, flag] : run_keys)
    run->add_option(flag, run_overrides[key], "config key " + key);

  // ---- filter -------------------------------------------------------------
  auto* filter = app.add_subcommand("filter", "enhanced Lee speckle filter");
  std::string f_in, f_out;
  double f_looks = 0.0, f_damping = 1.0;
  int f_window = 7, f_enl_tile = 64;
  filter->add_option("--input", f_in)->required();
  filter->add_option("--output", f_out)->required();
  filter->add_option("--looks", f_looks, "number of looks; <= 0 estimates from data");
  filter->add_option("--window", f_window, "filter window side (odd)");
  filter->add_option("--damping", f_damping);
  filter->add_option("--enl-tile", f_enl_tile, "tile side for ENL estimation");

  // ---- cluster ------------------------------------------------------------
  auto* cluster = app.add_subcommand("cluster", "ensemble-cluster one view of one window");
  std::string c_in, c_out, c_metric = "mahalanobis", c_window;
  int c_runs = 20, c_kmin = 4, c_kmax = 7;
  double c_looks = 1.0;
  std::uint64_t c_seed = 0;
  cluster->add_option("--input", c_in)->required();
  cluster->add_option("--output", c_out, "label raster (.hdr)")->required();
  cluster->add_option("--metric", c_metric, "euclidean | mahalanobis | gamma");
  cluster->add_option("--window", c_window, "x,y,w,h (default: full image)");
  cluster->add_option("--runs", c_runs);
  cluster->add_option("--k-min", c_kmin);
  cluster->add_option("--k-max", c_kmax);
  cluster->add_option("--looks", c_looks, "looks for the gamma metric");
  cluster->add_option("--seed", c_seed);

  // ---- detect -------------------------------------------------------------
  auto* detect = app.add_subcommand("detect", "split/merge detection from saved partitions");
  std::string d_opt, d_sar, d_st, d_out;
  double d_tau_split = 0.2, d_tau_merge = 0.2;
  std::string d_flag_mode = "minority";
  bool d_no_smooth = false, d_strict = false;
  detect->add_option("--opt", d_opt, "optical partition raster")->required();
  detect->add_option("--sar", d_sar, "SAR partition raster")->required();
  detect->add_option("--st", d_st, "stacked partition raster")->required();
  detect->add_option("--out", d_out, "output directory")->required();
  detect->add_option("--tau-split", d_tau_split);
  detect->add_option("--tau-merge", d_tau_merge);
  detect->add_option("--flag-mode", d_flag_mode, "minority | all");
  detect->add_flag("--no-smooth", d_no_smooth);
  detect->add_flag("--strict-split", d_strict);

  // ---- evaluate -----------------------------------------------------------
  auto* evaluate = app.add_subcommand("evaluate", "score a change mask against truth");
  std::string e_pred, e_truth, e_out;
  evaluate->add_option("--pred", e_pred)->required();
  evaluate->add_option("--truth", e_truth)->required();
  evaluate->add_option("--out", e_out, "also write the metrics block to this file");

  // ---- synth --------------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "generate a planted-change scene");
  std::string s_spec, s_out;
  synth->add_option("--spec", s_spec, "scene spec (key=value)")->required();
  synth->add_option("--out", s_out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      hcd::PipelineConfig cfg;
      if (!run_config.empty()) cfg = hcd::parse_config(run_config);
      for (const auto& [key, flag] : run_keys) {
        if (run->count(flag) > 0)
          hcd::apply_config_entry(cfg, key, run_overrides[key]);
      }
      const hcd::PipelineOutcome out = hcd::run_pipeline(cfg);
      std::cout << "looks=" << out.looks << "\n";
      std::cout << "windows=" << out.windows.size() << "\n";
      std::size_t nevents = 0;
      for (const auto& w : out.windows) nevents += w.events.size();
      std::cout << "events=" << nevents << "\n";
      for (const auto& [k, v] : out.metric_values) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6f", v);
        std::cout << k << "=" << buf << "\n";
      }
    } else if (*filter) {
      const hcd::Raster in = hcd::load_raster(f_in);
      double looks = f_looks;
      if (looks <= 0.0) {
        const auto est = hcd::estimate_enl(in, f_enl_tile);
        looks = est.looks;
        std::cout << "estimated_looks=" << looks
                  << (est.degenerate ? " (degenerate input)" : "") << "\n";
      }
      hcd::save_raster(hcd::enhanced_lee(in, {f_window, looks, f_damping}), f_out);
    } else if (*cluster) {
      const hcd::Raster in = hcd::load_raster(c_in);
      hcd::WindowBounds b{0, 0, in.width(), in.height()};
      if (!c_window.empty()) {
        if (std::sscanf(c_window.c_str(), "%d,%d,%d,%d", &b.x, &b.y, &b.w, &b.h) != 4)
          throw std::runtime_error("--window expects x,y,w,h");
      }
      Eigen::MatrixXd X(static_cast<Eigen::Index>(b.w) * b.h, in.bands());
      Eigen::Index row = 0;
      for (int y = b.y; y < b.y + b.h; ++y)
        for (int x = b.x; x < b.x + b.w; ++x, ++row)
          for (int band = 0; band < in.bands(); ++band) X(row, band) = in.at(x, y, band);

      hcd::FcmParams base;
      if (c_metric == "euclidean") base.metric = hcd::Metric::euclidean;
      else if (c_metric == "mahalanobis") base.metric = hcd::Metric::adaptive_mahalanobis;
      else if (c_metric == "gamma") {
        base.metric = hcd::Metric::hellinger_gamma;
        base.looks = c_looks;
      } else throw std::runtime_error("unknown metric '" + c_metric + "'");

      hcd::EnsembleParams ens;
      ens.runs = c_runs;
      ens.k_min = c_kmin;
      ens.k_max = c_kmax;
      ens.seed = c_seed;
      const hcd::ConsensusPartition part = hcd::run_ensemble(X, ens, base);
      std::cout << "clusters=" << part.k << "\n";

      hcd::Raster labels;
      labels.header = {b.w, b.h, 1, {hcd::BandRole::optical}};
      labels.data.resize(part.labels.size());
      for (std::size_t i = 0; i < part.labels.size(); ++i)
        labels.data[i] = static_cast<float>(part.labels[i]);
      hcd::save_raster(labels, c_out);
    } else if (*detect) {
      const hcd::Raster r_opt = hcd::load_raster(d_opt);
      const hcd::Raster r_sar = hcd::load_raster(d_sar);
      const hcd::Raster r_st = hcd::load_raster(d_st);
      if (r_opt.width() != r_st.width() || r_opt.height() != r_st.height() ||
          r_sar.width() != r_st.width() || r_sar.height() != r_st.height())
        throw std::runtime_error("partition rasters differ in shape");

      hcd::ChangeParams params;
      params.tau_split = d_tau_split;
      params.tau_merge = d_tau_merge;
      params.smooth = !d_no_smooth;
      params.strict_split = d_strict;
      if (d_flag_mode == "minority") params.flag_mode = hcd::FlagMode::minority;
      else if (d_flag_mode == "all") params.flag_mode = hcd::FlagMode::all;
      else throw std::runtime_error("flag_mode must be minority or all");

      const auto opt_labels = labels_from_raster(r_opt);
      const auto sar_labels = labels_from_raster(r_sar);
      const auto st_labels = labels_from_raster(r_st);
      auto events = hcd::detect_splits(opt_labels, st_labels, params, &sar_labels);
      auto merges = hcd::detect_merges(st_labels, sar_labels, params);
      events.insert(events.end(), merges.begin(), merges.end());

      fs::create_directories(d_out);
      hcd::save_mask(hcd::change_map(events, r_opt.width(), r_opt.height(), params),
                     fs::path(d_out) / "change_map.pgm");
      std::ofstream ef(fs::path(d_out) / "events.txt");
      write_events(ef, 0, events);
      std::cout << "events=" << events.size() << "\n";
    } else if (*evaluate) {
      const hcd::Mask pred = hcd::load_mask(e_pred);
      const hcd::Mask truth = hcd::load_mask(e_truth, pred.width, pred.height);
      const hcd::ConfusionCounts cc = hcd::confusion(pred, truth);
      const hcd::AgreementMetrics m = hcd::metrics(cc);
      std::string block;
      char buf[64];
      block += "tp=" + std::to_string(cc.tp) + "\n";
      block += "fp=" + std::to_string(cc.fp) + "\n";
      block += "fn=" + std::to_string(cc.fn) + "\n";
      block += "tn=" + std::to_string(cc.tn) + "\n";
      auto add = [&](const char* k, double v) {
        std::snprintf(buf, sizeof buf, "%.6f", v);
        block += std::string(k) + "=" + buf + "\n";
      };
      add("overall_accuracy", m.overall_accuracy);
      add("precision", m.precision);
      add("recall", m.recall);
      add("f1", m.f1);
      add("kappa", m.kappa);
      std::cout << block;
      if (!e_out.empty()) {
        std::ofstream of(e_out);
        of << block;
      }
    } else if (*synth) {
      const hcd::SceneSpec spec = hcd::parse_scene_spec(s_spec);
      const hcd::ScenePair pair = hcd::generate_pair(spec);
      fs::create_directories(s_out);
      hcd::save_raster(pair.optical, fs::path(s_out) / "optical.hdr");
      hcd::save_raster(pair.sar, fs::path(s_out) / "sar.hdr");
      hcd::save_mask(pair.truth, fs::path(s_out) / "truth.pgm");
      std::cout << "scene " << spec.width << "x" << spec.height << ", "
                << spec.classes.size() << " classes, "
                << spec.changes.size() << " change regions\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
