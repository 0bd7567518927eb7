#include "hcd/pipeline.hpp"

#include <atomic>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

#include "hcd/evaluation.hpp"
#include "hcd/models.hpp"
#include "hcd/rng.hpp"

namespace hcd {

namespace {

std::vector<int> segments(int length, int side) {
  if (length <= 0) throw std::invalid_argument("tile: non-positive image dimension");
  std::vector<int> segs;
  if (length < side) {
    segs.push_back(length);
    return segs;
  }
  const int n = length / side;
  const int rem = length % side;
  segs.assign(static_cast<std::size_t>(n), side);
  if (rem > 0) {
    if (2 * rem >= side)
      segs.push_back(rem);
    else
      segs.back() += rem;  // short remainder merges into the neighbor
  }
  return segs;
}

Eigen::MatrixXd window_matrix(const Raster& r, const WindowBounds& b) {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(b.w) * b.h, r.bands());
  Eigen::Index row = 0;
  for (int y = b.y; y < b.y + b.h; ++y)
    for (int x = b.x; x < b.x + b.w; ++x, ++row)
      for (int band = 0; band < r.bands(); ++band)
        X(row, band) = r.at(x, y, band);
  return X;
}

void validate_ranges(const PipelineConfig& cfg) {
  if (cfg.window_side < 10) throw std::runtime_error("window_side must be >= 10");
  if (cfg.runs < 1) throw std::runtime_error("runs must be >= 1");
  if (cfg.k_min < 2 || cfg.k_min > cfg.k_max)
    throw std::runtime_error("need 2 <= k_min <= k_max");
  if (cfg.stacked_cap < 2) throw std::runtime_error("stacked_cap must be >= 2");
  if (cfg.change.tau_split <= 0.0 || cfg.change.tau_split > 0.5)
    throw std::runtime_error("tau_split must be in (0, 0.5]");
  if (cfg.change.tau_merge <= 0.0 || cfg.change.tau_merge > 0.5)
    throw std::runtime_error("tau_merge must be in (0, 0.5]");
  if (cfg.fuzzifier <= 1.0) throw std::runtime_error("fuzzifier must be > 1");
  if (cfg.tol <= 0.0) throw std::runtime_error("tol must be positive");
  if (cfg.max_iter < 1) throw std::runtime_error("max_iter must be >= 1");
  if (cfg.workers < 1) throw std::runtime_error("workers must be >= 1");
  if (cfg.speckle.window_side < 3 || cfg.speckle.window_side % 2 == 0)
    throw std::runtime_error("speckle_window must be odd and >= 3");
  if (cfg.enl_tile < 8) throw std::runtime_error("enl_tile must be >= 8");
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void write_label_raster(const std::vector<int>& labels, const WindowBounds& b,
                        const std::filesystem::path& path) {
  Raster r;
  r.header = {b.w, b.h, 1, {BandRole::optical}};
  r.data.resize(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    r.data[i] = static_cast<float>(labels[i]);
  save_raster(r, path);
}

}  // namespace

std::vector<WindowBounds> tile(int width, int height, int side) {
  if (side < 10) throw std::invalid_argument("tile: side must be >= 10");
  const std::vector<int> xs = segments(width, side);
  const std::vector<int> ys = segments(height, side);
  std::vector<WindowBounds> out;
  int y = 0;
  for (int hseg : ys) {
    int x = 0;
    for (int wseg : xs) {
      out.push_back({x, y, wseg, hseg});
      x += wseg;
    }
    y += hseg;
  }
  return out;
}

WindowResult process_window(const Raster& optical, const Raster& sar_filtered,
                            const WindowBounds& bounds, int window_id,
                            const PipelineConfig& cfg, double looks) {
  WindowResult res;
  res.id = window_id;
  res.bounds = bounds;
  res.mask.width = bounds.w;
  res.mask.height = bounds.h;
  res.mask.values.assign(static_cast<std::size_t>(bounds.w) * bounds.h, 0);

  const std::uint64_t wseed = mix64(cfg.seed, static_cast<std::uint64_t>(window_id));
  try {
    FcmParams base;
    base.fuzzifier = cfg.fuzzifier;
    base.max_iter = cfg.max_iter;
    base.tol = cfg.tol;
    base.regularizer = cfg.regularizer;
    base.cov_condition_cap = cfg.cov_condition_cap;
    base.cov_weight = cfg.cov_weight;

    EnsembleParams ens;
    ens.runs = cfg.runs;
    ens.k_min = cfg.k_min;
    ens.k_max = cfg.k_max;
    ens.fuzzy_coassociation = cfg.fuzzy_coassociation;

    // Optical view: adaptive Mahalanobis on the raw optical channels.
    const Eigen::MatrixXd x_opt = window_matrix(optical, bounds);
    FcmParams p = base;
    p.metric = Metric::adaptive_mahalanobis;
    ens.seed = mix64(wseed, 10);
    res.p_opt = run_ensemble(x_opt, ens, p);

    // SAR view: Hellinger distance between gamma models.
    const Eigen::MatrixXd x_sar = window_matrix(sar_filtered, bounds);
    p = base;
    p.metric = Metric::hellinger_gamma;
    p.looks = looks;
    ens.seed = mix64(wseed, 11);
    res.p_sar = run_ensemble(x_sar, ens, p);

    // Stacked view: optical bands plus log SAR, z-scored per window so the
    // Euclidean first iteration is scale-balanced.
    const double delta = std::max(1e-10 * x_sar.maxCoeff(), 1e-30);
    Eigen::MatrixXd x_st(x_opt.rows(), x_opt.cols() + 1);
    x_st.leftCols(x_opt.cols()) = x_opt;
    x_st.col(x_opt.cols()) = (x_sar.col(0).array() + delta).log();
    for (Eigen::Index c = 0; c < x_st.cols(); ++c) {
      const double mean = x_st.col(c).mean();
      x_st.col(c).array() -= mean;
      const double sd = std::sqrt(x_st.col(c).squaredNorm() /
                                  static_cast<double>(x_st.rows()));
      if (sd > 0.0) x_st.col(c) /= sd;
    }

    const auto [lo, hi] = stacked_k_bounds(res.p_opt.k, res.p_sar.k, cfg.stacked_cap);
    EnsembleParams ens_st = ens;
    ens_st.k_min = lo;
    ens_st.k_max = std::min<int>(hi, static_cast<int>(x_st.rows()));
    ens_st.seed = mix64(wseed, 12);
    p = base;
    p.metric = Metric::adaptive_mahalanobis;
    res.p_st = run_ensemble(x_st, ens_st, p);

    res.degenerate = res.p_opt.degenerate && res.p_sar.degenerate && res.p_st.degenerate;

    auto splits = detect_splits(res.p_opt.labels, res.p_st.labels, cfg.change,
                                &res.p_sar.labels);
    auto merges = detect_merges(res.p_st.labels, res.p_sar.labels, cfg.change,
                                &res.p_opt.labels);
    res.events = std::move(splits);
    res.events.insert(res.events.end(), std::make_move_iterator(merges.begin()),
                      std::make_move_iterator(merges.end()));
    res.mask = change_map(res.events, bounds.w, bounds.h, cfg.change);
  } catch (const std::exception& e) {
    res.degenerate = true;
    res.warning = e.what();
    res.events.clear();
    res.mask.values.assign(static_cast<std::size_t>(bounds.w) * bounds.h, 0);
  }
  return res;
}

PipelineOutcome run_pipeline(const PipelineConfig& cfg) {
  validate_ranges(cfg);
  if (cfg.optical_path.empty() || cfg.sar_path.empty() || cfg.output_dir.empty())
    throw std::runtime_error("optical, sar, and output_dir are required");

  // Fail-fast: every input is loaded and validated before any processing.
  const Raster optical = load_raster(cfg.optical_path);
  const Raster sar = load_raster(cfg.sar_path);
  if (optical.width() != sar.width() || optical.height() != sar.height())
    throw std::runtime_error("optical and SAR rasters differ in shape");
  Mask truth;
  const bool have_truth = !cfg.truth_path.empty();
  if (have_truth)
    truth = load_mask(cfg.truth_path, optical.width(), optical.height());
  std::filesystem::create_directories(cfg.output_dir);

  PipelineOutcome out;
  out.looks = cfg.speckle.looks > 0.0 ? cfg.speckle.looks
                                      : estimate_enl(sar, cfg.enl_tile).looks;
  SpeckleParams sp = cfg.speckle;
  sp.looks = out.looks;
  const Raster filtered = enhanced_lee(sar, sp);

  const std::vector<WindowBounds> windows = tile(optical.width(), optical.height(),
                                                 cfg.window_side);
  const int nwin = static_cast<int>(windows.size());
  std::vector<int> order(static_cast<std::size_t>(nwin));
  std::iota(order.begin(), order.end(), 0);
  if (cfg.permute_windows) {
    std::mt19937_64 eng(mix64(cfg.seed, 999));
    std::shuffle(order.begin(), order.end(), eng);
  }

  out.windows.resize(static_cast<std::size_t>(nwin));
  auto work = [&](int id) {
    out.windows[static_cast<std::size_t>(id)] =
        process_window(optical, filtered, windows[static_cast<std::size_t>(id)], id,
                       cfg, out.looks);
  };
  if (cfg.workers <= 1) {
    for (int id : order) work(id);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int nthreads = std::min(cfg.workers, nwin);
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t)
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= order.size()) return;
          work(order[i]);
        }
      });
    for (auto& th : pool) th.join();
  }

  // Single collector: stitch and write everything in window-id order.
  out.change_mask.width = optical.width();
  out.change_mask.height = optical.height();
  out.change_mask.values.assign(
      static_cast<std::size_t>(optical.width()) * optical.height(), 0);
  for (const auto& w : out.windows)
    for (int y = 0; y < w.bounds.h; ++y)
      for (int x = 0; x < w.bounds.w; ++x)
        out.change_mask.set(w.bounds.x + x, w.bounds.y + y, w.mask.at(x, y));

  const std::filesystem::path dir(cfg.output_dir);
  save_mask(out.change_mask, dir / "change_map.pgm");

  std::ofstream events(dir / "events.txt");
  if (!events) throw std::runtime_error("cannot write events.txt");
  for (const auto& w : out.windows) {
    for (const auto& ev : w.events) {
      events << w.id << " "
             << (ev.kind == ChangeEvent::Kind::split ? "split" : "merge") << " "
             << ev.source << " ";
      for (std::size_t i = 0; i < ev.involved.size(); ++i)
        events << (i ? "," : "") << ev.involved[i];
      events << " " << ev.pixels.size() << "\n";
    }
    if (!w.warning.empty())
      events << "# window " << w.id << " warning: " << w.warning << "\n";
  }

  for (const auto& w : out.windows) {
    write_label_raster(w.p_opt.labels, w.bounds,
                       dir / ("partition_opt_" + std::to_string(w.id) + ".hdr"));
    write_label_raster(w.p_sar.labels, w.bounds,
                       dir / ("partition_sar_" + std::to_string(w.id) + ".hdr"));
    write_label_raster(w.p_st.labels, w.bounds,
                       dir / ("partition_st_" + std::to_string(w.id) + ".hdr"));
  }

  if (have_truth) {
    const ConfusionCounts cc = confusion(out.change_mask, truth);
    const AgreementMetrics m = metrics(cc);
    out.have_metrics = true;
    out.metric_values = {{"overall_accuracy", m.overall_accuracy},
                         {"precision", m.precision},
                         {"recall", m.recall},
                         {"f1", m.f1},
                         {"kappa", m.kappa}};
    std::string block;
    block += "tp=" + std::to_string(cc.tp) + "\n";
    block += "fp=" + std::to_string(cc.fp) + "\n";
    block += "fn=" + std::to_string(cc.fn) + "\n";
    block += "tn=" + std::to_string(cc.tn) + "\n";
    for (const auto& [k, v] : out.metric_values) block += k + "=" + format_double(v) + "\n";
    std::ofstream mf(dir / "metrics.txt");
    if (!mf) throw std::runtime_error("cannot write metrics.txt");
    mf << block;
    events << block;
  }
  return out;
}

void apply_config_entry(PipelineConfig& cfg, const std::string& key,
                        const std::string& value) {
  auto as_bool = [&] {
    if (value == "true" || value == "1" || value == "on") return true;
    if (value == "false" || value == "0" || value == "off") return false;
    throw std::runtime_error("invalid boolean for " + key + ": '" + value + "'");
  };
  if (key == "optical") cfg.optical_path = value;
  else if (key == "sar") cfg.sar_path = value;
  else if (key == "truth") cfg.truth_path = value;
  else if (key == "output_dir") cfg.output_dir = value;
  else if (key == "window_side") cfg.window_side = std::stoi(value);
  else if (key == "speckle_window") cfg.speckle.window_side = std::stoi(value);
  else if (key == "speckle_looks") cfg.speckle.looks = std::stod(value);
  else if (key == "speckle_damping") cfg.speckle.damping = std::stod(value);
  else if (key == "enl_tile") cfg.enl_tile = std::stoi(value);
  else if (key == "fuzzifier") cfg.fuzzifier = std::stod(value);
  else if (key == "max_iter") cfg.max_iter = std::stoi(value);
  else if (key == "tol") cfg.tol = std::stod(value);
  else if (key == "regularizer") cfg.regularizer = std::stod(value);
  else if (key == "cov_condition_cap") cfg.cov_condition_cap = std::stod(value);
  else if (key == "cov_weight") {
    if (value == "plain") cfg.cov_weight = CovarianceWeight::plain;
    else if (value == "fuzzified") cfg.cov_weight = CovarianceWeight::fuzzified;
    else throw std::runtime_error("cov_weight must be plain or fuzzified");
  } else if (key == "runs") cfg.runs = std::stoi(value);
  else if (key == "k_min") cfg.k_min = std::stoi(value);
  else if (key == "k_max") cfg.k_max = std::stoi(value);
  else if (key == "stacked_cap") cfg.stacked_cap = std::stoi(value);
  else if (key == "fuzzy_coassociation") cfg.fuzzy_coassociation = as_bool();
  else if (key == "tau_split") cfg.change.tau_split = std::stod(value);
  else if (key == "tau_merge") cfg.change.tau_merge = std::stod(value);
  else if (key == "flag_mode") {
    if (value == "minority") cfg.change.flag_mode = FlagMode::minority;
    else if (value == "all") cfg.change.flag_mode = FlagMode::all;
    else throw std::runtime_error("flag_mode must be minority or all");
  } else if (key == "smooth") cfg.change.smooth = as_bool();
  else if (key == "strict_split") cfg.change.strict_split = as_bool();
  else if (key == "strict_merge") cfg.change.strict_merge = as_bool();
  else if (key == "seed") cfg.seed = std::stoull(value);
  else if (key == "workers") cfg.workers = std::stoi(value);
  else if (key == "permute_windows") cfg.permute_windows = as_bool();
  else throw std::runtime_error("unknown config key '" + key + "'");
}

PipelineConfig parse_config(const std::filesystem::path& path) {
  PipelineConfig cfg;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto b = line.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r\n");
    line = line.substr(b, e - b + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": expected key=value");
    auto trim = [](std::string s) {
      const auto bb = s.find_first_not_of(" \t");
      if (bb == std::string::npos) return std::string();
      const auto ee = s.find_last_not_of(" \t");
      return s.substr(bb, ee - bb + 1);
    };
    apply_config_entry(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  validate_ranges(cfg);
  return cfg;
}

}  // namespace hcd
