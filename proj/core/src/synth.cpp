#include "hcd/synth.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "hcd/keyval.hpp"

namespace hcd {

namespace {

void validate_spec(const SceneSpec& s) {
  if (s.width <= 0 || s.height <= 0)
    throw std::invalid_argument("scene: non-positive dimensions");
  if (s.classes.empty()) throw std::invalid_argument("scene: no classes");
  if (s.looks <= 0.0) throw std::invalid_argument("scene: looks must be positive");
  const int nb = static_cast<int>(s.classes.front().optical_mean.size());
  for (const auto& c : s.classes) {
    if (c.optical_mean.size() != nb)
      throw std::invalid_argument("scene: inconsistent optical band counts");
    if (c.optical_cov.rows() != nb || c.optical_cov.cols() != nb)
      throw std::invalid_argument("scene: covariance shape mismatch");
    if (c.sar_mean <= 0.0) throw std::invalid_argument("scene: sar_mean must be positive");
    Eigen::LLT<Eigen::MatrixXd> llt(c.optical_cov);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("scene: optical covariance not positive definite");
  }
  auto check_rect = [&](int x, int y, int w, int h) {
    if (x < 0 || y < 0 || w <= 0 || h <= 0 || x + w > s.width || y + h > s.height)
      throw std::invalid_argument("scene: rectangle out of bounds");
  };
  for (const auto& r : s.map_regions) {
    check_rect(r.x, r.y, r.w, r.h);
    if (r.class_id < 0 || r.class_id >= static_cast<int>(s.classes.size()))
      throw std::invalid_argument("scene: map region class id out of range");
  }
  for (const auto& r : s.changes) {
    check_rect(r.x, r.y, r.w, r.h);
    if (r.new_class < 0 || r.new_class >= static_cast<int>(s.classes.size()))
      throw std::invalid_argument("scene: change region class id out of range");
  }
}

/// Gamma(shape, scale) draws; sum-of-exponentials for integer shape,
/// Marsaglia-Tsang otherwise.
double draw_gamma(std::mt19937_64& eng, double shape, double scale) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double rounded = std::round(shape);
  if (std::abs(shape - rounded) < 1e-9 && rounded >= 1.0 && rounded <= 64.0) {
    double acc = 0.0;
    for (int i = 0; i < static_cast<int>(rounded); ++i) {
      double u;
      do {
        u = unif(eng);
      } while (u <= 0.0);
      acc -= std::log(u);
    }
    return acc * scale;
  }
  // Marsaglia-Tsang; shapes < 1 are boosted via the u^(1/shape) trick.
  double boost = 1.0;
  double a = shape;
  if (a < 1.0) {
    double u;
    do {
      u = unif(eng);
    } while (u <= 0.0);
    boost = std::pow(u, 1.0 / a);
    a += 1.0;
  }
  const double d = a - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  std::normal_distribution<double> norm(0.0, 1.0);
  for (;;) {
    double x, v;
    do {
      x = norm(eng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = unif(eng);
    if (u < 1.0 - 0.0331 * x * x * x * x) return boost * d * v * scale;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
      return boost * d * v * scale;
  }
}

}  // namespace

ScenePair generate_pair(const SceneSpec& spec) {
  validate_spec(spec);
  const int w = spec.width, h = spec.height;
  const int nb = static_cast<int>(spec.classes.front().optical_mean.size());

  std::vector<int> map_t1(static_cast<std::size_t>(w) * h, 0);
  for (const auto& r : spec.map_regions)
    for (int y = r.y; y < r.y + r.h; ++y)
      for (int x = r.x; x < r.x + r.w; ++x)
        map_t1[static_cast<std::size_t>(y) * w + x] = r.class_id;
  std::vector<int> map_t2 = map_t1;
  for (const auto& r : spec.changes)
    for (int y = r.y; y < r.y + r.h; ++y)
      for (int x = r.x; x < r.x + r.w; ++x)
        map_t2[static_cast<std::size_t>(y) * w + x] = r.new_class;

  std::vector<Eigen::MatrixXd> chol;
  chol.reserve(spec.classes.size());
  for (const auto& c : spec.classes)
    chol.push_back(Eigen::MatrixXd(Eigen::LLT<Eigen::MatrixXd>(c.optical_cov).matrixL()));

  ScenePair out;
  out.optical.header = {w, h, nb, std::vector<BandRole>(nb, BandRole::optical)};
  out.optical.data.resize(static_cast<std::size_t>(w) * h * nb);
  out.sar.header = {w, h, 1, {BandRole::sar_intensity}};
  out.sar.data.resize(static_cast<std::size_t>(w) * h);
  out.truth.width = w;
  out.truth.height = h;
  out.truth.values.resize(static_cast<std::size_t>(w) * h);

  std::mt19937_64 eng(spec.seed);
  std::normal_distribution<double> norm(0.0, 1.0);
  Eigen::VectorXd z(nb);

  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t px = static_cast<std::size_t>(y) * w + x;
      const auto& c1 = spec.classes[static_cast<std::size_t>(map_t1[px])];
      const auto& c2 = spec.classes[static_cast<std::size_t>(map_t2[px])];

      for (int b = 0; b < nb; ++b) z(b) = norm(eng);
      const Eigen::VectorXd sample =
          c1.optical_mean + chol[static_cast<std::size_t>(map_t1[px])] * z;
      for (int b = 0; b < nb; ++b)
        out.optical.data[px * nb + b] = static_cast<float>(sample(b));

      out.sar.data[px] = static_cast<float>(
          draw_gamma(eng, spec.looks, c2.sar_mean / spec.looks));
      out.truth.values[px] = map_t1[px] != map_t2[px] ? 1 : 0;
    }
  return out;
}

SceneSpec parse_scene_spec(const std::filesystem::path& path) {
  SceneSpec spec;
  SceneClass* cur_class = nullptr;
  ChangeRegion* cur_change = nullptr;

  for (const auto& [key, val] : parse_keyvalues(path)) {
    if (key == "width") {
      spec.width = std::stoi(val);
    } else if (key == "height") {
      spec.height = std::stoi(val);
    } else if (key == "looks") {
      spec.looks = std::stod(val);
    } else if (key == "seed") {
      spec.seed = std::stoull(val);
    } else if (key == "class.optical_mean") {
      auto vals = parse_double_list(val);
      spec.classes.emplace_back();
      cur_class = &spec.classes.back();
      cur_class->optical_mean =
          Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
      const auto nb = cur_class->optical_mean.size();
      cur_class->optical_cov = Eigen::MatrixXd::Identity(nb, nb);
    } else if (key == "class.optical_cov") {
      if (!cur_class) throw std::runtime_error("class.optical_cov before class.optical_mean");
      auto vals = parse_double_list(val);
      const auto nb = cur_class->optical_mean.size();
      if (static_cast<Eigen::Index>(vals.size()) != nb * nb)
        throw std::runtime_error("class.optical_cov needs " + std::to_string(nb * nb) +
                                 " row-major entries");
      cur_class->optical_cov =
          Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
              vals.data(), nb, nb);
    } else if (key == "class.sar_mean") {
      if (!cur_class) throw std::runtime_error("class.sar_mean before class.optical_mean");
      cur_class->sar_mean = std::stod(val);
    } else if (key == "map.rect") {
      auto v = parse_int_list(val);
      if (v.size() != 5) throw std::runtime_error("map.rect needs x,y,w,h,class");
      spec.map_regions.push_back({v[0], v[1], v[2], v[3], v[4]});
    } else if (key == "change.rect") {
      auto v = parse_int_list(val);
      if (v.size() != 4) throw std::runtime_error("change.rect needs x,y,w,h");
      spec.changes.push_back({v[0], v[1], v[2], v[3], 0});
      cur_change = &spec.changes.back();
    } else if (key == "change.class") {
      if (!cur_change) throw std::runtime_error("change.class before change.rect");
      cur_change->new_class = std::stoi(val);
    } else {
      throw std::runtime_error("unknown scene key '" + key + "'");
    }
  }
  validate_spec(spec);
  return spec;
}

}  // namespace hcd
