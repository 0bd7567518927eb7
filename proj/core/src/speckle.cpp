#include "hcd/speckle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace hcd {

namespace {

int find_sar_band(const Raster& r, const char* ctx) {
  int band = -1;
  for (int b = 0; b < r.bands(); ++b)
    if (r.header.band_roles[b] == BandRole::sar_intensity) {
      if (band >= 0) throw std::invalid_argument(std::string(ctx) + ": multiple SAR bands");
      band = b;
    }
  if (band < 0) throw std::invalid_argument(std::string(ctx) + ": no sar_intensity band");
  return band;
}

}  // namespace

EnlEstimate estimate_enl(const Raster& sar, int tile_side) {
  if (tile_side < 8) throw std::invalid_argument("estimate_enl: tile_side must be >= 8");
  const int band = find_sar_band(sar, "estimate_enl");
  const int tx = sar.width() / tile_side;
  const int ty = sar.height() / tile_side;
  if (tx == 0 || ty == 0)
    throw std::invalid_argument("estimate_enl: raster smaller than one tile");

  struct TileStat {
    double cov;
    double lhat;
    bool degenerate;
  };
  std::vector<TileStat> tiles;
  tiles.reserve(static_cast<std::size_t>(tx) * ty);
  const double n = static_cast<double>(tile_side) * tile_side;

  for (int j = 0; j < ty; ++j)
    for (int i = 0; i < tx; ++i) {
      double sum = 0.0, sum2 = 0.0;
      for (int y = j * tile_side; y < (j + 1) * tile_side; ++y)
        for (int x = i * tile_side; x < (i + 1) * tile_side; ++x) {
          const double v = sar.at(x, y, band);
          sum += v;
          sum2 += v * v;
        }
      const double mean = sum / n;
      const double var = std::max(0.0, (sum2 - sum * sum / n) / (n - 1.0));
      if (var <= 0.0 || mean <= 0.0) {
        tiles.push_back({0.0, 100.0, true});
      } else {
        tiles.push_back({std::sqrt(var) / mean, mean * mean / var, false});
      }
    }

  std::stable_sort(tiles.begin(), tiles.end(),
                   [](const TileStat& a, const TileStat& b) { return a.cov < b.cov; });
  const std::size_t take = std::max<std::size_t>(1, tiles.size() / 10);

  EnlEstimate est;
  double acc = 0.0;
  for (std::size_t i = 0; i < take; ++i) {
    acc += tiles[i].lhat;
    est.degenerate = est.degenerate || tiles[i].degenerate;
  }
  est.looks = std::clamp(acc / static_cast<double>(take), 1.0, 100.0);
  return est;
}

Raster enhanced_lee(const Raster& sar, const SpeckleParams& p) {
  if (p.window_side < 3 || p.window_side % 2 == 0)
    throw std::invalid_argument("enhanced_lee: window_side must be odd and >= 3");
  if (p.looks <= 0.0 || p.damping <= 0.0)
    throw std::invalid_argument("enhanced_lee: looks and damping must be positive");
  if (p.window_side > sar.width() || p.window_side > sar.height())
    throw std::invalid_argument("enhanced_lee: window larger than image");
  const int band = find_sar_band(sar, "enhanced_lee");

  const int w = sar.width(), h = sar.height();
  const int r = p.window_side / 2;
  const double cu = 1.0 / std::sqrt(p.looks);
  const double cmax = std::sqrt(1.0 + 2.0 / p.looks);

  // Integral images over the SAR band for O(1) window statistics.
  const std::size_t stride = static_cast<std::size_t>(w) + 1;
  std::vector<double> s1(stride * (h + 1), 0.0), s2(stride * (h + 1), 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double v = sar.at(x, y, band);
      const std::size_t i = (y + 1) * stride + (x + 1);
      s1[i] = v + s1[i - 1] + s1[i - stride] - s1[i - stride - 1];
      s2[i] = v * v + s2[i - 1] + s2[i - stride] - s2[i - stride - 1];
    }
  auto box = [&](const std::vector<double>& s, int x0, int y0, int x1, int y1) {
    return s[(y1 + 1) * stride + (x1 + 1)] - s[y0 * stride + (x1 + 1)] -
           s[(y1 + 1) * stride + x0] + s[y0 * stride + x0];
  };

  Raster out = sar;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int x0 = std::max(0, x - r), x1 = std::min(w - 1, x + r);
      const int y0 = std::max(0, y - r), y1 = std::min(h - 1, y + r);
      const double n = static_cast<double>(x1 - x0 + 1) * (y1 - y0 + 1);
      const double sum = box(s1, x0, y0, x1, y1);
      const double sum2 = box(s2, x0, y0, x1, y1);
      const double m = sum / n;
      const double var = std::max(0.0, (sum2 - sum * sum / n) / (n - 1.0));
      const double v = sar.at(x, y, band);

      double result;
      if (m <= 0.0) {
        result = m;  // all-zero window
      } else {
        const double ci = std::sqrt(var) / m;
        if (ci <= cu) {
          result = m;
        } else if (ci >= cmax) {
          result = v;  // point target, preserved bit-exactly
        } else {
          const double wgt = std::exp(-p.damping * (ci - cu) / (cmax - ci));
          result = m + wgt * (v - m);
        }
      }
      out.at(x, y, band) = static_cast<float>(result);
    }
  return out;
}

}  // namespace hcd
