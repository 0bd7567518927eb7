#pragma once

#include "hcd/raster.hpp"

namespace hcd {

struct SpeckleParams {
  int window_side = 7;   // odd, >= 3
  double looks = 1.0;    // > 0
  double damping = 1.0;  // > 0
};

struct EnlEstimate {
  double looks = 1.0;
  bool degenerate = false;  // zero-variance input forced the clamp
};

/// Equivalent-number-of-looks estimate: mean of (tile mean^2 / tile variance)
/// over the lowest-coefficient-of-variation decile of non-overlapping tiles,
/// clamped to [1, 100]. The raster must have exactly one sar_intensity band.
EnlEstimate estimate_enl(const Raster& sar, int tile_side);

/// 7x7 (configurable) enhanced Lee filter. Three regimes per pixel from the
/// local coefficient of variation Ci = s/m: below Cu = 1/sqrt(L) the window
/// mean, above Cmax = sqrt(1 + 2/L) the pixel itself, in between
/// m + w (x - m) with w = exp(-K (Ci - Cu) / (Cmax - Ci)).
/// Border windows shrink to the image intersection.
Raster enhanced_lee(const Raster& sar, const SpeckleParams& p);

}  // namespace hcd
