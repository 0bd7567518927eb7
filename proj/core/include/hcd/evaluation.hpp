#pragma once

#include "hcd/raster.hpp"

namespace hcd {

struct ConfusionCounts {
  long long tp = 0, fp = 0, fn = 0, tn = 0;
  long long total() const { return tp + fp + fn + tn; }
};

struct AgreementMetrics {
  double overall_accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double kappa = 0.0;
  bool degenerate = false;  // some ratio had a zero denominator
};

/// Per-pixel confusion with change as the positive class.
ConfusionCounts confusion(const Mask& pred, const Mask& truth);

/// Standard definitions; zero-denominator ratios report 0 with the
/// degeneracy flag, kappa at p_e = 1 reports 1 iff p_o = 1 (else 0).
AgreementMetrics metrics(const ConfusionCounts& c);

}  // namespace hcd
