#pragma once

#include <vector>

#include "hcd/raster.hpp"

namespace hcd {

struct ContingencyTable {
  int rows = 0;
  int cols = 0;
  std::vector<long long> counts;  // rows x cols, row-major
  std::vector<long long> row_sums;
  std::vector<long long> col_sums;

  long long at(int r, int c) const {
    return counts[static_cast<std::size_t>(r) * cols + c];
  }
};

enum class FlagMode { minority, all };

struct ChangeParams {
  double tau_split = 0.2;   // in (0, 0.5]
  double tau_merge = 0.2;   // in (0, 0.5]
  FlagMode flag_mode = FlagMode::minority;
  bool smooth = true;        // 3x3 majority filter on the change map
  bool strict_split = false; // fragments must differ in SAR majority label
  bool strict_merge = false; // contributors must differ in optical majority label
};

struct ChangeEvent {
  enum class Kind { split, merge };
  Kind kind;
  int source = 0;              // optical cluster (split) or SAR cluster (merge)
  std::vector<int> involved;   // stacked cluster ids
  std::vector<int> pixels;     // flagged pixel indices (row-major)
};

/// counts[a][b] = |{j : labels_a(j) = a and labels_b(j) = b}|.
ContingencyTable contingency(const std::vector<int>& labels_a,
                             const std::vector<int>& labels_b);

/// An optical cluster splits when >= 2 stacked clusters each hold at least
/// tau_split of its mass. Minority mode keeps the largest-overlap fragment
/// unflagged (ties retain the lowest stacked id). With strict_split and SAR
/// labels supplied, the fragments must not all share one SAR majority label.
std::vector<ChangeEvent> detect_splits(const std::vector<int>& p_opt,
                                       const std::vector<int>& p_st,
                                       const ChangeParams& params,
                                       const std::vector<int>* p_sar = nullptr);

/// A SAR cluster is a merge target when >= 2 stacked clusters each send at
/// least 1 - tau_merge of their mass into it. Flagging mirrors splits with
/// the largest contributor retained in minority mode. With strict_merge and
/// optical labels supplied, the contributors must not all share one optical
/// majority label (two facets of a single optical cluster are not a merge).
std::vector<ChangeEvent> detect_merges(const std::vector<int>& p_st,
                                       const std::vector<int>& p_sar,
                                       const ChangeParams& params,
                                       const std::vector<int>* p_opt = nullptr);

/// Union of all flagged pixel sets, optionally smoothed by one pass of a
/// 3x3 majority filter (border pixels use available neighbors, ties keep
/// the original value).
Mask change_map(const std::vector<ChangeEvent>& events, int width, int height,
                const ChangeParams& params);

}  // namespace hcd
