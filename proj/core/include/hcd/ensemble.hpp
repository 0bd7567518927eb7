#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "hcd/fcm.hpp"

namespace hcd {

struct EnsembleParams {
  int runs = 20;
  int k_min = 2;
  int k_max = 7;
  std::uint64_t seed = 0;
  bool fuzzy_coassociation = false;  // sum_i mu_ip mu_iq instead of hard counts
};

/// Symmetric N x N co-association matrix in [0,1], unit diagonal,
/// stored as the packed strict upper triangle.
class CoAssociation {
 public:
  explicit CoAssociation(int n) : n_(n), upper_(tri_size(n), 0.0f) {}

  int size() const { return n_; }
  double at(int p, int q) const {
    if (p == q) return 1.0;
    return upper_[index(p, q)];
  }
  void set(int p, int q, double v) { upper_[index(p, q)] = static_cast<float>(v); }
  void add(int p, int q, double v) { upper_[index(p, q)] += static_cast<float>(v); }
  void scale(double s) {
    for (auto& v : upper_) v = static_cast<float>(v * s);
  }

 private:
  static std::size_t tri_size(int n) {
    return static_cast<std::size_t>(n) * (n - 1) / 2;
  }
  std::size_t index(int p, int q) const {
    if (p > q) std::swap(p, q);
    // strict upper triangle, row-major
    return static_cast<std::size_t>(p) * n_ - static_cast<std::size_t>(p) * (p + 1) / 2 +
           (q - p - 1);
  }
  int n_;
  std::vector<float> upper_;
};

struct ConsensusPartition {
  std::vector<int> labels;     // contiguous ids from 0, first-occurrence order
  int k = 0;                   // consensus cluster count
  std::vector<int> k_draws;    // the per-run k values used
  bool degenerate = false;     // all constituent runs hit degenerate input
};

/// Uniform draw over {k_min..k_max}, a pure function of (seed, run_index).
int draw_k(const EnsembleParams& p, int run_index);

/// k-range for the stacked view: (max(n_opt, n_sar), min(n_opt * n_sar, cap)),
/// with the lower bound raised to 2 when it is 1.
std::pair<int, int> stacked_k_bounds(int n_opt, int n_sar, int cap);

/// Hard evidence accumulation: entry (p,q) is the fraction of runs whose
/// labels agree on p and q.
CoAssociation accumulate(const std::vector<std::vector<int>>& run_labels);

/// Fuzzy alternative: mean over runs of sum_i mu_ip mu_iq.
CoAssociation accumulate_fuzzy(const std::vector<Eigen::MatrixXd>& partition_matrices);

/// Average-linkage agglomeration on dissimilarity 1 - C, cut at the largest
/// lifetime gap between successive merge heights (ties take the finer cut).
/// Zero-dissimilarity merges are always applied first.
ConsensusPartition consensus(const CoAssociation& c);

/// draw_k -> fcm_run (independently derived seed per run) -> accumulate ->
/// consensus. `base` supplies metric, fuzzifier and the other FCM knobs.
ConsensusPartition run_ensemble(const Eigen::MatrixXd& X, const EnsembleParams& p,
                                const FcmParams& base);

}  // namespace hcd
