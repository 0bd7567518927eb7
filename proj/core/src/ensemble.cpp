#include "hcd/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "hcd/rng.hpp"

namespace hcd {

namespace {

constexpr std::uint64_t kDrawStream = 1;
constexpr std::uint64_t kRunStream = 2;

struct Merge {
  int a = 0;
  int b = 0;
  double height = 0.0;
};

/// Average-linkage agglomeration by the nearest-neighbor chain algorithm.
/// Returns the n-1 merges with their heights; cluster indices are slot ids
/// (a merge reuses min(a, b) as the combined cluster's slot).
std::vector<Merge> average_linkage(const CoAssociation& c) {
  const int n = c.size();
  std::vector<Merge> merges;
  if (n <= 1) return merges;

  std::vector<float> dist(static_cast<std::size_t>(n) * n);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      dist[static_cast<std::size_t>(p) * n + q] =
          p == q ? 0.0f : static_cast<float>(1.0 - c.at(p, q));

  std::vector<char> active(static_cast<std::size_t>(n), 1);
  std::vector<double> sizes(static_cast<std::size_t>(n), 1.0);
  std::vector<int> chain;
  chain.reserve(static_cast<std::size_t>(n));
  int remaining = n;
  int lowest_active = 0;

  auto d = [&](int p, int q) -> float& {
    return dist[static_cast<std::size_t>(p) * n + q];
  };

  while (remaining > 1) {
    if (chain.empty()) {
      while (!active[static_cast<std::size_t>(lowest_active)]) ++lowest_active;
      chain.push_back(lowest_active);
    }
    const int top = chain.back();
    int nn = -1;
    float best = std::numeric_limits<float>::infinity();
    for (int q = 0; q < n; ++q) {
      if (q == top || !active[static_cast<std::size_t>(q)]) continue;
      const float dq = d(top, q);
      if (dq < best) {
        best = dq;
        nn = q;
      }
    }
    if (chain.size() >= 2 && nn == chain[chain.size() - 2]) {
      chain.pop_back();
      chain.pop_back();
      const int a = std::min(top, nn), b = std::max(top, nn);
      merges.push_back({a, b, static_cast<double>(best)});
      const double sa = sizes[static_cast<std::size_t>(a)];
      const double sb = sizes[static_cast<std::size_t>(b)];
      for (int q = 0; q < n; ++q) {
        if (!active[static_cast<std::size_t>(q)] || q == a || q == b) continue;
        const float dn = static_cast<float>((sa * d(a, q) + sb * d(b, q)) / (sa + sb));
        d(a, q) = dn;
        d(q, a) = dn;
      }
      sizes[static_cast<std::size_t>(a)] = sa + sb;
      active[static_cast<std::size_t>(b)] = 0;
      --remaining;
    } else {
      chain.push_back(nn);
    }
  }
  return merges;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(int a, int b) { parent[static_cast<std::size_t>(find(b))] = find(a); }
};

}  // namespace

int draw_k(const EnsembleParams& p, int run_index) {
  if (p.k_min < 2 || p.k_min > p.k_max)
    throw std::invalid_argument("draw_k: need 2 <= k_min <= k_max");
  const std::uint64_t h =
      mix64(mix64(p.seed, kDrawStream), static_cast<std::uint64_t>(run_index));
  return uniform_from_hash(h, p.k_min, p.k_max);
}

std::pair<int, int> stacked_k_bounds(int n_opt, int n_sar, int cap) {
  if (n_opt < 1 || n_sar < 1)
    throw std::invalid_argument("stacked_k_bounds: cluster counts must be >= 1");
  int lo = std::max(n_opt, n_sar);
  int hi = std::min(n_opt * n_sar, cap);
  if (lo < 2) lo = 2;
  if (hi < lo) hi = lo;
  return {lo, hi};
}

CoAssociation accumulate(const std::vector<std::vector<int>>& run_labels) {
  if (run_labels.empty()) throw std::invalid_argument("accumulate: no runs");
  const std::size_t n = run_labels.front().size();
  for (const auto& l : run_labels)
    if (l.size() != n) throw std::invalid_argument("accumulate: label length mismatch");

  CoAssociation c(static_cast<int>(n));
  for (const auto& labels : run_labels) {
    // Bucket by label so each run costs sum of squared cluster sizes,
    // not N^2, in well-clustered data.
    int kmax = 0;
    for (int l : labels) kmax = std::max(kmax, l + 1);
    std::vector<std::vector<int>> buckets(static_cast<std::size_t>(kmax));
    for (std::size_t j = 0; j < n; ++j)
      buckets[static_cast<std::size_t>(labels[j])].push_back(static_cast<int>(j));
    for (const auto& bucket : buckets)
      for (std::size_t a = 0; a < bucket.size(); ++a)
        for (std::size_t b = a + 1; b < bucket.size(); ++b)
          c.add(bucket[a], bucket[b], 1.0);
  }
  c.scale(1.0 / static_cast<double>(run_labels.size()));
  return c;
}

CoAssociation accumulate_fuzzy(const std::vector<Eigen::MatrixXd>& partition_matrices) {
  if (partition_matrices.empty()) throw std::invalid_argument("accumulate_fuzzy: no runs");
  const Eigen::Index n = partition_matrices.front().cols();
  CoAssociation c(static_cast<int>(n));
  for (const auto& U : partition_matrices) {
    if (U.cols() != n) throw std::invalid_argument("accumulate_fuzzy: size mismatch");
    const Eigen::MatrixXd G = U.transpose() * U;  // n x n co-membership
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q)
        c.add(static_cast<int>(p), static_cast<int>(q), G(p, q));
  }
  c.scale(1.0 / static_cast<double>(partition_matrices.size()));
  return c;
}

ConsensusPartition consensus(const CoAssociation& c) {
  const int n = c.size();
  ConsensusPartition part;
  if (n == 0) throw std::invalid_argument("consensus: empty co-association");
  if (n == 1) {
    part.labels = {0};
    part.k = 1;
    return part;
  }

  std::vector<Merge> merges = average_linkage(c);
  std::stable_sort(merges.begin(), merges.end(),
                   [](const Merge& a, const Merge& b) { return a.height < b.height; });

  // Pairs that always co-cluster merge unconditionally.
  constexpr double kZero = 1e-9;
  std::size_t zero_end = 0;
  while (zero_end < merges.size() && merges[zero_end].height <= kZero) ++zero_end;

  std::size_t best_t = 0;
  double best_lifetime = -1.0;
  for (std::size_t t = 0; t + zero_end < merges.size(); ++t) {
    const double lo = t == 0 ? 0.0 : merges[zero_end + t - 1].height;
    const double lifetime = merges[zero_end + t].height - lo;
    if (lifetime > best_lifetime) {
      best_lifetime = lifetime;
      best_t = t;
    }
  }

  UnionFind uf(n);
  for (std::size_t i = 0; i < zero_end + best_t; ++i) uf.unite(merges[i].a, merges[i].b);

  part.labels.resize(static_cast<std::size_t>(n));
  std::vector<int> id_of_root(static_cast<std::size_t>(n), -1);
  int next = 0;
  for (int j = 0; j < n; ++j) {
    const int r = uf.find(j);
    if (id_of_root[static_cast<std::size_t>(r)] < 0) id_of_root[static_cast<std::size_t>(r)] = next++;
    part.labels[static_cast<std::size_t>(j)] = id_of_root[static_cast<std::size_t>(r)];
  }
  part.k = next;
  return part;
}

ConsensusPartition run_ensemble(const Eigen::MatrixXd& X, const EnsembleParams& p,
                                const FcmParams& base) {
  if (p.runs < 1) throw std::invalid_argument("run_ensemble: runs must be >= 1");
  if (X.rows() < p.k_max)
    throw std::invalid_argument("run_ensemble: fewer points than k_max");

  std::vector<std::vector<int>> hard_labels;
  std::vector<Eigen::MatrixXd> partition_matrices;
  std::vector<int> k_draws;
  int degenerate_runs = 0;

  for (int r = 0; r < p.runs; ++r) {
    FcmParams q = base;
    q.k = draw_k(p, r);
    q.seed = mix64(mix64(p.seed, kRunStream), static_cast<std::uint64_t>(r));
    q.init_indices.clear();
    FcmResult res = fcm_run(X, q);
    if (res.degenerate) ++degenerate_runs;
    k_draws.push_back(q.k);
    if (p.fuzzy_coassociation)
      partition_matrices.push_back(std::move(res.U));
    else
      hard_labels.push_back(std::move(res.labels));
  }

  const CoAssociation c = p.fuzzy_coassociation ? accumulate_fuzzy(partition_matrices)
                                                : accumulate(hard_labels);
  ConsensusPartition part = consensus(c);
  part.k_draws = std::move(k_draws);
  part.degenerate = degenerate_runs == p.runs;
  return part;
}

}  // namespace hcd
