#pragma once

// Test-only oracles, independent of the library's implementation paths.

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <random>
#include <utility>
#include <vector>

namespace testutil {

/// Bhattacharyya coefficient of Gamma(L, theta_a) and Gamma(L, theta_b) by
/// composite Gauss-Legendre quadrature of integral sqrt(f_a f_b) dx.
inline double bhattacharyya_gamma_quadrature(double theta_a, double theta_b,
                                             double looks) {
  // 8-point Gauss-Legendre nodes/weights on [-1, 1].
  static const double nodes[8] = {-0.9602898564975363, -0.7966664774136267,
                                  -0.5255324099163290, -0.1834346424956498,
                                  0.1834346424956498,  0.5255324099163290,
                                  0.7966664774136267,  0.9602898564975363};
  static const double weights[8] = {0.1012285362903763, 0.2223810344533745,
                                    0.3137066458778873, 0.3626837833783620,
                                    0.3626837833783620, 0.3137066458778873,
                                    0.2223810344533745, 0.1012285362903763};
  const double lga = std::lgamma(looks);
  auto log_pdf = [&](double x, double theta) {
    return (looks - 1.0) * std::log(x) - looks * std::log(theta) - x / theta - lga;
  };
  // Integrate to where both exponential tails are negligible.
  const double upper = (60.0 + 10.0 * looks) * std::max(theta_a, theta_b);
  const int segments = 4000;
  const double hseg = upper / segments;
  double acc = 0.0;
  for (int s = 0; s < segments; ++s) {
    const double a = s * hseg, b = a + hseg;
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int i = 0; i < 8; ++i) {
      const double x = mid + half * nodes[i];
      if (x <= 0.0) continue;
      acc += weights[i] * half *
             std::exp(0.5 * (log_pdf(x, theta_a) + log_pdf(x, theta_b)));
    }
  }
  return acc;
}

/// Adjusted Rand index between two labelings.
inline double adjusted_rand_index(const std::vector<int>& a,
                                  const std::vector<int>& b) {
  const std::size_t n = a.size();
  std::map<std::pair<int, int>, long long> cells;
  std::map<int, long long> arow, bcol;
  for (std::size_t i = 0; i < n; ++i) {
    ++cells[{a[i], b[i]}];
    ++arow[a[i]];
    ++bcol[b[i]];
  }
  auto c2 = [](long long m) { return 0.5 * m * (m - 1); };
  double sum_cells = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [k, v] : cells) sum_cells += c2(v);
  for (const auto& [k, v] : arow) sum_a += c2(v);
  for (const auto& [k, v] : bcol) sum_b += c2(v);
  const double expected = sum_a * sum_b / c2(static_cast<long long>(n));
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;
  return (sum_cells - expected) / (max_index - expected);
}

/// Gaussian blob generator with planted labels.
inline std::pair<Eigen::MatrixXd, std::vector<int>> gaussian_blobs(
    const std::vector<Eigen::Vector2d>& centers, int per_blob, double sigma,
    std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> norm(0.0, sigma);
  const int k = static_cast<int>(centers.size());
  Eigen::MatrixXd X(static_cast<Eigen::Index>(k) * per_blob, 2);
  std::vector<int> labels;
  Eigen::Index row = 0;
  for (int c = 0; c < k; ++c)
    for (int j = 0; j < per_blob; ++j, ++row) {
      X(row, 0) = centers[static_cast<std::size_t>(c)].x() + norm(eng);
      X(row, 1) = centers[static_cast<std::size_t>(c)].y() + norm(eng);
      labels.push_back(c);
    }
  return {X, labels};
}

}  // namespace testutil
