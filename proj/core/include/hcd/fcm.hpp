#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

namespace hcd {

enum class Metric { euclidean, adaptive_mahalanobis, hellinger_gamma };

/// Weighting of the fuzzy covariance update. `plain` uses the raw
/// memberships mu_ij; `fuzzified` uses mu_ij^m.
enum class CovarianceWeight { plain, fuzzified };

struct FcmParams {
  int k = 2;
  double fuzzifier = 2.0;  // m > 1
  int max_iter = 100;
  double tol = 1e-5;
  std::uint64_t seed = 0;
  Metric metric = Metric::euclidean;
  double regularizer = 1e-6;  // epsilon in the covariance floor
  /// > 1 caps each covariance's eigenvalue ratio (max/min); 0 disables.
  double cov_condition_cap = 0.0;
  double looks = 1.0;         // hellinger_gamma metric only
  CovarianceWeight cov_weight = CovarianceWeight::plain;
  std::vector<int> init_indices;  // empty: seeded sampling without replacement
  /// Observer invoked with (iteration, U) after every accepted update.
  std::function<void(int, const Eigen::MatrixXd&)> iteration_hook;
};

/// Cluster model for one iteration: centers always, covariances for the
/// Mahalanobis metrics, gamma scales for the Hellinger metric.
struct FcmModel {
  Eigen::MatrixXd centers;  // k x d
  std::vector<Eigen::MatrixXd> covariances;
  std::vector<double> thetas;
};

struct FcmResult {
  Eigen::MatrixXd U;  // k x N, column-stochastic
  FcmModel model;
  std::vector<int> labels;  // argmax per column, ties to lowest index
  std::vector<double> objective_trace;
  bool degenerate = false;  // all-identical input
  int iterations = 0;
};

/// mu_ij = 1 / sum_l (D_ij / D_lj)^(1/(m-1)); exact-zero distances give
/// full membership to the nearest such cluster (lowest index).
Eigen::MatrixXd update_memberships(const Eigen::MatrixXd& dist_sq, double fuzzifier);

/// Membership-weighted model refresh: centers with mu^m weights, fuzzy
/// covariances with the configured weight mode plus the regularizing floor
/// eps * (tr/d) * I + 1e-12 * I, gamma scales as weighted mean / looks.
/// A cluster whose total membership collapses below 1e-12 is re-seeded at
/// the point with the lowest maximum membership.
FcmModel update_model(const Eigen::MatrixXd& X, const Eigen::MatrixXd& U,
                      const FcmParams& p);

/// k x N matrix of squared distances under the active metric.
/// Mahalanobis uses cached factorizations of the model covariances.
Eigen::MatrixXd distance_matrix(const Eigen::MatrixXd& X, const FcmModel& model,
                                const FcmParams& p);

/// sum_ij mu_ij^m d^2(x_j, cluster i) under the active metric.
double fcm_objective(const Eigen::MatrixXd& X, const Eigen::MatrixXd& U,
                     const FcmModel& model, const FcmParams& p);

/// One fuzzy C-means run. Deterministic given (X, params). Stops when the
/// max column-wise membership change drops below tol, at max_iter, or when
/// an alternating step no longer decreases the objective (the last model
/// that improved it is kept, so the recorded trace is non-increasing).
FcmResult fcm_run(const Eigen::MatrixXd& X, const FcmParams& p);

}  // namespace hcd
