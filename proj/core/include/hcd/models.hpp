#pragma once

#include <Eigen/Dense>

#include "hcd/raster.hpp"

namespace hcd {

/// Multivariate Gaussian cluster parameters.
struct GaussianCluster {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Gamma cluster: scale theta with the number of looks shared by all
/// clusters of one SAR image. Mean is looks * theta.
struct GammaCluster {
  double theta = 1.0;
  double looks = 1.0;
};

struct LogNormalParams {
  double mu = 0.0;
  double sigma = 1.0;
};

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

/// (x-mu)^T Sigma^-1 (x-mu); with volume_normalized, multiplied by
/// det(Sigma)^(1/n) (Gustafson-Kessel norm). Throws on dimension mismatch
/// or a covariance that is not positive definite.
double mahalanobis_sq(const Eigen::VectorXd& x, const GaussianCluster& c,
                      bool volume_normalized);

/// Hellinger distance between Gamma(looks, theta_a) and Gamma(looks, theta_b):
/// sqrt(1 - BC) with BC = (2 sqrt(theta_a theta_b) / (theta_a + theta_b))^looks.
double hellinger_gamma(double theta_a, double theta_b, double looks);

double gamma_mean(const GammaCluster& c);

Moments lognormal_moments(const LogNormalParams& p);

/// Per-pixel concatenation: optical bands followed by log(sar + delta).
/// The output band roles are the optical roles plus one stacked_log band.
Raster log_stack(const Raster& optical, const Raster& sar, double delta);

/// Default log-offset: 1e-10 * max SAR intensity, floored at 1e-30.
double default_log_delta(const Raster& sar);

}  // namespace hcd
