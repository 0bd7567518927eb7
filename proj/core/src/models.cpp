#include "hcd/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hcd {

double mahalanobis_sq(const Eigen::VectorXd& x, const GaussianCluster& c,
                      bool volume_normalized) {
  const auto n = c.mean.size();
  if (x.size() != n) throw std::invalid_argument("mahalanobis_sq: dimension mismatch");
  if (c.cov.rows() != n || c.cov.cols() != n)
    throw std::invalid_argument("mahalanobis_sq: covariance shape mismatch");

  Eigen::LLT<Eigen::MatrixXd> llt(c.cov);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("mahalanobis_sq: covariance not positive definite");

  const Eigen::VectorXd diff = x - c.mean;
  double d2 = diff.dot(llt.solve(diff));
  if (volume_normalized) {
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      logdet += 2.0 * std::log(llt.matrixL()(i, i));
    d2 *= std::exp(logdet / static_cast<double>(n));
  }
  return std::max(d2, 0.0);
}

double hellinger_gamma(double theta_a, double theta_b, double looks) {
  if (theta_a <= 0.0 || theta_b <= 0.0 || looks <= 0.0)
    throw std::invalid_argument("hellinger_gamma: parameters must be positive");
  // log BC, evaluated in log space so extreme scale ratios stay stable
  const double log_bc =
      looks * (std::log(2.0) + 0.5 * (std::log(theta_a) + std::log(theta_b)) -
               std::log(theta_a + theta_b));
  const double bc = std::exp(log_bc);
  return std::sqrt(std::max(0.0, 1.0 - bc));
}

double gamma_mean(const GammaCluster& c) {
  if (c.theta <= 0.0 || c.looks <= 0.0)
    throw std::invalid_argument("gamma_mean: parameters must be positive");
  return c.looks * c.theta;
}

Moments lognormal_moments(const LogNormalParams& p) {
  if (p.sigma <= 0.0) throw std::invalid_argument("lognormal_moments: sigma must be positive");
  Moments m;
  const double s2 = p.sigma * p.sigma;
  m.mean = std::exp(p.mu + 0.5 * s2);
  m.variance = m.mean * m.mean * (std::exp(s2) - 1.0);
  return m;
}

double default_log_delta(const Raster& sar) {
  float mx = 0.0f;
  for (float v : sar.data) mx = std::max(mx, v);
  return std::max(1e-10 * static_cast<double>(mx), 1e-30);
}

Raster log_stack(const Raster& optical, const Raster& sar, double delta) {
  if (optical.width() != sar.width() || optical.height() != sar.height())
    throw std::invalid_argument("log_stack: raster shapes differ");
  int sar_band = -1;
  for (int b = 0; b < sar.bands(); ++b)
    if (sar.header.band_roles[b] == BandRole::sar_intensity) {
      if (sar_band >= 0) throw std::invalid_argument("log_stack: multiple SAR bands");
      sar_band = b;
    }
  if (sar_band < 0) throw std::invalid_argument("log_stack: no sar_intensity band");
  if (delta <= 0.0) throw std::invalid_argument("log_stack: delta must be positive");

  Raster out;
  out.header.width = optical.width();
  out.header.height = optical.height();
  out.header.bands = optical.bands() + 1;
  out.header.band_roles = optical.header.band_roles;
  out.header.band_roles.push_back(BandRole::stacked_log);
  out.data.resize(static_cast<std::size_t>(out.width()) * out.height() * out.bands());

  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x) {
      for (int b = 0; b < optical.bands(); ++b)
        out.at(x, y, b) = optical.at(x, y, b);
      out.at(x, y, optical.bands()) = static_cast<float>(
          std::log(static_cast<double>(sar.at(x, y, sar_band)) + delta));
    }
  return out;
}

}  // namespace hcd
