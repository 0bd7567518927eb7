#include "hcd/fcm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "hcd/models.hpp"

namespace hcd {

namespace {

void validate_params(const Eigen::MatrixXd& X, const FcmParams& p) {
  if (p.k < 2) throw std::invalid_argument("fcm: k must be >= 2");
  if (p.fuzzifier <= 1.0) throw std::invalid_argument("fcm: fuzzifier must be > 1");
  if (p.tol <= 0.0) throw std::invalid_argument("fcm: tol must be positive");
  if (p.max_iter < 1) throw std::invalid_argument("fcm: max_iter must be positive");
  if (X.rows() < p.k) throw std::invalid_argument("fcm: fewer points than clusters");
  if (X.cols() < 1) throw std::invalid_argument("fcm: empty feature dimension");
  if (p.metric == Metric::hellinger_gamma) {
    if (X.cols() != 1)
      throw std::invalid_argument("fcm: hellinger_gamma metric requires 1-D data");
    if (p.looks <= 0.0) throw std::invalid_argument("fcm: looks must be positive");
    if ((X.array() <= 0.0).any())
      throw std::invalid_argument("fcm: hellinger_gamma metric requires positive data");
  }
}

bool all_rows_identical(const Eigen::MatrixXd& X) {
  for (Eigen::Index j = 0; j < X.cols(); ++j)
    if (X.col(j).minCoeff() != X.col(j).maxCoeff()) return false;
  return true;
}

std::vector<int> seeded_init_indices(Eigen::Index n, int k, std::uint64_t seed) {
  // Partial Fisher-Yates over [0, n): k distinct indices.
  std::mt19937_64 eng(seed);
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<Eigen::Index> pick(i, n - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(eng))]);
  }
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

/// Inverse and volume-normalization factor of one regularized covariance,
/// escalating the jitter if the factorization fails numerically.
struct FactoredCov {
  Eigen::MatrixXd inv;
  double norm = 1.0;  // det^(1/d)
};

FactoredCov factor_cov(Eigen::MatrixXd cov) {
  const Eigen::Index d = cov.rows();
  double jitter = 0.0;
  for (int attempt = 0; attempt < 60; ++attempt) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() == Eigen::Success) {
      FactoredCov f;
      double logdet = 0.0;
      for (Eigen::Index i = 0; i < d; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
      f.norm = std::exp(logdet / static_cast<double>(d));
      f.inv = llt.solve(Eigen::MatrixXd::Identity(d, d));
      return f;
    }
    jitter = jitter == 0.0 ? 1e-12 * (1.0 + cov.trace() / d) : jitter * 10.0;
    cov += jitter * Eigen::MatrixXd::Identity(d, d);
  }
  throw std::runtime_error("fcm: covariance singular even after regularization");
}

}  // namespace

Eigen::MatrixXd update_memberships(const Eigen::MatrixXd& dist_sq, double fuzzifier) {
  const Eigen::Index k = dist_sq.rows(), n = dist_sq.cols();
  const double expo = 1.0 / (fuzzifier - 1.0);
  Eigen::MatrixXd U(k, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::Index zero_at = -1;
    double dmin = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < k; ++i) {
      const double d = dist_sq(i, j);
      if (d == 0.0 && zero_at < 0) zero_at = i;
      dmin = std::min(dmin, d);
    }
    if (zero_at >= 0) {
      U.col(j).setZero();
      U(zero_at, j) = 1.0;
      continue;
    }
    // Normalize by the column minimum so the powers stay in range.
    double total = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
      const double w = std::pow(dmin / dist_sq(i, j), expo);
      U(i, j) = w;
      total += w;
    }
    U.col(j) /= total;
  }
  return U;
}

FcmModel update_model(const Eigen::MatrixXd& X, const Eigen::MatrixXd& U,
                      const FcmParams& p) {
  const Eigen::Index k = U.rows(), n = U.cols(), d = X.cols();
  if (X.rows() != n) throw std::invalid_argument("update_model: shape mismatch");

  FcmModel model;
  model.centers.resize(k, d);
  const Eigen::MatrixXd Um = U.array().pow(p.fuzzifier);

  // Re-seed targets: points ordered by ascending maximum membership.
  std::vector<Eigen::Index> reseed_order;
  std::vector<char> reseeded(static_cast<std::size_t>(k), 0);
  std::size_t next_reseed = 0;
  auto reseed_point = [&]() -> Eigen::Index {
    if (reseed_order.empty()) {
      reseed_order.resize(static_cast<std::size_t>(n));
      std::iota(reseed_order.begin(), reseed_order.end(), Eigen::Index{0});
      std::stable_sort(reseed_order.begin(), reseed_order.end(),
                       [&](Eigen::Index a, Eigen::Index b) {
                         return U.col(a).maxCoeff() < U.col(b).maxCoeff();
                       });
    }
    return reseed_order[next_reseed++ % reseed_order.size()];
  };

  for (Eigen::Index i = 0; i < k; ++i) {
    const double total_plain = U.row(i).sum();
    if (total_plain < 1e-12) {
      model.centers.row(i) = X.row(reseed_point());
      reseeded[static_cast<std::size_t>(i)] = 1;
    } else {
      model.centers.row(i) = (Um.row(i) * X) / Um.row(i).sum();
    }
  }

  if (p.metric == Metric::adaptive_mahalanobis || p.metric == Metric::euclidean) {
    if (p.metric == Metric::adaptive_mahalanobis) {
      model.covariances.assign(static_cast<std::size_t>(k),
                               Eigen::MatrixXd::Zero(d, d));
      const Eigen::MatrixXd& W = p.cov_weight == CovarianceWeight::plain ? U : Um;
      for (Eigen::Index i = 0; i < k; ++i) {
        auto& cov = model.covariances[static_cast<std::size_t>(i)];
        if (reseeded[static_cast<std::size_t>(i)]) {
          cov = Eigen::MatrixXd::Identity(d, d);
          continue;
        }
        double wsum = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
          const Eigen::VectorXd diff = X.row(j).transpose() - model.centers.row(i).transpose();
          cov.noalias() += W(i, j) * diff * diff.transpose();
          wsum += W(i, j);
        }
        cov /= wsum;
        cov += (p.regularizer * cov.trace() / static_cast<double>(d) + 1e-12) *
               Eigen::MatrixXd::Identity(d, d);
        if (p.cov_condition_cap > 1.0) {
          // Clamp the eigenvalue spread so no cluster degenerates into a
          // needle that swallows distant points along its long axis.
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
          Eigen::VectorXd ev = es.eigenvalues();
          const double floor_ev = ev.maxCoeff() / p.cov_condition_cap;
          bool clamped = false;
          for (Eigen::Index e = 0; e < d; ++e)
            if (ev(e) < floor_ev) {
              ev(e) = floor_ev;
              clamped = true;
            }
          if (clamped)
            cov = es.eigenvectors() * ev.asDiagonal() *
                  es.eigenvectors().transpose();
        }
      }
    }
  } else {
    model.thetas.resize(static_cast<std::size_t>(k));
    for (Eigen::Index i = 0; i < k; ++i)
      model.thetas[static_cast<std::size_t>(i)] =
          std::max(model.centers(i, 0) / p.looks, 1e-300);
  }
  return model;
}

Eigen::MatrixXd distance_matrix(const Eigen::MatrixXd& X, const FcmModel& model,
                                const FcmParams& p) {
  const Eigen::Index k = model.centers.rows(), n = X.rows(), d = X.cols();
  Eigen::MatrixXd D(k, n);
  switch (p.metric) {
    case Metric::euclidean: {
      for (Eigen::Index i = 0; i < k; ++i)
        D.row(i) = (X.rowwise() - model.centers.row(i)).rowwise().squaredNorm();
      break;
    }
    case Metric::adaptive_mahalanobis: {
      if (model.covariances.size() != static_cast<std::size_t>(k))
        throw std::invalid_argument("distance_matrix: missing covariances");
      Eigen::VectorXd diff(d);
      for (Eigen::Index i = 0; i < k; ++i) {
        const FactoredCov f = factor_cov(model.covariances[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < n; ++j) {
          diff = X.row(j).transpose() - model.centers.row(i).transpose();
          D(i, j) = std::max(0.0, f.norm * diff.dot(f.inv * diff));
        }
      }
      break;
    }
    case Metric::hellinger_gamma: {
      if (model.thetas.size() != static_cast<std::size_t>(k))
        throw std::invalid_argument("distance_matrix: missing gamma scales");
      for (Eigen::Index i = 0; i < k; ++i) {
        const double theta_i = model.thetas[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < n; ++j) {
          // Pixel embedded as Gamma(L, x/L) so both sides share the mean scale.
          const double h = hellinger_gamma(X(j, 0) / p.looks, theta_i, p.looks);
          D(i, j) = h * h;
        }
      }
      break;
    }
  }
  return D;
}

double fcm_objective(const Eigen::MatrixXd& X, const Eigen::MatrixXd& U,
                     const FcmModel& model, const FcmParams& p) {
  const Eigen::MatrixXd D = distance_matrix(X, model, p);
  return (U.array().pow(p.fuzzifier) * D.array()).sum();
}

FcmResult fcm_run(const Eigen::MatrixXd& X, const FcmParams& p) {
  validate_params(X, p);
  const Eigen::Index n = X.rows(), d = X.cols();
  FcmResult res;

  if (all_rows_identical(X)) {
    res.degenerate = true;
    res.U = Eigen::MatrixXd::Constant(p.k, n, 1.0 / p.k);
    res.model.centers = X.row(0).replicate(p.k, 1);
    if (p.metric == Metric::adaptive_mahalanobis)
      res.model.covariances.assign(static_cast<std::size_t>(p.k),
                                   Eigen::MatrixXd::Identity(d, d));
    if (p.metric == Metric::hellinger_gamma)
      res.model.thetas.assign(static_cast<std::size_t>(p.k),
                              std::max(X(0, 0) / p.looks, 1e-300));
    res.labels.assign(static_cast<std::size_t>(n), 0);
    res.objective_trace.push_back(0.0);
    return res;
  }

  std::vector<int> init = p.init_indices;
  if (init.empty()) {
    init = seeded_init_indices(n, p.k, p.seed);
  } else if (static_cast<int>(init.size()) != p.k) {
    throw std::invalid_argument("fcm: init_indices size must equal k");
  }

  FcmModel model;
  model.centers.resize(p.k, d);
  for (int i = 0; i < p.k; ++i) model.centers.row(i) = X.row(init[static_cast<std::size_t>(i)]);
  if (p.metric == Metric::adaptive_mahalanobis)
    model.covariances.assign(static_cast<std::size_t>(p.k),
                             Eigen::MatrixXd::Identity(d, d));
  if (p.metric == Metric::hellinger_gamma) {
    model.thetas.resize(static_cast<std::size_t>(p.k));
    for (int i = 0; i < p.k; ++i)
      model.thetas[static_cast<std::size_t>(i)] =
          std::max(model.centers(i, 0) / p.looks, 1e-300);
  }

  Eigen::MatrixXd D = distance_matrix(X, model, p);
  Eigen::MatrixXd U;
  for (int iter = 0; iter < p.max_iter; ++iter) {
    Eigen::MatrixXd U_new = update_memberships(D, p.fuzzifier);
    FcmModel model_new = update_model(X, U_new, p);
    Eigen::MatrixXd D_new = distance_matrix(X, model_new, p);
    const double obj = (U_new.array().pow(p.fuzzifier) * D_new.array()).sum();

    // Stop rather than accept a step that no longer improves the objective;
    // the model refresh is not an exact minimizer for every metric.
    if (!res.objective_trace.empty() &&
        obj > res.objective_trace.back() +
                  1e-12 * (1.0 + std::abs(res.objective_trace.back())))
      break;

    const double delta =
        U.size() == 0 ? std::numeric_limits<double>::infinity()
                      : (U_new - U).cwiseAbs().maxCoeff();
    U = std::move(U_new);
    model = std::move(model_new);
    D = std::move(D_new);
    res.objective_trace.push_back(obj);
    res.iterations = iter + 1;
    if (p.iteration_hook) p.iteration_hook(iter, U);
    if (delta < p.tol) break;
  }

  res.U = std::move(U);
  res.model = std::move(model);
  res.labels.resize(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < p.k; ++i)
      if (res.U(i, j) > res.U(best, j)) best = i;
    res.labels[static_cast<std::size_t>(j)] = static_cast<int>(best);
  }
  return res;
}

}  // namespace hcd
