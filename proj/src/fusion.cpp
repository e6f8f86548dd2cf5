#include "faceprior/fusion.hpp"

#include "faceprior/kernels.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace faceprior {

MeasurementModel MeasurementModel::isotropic(Index dim, double variance) {
  return MeasurementModel{variance * Matrix::Identity(dim, dim)};
}

void MeasurementModel::validate() const {
  if (sigma_l.rows() != sigma_l.cols() || sigma_l.rows() == 0) {
    throw DimensionError("sigma_l must be a non-empty square matrix");
  }
  if (!sigma_l.allFinite()) throw NumericalError("sigma_l has non-finite entries");
  if ((sigma_l - sigma_l.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw NumericalError("sigma_l is not symmetric");
  }
  Eigen::LLT<Matrix> llt(sigma_l);
  if (llt.info() != Eigen::Success) throw NumericalError("sigma_l is not positive definite");
}

MeasurementModel estimate_sigma_l(const std::vector<std::pair<Vector, Vector>>& pairs,
                                  double ridge, bool diagonal) {
  if (pairs.size() < 2) {
    throw ConfigError("estimate_sigma_l needs at least 2 (truth, measurement) pairs");
  }
  if (!(ridge >= 0.0)) throw ConfigError("estimate_sigma_l: ridge must be >= 0");
  const Index dim = pairs.front().first.size();
  Matrix residuals(dim, static_cast<Index>(pairs.size()));
  for (std::size_t n = 0; n < pairs.size(); ++n) {
    require_size(pairs[n].first.size(), dim, "estimate_sigma_l truth");
    require_size(pairs[n].second.size(), dim, "estimate_sigma_l measurement");
    residuals.col(static_cast<Index>(n)) = pairs[n].second - pairs[n].first;
  }
  const Vector mean = residuals.rowwise().mean();
  const Matrix centred = residuals.colwise() - mean;
  Matrix cov = centred * centred.transpose() / static_cast<double>(pairs.size() - 1);
  cov = (0.5 * (cov + cov.transpose())).eval();
  if (diagonal) cov = Matrix(cov.diagonal().asDiagonal());
  cov.diagonal().array() += ridge;
  return MeasurementModel{cov};
}

SampleStats SampleStats::from_samples(const Matrix& samples, double ridge_scale) {
  if (samples.cols() < 1) throw ConfigError("SampleStats needs at least one sample");
  SampleStats s;
  s.samples = samples;
  s.mean = samples.rowwise().mean();
  const Index dim = samples.rows();
  if (samples.cols() > 1) {
    const Matrix centred = samples.colwise() - s.mean;
    s.covariance = centred * centred.transpose() / static_cast<double>(samples.cols() - 1);
    s.covariance = (0.5 * (s.covariance + s.covariance.transpose())).eval();
  } else {
    s.covariance = Matrix::Zero(dim, dim);
  }
  const double ridge = ridge_scale * s.covariance.trace() / static_cast<double>(dim);
  s.covariance.diagonal().array() += ridge;
  return s;
}

Vector fuse_gaussian(const Vector& prior_mean, const Matrix& prior_cov,
                     const Vector& measurement, const MeasurementModel& mm) {
  const Index dim = prior_mean.size();
  require_size(measurement.size(), dim, "fuse_gaussian measurement");
  require_size(prior_cov.rows(), dim, "fuse_gaussian prior covariance");
  require_size(prior_cov.cols(), dim, "fuse_gaussian prior covariance");
  require_size(mm.dim(), dim, "fuse_gaussian sigma_l");
  mm.validate();

  Matrix cov_p = prior_cov;
  if (Eigen::LLT<Matrix>(cov_p).info() != Eigen::Success) {
    const double scale = std::max(cov_p.trace() / static_cast<double>(dim), 1e-12);
    cov_p.diagonal().array() += 1e-4 * scale;
    if (Eigen::LLT<Matrix>(cov_p).info() != Eigen::Success) {
      throw NumericalError("fuse_gaussian: prior covariance not positive definite after ridge");
    }
  }
  const Eigen::LDLT<Matrix> total(cov_p + mm.sigma_l);
  if (total.info() != Eigen::Success) {
    throw NumericalError("fuse_gaussian: sigma_p + sigma_l factorization failed");
  }
  return prior_mean + cov_p * total.solve(measurement - prior_mean);
}

Vector fuse_gaussian(const SampleStats& stats, const Vector& measurement,
                     const MeasurementModel& mm) {
  return fuse_gaussian(stats.mean, stats.covariance, measurement, mm);
}

void KdeConfig::validate() const {
  if (max_iterations < 1) throw ConfigError("kde max_iterations must be >= 1");
  if (!(convergence_tol > 0.0)) throw ConfigError("kde convergence_tol must be > 0");
}

Matrix silverman_bandwidth(const Matrix& samples) {
  const Index dim = samples.rows();
  const auto count = static_cast<double>(samples.cols());
  Vector var = Vector::Zero(dim);
  if (samples.cols() > 1) {
    const Vector mean = samples.rowwise().mean();
    var = (samples.colwise() - mean).rowwise().squaredNorm() / (count - 1.0);
  }
  const double d = static_cast<double>(dim);
  const double factor = std::pow(4.0 / (count * (d + 2.0)), 2.0 / (d + 4.0));
  const double floor = 1e-12 + 1e-8 * var.mean();
  return Matrix((factor * var).cwiseMax(floor).asDiagonal());
}

namespace {

double log_sum_exp_neg_half(const Vector& q) {
  const double top = (-0.5 * q).maxCoeff();
  return top + std::log((-0.5 * q.array() - top).exp().sum());
}

}  // namespace

double kde_log_posterior(const Vector& x, const Matrix& samples, const Vector& measurement,
                         const MeasurementModel& mm, const Matrix& bandwidth) {
  const Eigen::LLT<Matrix> kernel(bandwidth);
  const Eigen::LLT<Matrix> like(mm.sigma_l);
  if (kernel.info() != Eigen::Success || like.info() != Eigen::Success) {
    throw NumericalError("kde_log_posterior: covariance not positive definite");
  }
  const Vector r = x - measurement;
  const double log_like = -0.5 * r.dot(like.solve(r));
  return log_like + log_sum_exp_neg_half(kernels::mahalanobis_sq(kernel, x, samples));
}

KdeResult fuse_kde(const Matrix& samples, const Vector& measurement, const MeasurementModel& mm,
                   const KdeConfig& cfg) {
  cfg.validate();
  if (samples.cols() < 1) throw ConfigError("fuse_kde: empty sample list");
  const Index dim = measurement.size();
  require_size(samples.rows(), dim, "fuse_kde samples");
  require_size(mm.dim(), dim, "fuse_kde sigma_l");
  mm.validate();

  KdeResult result;
  result.bandwidth = cfg.bandwidth ? *cfg.bandwidth : silverman_bandwidth(samples);
  require_size(result.bandwidth.rows(), dim, "fuse_kde bandwidth");
  const Eigen::LLT<Matrix> kernel(result.bandwidth);
  if (kernel.info() != Eigen::Success) {
    throw NumericalError("fuse_kde: bandwidth not positive definite");
  }
  const Eigen::LLT<Matrix> like(mm.sigma_l);
  const Eigen::LDLT<Matrix> total(result.bandwidth + mm.sigma_l);
  // X_new = m + gain (X_m - m) with gain = sigma_k (sigma_k + sigma_l)^-1.
  const Matrix gain = total.solve(result.bandwidth).transpose();

  auto objective = [&](const Vector& x, const Vector& q) {
    const Vector r = x - measurement;
    return -0.5 * r.dot(like.solve(r)) + log_sum_exp_neg_half(q);
  };

  Vector x = measurement;
  Vector q = kernels::mahalanobis_sq(kernel, x, samples);
  result.objective.push_back(objective(x, q));
  for (int it = 0; it < cfg.max_iterations; ++it) {
    const double top = (-0.5 * q).maxCoeff();
    Vector weights = (-0.5 * q.array() - top).exp();
    weights /= weights.sum();
    const Vector centre = samples * weights;
    const Vector next = centre + gain * (measurement - centre);
    const double step = (next - x).norm();
    x = next;
    q = kernels::mahalanobis_sq(kernel, x, samples);
    result.objective.push_back(objective(x, q));
    result.iterations = it + 1;
    if (step < cfg.convergence_tol) {
      result.converged = true;
      break;
    }
  }
  result.estimate = x;
  return result;
}

std::string_view fusion_name(FusionMethod m) {
  return m == FusionMethod::kde ? "kde" : "gaussian";
}

FusionMethod parse_fusion(std::string_view name) {
  if (name == "gaussian") return FusionMethod::gaussian;
  if (name == "kde") return FusionMethod::kde;
  throw ConfigError("unknown fusion method '" + std::string(name) + "' (expected gaussian|kde)");
}

Vector fuse(const Matrix& samples, const Vector& measurement, const FusionOptions& options) {
  if (options.method == FusionMethod::kde) {
    return fuse_kde(samples, measurement, options.measurement, options.kde).estimate;
  }
  return fuse_gaussian(SampleStats::from_samples(samples, options.prior_ridge_scale), measurement,
                       options.measurement);
}

}  // namespace faceprior
