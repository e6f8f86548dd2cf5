#pragma once

#include "faceprior/common.hpp"

#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace faceprior {

/// Gaussian measurement likelihood P(X_m | X) = N(X_m; X, sigma_l).
struct MeasurementModel {
  Matrix sigma_l;

  Index dim() const { return sigma_l.rows(); }
  static MeasurementModel isotropic(Index dim, double variance);
  /// Throws NumericalError unless symmetric (1e-10) and positive definite.
  void validate() const;
};

/// sigma_l = covariance of (measurement - truth) + ridge * I.
/// With `diagonal` set, off-diagonal entries are dropped.
MeasurementModel estimate_sigma_l(const std::vector<std::pair<Vector, Vector>>& pairs,
                                  double ridge, bool diagonal = false);

/// Local Gaussian summary of prior samples.
struct SampleStats {
  Vector mean;
  Matrix covariance;
  Matrix samples;  // one sample per column

  /// Sample mean and (N-1)-normalized covariance, plus
  /// ridge_scale * trace / dim on the diagonal.
  static SampleStats from_samples(const Matrix& samples, double ridge_scale = 1e-4);
};

/// X* = (sigma_l^-1 + sigma_p^-1)^-1 (sigma_p^-1 mu_p + sigma_l^-1 X_m),
/// evaluated as mu_p + sigma_p (sigma_p + sigma_l)^-1 (X_m - mu_p).
/// A ridge is added to sigma_p only when it is not positive definite.
Vector fuse_gaussian(const Vector& prior_mean, const Matrix& prior_cov,
                     const Vector& measurement, const MeasurementModel& mm);
Vector fuse_gaussian(const SampleStats& stats, const Vector& measurement,
                     const MeasurementModel& mm);

struct KdeConfig {
  /// Kernel covariance; Silverman-scaled sample variances when unset.
  std::optional<Matrix> bandwidth;
  int max_iterations = 100;
  double convergence_tol = 1e-8;

  void validate() const;
};

/// diag(sample variances) * (4 / (D (dim + 2)))^(2 / (dim + 4)), floored so
/// the result stays positive definite.
Matrix silverman_bandwidth(const Matrix& samples);

/// log P(X_m | X) + log sum_d N(X; X_d, sigma_k), without the constants
/// that do not depend on X.
double kde_log_posterior(const Vector& x, const Matrix& samples, const Vector& measurement,
                         const MeasurementModel& mm, const Matrix& bandwidth);

struct KdeResult {
  Vector estimate;
  int iterations = 0;
  bool converged = false;
  Matrix bandwidth;
  /// Objective at the start point and after every iteration.
  std::vector<double> objective;
};

/// Local maximizer of P(X_m | X) p_kde(X) by the EM fixed point
/// X <- (sigma_l^-1 + sigma_k^-1)^-1 (sigma_k^-1 sum_d g_d X_d + sigma_l^-1 X_m),
/// started at X_m. Samples are columns.
KdeResult fuse_kde(const Matrix& samples, const Vector& measurement, const MeasurementModel& mm,
                   const KdeConfig& cfg = {});

enum class FusionMethod { gaussian, kde };

std::string_view fusion_name(FusionMethod m);
FusionMethod parse_fusion(std::string_view name);

struct FusionOptions {
  FusionMethod method = FusionMethod::gaussian;
  MeasurementModel measurement;
  KdeConfig kde;
  double prior_ridge_scale = 1e-4;
};

/// Dispatches on options.method.
Vector fuse(const Matrix& samples, const Vector& measurement, const FusionOptions& options);

}  // namespace faceprior
