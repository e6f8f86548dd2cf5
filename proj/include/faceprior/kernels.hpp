#pragma once

#include "faceprior/common.hpp"

#include <cmath>
#include <functional>

namespace faceprior::kernels {

// Data-parallel inner loops. Every kernel has a plain serial reference and an
// OpenMP version; tests check that they agree, tools/bench_kernels times them.
//
// Work items are independent, so results never depend on the thread count.

enum class Backend { serial, openmp };

/// Backend used by the library's training, sampling and fusion paths.
Backend default_backend();
void set_default_backend(Backend backend);

/// sigmoid(bias + weights * inputs), one column per input vector.
/// weights: H x V, inputs: V x N, result: H x N.
Matrix sigmoid_affine(const Matrix& weights, const Vector& bias,
                      const Matrix& inputs, Backend backend = default_backend());

/// (a * b^T) / N with columns as samples. a: H x N, b: V x N, result: H x V.
Matrix mean_outer(const Matrix& a, const Matrix& b,
                  Backend backend = default_backend());

/// Calls body(i) for every i in [0, n).
void parallel_for(Index n, const std::function<void(Index)>& body,
                  Backend backend = default_backend());

/// Squared Mahalanobis distance of `point` to every column of `samples`
/// under the covariance factored in `chol`.
Vector mahalanobis_sq(const Eigen::LLT<Matrix>& chol, const Vector& point,
                      const Matrix& samples, Backend backend = default_backend());

/// Numerically safe logistic function.
inline double sigmoid(double a) {
  if (a >= 0.0) {
    return 1.0 / (1.0 + std::exp(-a));
  }
  const double e = std::exp(a);
  return e / (1.0 + e);
}

/// log(1 + exp(a)) without overflow.
inline double softplus(double a) {
  return a > 0.0 ? a + std::log1p(std::exp(-a)) : std::log1p(std::exp(a));
}

}  // namespace faceprior::kernels
