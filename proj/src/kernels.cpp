#include "faceprior/kernels.hpp"

#include <atomic>

namespace faceprior::kernels {

namespace {

std::atomic<Backend> g_backend{Backend::openmp};

Matrix sigmoid_affine_serial(const Matrix& w, const Vector& c, const Matrix& x) {
  const Index hidden = w.rows();
  const Index visible = w.cols();
  Matrix out(hidden, x.cols());
  for (Index n = 0; n < x.cols(); ++n) {
    for (Index j = 0; j < hidden; ++j) {
      double a = c(j);
      for (Index i = 0; i < visible; ++i) {
        a += w(j, i) * x(i, n);
      }
      out(j, n) = sigmoid(a);
    }
  }
  return out;
}

Matrix sigmoid_affine_omp(const Matrix& w, const Vector& c, const Matrix& x) {
  Matrix out(w.rows(), x.cols());
  const Index n_cols = x.cols();
#pragma omp parallel for schedule(static)
  for (Index n = 0; n < n_cols; ++n) {
    Vector a = c + w * x.col(n);
    out.col(n) = a.unaryExpr([](double v) { return sigmoid(v); });
  }
  return out;
}

Matrix mean_outer_serial(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows(), b.rows());
  for (Index n = 0; n < a.cols(); ++n) {
    for (Index j = 0; j < a.rows(); ++j) {
      for (Index i = 0; i < b.rows(); ++i) {
        out(j, i) += a(j, n) * b(i, n);
      }
    }
  }
  return out / static_cast<double>(a.cols());
}

Matrix mean_outer_omp(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.rows());
  const Index rows = a.rows();
  const double inv_n = 1.0 / static_cast<double>(a.cols());
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < rows; ++j) {
    out.row(j) = (b * a.row(j).transpose()).transpose() * inv_n;
  }
  return out;
}

}  // namespace

Backend default_backend() { return g_backend.load(std::memory_order_relaxed); }

void set_default_backend(Backend backend) {
  g_backend.store(backend, std::memory_order_relaxed);
}

Matrix sigmoid_affine(const Matrix& weights, const Vector& bias,
                      const Matrix& inputs, Backend backend) {
  require_size(bias.size(), weights.rows(), "sigmoid_affine bias");
  require_size(inputs.rows(), weights.cols(), "sigmoid_affine inputs");
  return backend == Backend::openmp ? sigmoid_affine_omp(weights, bias, inputs)
                                    : sigmoid_affine_serial(weights, bias, inputs);
}

Matrix mean_outer(const Matrix& a, const Matrix& b, Backend backend) {
  require_size(b.cols(), a.cols(), "mean_outer sample count");
  if (a.cols() == 0) {
    throw ConfigError("mean_outer: no samples");
  }
  return backend == Backend::openmp ? mean_outer_omp(a, b) : mean_outer_serial(a, b);
}

void parallel_for(Index n, const std::function<void(Index)>& body, Backend backend) {
  if (backend == Backend::serial) {
    for (Index i = 0; i < n; ++i) {
      body(i);
    }
    return;
  }
  // Exceptions must not escape an OpenMP region; capture the first one.
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (Index i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
#pragma omp critical(faceprior_parallel_for_error)
      if (!failure) {
        failure = std::current_exception();
      }
    }
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
}

Vector mahalanobis_sq(const Eigen::LLT<Matrix>& chol, const Vector& point,
                      const Matrix& samples, Backend backend) {
  require_size(samples.rows(), point.size(), "mahalanobis_sq samples");
  Vector out(samples.cols());
  const Index n = samples.cols();
  if (backend == Backend::serial) {
    for (Index d = 0; d < n; ++d) {
      const Vector z = chol.matrixL().solve(point - samples.col(d));
      out(d) = z.squaredNorm();
    }
    return out;
  }
#pragma omp parallel for schedule(static)
  for (Index d = 0; d < n; ++d) {
    const Vector z = chol.matrixL().solve(point - samples.col(d));
    out(d) = z.squaredNorm();
  }
  return out;
}

}  // namespace faceprior::kernels
