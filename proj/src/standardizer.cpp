#include "faceprior/standardizer.hpp"

#include <cmath>

namespace faceprior {

Standardizer Standardizer::fit(const Matrix& data, double min_std) {
  if (data.cols() < 2) {
    throw ConfigError("Standardizer::fit needs at least 2 samples");
  }
  Standardizer s;
  s.mean = data.rowwise().mean();
  const Matrix centred = data.colwise() - s.mean;
  s.std = (centred.rowwise().squaredNorm() / static_cast<double>(data.cols() - 1))
              .cwiseSqrt()
              .cwiseMax(min_std);
  return s;
}

Standardizer Standardizer::identity(Index dim) {
  return Standardizer{Vector::Zero(dim), Vector::Ones(dim)};
}

Standardizer Standardizer::shifted(double offset) const {
  return Standardizer{mean - offset * std, std};
}

Vector Standardizer::apply(const Vector& x) const {
  require_size(x.size(), size(), "Standardizer::apply");
  return (x - mean).cwiseQuotient(std);
}

Vector Standardizer::invert(const Vector& z) const {
  require_size(z.size(), size(), "Standardizer::invert");
  return z.cwiseProduct(std) + mean;
}

Matrix Standardizer::apply_columns(const Matrix& data) const {
  require_size(data.rows(), size(), "Standardizer::apply_columns");
  return (data.colwise() - mean).array().colwise() / std.array();
}

Matrix Standardizer::invert_columns(const Matrix& data) const {
  require_size(data.rows(), size(), "Standardizer::invert_columns");
  Matrix out = data.array().colwise() * std.array();
  return out.colwise() + mean;
}

void Standardizer::validate() const {
  require_size(std.size(), mean.size(), "Standardizer std vs mean");
  require_finite(mean, "Standardizer mean");
  require_finite(std, "Standardizer std");
  if (std.size() > 0 && !(std.minCoeff() > 0.0)) {
    throw ConfigError("Standardizer std must be positive");
  }
}

}  // namespace faceprior
