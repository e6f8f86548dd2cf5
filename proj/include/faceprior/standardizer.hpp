#pragma once

#include "faceprior/common.hpp"

namespace faceprior {

/// Per-coordinate affine map z = (x - mean) / std.
struct Standardizer {
  Vector mean;
  Vector std;

  /// Fits mean and standard deviation over data columns; std is floored at
  /// `min_std` so constant coordinates stay invertible.
  static Standardizer fit(const Matrix& data, double min_std = 1e-6);
  static Standardizer identity(Index dim);

  /// Same scale, but the standardized data are centred at `offset` instead
  /// of zero.
  Standardizer shifted(double offset) const;

  Index size() const { return mean.size(); }
  Vector apply(const Vector& x) const;
  Vector invert(const Vector& z) const;
  Matrix apply_columns(const Matrix& data) const;
  Matrix invert_columns(const Matrix& data) const;

  void validate() const;
};

}  // namespace faceprior
