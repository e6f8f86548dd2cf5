#pragma once

#include "faceprior/common.hpp"
#include "faceprior/rbm.hpp"
#include "faceprior/rng.hpp"

namespace faceprior {

/// Factorized three-way RBM coupling two unit-variance Gaussian visible
/// vectors x, y (size V) and binary hidden units h (size K) through F factors:
///
///   E(x, y, h) = -sum_f (x.Wx_f)(y.Wy_f)(h.Wh_f)
///                + |x - bx|^2 / 2 + |y - by|^2 / 2 - bh.h
struct ThreeWayParams {
  Matrix factor_x;  // V x F
  Matrix factor_y;  // V x F
  Matrix factor_h;  // K x F
  Vector bias_x;    // V
  Vector bias_y;    // V
  Vector bias_h;    // K

  Index visible_size() const { return bias_x.size(); }
  Index hidden_size() const { return bias_h.size(); }
  Index factor_count() const { return factor_x.cols(); }

  static ThreeWayParams zeros(Index visible, Index hidden, Index factors);
  void validate() const;
};

ThreeWayParams random_threeway(Index visible, Index hidden, Index factors, Rng& rng,
                               double factor_std);

double threeway_energy(const Vector& x, const Vector& y, const Vector& h,
                       const ThreeWayParams& p);

/// p(h_k = 1 | x, y) = sigmoid(sum_f Wh_kf (x.Wx_f)(y.Wy_f) + bh_k).
Vector h_given_xy(const Vector& x, const Vector& y, const ThreeWayParams& p);

/// Mean of the unit-variance Gaussian p(x | h, y).
Vector x_mean_given_hy(const Vector& h, const Vector& y, const ThreeWayParams& p);
/// Mean of the unit-variance Gaussian p(y | x, h).
Vector y_mean_given_xh(const Vector& x, const Vector& h, const ThreeWayParams& p);

Vector sample_x_given_hy(const Vector& h, const Vector& y, const ThreeWayParams& p, Rng& rng);
Vector sample_y_given_xh(const Vector& x, const Vector& h, const ThreeWayParams& p, Rng& rng);

struct ThreeWayState {
  Vector x;
  Vector y;
  Vector h;
};

/// h ~ p(h|x,y), then x ~ p(x|h,y), then y ~ p(y|x,h).
ThreeWayState threeway_gibbs_sweep(const Vector& x, const Vector& y, const ThreeWayParams& p,
                                   Rng& rng);

struct ThreeWayVelocity {
  ThreeWayParams v;
  static ThreeWayVelocity zeros_like(const ThreeWayParams& p);
};

/// One CD-k step of the joint likelihood p(x, y) on paired batch columns.
ThreeWayParams threeway_cd_update(const ThreeWayParams& p, const Matrix& xs, const Matrix& ys,
                                  const TrainConfig& cfg, Rng& rng,
                                  ThreeWayVelocity* velocity = nullptr);

struct ThreeWaySizes {
  Index hidden = 20;   // K
  Index factors = 32;  // F
  double init_std = 0.1;
};

/// Mini-batch CD on standardized pairs (column n of xs pairs with column n of ys).
/// Needs >= 2 pairs.
ThreeWayParams train_threeway(const Matrix& xs, const Matrix& ys, const ThreeWaySizes& sizes,
                              const TrainConfig& cfg);

/// Mean-field reconstruction mu_y(x, p(h | x, y)).
Vector reconstruct_y(const Vector& x, const Vector& y, const ThreeWayParams& p);

// Exact oracles for tiny models (K <= 12).

constexpr Index kMaxThreeWayHidden = 12;

/// log Z, enumerating h and integrating (x, y) analytically. Throws
/// NumericalError when some hidden state makes the Gaussian improper.
double threeway_exact_log_partition(const ThreeWayParams& p);

/// Mean of log p(x, y) over paired columns.
double threeway_exact_log_likelihood(const Matrix& xs, const Matrix& ys,
                                     const ThreeWayParams& p);

}  // namespace faceprior
