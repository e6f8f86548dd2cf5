#include "faceprior/threeway.hpp"

#include "faceprior/kernels.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace faceprior {

using kernels::sigmoid;
using kernels::softplus;

ThreeWayParams ThreeWayParams::zeros(Index visible, Index hidden, Index factors) {
  return ThreeWayParams{Matrix::Zero(visible, factors), Matrix::Zero(visible, factors),
                        Matrix::Zero(hidden, factors),  Vector::Zero(visible),
                        Vector::Zero(visible),          Vector::Zero(hidden)};
}

void ThreeWayParams::validate() const {
  const Index v = visible_size();
  const Index f = factor_count();
  require_size(factor_x.rows(), v, "factor_x rows");
  require_size(factor_y.rows(), v, "factor_y rows");
  require_size(bias_y.size(), v, "bias_y");
  require_size(factor_y.cols(), f, "factor_y factor count");
  require_size(factor_h.cols(), f, "factor_h factor count");
  require_size(factor_h.rows(), hidden_size(), "factor_h rows");
  require_finite(factor_x, "factor_x");
  require_finite(factor_y, "factor_y");
  require_finite(factor_h, "factor_h");
  require_finite(bias_x, "bias_x");
  require_finite(bias_y, "bias_y");
  require_finite(bias_h, "bias_h");
}

ThreeWayParams random_threeway(Index visible, Index hidden, Index factors, Rng& rng,
                               double factor_std) {
  ThreeWayParams p = ThreeWayParams::zeros(visible, hidden, factors);
  for (Matrix* m : {&p.factor_x, &p.factor_y, &p.factor_h}) {
    for (Index c = 0; c < m->cols(); ++c) {
      for (Index r = 0; r < m->rows(); ++r) (*m)(r, c) = factor_std * rng.normal();
    }
  }
  return p;
}

namespace {

void check_visible(const Vector& v, const ThreeWayParams& p, const char* what) {
  require_size(v.size(), p.visible_size(), what);
}

void check_hidden(const Vector& h, const ThreeWayParams& p) {
  require_size(h.size(), p.hidden_size(), "three-way hidden vector");
}

}  // namespace

double threeway_energy(const Vector& x, const Vector& y, const Vector& h,
                       const ThreeWayParams& p) {
  check_visible(x, p, "three-way x");
  check_visible(y, p, "three-way y");
  check_hidden(h, p);
  const Vector fx = p.factor_x.transpose() * x;
  const Vector fy = p.factor_y.transpose() * y;
  const Vector fh = p.factor_h.transpose() * h;
  const double gated = (fx.array() * fy.array() * fh.array()).sum();
  return -gated + 0.5 * (x - p.bias_x).squaredNorm() + 0.5 * (y - p.bias_y).squaredNorm() -
         p.bias_h.dot(h);
}

Vector h_given_xy(const Vector& x, const Vector& y, const ThreeWayParams& p) {
  check_visible(x, p, "three-way x");
  check_visible(y, p, "three-way y");
  const Vector fx = p.factor_x.transpose() * x;
  const Vector fy = p.factor_y.transpose() * y;
  const Vector a = p.factor_h * fx.cwiseProduct(fy) + p.bias_h;
  return a.unaryExpr([](double v) { return sigmoid(v); });
}

Vector x_mean_given_hy(const Vector& h, const Vector& y, const ThreeWayParams& p) {
  check_hidden(h, p);
  check_visible(y, p, "three-way y");
  const Vector fy = p.factor_y.transpose() * y;
  const Vector fh = p.factor_h.transpose() * h;
  return p.factor_x * fh.cwiseProduct(fy) + p.bias_x;
}

Vector y_mean_given_xh(const Vector& x, const Vector& h, const ThreeWayParams& p) {
  check_hidden(h, p);
  check_visible(x, p, "three-way x");
  const Vector fx = p.factor_x.transpose() * x;
  const Vector fh = p.factor_h.transpose() * h;
  return p.factor_y * fx.cwiseProduct(fh) + p.bias_y;
}

Vector sample_x_given_hy(const Vector& h, const Vector& y, const ThreeWayParams& p, Rng& rng) {
  Vector x = x_mean_given_hy(h, y, p);
  for (Index i = 0; i < x.size(); ++i) x(i) += rng.normal();
  return x;
}

Vector sample_y_given_xh(const Vector& x, const Vector& h, const ThreeWayParams& p, Rng& rng) {
  Vector y = y_mean_given_xh(x, h, p);
  for (Index i = 0; i < y.size(); ++i) y(i) += rng.normal();
  return y;
}

ThreeWayState threeway_gibbs_sweep(const Vector& x, const Vector& y, const ThreeWayParams& p,
                                   Rng& rng) {
  ThreeWayState s;
  s.h = sample_bernoulli(h_given_xy(x, y, p), rng);
  s.x = sample_x_given_hy(s.h, y, p, rng);
  s.y = sample_y_given_xh(s.x, s.h, p, rng);
  return s;
}

ThreeWayVelocity ThreeWayVelocity::zeros_like(const ThreeWayParams& p) {
  return ThreeWayVelocity{
      ThreeWayParams::zeros(p.visible_size(), p.hidden_size(), p.factor_count())};
}

namespace {

struct ThreeWayStats {
  Matrix factor_x, factor_y, factor_h;
  Vector bias_x, bias_y, bias_h;
};

// Sufficient statistics of -E averaged over columns, with h replaced by its
// conditional probabilities given (x, y).
ThreeWayStats expected_stats(const ThreeWayParams& p, const Matrix& xs, const Matrix& ys) {
  const Matrix fx = p.factor_x.transpose() * xs;  // F x N
  const Matrix fy = p.factor_y.transpose() * ys;
  const Matrix fxy = fx.cwiseProduct(fy);
  const Matrix ph = kernels::sigmoid_affine(p.factor_h, p.bias_h, fxy);  // K x N
  const Matrix fh = p.factor_h.transpose() * ph;
  const double n = static_cast<double>(xs.cols());

  ThreeWayStats s;
  s.factor_x = kernels::mean_outer(xs, fy.cwiseProduct(fh));
  s.factor_y = kernels::mean_outer(ys, fx.cwiseProduct(fh));
  s.factor_h = kernels::mean_outer(ph, fxy);
  s.bias_x = xs.rowwise().sum() / n - p.bias_x;
  s.bias_y = ys.rowwise().sum() / n - p.bias_y;
  s.bias_h = ph.rowwise().sum() / n;
  return s;
}

}  // namespace

ThreeWayParams threeway_cd_update(const ThreeWayParams& p, const Matrix& xs, const Matrix& ys,
                                  const TrainConfig& cfg, Rng& rng,
                                  ThreeWayVelocity* velocity) {
  cfg.validate();
  if (xs.cols() == 0) throw ConfigError("threeway_cd_update: empty batch");
  require_size(xs.rows(), p.visible_size(), "threeway_cd_update x rows");
  require_size(ys.rows(), p.visible_size(), "threeway_cd_update y rows");
  require_size(ys.cols(), xs.cols(), "threeway_cd_update pair count");

  const Index n = xs.cols();
  Matrix neg_x(xs.rows(), n);
  Matrix neg_y(ys.rows(), n);
  const std::uint64_t base = rng.next_u64();
  kernels::parallel_for(n, [&](Index col) {
    Rng chain(Rng::derive_seed(base, static_cast<std::uint64_t>(col)));
    Vector x = xs.col(col);
    Vector y = ys.col(col);
    for (int step = 0; step < cfg.cd_steps; ++step) {
      ThreeWayState s = threeway_gibbs_sweep(x, y, p, chain);
      x = std::move(s.x);
      y = std::move(s.y);
    }
    neg_x.col(col) = x;
    neg_y.col(col) = y;
  });

  const ThreeWayStats pos = expected_stats(p, xs, ys);
  const ThreeWayStats neg = expected_stats(p, neg_x, neg_y);

  ThreeWayVelocity local = ThreeWayVelocity::zeros_like(p);
  ThreeWayVelocity& vel = velocity ? *velocity : local;
  if (vel.v.factor_x.rows() != p.factor_x.rows() || vel.v.factor_x.cols() != p.factor_x.cols() ||
      vel.v.factor_h.rows() != p.factor_h.rows()) {
    vel = ThreeWayVelocity::zeros_like(p);
  }
  const double lr = cfg.learning_rate;
  const double mom = cfg.momentum;
  const double decay = cfg.weight_decay;
  ThreeWayParams& v = vel.v;
  v.factor_x = mom * v.factor_x + lr * (pos.factor_x - neg.factor_x - decay * p.factor_x);
  v.factor_y = mom * v.factor_y + lr * (pos.factor_y - neg.factor_y - decay * p.factor_y);
  v.factor_h = mom * v.factor_h + lr * (pos.factor_h - neg.factor_h - decay * p.factor_h);
  v.bias_x = mom * v.bias_x + lr * (pos.bias_x - neg.bias_x);
  v.bias_y = mom * v.bias_y + lr * (pos.bias_y - neg.bias_y);
  v.bias_h = mom * v.bias_h + lr * (pos.bias_h - neg.bias_h);

  ThreeWayParams out = p;
  out.factor_x += v.factor_x;
  out.factor_y += v.factor_y;
  out.factor_h += v.factor_h;
  out.bias_x += v.bias_x;
  out.bias_y += v.bias_y;
  out.bias_h += v.bias_h;
  return out;
}

ThreeWayParams train_threeway(const Matrix& xs, const Matrix& ys, const ThreeWaySizes& sizes,
                              const TrainConfig& cfg) {
  cfg.validate();
  if (xs.rows() != ys.rows() || xs.cols() != ys.cols()) {
    throw ConfigError("train_threeway: x and y corpora are not paired (" +
                      std::to_string(xs.cols()) + " vs " + std::to_string(ys.cols()) +
                      " columns)");
  }
  if (xs.cols() < 2) throw ConfigError("train_threeway needs at least 2 pairs");
  if (sizes.hidden < 1 || sizes.factors < 1) {
    throw ConfigError("train_threeway: hidden and factor counts must be >= 1");
  }

  Rng rng(cfg.rng_seed);
  Rng init_rng = rng.fork();
  ThreeWayParams p =
      random_threeway(xs.rows(), sizes.hidden, sizes.factors, init_rng, sizes.init_std);
  p.bias_x = xs.rowwise().mean();
  p.bias_y = ys.rowwise().mean();
  ThreeWayVelocity velocity = ThreeWayVelocity::zeros_like(p);

  const Index n = xs.cols();
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (Index i = n - 1; i > 0; --i) {
      const auto j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(i + 1)));
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    for (Index start = 0; start < n; start += cfg.batch_size) {
      const Index size = std::min<Index>(cfg.batch_size, n - start);
      Matrix bx(xs.rows(), size);
      Matrix by(ys.rows(), size);
      for (Index k = 0; k < size; ++k) {
        const Index src = order[static_cast<std::size_t>(start + k)];
        bx.col(k) = xs.col(src);
        by.col(k) = ys.col(src);
      }
      p = threeway_cd_update(p, bx, by, cfg, rng, &velocity);
    }
    if (!p.factor_x.allFinite() || !p.factor_y.allFinite() || !p.factor_h.allFinite() ||
        !p.bias_x.allFinite() || !p.bias_y.allFinite() || !p.bias_h.allFinite()) {
      throw NumericalError("three-way training diverged at epoch " + std::to_string(epoch));
    }
  }
  return p;
}

Vector reconstruct_y(const Vector& x, const Vector& y, const ThreeWayParams& p) {
  return y_mean_given_xh(x, h_given_xy(x, y, p), p);
}

double threeway_exact_log_partition(const ThreeWayParams& p) {
  p.validate();
  const Index k = p.hidden_size();
  if (k > kMaxThreeWayHidden) {
    throw ConfigError("threeway_exact_log_partition: K = " + std::to_string(k) +
                      " exceeds enumeration limit " + std::to_string(kMaxThreeWayHidden));
  }
  const Index v = p.visible_size();
  Vector q(2 * v);
  q << p.bias_x, p.bias_y;
  const double bias_sq = 0.5 * q.squaredNorm();

  std::vector<double> terms;
  double top = -std::numeric_limits<double>::infinity();
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << k); ++code) {
    Vector h(k);
    for (Index j = 0; j < k; ++j) h(j) = static_cast<double>((code >> j) & 1u);
    const Vector g = p.factor_h.transpose() * h;
    const Matrix coupling = p.factor_x * g.asDiagonal() * p.factor_y.transpose();
    Matrix precision = Matrix::Identity(2 * v, 2 * v);
    precision.topRightCorner(v, v) = -coupling;
    precision.bottomLeftCorner(v, v) = -coupling.transpose();
    Eigen::LLT<Matrix> llt(precision);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("three-way model is not normalizable (improper Gaussian for a hidden state)");
    }
    const Matrix& l = llt.matrixLLT();
    const double log_det = 2.0 * l.diagonal().array().log().sum();
    const double quad = q.dot(llt.solve(q));
    const double t = p.bias_h.dot(h) - bias_sq +
                     static_cast<double>(v) * std::log(2.0 * std::numbers::pi) -
                     0.5 * log_det + 0.5 * quad;
    terms.push_back(t);
    top = std::max(top, t);
  }
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - top);
  return top + std::log(acc);
}

double threeway_exact_log_likelihood(const Matrix& xs, const Matrix& ys,
                                     const ThreeWayParams& p) {
  require_size(ys.cols(), xs.cols(), "threeway_exact_log_likelihood pair count");
  if (xs.cols() == 0) throw ConfigError("threeway_exact_log_likelihood: no data");
  const double log_z = threeway_exact_log_partition(p);
  double acc = 0.0;
  for (Index n = 0; n < xs.cols(); ++n) {
    const Vector x = xs.col(n);
    const Vector y = ys.col(n);
    const Vector fx = p.factor_x.transpose() * x;
    const Vector fy = p.factor_y.transpose() * y;
    const Vector a = p.factor_h * fx.cwiseProduct(fy) + p.bias_h;
    double log_unnorm = -0.5 * (x - p.bias_x).squaredNorm() - 0.5 * (y - p.bias_y).squaredNorm();
    for (Index j = 0; j < a.size(); ++j) log_unnorm += softplus(a(j));
    acc += log_unnorm - log_z;
  }
  return acc / static_cast<double>(xs.cols());
}

}  // namespace faceprior
