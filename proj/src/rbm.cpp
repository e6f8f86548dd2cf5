#include "faceprior/rbm.hpp"

#include "faceprior/kernels.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace faceprior {

using kernels::sigmoid;
using kernels::softplus;

void RbmWeights::validate() const {
  require_size(weights.rows(), hidden_bias.size(), "RBM weights rows vs hidden bias");
  require_size(weights.cols(), visible_bias.size(), "RBM weights cols vs visible bias");
  require_finite(weights, "RBM weights");
  require_finite(visible_bias, "RBM visible bias");
  require_finite(hidden_bias, "RBM hidden bias");
}

BinaryRbmParams BinaryRbmParams::zeros(Index visible, Index hidden) {
  BinaryRbmParams p;
  p.weights = Matrix::Zero(hidden, visible);
  p.visible_bias = Vector::Zero(visible);
  p.hidden_bias = Vector::Zero(hidden);
  return p;
}

GbRbmParams GbRbmParams::zeros(Index visible, Index hidden) {
  GbRbmParams p;
  p.weights = Matrix::Zero(hidden, visible);
  p.visible_bias = Vector::Zero(visible);
  p.hidden_bias = Vector::Zero(hidden);
  return p;
}

template <class Params>
Params random_init(Index visible, Index hidden, Rng& rng, double weight_std) {
  Params p = Params::zeros(visible, hidden);
  for (Index j = 0; j < hidden; ++j) {
    for (Index i = 0; i < visible; ++i) {
      p.weights(j, i) = weight_std * rng.normal();
    }
  }
  return p;
}

template BinaryRbmParams random_init<BinaryRbmParams>(Index, Index, Rng&, double);
template GbRbmParams random_init<GbRbmParams>(Index, Index, Rng&, double);

void TrainConfig::validate() const {
  if (cd_steps < 1) throw ConfigError("cd_steps must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be finite and >= 0");
  }
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must be in [0, 1)");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
}

namespace {

void check_pair(const Vector& x, const Vector& h, const RbmWeights& p) {
  require_size(x.size(), p.visible_size(), "visible vector");
  require_size(h.size(), p.hidden_size(), "hidden vector");
}

double log_sum_exp(const std::vector<double>& terms) {
  double top = -std::numeric_limits<double>::infinity();
  for (double t : terms) top = std::max(top, t);
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - top);
  return top + std::log(acc);
}

// Hidden configuration number `code` as a 0/1 vector.
Vector hidden_state(std::uint64_t code, Index size) {
  Vector h(size);
  for (Index j = 0; j < size; ++j) {
    h(j) = static_cast<double>((code >> j) & 1u);
  }
  return h;
}

template <class Params>
void check_batch(const Matrix& batch, const Params& p) {
  if (batch.cols() == 0) {
    throw ConfigError("cd_update: empty batch");
  }
  require_size(batch.rows(), p.visible_size(), "cd_update batch rows");
}

}  // namespace

double binary_energy(const Vector& x, const Vector& h, const BinaryRbmParams& p) {
  check_pair(x, h, p);
  return -(p.visible_bias.dot(x) + h.dot(p.weights * x) + p.hidden_bias.dot(h));
}

double gb_energy(const Vector& x, const Vector& h, const GbRbmParams& p) {
  check_pair(x, h, p);
  return 0.5 * (x - p.visible_bias).squaredNorm() - h.dot(p.weights * x) -
         p.hidden_bias.dot(h);
}

Vector hidden_conditional(const Vector& x, const RbmWeights& p) {
  require_size(x.size(), p.visible_size(), "visible vector");
  Vector a = p.hidden_bias + p.weights * x;
  return a.unaryExpr([](double v) { return sigmoid(v); });
}

Vector visible_conditional(const Vector& h, const BinaryRbmParams& p) {
  require_size(h.size(), p.hidden_size(), "hidden vector");
  Vector a = p.visible_bias + p.weights.transpose() * h;
  return a.unaryExpr([](double v) { return sigmoid(v); });
}

Vector visible_conditional(const Vector& h, const GbRbmParams& p) {
  require_size(h.size(), p.hidden_size(), "hidden vector");
  return p.visible_bias + p.weights.transpose() * h;
}

Vector sample_bernoulli(const Vector& probabilities, Rng& rng) {
  Vector out(probabilities.size());
  for (Index i = 0; i < probabilities.size(); ++i) {
    out(i) = rng.uniform() < probabilities(i) ? 1.0 : 0.0;
  }
  return out;
}

Vector sample_hidden(const Vector& x, const RbmWeights& p, Rng& rng) {
  return sample_bernoulli(hidden_conditional(x, p), rng);
}

Vector sample_visible(const Vector& h, const BinaryRbmParams& p, Rng& rng) {
  return sample_bernoulli(visible_conditional(h, p), rng);
}

Vector sample_visible(const Vector& h, const GbRbmParams& p, Rng& rng) {
  Vector x = visible_conditional(h, p);
  for (Index i = 0; i < x.size(); ++i) {
    x(i) += rng.normal();
  }
  return x;
}

template <class Params>
GibbsState gibbs_sweep(const Vector& x, const Params& p, Rng& rng) {
  GibbsState s;
  s.hidden = sample_hidden(x, p, rng);
  s.visible = sample_visible(s.hidden, p, rng);
  return s;
}

template GibbsState gibbs_sweep<BinaryRbmParams>(const Vector&, const BinaryRbmParams&, Rng&);
template GibbsState gibbs_sweep<GbRbmParams>(const Vector&, const GbRbmParams&, Rng&);

CdVelocity CdVelocity::zeros_like(const RbmWeights& p) {
  return CdVelocity{Matrix::Zero(p.weights.rows(), p.weights.cols()),
                    Vector::Zero(p.visible_size()), Vector::Zero(p.hidden_size())};
}

template <class Params>
Params cd_update(const Params& p, const Matrix& batch, const TrainConfig& cfg,
                 Rng& rng, CdVelocity* velocity) {
  cfg.validate();
  check_batch(batch, p);

  const Index n = batch.cols();
  const Matrix positive_h = kernels::sigmoid_affine(p.weights, p.hidden_bias, batch);

  Matrix negative_x(batch.rows(), n);
  const std::uint64_t base = rng.next_u64();
  kernels::parallel_for(n, [&](Index col) {
    Rng chain(Rng::derive_seed(base, static_cast<std::uint64_t>(col)));
    Vector x = batch.col(col);
    for (int step = 0; step < cfg.cd_steps; ++step) {
      x = gibbs_sweep(x, p, chain).visible;
    }
    negative_x.col(col) = x;
  });
  const Matrix negative_h = kernels::sigmoid_affine(p.weights, p.hidden_bias, negative_x);

  const Matrix grad_w = kernels::mean_outer(positive_h, batch) -
                        kernels::mean_outer(negative_h, negative_x);
  const Vector grad_b = (batch.rowwise().sum() - negative_x.rowwise().sum()) / double(n);
  const Vector grad_c = (positive_h.rowwise().sum() - negative_h.rowwise().sum()) / double(n);

  CdVelocity local = CdVelocity::zeros_like(p);
  CdVelocity& v = velocity ? *velocity : local;
  if (v.weights.rows() != p.weights.rows() || v.weights.cols() != p.weights.cols()) {
    v = CdVelocity::zeros_like(p);
  }
  v.weights = cfg.momentum * v.weights +
              cfg.learning_rate * (grad_w - cfg.weight_decay * p.weights);
  v.visible_bias = cfg.momentum * v.visible_bias + cfg.learning_rate * grad_b;
  v.hidden_bias = cfg.momentum * v.hidden_bias + cfg.learning_rate * grad_c;

  Params out = p;
  out.weights += v.weights;
  out.visible_bias += v.visible_bias;
  out.hidden_bias += v.hidden_bias;
  return out;
}

template BinaryRbmParams cd_update<BinaryRbmParams>(const BinaryRbmParams&, const Matrix&,
                                                    const TrainConfig&, Rng&, CdVelocity*);
template GbRbmParams cd_update<GbRbmParams>(const GbRbmParams&, const Matrix&,
                                            const TrainConfig&, Rng&, CdVelocity*);

template <class Params>
Params train_rbm(Params init, const Matrix& data, const TrainConfig& cfg) {
  cfg.validate();
  init.validate();
  check_batch(data, init);

  Rng rng(cfg.rng_seed);
  CdVelocity velocity = CdVelocity::zeros_like(init);
  const Index n = data.cols();
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

  Params p = std::move(init);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (Index i = n - 1; i > 0; --i) {
      const auto j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(i + 1)));
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    for (Index start = 0; start < n; start += cfg.batch_size) {
      const Index size = std::min<Index>(cfg.batch_size, n - start);
      Matrix batch(data.rows(), size);
      for (Index k = 0; k < size; ++k) {
        batch.col(k) = data.col(order[static_cast<std::size_t>(start + k)]);
      }
      p = cd_update(p, batch, cfg, rng, &velocity);
    }
    if (!p.weights.allFinite() || !p.visible_bias.allFinite() || !p.hidden_bias.allFinite()) {
      throw NumericalError("RBM training diverged at epoch " + std::to_string(epoch));
    }
  }
  return p;
}

template BinaryRbmParams train_rbm<BinaryRbmParams>(BinaryRbmParams, const Matrix&, const TrainConfig&);
template GbRbmParams train_rbm<GbRbmParams>(GbRbmParams, const Matrix&, const TrainConfig&);

double exact_log_partition(const BinaryRbmParams& p) {
  p.validate();
  if (p.visible_size() + p.hidden_size() > kMaxBinaryEnumeration) {
    throw ConfigError("exact_log_partition: binary model too large for enumeration (V+H = " +
                      std::to_string(p.visible_size() + p.hidden_size()) + " > " +
                      std::to_string(kMaxBinaryEnumeration) + ")");
  }
  // Visible units are summed analytically for each hidden configuration.
  const Index hidden = p.hidden_size();
  std::vector<double> terms;
  terms.reserve(std::size_t{1} << hidden);
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << hidden); ++code) {
    const Vector h = hidden_state(code, hidden);
    const Vector a = p.visible_bias + p.weights.transpose() * h;
    double t = p.hidden_bias.dot(h);
    for (Index i = 0; i < a.size(); ++i) t += softplus(a(i));
    terms.push_back(t);
  }
  return log_sum_exp(terms);
}

double exact_log_partition(const GbRbmParams& p) {
  p.validate();
  if (p.hidden_size() > kMaxHiddenEnumeration) {
    throw ConfigError("exact_log_partition: GB model too large for enumeration (H = " +
                      std::to_string(p.hidden_size()) + " > " +
                      std::to_string(kMaxHiddenEnumeration) + ")");
  }
  const Index hidden = p.hidden_size();
  const double b_sq = p.visible_bias.squaredNorm();
  std::vector<double> terms;
  terms.reserve(std::size_t{1} << hidden);
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << hidden); ++code) {
    const Vector h = hidden_state(code, hidden);
    const Vector mean = p.visible_bias + p.weights.transpose() * h;
    terms.push_back(p.hidden_bias.dot(h) + 0.5 * mean.squaredNorm() - 0.5 * b_sq);
  }
  const double log_gauss =
      0.5 * static_cast<double>(p.visible_size()) * std::log(2.0 * std::numbers::pi);
  return log_gauss + log_sum_exp(terms);
}

double free_energy(const Vector& x, const BinaryRbmParams& p) {
  require_size(x.size(), p.visible_size(), "visible vector");
  const Vector a = p.hidden_bias + p.weights * x;
  double f = -p.visible_bias.dot(x);
  for (Index j = 0; j < a.size(); ++j) f -= softplus(a(j));
  return f;
}

double free_energy(const Vector& x, const GbRbmParams& p) {
  require_size(x.size(), p.visible_size(), "visible vector");
  const Vector a = p.hidden_bias + p.weights * x;
  double f = 0.5 * (x - p.visible_bias).squaredNorm();
  for (Index j = 0; j < a.size(); ++j) f -= softplus(a(j));
  return f;
}

namespace {

template <class Params>
double mean_log_likelihood(const Matrix& data, const Params& p) {
  if (data.cols() == 0) throw ConfigError("exact_log_likelihood: no data");
  require_size(data.rows(), p.visible_size(), "exact_log_likelihood data rows");
  const double log_z = exact_log_partition(p);
  double acc = 0.0;
  for (Index n = 0; n < data.cols(); ++n) {
    acc += -free_energy(Vector(data.col(n)), p) - log_z;
  }
  return acc / static_cast<double>(data.cols());
}

}  // namespace

double exact_log_likelihood(const Matrix& data, const BinaryRbmParams& p) {
  return mean_log_likelihood(data, p);
}

double exact_log_likelihood(const Matrix& data, const GbRbmParams& p) {
  return mean_log_likelihood(data, p);
}

}  // namespace faceprior
