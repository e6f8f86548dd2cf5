#pragma once

#include "faceprior/common.hpp"
#include "faceprior/rng.hpp"

#include <cstdint>

namespace faceprior {

/// Weights and biases shared by both RBM flavours.
/// weights is H x V (row j holds w_.j for hidden unit j).
struct RbmWeights {
  Matrix weights;
  Vector visible_bias;
  Vector hidden_bias;

  Index visible_size() const { return visible_bias.size(); }
  Index hidden_size() const { return hidden_bias.size(); }

  /// Throws DimensionError / ConfigError when sizes disagree or entries are not finite.
  void validate() const;
};

/// Binary visible and hidden units.
struct BinaryRbmParams : RbmWeights {
  static BinaryRbmParams zeros(Index visible, Index hidden);
};

/// Gaussian visible units with unit variance, binary hidden units.
struct GbRbmParams : RbmWeights {
  static GbRbmParams zeros(Index visible, Index hidden);
};

/// Small Gaussian weights (std `weight_std`), zero biases.
template <class Params>
Params random_init(Index visible, Index hidden, Rng& rng, double weight_std = 0.01);

struct TrainConfig {
  int cd_steps = 1;
  double learning_rate = 0.01;
  int epochs = 500;
  int batch_size = 32;
  double momentum = 0.5;
  double weight_decay = 1e-4;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

double binary_energy(const Vector& x, const Vector& h, const BinaryRbmParams& p);
double gb_energy(const Vector& x, const Vector& h, const GbRbmParams& p);

/// p(h_j = 1 | x) for every hidden unit; identical for both flavours.
Vector hidden_conditional(const Vector& x, const RbmWeights& p);

/// sigmoid(b + W^T h).
Vector visible_conditional(const Vector& h, const BinaryRbmParams& p);
/// Mean b + W^T h of the unit-variance Gaussian p(x | h).
Vector visible_conditional(const Vector& h, const GbRbmParams& p);

Vector sample_bernoulli(const Vector& probabilities, Rng& rng);
Vector sample_hidden(const Vector& x, const RbmWeights& p, Rng& rng);
Vector sample_visible(const Vector& h, const BinaryRbmParams& p, Rng& rng);
Vector sample_visible(const Vector& h, const GbRbmParams& p, Rng& rng);

struct GibbsState {
  Vector visible;
  Vector hidden;
};

/// h' ~ p(h | x), then x' ~ p(x | h').
template <class Params>
GibbsState gibbs_sweep(const Vector& x, const Params& p, Rng& rng);

/// Momentum buffers carried between CD updates.
struct CdVelocity {
  Matrix weights;
  Vector visible_bias;
  Vector hidden_bias;

  static CdVelocity zeros_like(const RbmWeights& p);
};

/// One CD-k step on a batch (one sample per column).
///
/// Positive statistics use p(h | data); the negative phase runs k Gibbs
/// sweeps from each data column and uses p(h | x_k). Weight decay applies to
/// the weights only. Passing no velocity is a first step from rest.
template <class Params>
Params cd_update(const Params& p, const Matrix& batch, const TrainConfig& cfg,
                 Rng& rng, CdVelocity* velocity = nullptr);

/// Shuffled mini-batch CD for cfg.epochs epochs, seeded from cfg.rng_seed.
template <class Params>
Params train_rbm(Params init, const Matrix& data, const TrainConfig& cfg);

// Exact oracles for tiny models.

constexpr Index kMaxBinaryEnumeration = 20;  // V + H
constexpr Index kMaxHiddenEnumeration = 20;  // H for the GB case

/// log Z. Binary models need V + H <= 20, GB models H <= 20.
double exact_log_partition(const BinaryRbmParams& p);
double exact_log_partition(const GbRbmParams& p);

/// Free energy F(x) with p(x) = exp(-F(x)) / Z.
double free_energy(const Vector& x, const BinaryRbmParams& p);
double free_energy(const Vector& x, const GbRbmParams& p);

/// Mean of log p(x) over the data columns.
double exact_log_likelihood(const Matrix& data, const BinaryRbmParams& p);
double exact_log_likelihood(const Matrix& data, const GbRbmParams& p);

}  // namespace faceprior
