#pragma once

#include "faceprior/rbm.hpp"
#include "faceprior/shape.hpp"
#include "faceprior/standardizer.hpp"

#include <vector>

namespace faceprior {

/// Two-layer DBN over standardized shape coordinates: a GB-RBM (52 -> H1)
/// with a binary RBM (H1 -> H2) stacked on its hidden layer. A model with
/// H2 == 0 is a single GB-RBM.
struct FrontalPriorModel {
  GbRbmParams layer1;
  BinaryRbmParams layer2;
  Standardizer standardizer;

  Index hidden1() const { return layer1.hidden_size(); }
  Index hidden2() const { return layer2.hidden_size(); }
  bool has_layer2() const { return hidden2() > 0; }

  void validate() const;
};

struct FrontalSizes {
  Index hidden1 = 50;
  Index hidden2 = 25;
};

struct SamplerConfig {
  int sweeps = 2;     // S
  int samples = 100;  // D
  bool restart_from_measurement = true;

  void validate() const;
};

/// Layer-wise CD training. Layer 1 sees standardized coordinates; layer 2 is
/// trained on layer-1 hidden probabilities of the data.
/// Needs >= 2 eye-normalized shapes.
FrontalPriorModel train_frontal(const std::vector<ShapeVector>& shapes,
                                const FrontalSizes& sizes, const TrainConfig& cfg);

/// One up-down pass in standardized space:
/// h1 ~ p(h1|x), h2 ~ p(h2|h1), h1 ~ p(h1|h2), x ~ p(x|h1).
Vector frontal_sweep(const FrontalPriorModel& model, const Vector& standardized_x, Rng& rng);

/// D local samples around x_init, each after S up-down sweeps, returned in
/// shape units. Restart mode runs D independent chains from x_init (in
/// parallel); chained mode runs one chain and records every S-th state.
std::vector<ShapeVector> sample_local_prior(const FrontalPriorModel& model,
                                            const ShapeVector& x_init,
                                            const SamplerConfig& cfg, Rng& rng);

/// Standardized-space variant used by the pose sampler.
Matrix sample_local_prior_standardized(const FrontalPriorModel& model,
                                       const Vector& z_init, const SamplerConfig& cfg,
                                       Rng& rng);

}  // namespace faceprior
