#pragma once

#include "faceprior/frontal_prior.hpp"
#include "faceprior/fusion.hpp"
#include "faceprior/pose_prior.hpp"

#include <variant>

namespace faceprior {

/// Either prior; the sampler is chosen by the model type.
using ShapePrior = std::variant<FrontalPriorModel, PosePriorModel>;

std::vector<ShapeVector> sample_prior(const ShapePrior& prior, const ShapeVector& measured,
                                      const SamplerConfig& cfg, Rng& rng);

/// Local prior samples around the measurement fused with it.
ShapeVector correct_shape(const ShapePrior& prior, const ShapeVector& measured,
                          const SamplerConfig& sampler, const FusionOptions& fusion, Rng& rng);

}  // namespace faceprior
