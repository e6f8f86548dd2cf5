#include "faceprior/correction.hpp"

namespace faceprior {

std::vector<ShapeVector> sample_prior(const ShapePrior& prior, const ShapeVector& measured,
                                      const SamplerConfig& cfg, Rng& rng) {
  if (const auto* frontal = std::get_if<FrontalPriorModel>(&prior)) {
    return sample_local_prior(*frontal, measured, cfg, rng);
  }
  return sample_pose_prior(std::get<PosePriorModel>(prior), measured, cfg, rng);
}

ShapeVector correct_shape(const ShapePrior& prior, const ShapeVector& measured,
                          const SamplerConfig& sampler, const FusionOptions& fusion, Rng& rng) {
  const Matrix samples = to_columns(sample_prior(prior, measured, sampler, rng));
  return ShapeVector(fuse(samples, measured.coords(), fusion));
}

}  // namespace faceprior
