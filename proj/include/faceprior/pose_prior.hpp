#pragma once

#include "faceprior/frontal_prior.hpp"
#include "faceprior/records.hpp"
#include "faceprior/threeway.hpp"

#include <vector>

namespace faceprior {

/// Offset added to standardized coordinates on the three-way side, so the
/// factor products see a constant component as well as the shape variation.
inline constexpr double kTransferOffset = 1.0;

/// Frontal DBN (part I) plus the frontal-to-posed three-way RBM (part II).
struct PosePriorModel {
  FrontalPriorModel frontal;
  ThreeWayParams transfer;
  Standardizer x_standardizer;
  Standardizer y_standardizer;

  void validate() const;
};

/// Fits x/y standardizers on the pairs and trains the three-way part only;
/// the frontal part is taken as given.
PosePriorModel train_pose_prior(FrontalPriorModel frontal, const std::vector<PairRecord>& pairs,
                                const ThreeWaySizes& sizes, const TrainConfig& cfg);

/// Mean-field prediction of the posed shape from (x, y) in shape units:
/// mu_y(x, p(h | x, y)).
ShapeVector reconstruct_posed(const PosePriorModel& model, const ShapeVector& frontal,
                              const ShapeVector& posed);

/// D samples of y around a posed measurement. Each sample:
///  1. y <- y_m, x <- y; S sweeps of h ~ p(h|x,y), x ~ N(mu_x, I) with y fixed;
///  2. S up-down sweeps of x through the frontal DBN;
///  3. y ~ N(mu_y(x, h), I) with h from step 1.
/// Samples are independent chains and run in parallel.
std::vector<ShapeVector> sample_pose_prior(const PosePriorModel& model,
                                           const ShapeVector& y_measured,
                                           const SamplerConfig& cfg, Rng& rng);

}  // namespace faceprior
