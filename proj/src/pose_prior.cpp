#include "faceprior/pose_prior.hpp"

#include "faceprior/kernels.hpp"

namespace faceprior {

void PosePriorModel::validate() const {
  frontal.validate();
  transfer.validate();
  x_standardizer.validate();
  y_standardizer.validate();
  require_size(transfer.visible_size(), frontal.layer1.visible_size(),
               "transfer V vs frontal visible size");
  require_size(x_standardizer.size(), transfer.visible_size(), "x standardizer");
  require_size(y_standardizer.size(), transfer.visible_size(), "y standardizer");
}

PosePriorModel train_pose_prior(FrontalPriorModel frontal, const std::vector<PairRecord>& pairs,
                                const ThreeWaySizes& sizes, const TrainConfig& cfg) {
  frontal.validate();
  if (pairs.size() < 2) throw ConfigError("train_pose_prior needs at least 2 pairs");
  std::vector<ShapeVector> xs;
  std::vector<ShapeVector> ys;
  xs.reserve(pairs.size());
  ys.reserve(pairs.size());
  for (const auto& p : pairs) {
    xs.push_back(p.frontal);
    ys.push_back(p.posed);
  }
  const Matrix raw_x = to_columns(xs);
  const Matrix raw_y = to_columns(ys);

  PosePriorModel model;
  model.frontal = std::move(frontal);
  model.x_standardizer = Standardizer::fit(raw_x).shifted(kTransferOffset);
  model.y_standardizer = Standardizer::fit(raw_y).shifted(kTransferOffset);
  TrainConfig transfer_cfg = cfg;
  transfer_cfg.rng_seed = Rng::stage_seed(cfg.rng_seed, "pose/transfer");
  model.transfer = train_threeway(model.x_standardizer.apply_columns(raw_x),
                                  model.y_standardizer.apply_columns(raw_y), sizes,
                                  transfer_cfg);
  return model;
}

ShapeVector reconstruct_posed(const PosePriorModel& model, const ShapeVector& frontal,
                              const ShapeVector& posed) {
  const Vector x = model.x_standardizer.apply(frontal.coords());
  const Vector y = model.y_standardizer.apply(posed.coords());
  return ShapeVector(model.y_standardizer.invert(reconstruct_y(x, y, model.transfer)));
}

std::vector<ShapeVector> sample_pose_prior(const PosePriorModel& model,
                                           const ShapeVector& y_measured,
                                           const SamplerConfig& cfg, Rng& rng) {
  cfg.validate();
  const ThreeWayParams& t = model.transfer;
  const Vector y0 = model.y_standardizer.apply(y_measured.coords());
  const Vector x0 = model.x_standardizer.apply(y_measured.coords());
  const SamplerConfig refine{cfg.sweeps, 1, true};

  Matrix out(kShapeDims, cfg.samples);
  const std::uint64_t base = rng.next_u64();
  kernels::parallel_for(cfg.samples, [&](Index d) {
    Rng chain(Rng::derive_seed(base, static_cast<std::uint64_t>(d)));
    Vector x = x0;
    Vector h;
    for (int s = 0; s < cfg.sweeps; ++s) {
      h = sample_bernoulli(h_given_xy(x, y0, t), chain);
      x = sample_x_given_hy(h, y0, t, chain);
    }
    // Part I works in the frontal model's own standardized frame.
    const Vector frontal_z = model.frontal.standardizer.apply(model.x_standardizer.invert(x));
    const Vector refined_z =
        sample_local_prior_standardized(model.frontal, frontal_z, refine, chain).col(0);
    x = model.x_standardizer.apply(model.frontal.standardizer.invert(refined_z));
    out.col(d) = model.y_standardizer.invert(sample_y_given_xh(x, h, t, chain));
  });
  return from_columns(out);
}

}  // namespace faceprior
