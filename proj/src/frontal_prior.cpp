#include "faceprior/frontal_prior.hpp"

#include "faceprior/kernels.hpp"

#include <string>

namespace faceprior {

void FrontalPriorModel::validate() const {
  layer1.validate();
  layer2.validate();
  standardizer.validate();
  require_size(layer1.visible_size(), standardizer.size(), "frontal standardizer");
  if (has_layer2()) {
    require_size(layer2.visible_size(), layer1.hidden_size(), "layer2 visible vs layer1 hidden");
  }
}

void SamplerConfig::validate() const {
  if (sweeps < 1) throw ConfigError("sampler sweeps must be >= 1");
  if (samples < 1) throw ConfigError("sampler sample count must be >= 1");
}

FrontalPriorModel train_frontal(const std::vector<ShapeVector>& shapes,
                                const FrontalSizes& sizes, const TrainConfig& cfg) {
  cfg.validate();
  if (shapes.size() < 2) {
    throw ConfigError("train_frontal needs at least 2 shapes, got " +
                      std::to_string(shapes.size()));
  }
  if (sizes.hidden1 < 1 || sizes.hidden2 < 0) {
    throw ConfigError("train_frontal: hidden1 must be >= 1 and hidden2 >= 0");
  }
  for (std::size_t n = 0; n < shapes.size(); ++n) {
    if (!is_eye_normalized(shapes[n], 1e-6)) {
      throw ConfigError("train_frontal: shape " + std::to_string(n) + " is not eye-normalized");
    }
  }

  FrontalPriorModel model;
  const Matrix raw = to_columns(shapes);
  model.standardizer = Standardizer::fit(raw);
  const Matrix data = model.standardizer.apply_columns(raw);

  Rng init_rng(Rng::stage_seed(cfg.rng_seed, "frontal/init"));
  TrainConfig layer_cfg = cfg;
  layer_cfg.rng_seed = Rng::stage_seed(cfg.rng_seed, "frontal/layer1");
  model.layer1 = train_rbm(random_init<GbRbmParams>(kShapeDims, sizes.hidden1, init_rng),
                           data, layer_cfg);

  if (sizes.hidden2 > 0) {
    const Matrix features = kernels::sigmoid_affine(model.layer1.weights,
                                                    model.layer1.hidden_bias, data);
    layer_cfg.rng_seed = Rng::stage_seed(cfg.rng_seed, "frontal/layer2");
    model.layer2 = train_rbm(
        random_init<BinaryRbmParams>(sizes.hidden1, sizes.hidden2, init_rng), features,
        layer_cfg);
  } else {
    model.layer2 = BinaryRbmParams::zeros(sizes.hidden1, 0);
  }
  return model;
}

Vector frontal_sweep(const FrontalPriorModel& model, const Vector& z, Rng& rng) {
  Vector h1 = sample_hidden(z, model.layer1, rng);
  if (model.has_layer2()) {
    const Vector h2 = sample_hidden(h1, model.layer2, rng);
    h1 = sample_visible(h2, model.layer2, rng);
  }
  return sample_visible(h1, model.layer1, rng);
}

Matrix sample_local_prior_standardized(const FrontalPriorModel& model, const Vector& z_init,
                                       const SamplerConfig& cfg, Rng& rng) {
  cfg.validate();
  require_size(z_init.size(), model.layer1.visible_size(), "sample_local_prior init");
  Matrix out(z_init.size(), cfg.samples);
  if (cfg.restart_from_measurement) {
    const std::uint64_t base = rng.next_u64();
    kernels::parallel_for(cfg.samples, [&](Index d) {
      Rng chain(Rng::derive_seed(base, static_cast<std::uint64_t>(d)));
      Vector z = z_init;
      for (int s = 0; s < cfg.sweeps; ++s) z = frontal_sweep(model, z, chain);
      out.col(d) = z;
    });
    return out;
  }
  Vector z = z_init;
  for (Index d = 0; d < cfg.samples; ++d) {
    for (int s = 0; s < cfg.sweeps; ++s) z = frontal_sweep(model, z, rng);
    out.col(d) = z;
  }
  return out;
}

std::vector<ShapeVector> sample_local_prior(const FrontalPriorModel& model,
                                            const ShapeVector& x_init,
                                            const SamplerConfig& cfg, Rng& rng) {
  const Vector z_init = model.standardizer.apply(x_init.coords());
  const Matrix z = sample_local_prior_standardized(model, z_init, cfg, rng);
  return from_columns(model.standardizer.invert_columns(z));
}

}  // namespace faceprior
