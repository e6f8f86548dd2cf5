// Serial reference vs OpenMP timings for the hot kernels and the local-prior
// sampler. Arg(0) selects the serial backend, Arg(1) the OpenMP one.

#include "faceprior/frontal_prior.hpp"
#include "faceprior/kernels.hpp"
#include "faceprior/synth.hpp"

#include <benchmark/benchmark.h>

using namespace faceprior;
using kernels::Backend;

namespace {

Backend backend_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Backend::serial : Backend::openmp;
}

Matrix random_matrix(Index r, Index c, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

void BM_SigmoidAffine(benchmark::State& state) {
  const Matrix w = random_matrix(50, kShapeDims, 1);
  const Vector c = random_matrix(50, 1, 2);
  const Matrix x = random_matrix(kShapeDims, 256, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::sigmoid_affine(w, c, x, backend_of(state)));
  }
}

void BM_MeanOuter(benchmark::State& state) {
  const Matrix h = random_matrix(50, 256, 4);
  const Matrix v = random_matrix(kShapeDims, 256, 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::mean_outer(h, v, backend_of(state)));
  }
}

void BM_Mahalanobis(benchmark::State& state) {
  const Matrix a = random_matrix(kShapeDims, kShapeDims, 6);
  const Eigen::LLT<Matrix> llt(a * a.transpose() + Matrix::Identity(kShapeDims, kShapeDims));
  const Vector p = random_matrix(kShapeDims, 1, 7);
  const Matrix samples = random_matrix(kShapeDims, 100, 8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::mahalanobis_sq(llt, p, samples, backend_of(state)));
  }
}

void BM_LocalPriorSampling(benchmark::State& state) {
  DatasetOptions o;
  o.n = 200;
  Rng data_rng(9);
  std::vector<ShapeVector> shapes;
  for (auto& r : make_dataset(o, data_rng).frontal) shapes.push_back(r.coords);
  TrainConfig cfg;
  cfg.epochs = 5;
  const FrontalPriorModel model = train_frontal(shapes, FrontalSizes{}, cfg);
  const Backend saved = kernels::default_backend();
  kernels::set_default_backend(backend_of(state));
  for (auto _ : state) {
    Rng rng(10);
    benchmark::DoNotOptimize(sample_local_prior(model, shapes[0], SamplerConfig{}, rng));
  }
  kernels::set_default_backend(saved);
}

}  // namespace

BENCHMARK(BM_SigmoidAffine)->Arg(0)->Arg(1);
BENCHMARK(BM_MeanOuter)->Arg(0)->Arg(1);
BENCHMARK(BM_Mahalanobis)->Arg(0)->Arg(1);
BENCHMARK(BM_LocalPriorSampling)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
