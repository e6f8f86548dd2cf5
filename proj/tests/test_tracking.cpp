#include "faceprior/kernels.hpp"
#include "faceprior/synth.hpp"
#include "faceprior/tracking.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace faceprior;

namespace {

Vector gaussian(Index n, Rng& rng, double scale = 1.0) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = scale * rng.normal();
  return v;
}

ShapeVector similarity(const ShapeVector& s, double angle, double scale, Eigen::Vector2d t) {
  Eigen::Matrix2d r;
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  ShapeVector out = s;
  for (Index i = 0; i < kLandmarks; ++i) out.set_point(i, scale * (r * s.point(i)) + t);
  return out;
}

Dataset sequences(int count, int length, std::uint64_t seed) {
  DatasetOptions o;
  o.n = 1;
  o.sequences = count;
  o.sequence_length = length;
  Rng rng(seed);
  return make_dataset(o, rng);
}

const FrontalPriorModel& tiny_model() {
  static const FrontalPriorModel m = [] {
    DatasetOptions o;
    o.n = 200;
    Rng rng(2);
    std::vector<ShapeVector> shapes;
    for (auto& r : make_dataset(o, rng).frontal) shapes.push_back(r.coords);
    TrainConfig cfg;
    cfg.epochs = 20;
    return train_frontal(shapes, {16, 8}, cfg);
  }();
  return m;
}

TrackOptions fused_options() {
  TrackOptions to;
  to.sampler = {2, 20, true};
  to.fusion.measurement = MeasurementModel::isotropic(kShapeDims, 0.05 * 0.05);
  return to;
}

}  // namespace

TEST(Tracking, ErrorMetricIsSimilarityInvariant) {
  Rng rng(1);
  const auto ds = sequences(1, 3, 4);
  const ShapeVector truth = *ds.sequences[0].frames[2].ground_truth;
  const ShapeVector est = ds.sequences[0].frames[2].measurement;
  const Vector base = interocular_error(est, truth);
  for (int t = 0; t < 20; ++t) {
    const double angle = 2.0 * std::numbers::pi * rng.uniform();
    const double scale = 0.2 + 5.0 * rng.uniform();
    const Eigen::Vector2d shift(rng.normal() * 10.0, rng.normal() * 10.0);
    const Vector moved = interocular_error(similarity(est, angle, scale, shift),
                                           similarity(truth, angle, scale, shift));
    EXPECT_LT((moved - base).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Tracking, ZeroInterocularDistanceRejected) {
  EXPECT_THROW(interocular_error(ShapeVector(), ShapeVector()), ConfigError);
}

TEST(Tracking, KalmanCovarianceStaysSymmetricPsd) {
  Rng rng(2);
  KalmanState s = KalmanState::initialize(gaussian(3, rng), 1e-4, 2.5e-3, 2.5e-3);
  double worst = 0.0;
  for (int step = 0; step < 10000; ++step) {
    s = kalman_step(s, s.state.head(3) + gaussian(3, rng, 0.05)).state;
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(s.covariance);
    worst = std::min(worst, eig.eigenvalues().minCoeff());
    ASSERT_EQ((s.covariance - s.covariance.transpose()).cwiseAbs().maxCoeff(), 0.0);
  }
  EXPECT_GT(worst, -1e-9);
}

TEST(Tracking, KalmanFollowsConstantVelocity) {
  KalmanState s = KalmanState::initialize(Vector::Zero(1), 1e-6, 1e-4, 1.0);
  Vector z(1);
  for (int t = 1; t <= 200; ++t) {
    z(0) = 0.01 * t;
    s = kalman_step(s, z).state;
  }
  EXPECT_NEAR(s.state(1), 0.01, 1e-4);
  EXPECT_NEAR(s.state(0), 2.0, 1e-3);
}

TEST(Tracking, InvalidNoiseRejected) {
  EXPECT_THROW(KalmanState::initialize(Vector::Zero(2), -1.0, 1.0, 1.0), ConfigError);
  EXPECT_THROW(KalmanState::initialize(Vector::Zero(2), 1.0, 0.0, 1.0), ConfigError);
}

TEST(Tracking, ReportOverallIsMeanOfAllErrors) {
  const auto ds = sequences(2, 6, 5);
  const auto r = merge_reports(track_sequences(ds.sequences, tiny_model(), fused_options(), 3));
  double total = 0.0;
  double count = 0.0;
  for (const auto& row : r.errors) {
    total += row.sum();
    count += static_cast<double>(row.size());
  }
  EXPECT_NEAR(r.overall, total / count, 1e-12);
  EXPECT_EQ(r.errors.size(), 12u);
}

TEST(Tracking, MeasurementOnlyReproducesRawErrors) {
  const auto ds = sequences(3, 5, 6);
  TrackOptions to;
  to.mode = TrackMode::measurement_only;
  for (std::size_t s = 0; s < ds.sequences.size(); ++s) {
    const auto r = track_sequence(ds.sequences[s], tiny_model(), to, 1);
    for (std::size_t f = 0; f < r.errors.size(); ++f) {
      const auto& frame = ds.sequences[s].frames[f];
      EXPECT_TRUE(r.errors[f] == interocular_error(frame.measurement, *frame.ground_truth));
      EXPECT_TRUE(r.errors[f] == r.baseline[f]);
    }
    EXPECT_EQ(r.overall, r.baseline_overall);
  }
}

TEST(Tracking, SingleFrameEqualsCorrectShape) {
  const auto ds = sequences(1, 1, 7);
  const auto to = fused_options();
  const auto r = track_sequence(ds.sequences[0], tiny_model(), to, 11);
  Rng rng(Rng::derive_seed(11, 0));
  const auto c = correct_shape(tiny_model(), ds.sequences[0].frames[0].measurement, to.sampler,
                               to.fusion, rng);
  EXPECT_TRUE(r.tracked[0] == c);
}

TEST(Tracking, ParallelTrackingMatchesSerial) {
  const auto ds = sequences(4, 4, 8);
  const auto par = track_sequences(ds.sequences, tiny_model(), fused_options(), 5);
  kernels::set_default_backend(kernels::Backend::serial);
  const auto ser = track_sequences(ds.sequences, tiny_model(), fused_options(), 5);
  kernels::set_default_backend(kernels::Backend::openmp);
  for (std::size_t s = 0; s < par.size(); ++s) {
    for (std::size_t f = 0; f < par[s].tracked.size(); ++f) {
      EXPECT_TRUE(par[s].tracked[f] == ser[s].tracked[f]);
    }
  }
}

TEST(Tracking, ComponentMeansUseLandmarkMap) {
  TrackReport r;
  Vector e = Vector::Zero(kLandmarks);
  for (Index i = 0; i < kLandmarks; ++i) e(i) = static_cast<double>(component_of(i)) + 1.0;
  r.errors = {e};
  r.baseline = {2.0 * e};
  r.summarize();
  for (std::size_t c = 0; c < 4; ++c) {
    EXPECT_DOUBLE_EQ(r.component_mean[c], static_cast<double>(c) + 1.0);
  }
  EXPECT_DOUBLE_EQ(r.improvement_percent, 50.0);
}
