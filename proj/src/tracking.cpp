#include "faceprior/tracking.hpp"

#include "faceprior/kernels.hpp"

#include <cmath>
#include <string>

namespace faceprior {

KalmanState KalmanState::initialize(const Vector& position, double q, double r,
                                    double initial_variance) {
  if (!(q >= 0.0) || !(r > 0.0) || !(initial_variance >= 0.0)) {
    throw ConfigError("Kalman noise levels must satisfy q >= 0, r > 0, initial variance >= 0");
  }
  const Index n = position.size();
  KalmanState s;
  s.state = Vector::Zero(2 * n);
  s.state.head(n) = position;
  s.covariance = initial_variance * Matrix::Identity(2 * n, 2 * n);
  s.process_noise_q = q;
  s.measurement_noise_r = r;
  return s;
}

void KalmanState::validate() const {
  if (state.size() % 2 != 0 || state.size() == 0) {
    throw DimensionError("Kalman state must hold positions and velocities");
  }
  require_size(covariance.rows(), state.size(), "Kalman covariance rows");
  require_size(covariance.cols(), state.size(), "Kalman covariance cols");
  if (!covariance.allFinite() || !state.allFinite()) {
    throw NumericalError("Kalman state has non-finite entries");
  }
  const double scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw NumericalError("Kalman covariance is not symmetric");
  }
  const Eigen::LDLT<Matrix> ldlt(covariance);
  if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() < -1e-9 * scale) {
    throw NumericalError("Kalman covariance is not positive semidefinite");
  }
}

KalmanStepResult kalman_step(const KalmanState& s, const Vector& z) {
  s.validate();
  const Index n = s.positions();
  require_size(z.size(), n, "Kalman measurement");

  // Predict: p' = p + v, v' = v, with white-acceleration process noise.
  Vector x = s.state;
  x.head(n) += s.state.tail(n);
  const Matrix& p = s.covariance;
  Matrix pp(2 * n, 2 * n);
  const auto pxx = p.topLeftCorner(n, n);
  const auto pxv = p.topRightCorner(n, n);
  const auto pvx = p.bottomLeftCorner(n, n);
  const auto pvv = p.bottomRightCorner(n, n);
  const Matrix eye = Matrix::Identity(n, n);
  const double q = s.process_noise_q;
  pp.topLeftCorner(n, n) = pxx + pxv + pvx + pvv + (q / 3.0) * eye;
  pp.topRightCorner(n, n) = pxv + pvv + (q / 2.0) * eye;
  pp.bottomLeftCorner(n, n) = pvx + pvv + (q / 2.0) * eye;
  pp.bottomRightCorner(n, n) = pvv + q * eye;

  // Update with H = [I 0].
  const double r = s.measurement_noise_r;
  Matrix innovation_cov = pp.topLeftCorner(n, n);
  innovation_cov.diagonal().array() += r;
  const Eigen::LLT<Matrix> llt(innovation_cov);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("Kalman innovation covariance is not positive definite");
  }
  const Matrix gain = llt.solve(pp.leftCols(n).transpose()).transpose();  // 2n x n
  x += gain * (z - x.head(n));

  Matrix i_kh = Matrix::Identity(2 * n, 2 * n);
  i_kh.leftCols(n) -= gain;
  const Matrix joseph = i_kh * pp * i_kh.transpose() + r * gain * gain.transpose();
  Matrix updated = 0.5 * (joseph + joseph.transpose());

  KalmanStepResult out;
  out.state = s;
  out.state.state = x;
  out.state.covariance = std::move(updated);
  out.position = x.head(n);
  return out;
}

Vector interocular_error(const ShapeVector& tracked, const ShapeVector& truth) {
  const double iod = interocular_distance(truth);
  if (!(iod > 0.0)) {
    throw ConfigError("interocular_error: truth has zero interocular distance");
  }
  Vector err(kLandmarks);
  for (Index i = 0; i < kLandmarks; ++i) {
    err(i) = (tracked.point(i) - truth.point(i)).norm() / iod;
  }
  return err;
}

void TrackReport::summarize() {
  std::array<double, 4> sum{};
  std::array<double, 4> base_sum{};
  std::array<double, 4> count{};
  double total = 0.0;
  double base_total = 0.0;
  for (std::size_t row = 0; row < errors.size(); ++row) {
    for (Index i = 0; i < kLandmarks; ++i) {
      const auto c = static_cast<std::size_t>(component_of(i));
      sum[c] += errors[row](i);
      base_sum[c] += baseline[row](i);
      count[c] += 1.0;
      total += errors[row](i);
      base_total += baseline[row](i);
    }
  }
  const double n = static_cast<double>(errors.size() * kLandmarks);
  for (std::size_t c = 0; c < 4; ++c) {
    component_mean[c] = count[c] > 0 ? sum[c] / count[c] : 0.0;
    baseline_component_mean[c] = count[c] > 0 ? base_sum[c] / count[c] : 0.0;
  }
  overall = n > 0 ? total / n : 0.0;
  baseline_overall = n > 0 ? base_total / n : 0.0;
  improvement_percent =
      baseline_overall > 0.0 ? 100.0 * (baseline_overall - overall) / baseline_overall : 0.0;
}

TrackReport track_sequence(const ShapeSequence& seq, const ShapePrior& prior,
                           const TrackOptions& options, std::uint64_t seed) {
  seq.validate();
  TrackReport report;
  report.tracked.reserve(seq.frames.size());

  if (options.mode == TrackMode::measurement_only) {
    for (const auto& frame : seq.frames) report.tracked.push_back(frame.measurement);
  } else {
    const MeasurementModel& mm = options.fusion.measurement;
    require_size(mm.dim(), kShapeDims, "track_sequence sigma_l");
    const double r = options.measurement_noise_r.value_or(mm.sigma_l.trace() /
                                                          static_cast<double>(mm.dim()));
    std::optional<KalmanState> filter;
    for (std::size_t f = 0; f < seq.frames.size(); ++f) {
      Rng rng(Rng::derive_seed(seed, f));
      const ShapeVector fused = correct_shape(prior, seq.frames[f].measurement, options.sampler,
                                              options.fusion, rng);
      if (!filter) {
        filter = KalmanState::initialize(fused.coords(), options.process_noise_q, r, r);
        report.tracked.push_back(fused);
        continue;
      }
      KalmanStepResult step = kalman_step(*filter, fused.coords());
      filter = std::move(step.state);
      report.tracked.emplace_back(std::move(step.position));
    }
  }

  for (std::size_t f = 0; f < seq.frames.size(); ++f) {
    const auto& frame = seq.frames[f];
    if (!frame.ground_truth) continue;
    report.frame_index.push_back(static_cast<int>(f));
    report.errors.push_back(interocular_error(report.tracked[f], *frame.ground_truth));
    report.baseline.push_back(interocular_error(frame.measurement, *frame.ground_truth));
  }
  report.summarize();
  return report;
}

std::vector<TrackReport> track_sequences(const std::vector<ShapeSequence>& seqs,
                                         const ShapePrior& prior, const TrackOptions& options,
                                         std::uint64_t seed) {
  std::vector<TrackReport> reports(seqs.size());
  kernels::parallel_for(static_cast<Index>(seqs.size()), [&](Index s) {
    const auto slot = static_cast<std::size_t>(s);
    reports[slot] = track_sequence(seqs[slot], prior, options,
                                   Rng::derive_seed(seed, static_cast<std::uint64_t>(s)));
  });
  return reports;
}

TrackReport merge_reports(const std::vector<TrackReport>& reports) {
  TrackReport merged;
  for (const auto& r : reports) {
    merged.tracked.insert(merged.tracked.end(), r.tracked.begin(), r.tracked.end());
    merged.frame_index.insert(merged.frame_index.end(), r.frame_index.begin(),
                              r.frame_index.end());
    merged.errors.insert(merged.errors.end(), r.errors.begin(), r.errors.end());
    merged.baseline.insert(merged.baseline.end(), r.baseline.begin(), r.baseline.end());
  }
  merged.summarize();
  return merged;
}

}  // namespace faceprior
