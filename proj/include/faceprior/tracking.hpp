#pragma once

#include "faceprior/correction.hpp"
#include "faceprior/records.hpp"

#include <array>
#include <optional>
#include <vector>

namespace faceprior {

/// Constant-velocity Kalman filter over n coordinates; state is
/// [positions (n), velocities (n)] with identity observation of positions.
struct KalmanState {
  Vector state;
  Matrix covariance;
  double process_noise_q = 1e-4;
  double measurement_noise_r = 1e-2;

  Index positions() const { return state.size() / 2; }

  /// Position = `position`, velocity 0, covariance initial_variance * I.
  static KalmanState initialize(const Vector& position, double q, double r,
                                double initial_variance);
  /// Throws NumericalError unless covariance is symmetric PSD.
  void validate() const;
};

struct KalmanStepResult {
  KalmanState state;
  Vector position;  // posterior mean positions
};

/// Predict, then update with measurement z (Joseph form).
KalmanStepResult kalman_step(const KalmanState& state, const Vector& z);

/// ||P_i - P^_i|| / D_I per landmark, D_I the truth's interocular distance.
Vector interocular_error(const ShapeVector& tracked, const ShapeVector& truth);

enum class TrackMode {
  fused,             // Kalman + local prior fusion
  measurement_only,  // raw measurements passed through
};

struct TrackOptions {
  TrackMode mode = TrackMode::fused;
  SamplerConfig sampler;
  FusionOptions fusion;
  double process_noise_q = 1e-4;
  /// Kalman measurement noise; trace(sigma_l) / dim when unset.
  std::optional<double> measurement_noise_r;
};

/// Errors for frames that carry ground truth, plus the raw-measurement baseline.
struct TrackReport {
  std::vector<ShapeVector> tracked;
  std::vector<int> frame_index;  // frame of each error row
  std::vector<Vector> errors;    // per-point error of the tracked shape
  std::vector<Vector> baseline;  // per-point error of the raw measurement

  std::array<double, 4> component_mean{};
  std::array<double, 4> baseline_component_mean{};
  double overall = 0.0;
  double baseline_overall = 0.0;
  double improvement_percent = 0.0;

  /// Fills the summary fields from the error rows.
  void summarize();
};

/// Per frame: Kalman predict, sample the prior around the measurement, fuse,
/// and update the filter with the fused shape. Frame 0 initializes the filter
/// with its corrected shape. Frame f draws from Rng(derive_seed(seed, f)).
TrackReport track_sequence(const ShapeSequence& seq, const ShapePrior& prior,
                           const TrackOptions& options, std::uint64_t seed);

/// Tracks sequences in parallel (sequence s uses derive_seed(seed, s)) and
/// returns one report per sequence.
std::vector<TrackReport> track_sequences(const std::vector<ShapeSequence>& seqs,
                                         const ShapePrior& prior, const TrackOptions& options,
                                         std::uint64_t seed);

/// Pools the error rows of several reports.
TrackReport merge_reports(const std::vector<TrackReport>& reports);

}  // namespace faceprior
