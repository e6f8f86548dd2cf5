#pragma once

#include "faceprior/records.hpp"
#include "faceprior/rng.hpp"
#include "faceprior/shape.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace faceprior {

/// Frontal 3-D face template, interocular distance 1, bilaterally symmetric.
struct CanonicalFace3D {
  std::array<Eigen::Vector3d, kLandmarks> points;

  /// The built-in template; data/canonical_face.json holds the same values.
  static const CanonicalFace3D& standard();

  ShapeVector frontal_shape() const;
  Vector depths() const;
};

enum class Expression { neutral, anger, disgust, fear, happiness, sadness, surprise };

inline constexpr std::array<Expression, 7> kExpressions = {
    Expression::neutral,   Expression::anger,   Expression::disgust, Expression::fear,
    Expression::happiness, Expression::sadness, Expression::surprise};

std::string_view expression_name(Expression e);
/// Throws ConfigError for an unknown label.
Expression parse_expression(std::string_view label);

struct ExpressionSpec {
  Expression label = Expression::neutral;
  double intensity = 0.0;  // [0, 1]
};

/// Displacement added to the template at full intensity. Zero for neutral.
const Vector& expression_mode(Expression e);

/// Template + intensity * mode + N(0, identity_std^2) per coordinate, then
/// eye-normalized. The perturbation is a pure function of identity_seed.
ShapeVector generate_shape(const ExpressionSpec& expr, std::uint64_t identity_seed,
                           double identity_std = 0.02);

/// x' = x cos(theta) + z sin(theta), y' = y, before any normalization.
ShapeVector rotate_about_vertical(const ShapeVector& shape, const Vector& depths,
                                  double theta_deg);

inline constexpr double kMaxPoseDeg = 50.0;

/// Attach template depths, rotate about the vertical axis, project
/// orthographically, re-normalize by the eyes. Requires |theta| < 50.
ShapeVector project_pose(const ShapeVector& shape, double theta_deg,
                         const CanonicalFace3D& face = CanonicalFace3D::standard());

enum class CorruptionMode { outlier_point, half_face, additive_noise };

std::string_view corruption_name(CorruptionMode m);
CorruptionMode parse_corruption(std::string_view name);

struct CorruptionSpec {
  CorruptionMode mode = CorruptionMode::outlier_point;
  /// outlier_point: displaced landmarks. half_face: defaults to the left half
  /// when empty. additive_noise: ignored, every landmark is perturbed.
  std::vector<Index> targets;
  double magnitude = 0.0;  // interocular units

  /// Landmarks this spec touches.
  std::vector<Index> affected_landmarks() const;
  void validate() const;
};

ShapeVector corrupt(const ShapeVector& shape, const CorruptionSpec& spec, Rng& rng);

struct DatasetOptions {
  int n = 2000;
  std::vector<Expression> expressions{kExpressions.begin(), kExpressions.end()};
  double min_intensity = 0.3;
  double identity_std = 0.02;
  /// Each frontal shape gets one pair at a pose drawn from this list.
  std::vector<double> poses_deg;
  double pair_noise = 0.0;
  int sequences = 0;
  int sequence_length = 20;
  double sequence_pose_deg = 0.0;
  double measurement_noise = 0.05;
  double outlier_frame_prob = 0.1;
  int outlier_points = 4;
  double outlier_magnitude = 0.4;

  void validate() const;
};

struct Dataset {
  std::vector<ShapeRecord> frontal;
  std::vector<PairRecord> pairs;
  std::vector<ShapeSequence> sequences;
};

Dataset make_dataset(const DatasetOptions& options, Rng& rng);

/// Ground-truth intensity of frame t in a neutral -> apex sequence.
double onset_apex_intensity(int frame, int length, double apex);

}  // namespace faceprior
