#pragma once

#include "faceprior/common.hpp"

#include <array>
#include <string_view>
#include <vector>

namespace faceprior {

inline constexpr Index kLandmarks = 26;
inline constexpr Index kShapeDims = 2 * kLandmarks;

// Landmark layout (subject's left has negative x in the normalized frame):
//   0-2   left eyebrow (outer tip, middle, inner)   3-5   right eyebrow
//   6-9   left eye (outer, top, inner, bottom)       10-13 right eye
//   14-15 left nose (bridge side, nostril)           16-17 right nose
//   18-21 left mouth (corner, upper outer, upper inner, lower)
//   22-25 right mouth
// Right-side indices mirror the left ones in the same order.

enum class Component { eyebrow, eye, nose, mouth };
inline constexpr std::array<Component, 4> kComponents = {
    Component::eyebrow, Component::eye, Component::nose, Component::mouth};

std::string_view component_name(Component c);
Component component_of(Index landmark);

inline constexpr Index kLeftEyebrowTip = 0;
inline constexpr std::array<Index, 4> kLeftEye = {6, 7, 8, 9};
inline constexpr std::array<Index, 4> kRightEye = {10, 11, 12, 13};

/// The 13 landmarks on the subject's left half.
std::array<Index, 13> left_half_landmarks();

/// Bilateral counterpart of a landmark.
Index mirror_landmark(Index landmark);

/// 26 (x, y) landmarks laid out as [p1x, p1y, ..., p26x, p26y].
class ShapeVector {
 public:
  ShapeVector() : coords_(Vector::Zero(kShapeDims)) {}
  /// Throws DimensionError unless length is 52, ConfigError on non-finite.
  explicit ShapeVector(Vector coords);

  const Vector& coords() const { return coords_; }

  Eigen::Vector2d point(Index landmark) const {
    return {coords_(2 * landmark), coords_(2 * landmark + 1)};
  }
  void set_point(Index landmark, const Eigen::Vector2d& p) {
    coords_(2 * landmark) = p.x();
    coords_(2 * landmark + 1) = p.y();
  }

  bool operator==(const ShapeVector& other) const { return coords_ == other.coords_; }

 private:
  Vector coords_;
};

Eigen::Vector2d left_eye_center(const ShapeVector& s);
Eigen::Vector2d right_eye_center(const ShapeVector& s);
double interocular_distance(const ShapeVector& s);

/// Eye midpoint to the origin, eye line horizontal, interocular distance 1.
/// Throws ConfigError when the eye centers coincide.
ShapeVector normalize_by_eyes(const ShapeVector& s);

/// True when the eye centers sit at (-0.5, 0) and (0.5, 0) within `tol`.
bool is_eye_normalized(const ShapeVector& s, double tol = 1e-9);

/// Reflect x and swap left/right landmarks.
ShapeVector mirror(const ShapeVector& s);

/// Stack shapes as columns of a 52 x N matrix.
Matrix to_columns(const std::vector<ShapeVector>& shapes);
std::vector<ShapeVector> from_columns(const Matrix& columns);

}  // namespace faceprior
