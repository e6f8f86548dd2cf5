#include "faceprior/shape.hpp"

#include <cmath>
#include <string>

namespace faceprior {

std::string_view component_name(Component c) {
  switch (c) {
    case Component::eyebrow: return "eyebrow";
    case Component::eye: return "eye";
    case Component::nose: return "nose";
    case Component::mouth: return "mouth";
  }
  return "unknown";
}

Component component_of(Index landmark) {
  if (landmark < 0 || landmark >= kLandmarks) {
    throw ConfigError("landmark index out of range: " + std::to_string(landmark));
  }
  if (landmark < 6) return Component::eyebrow;
  if (landmark < 14) return Component::eye;
  if (landmark < 18) return Component::nose;
  return Component::mouth;
}

std::array<Index, 13> left_half_landmarks() {
  return {0, 1, 2, 6, 7, 8, 9, 14, 15, 18, 19, 20, 21};
}

Index mirror_landmark(Index landmark) {
  component_of(landmark);  // range check
  if (landmark < 6) return landmark < 3 ? landmark + 3 : landmark - 3;
  if (landmark < 14) return landmark < 10 ? landmark + 4 : landmark - 4;
  if (landmark < 18) return landmark < 16 ? landmark + 2 : landmark - 2;
  return landmark < 22 ? landmark + 4 : landmark - 4;
}

ShapeVector::ShapeVector(Vector coords) : coords_(std::move(coords)) {
  require_size(coords_.size(), kShapeDims, "ShapeVector");
  require_finite(coords_, "ShapeVector");
}

namespace {

Eigen::Vector2d eye_center(const ShapeVector& s, const std::array<Index, 4>& eye) {
  return ((s.point(eye[0]) + s.point(eye[1])) + (s.point(eye[2]) + s.point(eye[3]))) / 4.0;
}

}  // namespace

Eigen::Vector2d left_eye_center(const ShapeVector& s) { return eye_center(s, kLeftEye); }
Eigen::Vector2d right_eye_center(const ShapeVector& s) { return eye_center(s, kRightEye); }

double interocular_distance(const ShapeVector& s) {
  return (right_eye_center(s) - left_eye_center(s)).norm();
}

ShapeVector normalize_by_eyes(const ShapeVector& s) {
  const Eigen::Vector2d left = left_eye_center(s);
  const Eigen::Vector2d right = right_eye_center(s);
  const Eigen::Vector2d axis = right - left;
  const double dist = axis.norm();
  if (!(dist > 0.0)) {
    throw ConfigError("normalize_by_eyes: eye centers coincide");
  }
  const Eigen::Vector2d mid = (left + right) / 2.0;
  // Rotation taking the eye axis onto +x, folded together with the scale.
  const double c = axis.x() / (dist * dist);
  const double sn = axis.y() / (dist * dist);
  ShapeVector out;
  for (Index i = 0; i < kLandmarks; ++i) {
    const Eigen::Vector2d d = s.point(i) - mid;
    out.set_point(i, {c * d.x() + sn * d.y(), c * d.y() - sn * d.x()});
  }
  return out;
}

bool is_eye_normalized(const ShapeVector& s, double tol) {
  const Eigen::Vector2d left = left_eye_center(s);
  const Eigen::Vector2d right = right_eye_center(s);
  return (left - Eigen::Vector2d(-0.5, 0.0)).cwiseAbs().maxCoeff() <= tol &&
         (right - Eigen::Vector2d(0.5, 0.0)).cwiseAbs().maxCoeff() <= tol;
}

ShapeVector mirror(const ShapeVector& s) {
  ShapeVector out;
  for (Index i = 0; i < kLandmarks; ++i) {
    const Eigen::Vector2d p = s.point(i);
    out.set_point(mirror_landmark(i), {-p.x(), p.y()});
  }
  return out;
}

Matrix to_columns(const std::vector<ShapeVector>& shapes) {
  Matrix out(kShapeDims, static_cast<Index>(shapes.size()));
  for (std::size_t n = 0; n < shapes.size(); ++n) {
    out.col(static_cast<Index>(n)) = shapes[n].coords();
  }
  return out;
}

std::vector<ShapeVector> from_columns(const Matrix& columns) {
  std::vector<ShapeVector> out;
  out.reserve(static_cast<std::size_t>(columns.cols()));
  for (Index n = 0; n < columns.cols(); ++n) {
    out.emplace_back(Vector(columns.col(n)));
  }
  return out;
}

}  // namespace faceprior
