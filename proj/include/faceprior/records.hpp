#pragma once

#include "faceprior/shape.hpp"

#include <optional>
#include <string>
#include <vector>

namespace faceprior {

/// One frontal (or posed) shape of a corpus.
struct ShapeRecord {
  std::string id;
  std::string expression_label;
  double pose_deg = 0.0;
  ShapeVector coords;
};

/// A frontal shape x and the same face seen at pose_deg, y.
struct PairRecord {
  std::string id;
  std::string expression_label;
  double pose_deg = 0.0;
  ShapeVector frontal;
  ShapeVector posed;
};

struct SequenceFrame {
  ShapeVector measurement;
  std::optional<ShapeVector> ground_truth;
  double pose_deg = 0.0;
  std::string expression_label;
};

struct ShapeSequence {
  std::string id;
  std::vector<SequenceFrame> frames;

  /// Throws ConfigError on an empty sequence.
  void validate() const;
};

}  // namespace faceprior
