#pragma once

#include "faceprior/correction.hpp"
#include "faceprior/json_io.hpp"
#include "faceprior/synth.hpp"

#include <filesystem>

namespace faceprior {

// Single RBM: {type, V, H, weights (row-major H x V), visible_bias,
// hidden_bias, standardizer {mean, std} | null}.
json::Json rbm_to_json(const BinaryRbmParams& p, const Standardizer* standardizer = nullptr);
json::Json rbm_to_json(const GbRbmParams& p, const Standardizer* standardizer = nullptr);
BinaryRbmParams binary_rbm_from_json(const json::Json& doc);
GbRbmParams gb_rbm_from_json(const json::Json& doc);

json::Json standardizer_to_json(const Standardizer& s);
Standardizer standardizer_from_json(const json::Json& doc, Index expected_dim);

json::Json threeway_to_json(const ThreeWayParams& p);
ThreeWayParams threeway_from_json(const json::Json& doc);

/// Full documents carry format_version and model_type ("frontal" | "pose").
json::Json model_to_json(const ShapePrior& model);
ShapePrior model_from_json(const json::Json& doc);

void save_model(const ShapePrior& model, const std::filesystem::path& path);
/// IoError when unreadable; FormatError naming the field on schema or version mismatch.
ShapePrior load_model(const std::filesystem::path& path);

/// {format_version, dim, sigma_l (row-major)}.
json::Json measurement_to_json(const MeasurementModel& mm);
MeasurementModel measurement_from_json(const json::Json& doc);

/// {format_version, points: 26 x [x, y, z], landmark_map: [{index, name, component}]}.
json::Json face_to_json(const CanonicalFace3D& face);
CanonicalFace3D face_from_json(const json::Json& doc);

}  // namespace faceprior
