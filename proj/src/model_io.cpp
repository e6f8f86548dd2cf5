#include "faceprior/model_io.hpp"

#include <array>
#include <string>

namespace faceprior {

using json::Json;

namespace {

Index read_size(const Json& doc, const char* name) {
  const Json& v = json::field(doc, name);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw FormatError(std::string("field '") + name + "' must be a non-negative integer");
  }
  return static_cast<Index>(v.get<long long>());
}

Json weights_to_json(const char* type, const RbmWeights& p, const Standardizer* standardizer) {
  p.validate();
  Json doc;
  doc["type"] = type;
  doc["V"] = p.visible_size();
  doc["H"] = p.hidden_size();
  doc["weights"] = json::from_matrix_row_major(p.weights);
  doc["visible_bias"] = json::from_vector(p.visible_bias);
  doc["hidden_bias"] = json::from_vector(p.hidden_bias);
  doc["standardizer"] = standardizer ? standardizer_to_json(*standardizer) : Json(nullptr);
  return doc;
}

void weights_from_json(const Json& doc, const char* type, RbmWeights& p) {
  const Json& t = json::field(doc, "type");
  if (!t.is_string() || t.get<std::string>() != type) {
    throw FormatError(std::string("field 'type' must be \"") + type + "\"");
  }
  const Index v = read_size(doc, "V");
  const Index h = read_size(doc, "H");
  p.weights = json::to_matrix_row_major(json::field(doc, "weights"), "weights", h, v);
  p.visible_bias = json::to_vector(json::field(doc, "visible_bias"), "visible_bias", v);
  p.hidden_bias = json::to_vector(json::field(doc, "hidden_bias"), "hidden_bias", h);
}

const char* const kLandmarkNames[kLandmarks] = {
    "left_eyebrow_outer", "left_eyebrow_middle", "left_eyebrow_inner",
    "right_eyebrow_outer", "right_eyebrow_middle", "right_eyebrow_inner",
    "left_eye_outer", "left_eye_top", "left_eye_inner", "left_eye_bottom",
    "right_eye_outer", "right_eye_top", "right_eye_inner", "right_eye_bottom",
    "left_nose_bridge", "left_nostril", "right_nose_bridge", "right_nostril",
    "left_mouth_corner", "left_mouth_upper_outer", "left_mouth_upper_inner", "left_mouth_lower",
    "right_mouth_corner", "right_mouth_upper_outer", "right_mouth_upper_inner",
    "right_mouth_lower"};

}  // namespace

Json standardizer_to_json(const Standardizer& s) {
  s.validate();
  Json doc;
  doc["mean"] = json::from_vector(s.mean);
  doc["std"] = json::from_vector(s.std);
  return doc;
}

Standardizer standardizer_from_json(const Json& doc, Index expected_dim) {
  if (doc.is_null()) throw FormatError("missing field 'standardizer'");
  Standardizer s;
  s.mean = json::to_vector(json::field(doc, "mean"), "mean", expected_dim);
  s.std = json::to_vector(json::field(doc, "std"), "std", expected_dim);
  try {
    s.validate();
  } catch (const std::exception& e) {
    throw FormatError(std::string("field 'standardizer': ") + e.what());
  }
  return s;
}

Json rbm_to_json(const BinaryRbmParams& p, const Standardizer* standardizer) {
  return weights_to_json("binary", p, standardizer);
}

Json rbm_to_json(const GbRbmParams& p, const Standardizer* standardizer) {
  return weights_to_json("gb", p, standardizer);
}

BinaryRbmParams binary_rbm_from_json(const Json& doc) {
  BinaryRbmParams p;
  weights_from_json(doc, "binary", p);
  return p;
}

GbRbmParams gb_rbm_from_json(const Json& doc) {
  GbRbmParams p;
  weights_from_json(doc, "gb", p);
  return p;
}

Json threeway_to_json(const ThreeWayParams& p) {
  p.validate();
  Json doc;
  doc["V"] = p.visible_size();
  doc["K"] = p.hidden_size();
  doc["F"] = p.factor_count();
  doc["factor_x"] = json::from_matrix_row_major(p.factor_x);
  doc["factor_y"] = json::from_matrix_row_major(p.factor_y);
  doc["factor_h"] = json::from_matrix_row_major(p.factor_h);
  doc["bias_x"] = json::from_vector(p.bias_x);
  doc["bias_y"] = json::from_vector(p.bias_y);
  doc["bias_h"] = json::from_vector(p.bias_h);
  return doc;
}

ThreeWayParams threeway_from_json(const Json& doc) {
  const Index v = read_size(doc, "V");
  const Index k = read_size(doc, "K");
  const Index f = read_size(doc, "F");
  ThreeWayParams p;
  p.factor_x = json::to_matrix_row_major(json::field(doc, "factor_x"), "factor_x", v, f);
  p.factor_y = json::to_matrix_row_major(json::field(doc, "factor_y"), "factor_y", v, f);
  p.factor_h = json::to_matrix_row_major(json::field(doc, "factor_h"), "factor_h", k, f);
  p.bias_x = json::to_vector(json::field(doc, "bias_x"), "bias_x", v);
  p.bias_y = json::to_vector(json::field(doc, "bias_y"), "bias_y", v);
  p.bias_h = json::to_vector(json::field(doc, "bias_h"), "bias_h", k);
  return p;
}

namespace {

Json frontal_body(const FrontalPriorModel& m) {
  m.validate();
  Json doc;
  doc["H1"] = m.hidden1();
  doc["H2"] = m.hidden2();
  doc["layer1"] = rbm_to_json(m.layer1, &m.standardizer);
  doc["layer2"] = rbm_to_json(m.layer2);
  return doc;
}

FrontalPriorModel frontal_from_body(const Json& doc) {
  FrontalPriorModel m;
  const Json& l1 = json::field(doc, "layer1");
  m.layer1 = gb_rbm_from_json(l1);
  m.layer2 = binary_rbm_from_json(json::field(doc, "layer2"));
  m.standardizer = standardizer_from_json(json::field(l1, "standardizer"), m.layer1.visible_size());
  if (read_size(doc, "H1") != m.hidden1() || read_size(doc, "H2") != m.hidden2()) {
    throw FormatError("fields 'H1'/'H2' disagree with the layer sizes");
  }
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("frontal model: ") + e.what());
  }
  return m;
}

}  // namespace

Json model_to_json(const ShapePrior& model) {
  Json doc;
  doc["format_version"] = json::kFormatVersion;
  if (const auto* f = std::get_if<FrontalPriorModel>(&model)) {
    doc["model_type"] = "frontal";
    doc.update(frontal_body(*f));
    return doc;
  }
  const auto& p = std::get<PosePriorModel>(model);
  p.validate();
  doc["model_type"] = "pose";
  doc["frontal"] = frontal_body(p.frontal);
  doc["transfer"] = threeway_to_json(p.transfer);
  doc["x_standardizer"] = standardizer_to_json(p.x_standardizer);
  doc["y_standardizer"] = standardizer_to_json(p.y_standardizer);
  return doc;
}

ShapePrior model_from_json(const Json& doc) {
  json::check_version(doc, "model");
  const Json& type = json::field(doc, "model_type");
  if (!type.is_string()) throw FormatError("field 'model_type' must be a string");
  const auto name = type.get<std::string>();
  if (name == "frontal") return frontal_from_body(doc);
  if (name != "pose") {
    throw FormatError("field 'model_type' has unknown value '" + name + "'");
  }
  PosePriorModel p;
  p.frontal = frontal_from_body(json::field(doc, "frontal"));
  p.transfer = threeway_from_json(json::field(doc, "transfer"));
  const Index v = p.transfer.visible_size();
  p.x_standardizer = standardizer_from_json(json::field(doc, "x_standardizer"), v);
  p.y_standardizer = standardizer_from_json(json::field(doc, "y_standardizer"), v);
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("pose model: ") + e.what());
  }
  return p;
}

void save_model(const ShapePrior& model, const std::filesystem::path& path) {
  json::write_file(path, model_to_json(model));
}

ShapePrior load_model(const std::filesystem::path& path) {
  return model_from_json(json::read_file(path));
}

Json measurement_to_json(const MeasurementModel& mm) {
  mm.validate();
  Json doc;
  doc["format_version"] = json::kFormatVersion;
  doc["dim"] = mm.dim();
  doc["sigma_l"] = json::from_matrix_row_major(mm.sigma_l);
  return doc;
}

MeasurementModel measurement_from_json(const Json& doc) {
  json::check_version(doc, "measurement model");
  const Index dim = read_size(doc, "dim");
  MeasurementModel mm;
  mm.sigma_l = json::to_matrix_row_major(json::field(doc, "sigma_l"), "sigma_l", dim, dim);
  mm.validate();
  return mm;
}

Json face_to_json(const CanonicalFace3D& face) {
  Json doc;
  doc["format_version"] = json::kFormatVersion;
  Json points = Json::array();
  for (const auto& p : face.points) points.push_back(Json::array({p.x(), p.y(), p.z()}));
  doc["points"] = std::move(points);
  Json map = Json::array();
  for (Index i = 0; i < kLandmarks; ++i) {
    Json entry;
    entry["index"] = i;
    entry["name"] = kLandmarkNames[i];
    entry["component"] = std::string(component_name(component_of(i)));
    map.push_back(std::move(entry));
  }
  doc["landmark_map"] = std::move(map);
  return doc;
}

CanonicalFace3D face_from_json(const Json& doc) {
  json::check_version(doc, "face template");
  const Json& points = json::field(doc, "points");
  if (!points.is_array() || points.size() != static_cast<std::size_t>(kLandmarks)) {
    throw FormatError("field 'points' must hold 26 entries");
  }
  CanonicalFace3D face;
  for (Index i = 0; i < kLandmarks; ++i) {
    const Vector p = json::to_vector(points[static_cast<std::size_t>(i)], "points", 3);
    face.points[static_cast<std::size_t>(i)] = p;
  }
  return face;
}

}  // namespace faceprior
