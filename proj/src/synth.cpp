#include "faceprior/synth.hpp"

#include "faceprior/kernels.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <set>
#include <sstream>

namespace faceprior {

namespace {

struct LeftPoint {
  double x, y, z;
};

// Left-half template (landmarks 0-2, 6-9, 14-15, 18-21). Right side mirrors x.
constexpr std::array<std::pair<Index, LeftPoint>, 13> kLeftTemplate = {{
    {0, {-0.80, 0.32, -0.05}},   // eyebrow outer tip
    {1, {-0.52, 0.42, 0.08}},    // eyebrow middle
    {2, {-0.20, 0.36, 0.12}},    // eyebrow inner
    {6, {-0.74, 0.0, -0.08}},    // eye outer corner
    {7, {-0.50, 0.065, 0.03}},   // eye top
    {8, {-0.26, 0.0, 0.02}},     // eye inner corner
    {9, {-0.50, -0.065, 0.01}},  // eye bottom
    {14, {-0.10, -0.30, 0.30}},  // nose, bridge side
    {15, {-0.16, -0.62, 0.28}},  // nostril
    {18, {-0.40, -0.98, 0.08}},  // mouth corner
    {19, {-0.20, -0.90, 0.20}},  // upper lip, outer
    {20, {-0.07, -0.93, 0.24}},  // upper lip, inner
    {21, {-0.16, -1.10, 0.20}},  // lower lip
}};

struct Displacement {
  Index landmark;
  double dx, dy;
};

// Left-side displacements at full intensity; the right side mirrors dx.
// Eye modes move top and bottom by opposite amounts so eye centers stay put.
const std::vector<Displacement>& left_mode(Expression e) {
  static const std::vector<Displacement> none;
  static const std::vector<Displacement> anger = {
      {0, 0.02, -0.04}, {1, 0.03, -0.09}, {2, 0.06, -0.14}, {7, 0.0, -0.025},
      {9, 0.0, 0.025},  {15, -0.01, 0.0}, {18, 0.04, 0.0},  {19, 0.01, -0.04},
      {20, 0.0, -0.03}, {21, 0.01, 0.06}};
  static const std::vector<Displacement> disgust = {
      {0, 0.0, -0.03},  {1, 0.01, -0.06}, {2, 0.03, -0.08}, {7, 0.0, -0.02},
      {9, 0.0, 0.02},   {14, -0.01, 0.03}, {15, -0.03, 0.06}, {18, 0.02, -0.05},
      {19, 0.0, 0.10},  {20, 0.0, 0.12},  {21, 0.0, 0.03}};
  static const std::vector<Displacement> fear = {
      {0, 0.0, 0.08},    {1, 0.01, 0.12},   {2, 0.04, 0.13},  {7, 0.0, 0.04},
      {9, 0.0, -0.04},   {18, -0.10, -0.04}, {19, -0.04, -0.01}, {20, 0.0, -0.01},
      {21, -0.02, -0.10}};
  static const std::vector<Displacement> happiness = {
      {0, 0.0, 0.02},    {1, 0.0, 0.03},    {2, 0.0, 0.02},   {7, 0.0, -0.02},
      {9, 0.0, 0.02},    {15, -0.02, 0.03}, {18, -0.08, 0.12}, {19, -0.03, 0.05},
      {20, 0.0, 0.02},   {21, -0.02, -0.04}};
  static const std::vector<Displacement> sadness = {
      {0, 0.0, -0.05},  {1, 0.0, 0.02},   {2, 0.02, 0.10},  {7, 0.0, -0.015},
      {9, 0.0, 0.015},  {18, 0.02, -0.10}, {19, 0.0, -0.02}, {20, 0.0, -0.01},
      {21, 0.0, 0.04}};
  static const std::vector<Displacement> surprise = {
      {0, 0.0, 0.14},   {1, 0.0, 0.18},   {2, 0.0, 0.15},   {7, 0.0, 0.03},
      {9, 0.0, -0.03},  {18, 0.06, -0.08}, {19, 0.02, -0.01}, {21, 0.02, -0.22}};
  switch (e) {
    case Expression::neutral: return none;
    case Expression::anger: return anger;
    case Expression::disgust: return disgust;
    case Expression::fear: return fear;
    case Expression::happiness: return happiness;
    case Expression::sadness: return sadness;
    case Expression::surprise: return surprise;
  }
  return none;
}

Vector build_mode(Expression e) {
  Vector mode = Vector::Zero(kShapeDims);
  for (const auto& d : left_mode(e)) {
    const Index r = mirror_landmark(d.landmark);
    mode(2 * d.landmark) = d.dx;
    mode(2 * d.landmark + 1) = d.dy;
    mode(2 * r) = -d.dx;
    mode(2 * r + 1) = d.dy;
  }
  return mode;
}

CanonicalFace3D build_standard() {
  CanonicalFace3D face;
  for (const auto& [index, p] : kLeftTemplate) {
    face.points[static_cast<std::size_t>(index)] = {p.x, p.y, p.z};
    face.points[static_cast<std::size_t>(mirror_landmark(index))] = {-p.x, p.y, p.z};
  }
  return face;
}

std::string make_id(const char* prefix, Index n, int width) {
  std::ostringstream os;
  os << prefix << std::setw(width) << std::setfill('0') << n;
  return os.str();
}

}  // namespace

const CanonicalFace3D& CanonicalFace3D::standard() {
  static const CanonicalFace3D face = build_standard();
  return face;
}

ShapeVector CanonicalFace3D::frontal_shape() const {
  ShapeVector s;
  for (Index i = 0; i < kLandmarks; ++i) {
    const auto& p = points[static_cast<std::size_t>(i)];
    s.set_point(i, {p.x(), p.y()});
  }
  return s;
}

Vector CanonicalFace3D::depths() const {
  Vector z(kLandmarks);
  for (Index i = 0; i < kLandmarks; ++i) z(i) = points[static_cast<std::size_t>(i)].z();
  return z;
}

std::string_view expression_name(Expression e) {
  switch (e) {
    case Expression::neutral: return "neutral";
    case Expression::anger: return "anger";
    case Expression::disgust: return "disgust";
    case Expression::fear: return "fear";
    case Expression::happiness: return "happiness";
    case Expression::sadness: return "sadness";
    case Expression::surprise: return "surprise";
  }
  return "neutral";
}

Expression parse_expression(std::string_view label) {
  for (Expression e : kExpressions) {
    if (expression_name(e) == label) return e;
  }
  throw ConfigError("unknown expression label '" + std::string(label) + "'");
}

const Vector& expression_mode(Expression e) {
  static const std::array<Vector, 7> modes = [] {
    std::array<Vector, 7> m;
    for (std::size_t i = 0; i < kExpressions.size(); ++i) m[i] = build_mode(kExpressions[i]);
    return m;
  }();
  return modes[static_cast<std::size_t>(e)];
}

ShapeVector generate_shape(const ExpressionSpec& expr, std::uint64_t identity_seed,
                           double identity_std) {
  if (!(expr.intensity >= 0.0 && expr.intensity <= 1.0)) {
    throw ConfigError("expression intensity must be in [0, 1]");
  }
  if (!(identity_std >= 0.0)) {
    throw ConfigError("identity_std must be >= 0");
  }
  Vector coords = CanonicalFace3D::standard().frontal_shape().coords();
  if (expr.intensity > 0.0) {
    coords += expr.intensity * expression_mode(expr.label);
  }
  if (identity_std > 0.0) {
    Rng rng(identity_seed);
    for (Index i = 0; i < kShapeDims; ++i) coords(i) += identity_std * rng.normal();
  }
  return normalize_by_eyes(ShapeVector(std::move(coords)));
}

ShapeVector rotate_about_vertical(const ShapeVector& shape, const Vector& depths,
                                  double theta_deg) {
  require_size(depths.size(), kLandmarks, "rotate_about_vertical depths");
  const double theta = theta_deg * std::numbers::pi / 180.0;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  ShapeVector out;
  for (Index i = 0; i < kLandmarks; ++i) {
    const Eigen::Vector2d p = shape.point(i);
    out.set_point(i, {p.x() * c + depths(i) * s, p.y()});
  }
  return out;
}

ShapeVector project_pose(const ShapeVector& shape, double theta_deg,
                         const CanonicalFace3D& face) {
  if (!std::isfinite(theta_deg) || std::abs(theta_deg) >= kMaxPoseDeg) {
    throw ConfigError("project_pose: |theta| must be below 50 degrees");
  }
  return normalize_by_eyes(rotate_about_vertical(shape, face.depths(), theta_deg));
}

std::string_view corruption_name(CorruptionMode m) {
  switch (m) {
    case CorruptionMode::outlier_point: return "outlier";
    case CorruptionMode::half_face: return "half";
    case CorruptionMode::additive_noise: return "noise";
  }
  return "outlier";
}

CorruptionMode parse_corruption(std::string_view name) {
  if (name == "outlier") return CorruptionMode::outlier_point;
  if (name == "half") return CorruptionMode::half_face;
  if (name == "noise") return CorruptionMode::additive_noise;
  throw ConfigError("unknown corruption mode '" + std::string(name) + "'");
}

std::vector<Index> CorruptionSpec::affected_landmarks() const {
  switch (mode) {
    case CorruptionMode::outlier_point: return targets;
    case CorruptionMode::half_face: {
      if (!targets.empty()) return targets;
      const auto half = left_half_landmarks();
      return {half.begin(), half.end()};
    }
    case CorruptionMode::additive_noise: {
      std::vector<Index> all(kLandmarks);
      for (Index i = 0; i < kLandmarks; ++i) all[static_cast<std::size_t>(i)] = i;
      return all;
    }
  }
  return {};
}

void CorruptionSpec::validate() const {
  if (!(magnitude >= 0.0) || !std::isfinite(magnitude)) {
    throw ConfigError("corruption magnitude must be finite and >= 0");
  }
  for (Index t : targets) {
    if (t < 0 || t >= kLandmarks) {
      throw ConfigError("corruption target out of range: " + std::to_string(t));
    }
  }
}

ShapeVector corrupt(const ShapeVector& shape, const CorruptionSpec& spec, Rng& rng) {
  spec.validate();
  ShapeVector out = shape;
  if (spec.mode == CorruptionMode::outlier_point) {
    for (Index t : spec.targets) {
      const double phi = 2.0 * std::numbers::pi * rng.uniform();
      out.set_point(t, out.point(t) + spec.magnitude * Eigen::Vector2d(std::cos(phi), std::sin(phi)));
    }
    return out;
  }
  for (Index t : spec.affected_landmarks()) {
    const double dx = spec.magnitude * rng.normal();
    const double dy = spec.magnitude * rng.normal();
    out.set_point(t, out.point(t) + Eigen::Vector2d(dx, dy));
  }
  return out;
}

void ShapeSequence::validate() const {
  if (frames.empty()) {
    throw ConfigError("sequence '" + id + "' has no frames");
  }
}

void DatasetOptions::validate() const {
  if (n < 1) throw ConfigError("dataset size n must be >= 1");
  if (expressions.empty()) throw ConfigError("at least one expression is required");
  if (!(min_intensity >= 0.0 && min_intensity <= 1.0)) {
    throw ConfigError("min_intensity must be in [0, 1]");
  }
  for (double p : poses_deg) {
    if (std::abs(p) >= kMaxPoseDeg) throw ConfigError("pose angles must be below 50 degrees");
  }
  if (sequences < 0) throw ConfigError("sequence count must be >= 0");
  if (sequences > 0 && sequence_length < 1) throw ConfigError("sequence_length must be >= 1");
  if (std::abs(sequence_pose_deg) >= kMaxPoseDeg) {
    throw ConfigError("sequence pose must be below 50 degrees");
  }
  if (!(measurement_noise >= 0.0) || !(pair_noise >= 0.0) || !(outlier_magnitude >= 0.0)) {
    throw ConfigError("noise levels must be >= 0");
  }
  if (!(outlier_frame_prob >= 0.0 && outlier_frame_prob <= 1.0)) {
    throw ConfigError("outlier_frame_prob must be in [0, 1]");
  }
  if (outlier_points < 0 || outlier_points > kLandmarks) {
    throw ConfigError("outlier_points must be in [0, 26]");
  }
}

double onset_apex_intensity(int frame, int length, double apex) {
  if (length <= 1) return apex;
  // Neutral for the first fifth of the sequence, then a linear onset.
  const int hold = length / 5;
  if (frame <= hold) return 0.0;
  return apex * static_cast<double>(frame - hold) / static_cast<double>(length - 1 - hold);
}

namespace {

ExpressionSpec draw_expression(const DatasetOptions& o, Rng& rng) {
  ExpressionSpec spec;
  spec.label = o.expressions[rng.below(o.expressions.size())];
  const double u = rng.uniform();
  spec.intensity = spec.label == Expression::neutral
                       ? 0.0
                       : o.min_intensity + (1.0 - o.min_intensity) * u;
  return spec;
}

ShapeSequence make_sequence(const DatasetOptions& o, Index index, Rng& rng) {
  ShapeSequence seq;
  seq.id = make_id("seq-", index, 4);
  const std::uint64_t identity = rng.next_u64();
  Expression label = Expression::neutral;
  std::vector<Expression> expressive;
  for (Expression e : o.expressions) {
    if (e != Expression::neutral) expressive.push_back(e);
  }
  if (!expressive.empty()) label = expressive[rng.below(expressive.size())];
  const double apex = 0.6 + 0.4 * rng.uniform();

  for (int t = 0; t < o.sequence_length; ++t) {
    ExpressionSpec spec{label, onset_apex_intensity(t, o.sequence_length, apex)};
    ShapeVector truth = generate_shape(spec, identity, o.identity_std);
    if (o.sequence_pose_deg != 0.0) truth = project_pose(truth, o.sequence_pose_deg);

    CorruptionSpec noise{CorruptionMode::additive_noise, {}, o.measurement_noise};
    ShapeVector measured = corrupt(truth, noise, rng);
    if (o.outlier_points > 0 && rng.bernoulli(o.outlier_frame_prob)) {
      std::set<Index> picked;
      while (static_cast<int>(picked.size()) < o.outlier_points) {
        picked.insert(static_cast<Index>(rng.below(kLandmarks)));
      }
      CorruptionSpec outliers{CorruptionMode::outlier_point, {picked.begin(), picked.end()},
                              o.outlier_magnitude};
      measured = corrupt(measured, outliers, rng);
    }
    seq.frames.push_back(
        SequenceFrame{measured, truth, o.sequence_pose_deg, std::string(expression_name(label))});
  }
  return seq;
}

}  // namespace

Dataset make_dataset(const DatasetOptions& o, Rng& rng) {
  o.validate();
  Dataset data;
  const std::uint64_t shape_base = rng.next_u64();
  const std::uint64_t sequence_base = rng.next_u64();

  data.frontal.resize(static_cast<std::size_t>(o.n));
  if (!o.poses_deg.empty()) data.pairs.resize(static_cast<std::size_t>(o.n));
  kernels::parallel_for(o.n, [&](Index k) {
    Rng local(Rng::derive_seed(shape_base, static_cast<std::uint64_t>(k)));
    const ExpressionSpec spec = draw_expression(o, local);
    const std::uint64_t identity = local.next_u64();
    const ShapeVector frontal = generate_shape(spec, identity, o.identity_std);
    const auto slot = static_cast<std::size_t>(k);
    const std::string label(expression_name(spec.label));
    data.frontal[slot] = ShapeRecord{make_id("shape-", k, 6), label, 0.0, frontal};
    if (!o.poses_deg.empty()) {
      const double pose = o.poses_deg[local.below(o.poses_deg.size())];
      ShapeVector posed = project_pose(frontal, pose);
      if (o.pair_noise > 0.0) {
        posed = corrupt(posed, {CorruptionMode::additive_noise, {}, o.pair_noise}, local);
      }
      data.pairs[slot] = PairRecord{make_id("pair-", k, 6), label, pose, frontal, posed};
    }
  });

  data.sequences.resize(static_cast<std::size_t>(o.sequences));
  kernels::parallel_for(o.sequences, [&](Index s) {
    Rng local(Rng::derive_seed(sequence_base, static_cast<std::uint64_t>(s)));
    data.sequences[static_cast<std::size_t>(s)] = make_sequence(o, s, local);
  });
  return data;
}

}  // namespace faceprior
