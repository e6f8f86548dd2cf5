#include "faceprior/corpus_io.hpp"
#include "faceprior/model_io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace faceprior;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "faceprior_io_tests";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <class P>
P random_rbm(Index v, Index h, Rng& rng) {
  P p = P::zeros(v, h);
  for (Index j = 0; j < h; ++j) {
    for (Index i = 0; i < v; ++i) p.weights(j, i) = rng.normal() / 3.0;
    p.hidden_bias(j) = rng.normal();
  }
  for (Index i = 0; i < v; ++i) p.visible_bias(i) = rng.normal();
  return p;
}

FrontalPriorModel random_frontal(Rng& rng) {
  FrontalPriorModel m;
  m.layer1 = random_rbm<GbRbmParams>(kShapeDims, 7, rng);
  m.layer2 = random_rbm<BinaryRbmParams>(7, 3, rng);
  Matrix data(kShapeDims, 5);
  for (Index c = 0; c < 5; ++c) {
    for (Index r = 0; r < kShapeDims; ++r) data(r, c) = rng.normal();
  }
  m.standardizer = Standardizer::fit(data);
  return m;
}

PosePriorModel random_pose(Rng& rng) {
  PosePriorModel p;
  p.frontal = random_frontal(rng);
  p.transfer = random_threeway(kShapeDims, 4, 5, rng, 0.3);
  p.x_standardizer = p.frontal.standardizer.shifted(1.0);
  p.y_standardizer = p.frontal.standardizer;
  return p;
}

void expect_same(const RbmWeights& a, const RbmWeights& b) {
  EXPECT_TRUE(a.weights == b.weights);
  EXPECT_TRUE(a.visible_bias == b.visible_bias);
  EXPECT_TRUE(a.hidden_bias == b.hidden_bias);
}

Dataset small_dataset() {
  DatasetOptions o;
  o.n = 12;
  o.poses_deg = {-22.5, 22.5};
  o.sequences = 2;
  o.sequence_length = 4;
  Rng rng(3);
  Dataset ds = make_dataset(o, rng);
  ds.sequences[1].frames[2].ground_truth.reset();
  return ds;
}

}  // namespace

TEST(Persistence, FrontalModelRoundTrip) {
  Rng rng(1);
  const FrontalPriorModel m = random_frontal(rng);
  const fs::path path = scratch("frontal.json");
  save_model(m, path);
  const auto loaded = std::get<FrontalPriorModel>(load_model(path));
  expect_same(loaded.layer1, m.layer1);
  expect_same(loaded.layer2, m.layer2);
  EXPECT_TRUE(loaded.standardizer.mean == m.standardizer.mean);
  EXPECT_TRUE(loaded.standardizer.std == m.standardizer.std);
  const std::string first = slurp(path);
  save_model(loaded, path);
  EXPECT_EQ(slurp(path), first);
}

TEST(Persistence, PoseModelRoundTrip) {
  Rng rng(2);
  const PosePriorModel m = random_pose(rng);
  const fs::path path = scratch("pose.json");
  save_model(m, path);
  const auto loaded = std::get<PosePriorModel>(load_model(path));
  expect_same(loaded.frontal.layer1, m.frontal.layer1);
  EXPECT_TRUE(loaded.transfer.factor_x == m.transfer.factor_x);
  EXPECT_TRUE(loaded.transfer.factor_y == m.transfer.factor_y);
  EXPECT_TRUE(loaded.transfer.factor_h == m.transfer.factor_h);
  EXPECT_TRUE(loaded.transfer.bias_h == m.transfer.bias_h);
  EXPECT_TRUE(loaded.x_standardizer.mean == m.x_standardizer.mean);
  EXPECT_TRUE(loaded.y_standardizer.std == m.y_standardizer.std);
}

TEST(Persistence, EnergyCoreDocumentLayout) {
  Rng rng(3);
  const auto p = random_rbm<BinaryRbmParams>(3, 2, rng);
  const auto doc = rbm_to_json(p);
  EXPECT_EQ(doc.at("type"), "binary");
  EXPECT_EQ(doc.at("V"), 3);
  EXPECT_EQ(doc.at("H"), 2);
  EXPECT_EQ(doc.at("weights").size(), 6u);
  EXPECT_EQ(doc.at("weights")[1].get<double>(), p.weights(0, 1));
  EXPECT_TRUE(doc.at("standardizer").is_null());
  expect_same(binary_rbm_from_json(doc), p);
  EXPECT_THROW(gb_rbm_from_json(doc), FormatError);
}

TEST(Persistence, TruncatedFileIsFormatError) {
  Rng rng(4);
  const fs::path path = scratch("truncated.json");
  save_model(random_frontal(rng), path);
  const std::string text = slurp(path);
  std::ofstream(path, std::ios::binary) << text.substr(0, text.size() / 2);
  EXPECT_THROW(load_model(path), FormatError);
}

TEST(Persistence, MissingFieldIsNamed) {
  Rng rng(5);
  auto doc = model_to_json(random_frontal(rng));
  doc["layer1"].erase("hidden_bias");
  try {
    model_from_json(doc);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("hidden_bias"), std::string::npos) << e.what();
  }
}

TEST(Persistence, NewerFormatVersionRefused) {
  Rng rng(6);
  auto doc = model_to_json(random_frontal(rng));
  doc["format_version"] = json::kFormatVersion + 1;
  try {
    model_from_json(doc);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("format_version"), std::string::npos) << e.what();
  }
  doc.erase("format_version");
  EXPECT_THROW(model_from_json(doc), FormatError);
}

TEST(Persistence, MissingFileIsIoError) {
  EXPECT_THROW(load_model(scratch("does-not-exist.json")), IoError);
  EXPECT_THROW(read_shapes(scratch("does-not-exist.jsonl")), IoError);
}

TEST(Persistence, SeventeenDigitsSurvive) {
  json::Json doc;
  doc["v"] = 0.1 + 0.2;
  doc["tiny"] = 5e-324;
  doc["whole"] = 3.0;
  const auto back = json::Json::parse(json::dump(doc));
  EXPECT_EQ(back["v"].get<double>(), 0.1 + 0.2);
  EXPECT_EQ(back["tiny"].get<double>(), 5e-324);
  EXPECT_EQ(back["whole"].get<double>(), 3.0);
  json::Json bad;
  bad["x"] = std::nan("");
  EXPECT_THROW(json::dump(bad), NumericalError);
}

TEST(Persistence, CorporaRoundTripByteIdentical) {
  const Dataset ds = small_dataset();
  const fs::path a = scratch("a.jsonl");
  const fs::path b = scratch("b.jsonl");

  write_shapes(a, ds.frontal);
  write_shapes(b, read_shapes(a));
  EXPECT_EQ(slurp(a), slurp(b));

  write_pairs(a, ds.pairs);
  const auto pairs = read_pairs(a);
  write_pairs(b, pairs);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_TRUE(pairs[3].posed == ds.pairs[3].posed);

  write_sequences(a, ds.sequences);
  const auto seqs = read_sequences(a);
  write_sequences(b, seqs);
  EXPECT_EQ(slurp(a), slurp(b));
  ASSERT_EQ(seqs.size(), 2u);
  EXPECT_FALSE(seqs[1].frames[2].ground_truth.has_value());
  EXPECT_TRUE(seqs[0].frames[3].measurement == ds.sequences[0].frames[3].measurement);
}

TEST(Persistence, CorpusErrorsNameTheLine) {
  const fs::path path = scratch("bad.jsonl");
  std::ofstream(path) << R"({"format_version":1,"id":"a","expression_label":"x","pose_deg":0})"
                      << '\n';
  try {
    read_shapes(path);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find(":1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("coords"), std::string::npos) << msg;
  }
}

TEST(Persistence, MeasurementModelRoundTrip) {
  Rng rng(7);
  Matrix a(4, 4);
  for (Index i = 0; i < 16; ++i) a.data()[i] = rng.normal();
  const MeasurementModel mm{a * a.transpose() + Matrix::Identity(4, 4)};
  const MeasurementModel back = measurement_from_json(measurement_to_json(mm));
  EXPECT_TRUE(back.sigma_l == mm.sigma_l);
}
