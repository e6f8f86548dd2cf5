#include "faceprior/corpus_io.hpp"

#include "faceprior/json_io.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <string>

namespace faceprior {

using json::Json;

namespace {

Json shape_json(const ShapeVector& s) { return json::from_vector(s.coords()); }

ShapeVector shape_from(const Json& obj, const char* name) {
  return ShapeVector(json::to_vector(json::field(obj, name), name, kShapeDims));
}

std::string string_from(const Json& obj, const char* name) {
  const Json& v = json::field(obj, name);
  if (!v.is_string()) throw FormatError(std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

double number_from(const Json& obj, const char* name) {
  const Json& v = json::field(obj, name);
  if (!v.is_number()) throw FormatError(std::string("field '") + name + "' must be a number");
  return v.get<double>();
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

void write_line(std::ofstream& out, const Json& doc) {
  json::write(out, doc);
  out << '\n';
}

// Calls `fn` for every non-empty line; errors name the offending line.
void for_each_line(const std::filesystem::path& path, const std::function<void(const Json&)>& fn) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    try {
      const Json doc = Json::parse(line);
      json::check_version(doc, where);
      fn(doc);
    } catch (const Json::parse_error& e) {
      throw FormatError(where + ": invalid JSON: " + e.what());
    } catch (const FormatError& e) {
      throw FormatError(where + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw FormatError(where + ": " + e.what());
    }
  }
}

}  // namespace

void write_shapes(const std::filesystem::path& path, const std::vector<ShapeRecord>& records) {
  auto out = open_out(path);
  for (const auto& r : records) {
    Json doc;
    doc["format_version"] = json::kFormatVersion;
    doc["id"] = r.id;
    doc["expression_label"] = r.expression_label;
    doc["pose_deg"] = r.pose_deg;
    doc["coords"] = shape_json(r.coords);
    write_line(out, doc);
  }
}

std::vector<ShapeRecord> read_shapes(const std::filesystem::path& path) {
  std::vector<ShapeRecord> records;
  for_each_line(path, [&](const Json& doc) {
    records.push_back({string_from(doc, "id"), string_from(doc, "expression_label"),
                       number_from(doc, "pose_deg"), shape_from(doc, "coords")});
  });
  return records;
}

void write_pairs(const std::filesystem::path& path, const std::vector<PairRecord>& records) {
  auto out = open_out(path);
  for (const auto& r : records) {
    Json doc;
    doc["format_version"] = json::kFormatVersion;
    doc["id"] = r.id;
    doc["expression_label"] = r.expression_label;
    doc["pose_deg"] = r.pose_deg;
    doc["frontal"] = shape_json(r.frontal);
    doc["posed"] = shape_json(r.posed);
    write_line(out, doc);
  }
}

std::vector<PairRecord> read_pairs(const std::filesystem::path& path) {
  std::vector<PairRecord> records;
  for_each_line(path, [&](const Json& doc) {
    records.push_back({string_from(doc, "id"), string_from(doc, "expression_label"),
                       number_from(doc, "pose_deg"), shape_from(doc, "frontal"),
                       shape_from(doc, "posed")});
  });
  return records;
}

void write_sequences(const std::filesystem::path& path, const std::vector<ShapeSequence>& seqs) {
  auto out = open_out(path);
  for (const auto& seq : seqs) {
    for (std::size_t f = 0; f < seq.frames.size(); ++f) {
      const auto& frame = seq.frames[f];
      Json doc;
      doc["format_version"] = json::kFormatVersion;
      doc["sequence_id"] = seq.id;
      doc["frame"] = f;
      doc["expression_label"] = frame.expression_label;
      doc["pose_deg"] = frame.pose_deg;
      doc["measurement"] = shape_json(frame.measurement);
      doc["ground_truth"] = frame.ground_truth ? shape_json(*frame.ground_truth) : Json(nullptr);
      write_line(out, doc);
    }
  }
}

std::vector<ShapeSequence> read_sequences(const std::filesystem::path& path) {
  std::vector<ShapeSequence> seqs;
  std::map<std::string, std::size_t> slot;
  for_each_line(path, [&](const Json& doc) {
    const std::string id = string_from(doc, "sequence_id");
    auto [it, inserted] = slot.try_emplace(id, seqs.size());
    if (inserted) seqs.push_back(ShapeSequence{id, {}});
    auto& seq = seqs[it->second];

    const Json& frame_no = json::field(doc, "frame");
    if (!frame_no.is_number_integer() ||
        frame_no.get<long long>() != static_cast<long long>(seq.frames.size())) {
      throw FormatError("field 'frame' out of order in sequence '" + id + "'");
    }
    SequenceFrame frame;
    frame.expression_label = string_from(doc, "expression_label");
    frame.pose_deg = number_from(doc, "pose_deg");
    frame.measurement = shape_from(doc, "measurement");
    if (!json::field(doc, "ground_truth").is_null()) {
      frame.ground_truth = shape_from(doc, "ground_truth");
    }
    seq.frames.push_back(std::move(frame));
  });
  return seqs;
}

}  // namespace faceprior
