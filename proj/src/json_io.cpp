#include "faceprior/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace faceprior::json {

namespace {

void write_number(std::ostream& os, double v) {
  if (!std::isfinite(v)) {
    throw NumericalError("cannot serialize non-finite number");
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  os << buf;
}

}  // namespace

void write(std::ostream& os, const Json& doc) {
  switch (doc.type()) {
    case Json::value_t::object: {
      os << '{';
      bool first = true;
      for (const auto& [key, value] : doc.items()) {
        if (!first) os << ',';
        first = false;
        os << Json(key).dump() << ':';
        write(os, value);
      }
      os << '}';
      break;
    }
    case Json::value_t::array: {
      os << '[';
      bool first = true;
      for (const auto& value : doc) {
        if (!first) os << ',';
        first = false;
        write(os, value);
      }
      os << ']';
      break;
    }
    case Json::value_t::number_float:
      write_number(os, doc.get<double>());
      break;
    default:
      os << doc.dump();
      break;
  }
}

std::string dump(const Json& doc) {
  std::ostringstream os;
  write(os, doc);
  return os.str();
}

Json read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open '" + path.string() + "'");
  }
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw FormatError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_file(const std::filesystem::path& path, const Json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write '" + path.string() + "'");
  }
  write(out, doc);
  out << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

const Json& field(const Json& obj, const char* name) {
  if (!obj.is_object()) {
    throw FormatError(std::string("expected an object holding field '") + name + "'");
  }
  const auto it = obj.find(name);
  if (it == obj.end()) {
    throw FormatError(std::string("missing field '") + name + "'");
  }
  return *it;
}

void check_version(const Json& doc, const std::string& what) {
  const Json& v = field(doc, "format_version");
  if (!v.is_number_integer()) {
    throw FormatError(what + ": field 'format_version' must be an integer");
  }
  const auto version = v.get<long long>();
  if (version > kFormatVersion) {
    throw FormatError(what + ": format_version " + std::to_string(version) +
                      " is newer than the supported version " +
                      std::to_string(kFormatVersion));
  }
  if (version < 1) {
    throw FormatError(what + ": invalid format_version " + std::to_string(version));
  }
}

Json from_vector(const Vector& v) {
  Json arr = Json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Json from_matrix_row_major(const Matrix& m) {
  Json arr = Json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) arr.push_back(m(r, c));
  }
  return arr;
}

Vector to_vector(const Json& arr, const char* name, Index expected) {
  if (!arr.is_array()) {
    throw FormatError(std::string("field '") + name + "' must be an array");
  }
  const auto n = static_cast<Index>(arr.size());
  if (expected >= 0 && n != expected) {
    throw FormatError(std::string("field '") + name + "' has " + std::to_string(n) +
                      " entries, expected " + std::to_string(expected));
  }
  Vector v(n);
  for (Index i = 0; i < n; ++i) {
    const Json& e = arr[static_cast<std::size_t>(i)];
    if (!e.is_number()) {
      throw FormatError(std::string("field '") + name + "' holds a non-numeric entry");
    }
    v(i) = e.get<double>();
  }
  return v;
}

Matrix to_matrix_row_major(const Json& arr, const char* name, Index rows, Index cols) {
  const Vector flat = to_vector(arr, name, rows * cols);
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) m(r, c) = flat(r * cols + c);
  }
  return m;
}

}  // namespace faceprior::json
