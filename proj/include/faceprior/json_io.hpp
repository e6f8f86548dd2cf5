#pragma once

#include "faceprior/common.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>

namespace faceprior::json {

/// Insertion-ordered so that emitted documents are byte-stable.
using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

/// Compact JSON; floating point always carries 17 significant digits.
void write(std::ostream& os, const Json& doc);
std::string dump(const Json& doc);

/// Throws IoError when the file cannot be opened, FormatError on bad JSON.
Json read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const Json& doc);

/// Member lookup that names the missing field in its FormatError.
const Json& field(const Json& obj, const char* name);

/// Rejects documents without format_version or with a newer one.
void check_version(const Json& doc, const std::string& what);

Json from_vector(const Vector& v);
Json from_matrix_row_major(const Matrix& m);
Vector to_vector(const Json& arr, const char* name, Index expected = -1);
Matrix to_matrix_row_major(const Json& arr, const char* name, Index rows, Index cols);

}  // namespace faceprior::json
