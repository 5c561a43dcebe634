#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>

#include "json.hpp"

namespace vrec {

using Json = nlohmann::json;

// Canonical text: keys sorted, two-space indent, floating-point numbers as
// %.6f, scalar-only arrays on one line, trailing newline.
std::string canonical_dump(const Json& value);

// Parses JSON text; syntax errors become ErrorCode::kSchemaViolation with
// the byte offset as location.
Json parse_json(std::string_view text, std::string_view source = "<input>");

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

// Schema helpers. `ptr` is the JSON pointer of `value`; every failure throws
// ErrorCode::kSchemaViolation located at the offending pointer.
namespace schema {

std::string child(const std::string& ptr, std::string_view key);
std::string child(const std::string& ptr, std::size_t index);

void expect_object(const Json& value, const std::string& ptr,
                   std::initializer_list<std::string_view> allowed_keys);
const Json& require(const Json& object, std::string_view key, const std::string& ptr);
const Json* optional(const Json& object, std::string_view key);

const Json& expect_array(const Json& value, const std::string& ptr);
double expect_number(const Json& value, const std::string& ptr);
std::int64_t expect_integer(const Json& value, const std::string& ptr);
bool expect_bool(const Json& value, const std::string& ptr);
std::string expect_string(const Json& value, const std::string& ptr);

[[noreturn]] void fail(const std::string& ptr, const std::string& message);

}  // namespace schema
}  // namespace vrec
