#include "vrec/json_util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "vrec/errors.hpp"

namespace vrec {
namespace {

std::string format_fixed(double v) {
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::kInvalidArgument, "cannot serialize a non-finite number");
  }
  char buf[512];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  std::string s(buf);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

bool is_scalar(const Json& v) { return !v.is_object() && !v.is_array(); }

void dump(const Json& v, int indent, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += inner + Json(it.key()).dump() + ": ";
        dump(it.value(), indent + 1, out);
      }
      out += "\n" + pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      const bool flat = std::all_of(v.begin(), v.end(), is_scalar);
      if (flat) {
        out += "[";
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (i) out += ", ";
          dump(v[i], indent + 1, out);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",\n";
        out += inner;
        dump(v[i], indent + 1, out);
      }
      out += "\n" + pad + "]";
      return;
    }
    case Json::value_t::number_float:
      out += format_fixed(v.get<double>());
      return;
    default:
      out += v.dump();
      return;
  }
}

std::string escape_pointer_token(std::string_view key) {
  std::string s;
  for (const char c : key) {
    if (c == '~') {
      s += "~0";
    } else if (c == '/') {
      s += "~1";
    } else {
      s += c;
    }
  }
  return s;
}

}  // namespace

std::string canonical_dump(const Json& value) {
  std::string out;
  dump(value, 0, out);
  out += "\n";
  return out;
}

Json parse_json(std::string_view text, std::string_view source) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kSchemaViolation, "invalid JSON: " + std::string(e.what()),
                std::string(source) + "@byte " + std::to_string(e.byte));
  } catch (const Json::exception& e) {
    // Out-of-range numbers and similar; the library gives no offset.
    throw Error(ErrorCode::kSchemaViolation, "invalid JSON: " + std::string(e.what()),
                std::string(source));
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open file", path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write file", path.string());
  out << text;
}

namespace schema {

void fail(const std::string& ptr, const std::string& message) {
  throw Error(ErrorCode::kSchemaViolation, message, ptr.empty() ? "/" : ptr);
}

std::string child(const std::string& ptr, std::string_view key) {
  return ptr + "/" + escape_pointer_token(key);
}

std::string child(const std::string& ptr, std::size_t index) {
  return ptr + "/" + std::to_string(index);
}

void expect_object(const Json& value, const std::string& ptr,
                   std::initializer_list<std::string_view> allowed_keys) {
  if (!value.is_object()) fail(ptr, "expected an object");
  for (auto it = value.begin(); it != value.end(); ++it) {
    bool known = false;
    for (const std::string_view k : allowed_keys) known = known || k == it.key();
    if (!known) fail(child(ptr, it.key()), "unknown key '" + it.key() + "'");
  }
}

const Json& require(const Json& object, std::string_view key, const std::string& ptr) {
  auto it = object.find(std::string(key));
  if (it == object.end()) fail(child(ptr, key), "missing required key");
  return *it;
}

const Json* optional(const Json& object, std::string_view key) {
  auto it = object.find(std::string(key));
  return it == object.end() ? nullptr : &*it;
}

const Json& expect_array(const Json& value, const std::string& ptr) {
  if (!value.is_array()) fail(ptr, "expected an array");
  return value;
}

double expect_number(const Json& value, const std::string& ptr) {
  if (!value.is_number()) fail(ptr, "expected a number");
  const double v = value.get<double>();
  if (!std::isfinite(v)) fail(ptr, "number is not finite");
  return v;
}

std::int64_t expect_integer(const Json& value, const std::string& ptr) {
  if (value.is_number_integer()) return value.get<std::int64_t>();
  if (value.is_number_float()) {
    const double v = value.get<double>();
    if (std::isfinite(v) && std::floor(v) == v && std::abs(v) < 9.0e15) {
      return static_cast<std::int64_t>(v);
    }
  }
  fail(ptr, "expected an integer");
}

bool expect_bool(const Json& value, const std::string& ptr) {
  if (!value.is_boolean()) fail(ptr, "expected true or false");
  return value.get<bool>();
}

std::string expect_string(const Json& value, const std::string& ptr) {
  if (!value.is_string()) fail(ptr, "expected a string");
  return value.get<std::string>();
}

}  // namespace schema
}  // namespace vrec
