#include "contune/jsonio.hpp"

#include <fstream>
#include <sstream>

#include "contune/error.hpp"

namespace contune {

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write file: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw Error("write failed: " + path.string());
}

Json parse_json_text(std::string_view text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // e.byte is the offset of the failure; report line/column for editors.
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(origin + ":" + std::to_string(line) + ":" + std::to_string(col) +
                ": malformed document: " + e.what());
  }
}

Json load_json_file(const std::filesystem::path& path) {
  return parse_json_text(read_text_file(path), path.string());
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string digest_hex(std::string_view bytes) {
  static const char* kHex = "0123456789abcdef";
  std::uint64_t h = fnv1a64(bytes);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kHex[h & 0xf];
    h >>= 4;
  }
  return out;
}

void expect_keys(const Json& obj, std::initializer_list<const char*> allowed,
                 const std::string& where) {
  if (!obj.is_object()) throw Error(where + ": expected an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) throw Error(where + ": unknown key '" + item.key() + "'");
  }
}

const Json& require_field(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key))
    throw Error(where + ": missing field '" + std::string(key) + "'");
  return obj.at(key);
}

std::string require_string(const Json& obj, const char* key, const std::string& where) {
  const Json& v = require_field(obj, key, where);
  if (!v.is_string()) throw Error(where + "/" + key + ": expected a string");
  return v.get<std::string>();
}

double require_number(const Json& obj, const char* key, const std::string& where) {
  const Json& v = require_field(obj, key, where);
  if (!v.is_number()) throw Error(where + "/" + key + ": expected a number");
  return v.get<double>();
}

std::int64_t require_integer(const Json& obj, const char* key, const std::string& where) {
  const Json& v = require_field(obj, key, where);
  if (!v.is_number_integer())
    throw Error(where + "/" + key + ": expected an integer");
  return v.get<std::int64_t>();
}

double get_number(const Json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  return require_number(obj, key, where);
}

std::int64_t get_integer(const Json& obj, const char* key, std::int64_t fallback,
                         const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  return require_integer(obj, key, where);
}

std::string get_string(const Json& obj, const char* key, const std::string& fallback,
                       const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  return require_string(obj, key, where);
}

}  // namespace contune
