#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>

#include <json.hpp>

namespace contune {

/// Insertion-ordered JSON keeps serialized documents in a fixed key order,
/// which the manifest format relies on for byte-stable output.
using Json = nlohmann::ordered_json;

Json load_json_file(const std::filesystem::path& path);
Json parse_json_text(std::string_view text, const std::string& origin);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

std::uint64_t fnv1a64(std::string_view bytes);
std::string digest_hex(std::string_view bytes);

// Strict accessors. `where` is a JSON-pointer-like path used in diagnostics.
void expect_keys(const Json& obj, std::initializer_list<const char*> allowed,
                 const std::string& where);
const Json& require_field(const Json& obj, const char* key, const std::string& where);
std::string require_string(const Json& obj, const char* key, const std::string& where);
double require_number(const Json& obj, const char* key, const std::string& where);
std::int64_t require_integer(const Json& obj, const char* key, const std::string& where);

double get_number(const Json& obj, const char* key, double fallback, const std::string& where);
std::int64_t get_integer(const Json& obj, const char* key, std::int64_t fallback,
                         const std::string& where);
std::string get_string(const Json& obj, const char* key, const std::string& fallback,
                       const std::string& where);

}  // namespace contune
