#pragma once

// Stable JSON output: keys keep insertion order and every floating value is
// printed with 17 significant digits, so identical runs give identical bytes.

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>

namespace afp {

using Json = nlohmann::ordered_json;

std::string format_double(double x);
std::string dump_json(const Json& j);
void write_json_file(const std::filesystem::path& path, const Json& j);
Json read_json_file(const std::filesystem::path& path);

}  // namespace afp
