#pragma once

#include <filesystem>
#include <string_view>

#include <nlohmann/json.hpp>

namespace emoface {

/// Parses the subset of TOML used by emoface config files into a JSON
/// object: [tables] and [dotted.tables], bare/quoted/dotted keys, basic and
/// literal strings, integers, floats, booleans and (possibly multi-line)
/// arrays of those. Inline tables, dates and multi-line strings are rejected.
/// Throws InvalidArgument with a line number on malformed input.
nlohmann::json parse_toml(std::string_view text);

nlohmann::json load_toml_file(const std::filesystem::path& path);

}  // namespace emoface
