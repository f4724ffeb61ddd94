#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "emoface/common/error.hpp"

namespace emoface {

/// Loads a config file; `.json` is parsed as JSON, anything else as TOML.
nlohmann::json load_config_file(const std::filesystem::path& path);

/// Recursive merge: objects merge key by key, everything else in `overlay`
/// replaces the value in `base`.
void merge_config(nlohmann::json& base, const nlohmann::json& overlay);

/// Sets `a.b.c = value`, creating intermediate objects.
void set_config_path(nlohmann::json& cfg, std::string_view dotted, nlohmann::json value);

/// Pointer to the value at `a.b.c`, or nullptr.
const nlohmann::json* find_config_path(const nlohmann::json& cfg, std::string_view dotted);

/// Hex FNV-1a of the canonical (sorted-key) serialization.
std::string config_hash(const nlohmann::json& cfg);

template <typename T>
T config_value(const nlohmann::json& cfg, std::string_view dotted, T fallback) {
  const auto* v = find_config_path(cfg, dotted);
  if (!v || v->is_null()) return fallback;
  try {
    return v->get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("config key '" + std::string(dotted) + "': " + e.what());
  }
}

}  // namespace emoface
