#include "emoface/common/config.hpp"

#include "emoface/common/text.hpp"
#include "emoface/common/toml.hpp"

namespace emoface {

nlohmann::json load_config_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("config not found: " + path.string());
  const std::string text = read_file(path);
  if (path.extension() == ".json") {
    try {
      return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw InvalidArgument(path.string() + ": " + e.what());
    }
  }
  return parse_toml(text);
}

void merge_config(nlohmann::json& base, const nlohmann::json& overlay) {
  if (!base.is_object() || !overlay.is_object()) {
    base = overlay;
    return;
  }
  for (auto it = overlay.begin(); it != overlay.end(); ++it) {
    if (base.contains(it.key()) && base[it.key()].is_object() && it.value().is_object()) {
      merge_config(base[it.key()], it.value());
    } else {
      base[it.key()] = it.value();
    }
  }
}

void set_config_path(nlohmann::json& cfg, std::string_view dotted, nlohmann::json value) {
  nlohmann::json* node = &cfg;
  for (const auto& key : split(dotted, '.')) {
    if (!node->is_object()) *node = nlohmann::json::object();
    node = &(*node)[key];
  }
  *node = std::move(value);
}

const nlohmann::json* find_config_path(const nlohmann::json& cfg, std::string_view dotted) {
  const nlohmann::json* node = &cfg;
  for (const auto& key : split(dotted, '.')) {
    if (!node->is_object()) return nullptr;
    auto it = node->find(key);
    if (it == node->end()) return nullptr;
    node = &*it;
  }
  return node;
}

std::string config_hash(const nlohmann::json& cfg) { return hex64(fnv1a64(cfg.dump())); }

}  // namespace emoface
