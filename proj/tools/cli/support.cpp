#include "support.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "emoface/common/config.hpp"
#include "emoface/common/text.hpp"
#include "emoface/nn/checkpoint.hpp"

namespace emoface::cli {

nlohmann::json resolve_config(const std::optional<fs::path>& file, const std::vector<std::string>& sets,
                              const std::optional<std::uint64_t>& seed) {
  nlohmann::json cfg = file ? load_config_file(*file) : nlohmann::json::object();
  if (!cfg.is_object()) throw ValidationError("config root must be a table");
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--set expects key=value, got '" + s + "'");
    const std::string key = s.substr(0, eq), raw = s.substr(eq + 1);
    auto value = nlohmann::json::parse(raw, nullptr, false);
    set_config_path(cfg, key, value.is_discarded() ? nlohmann::json(raw) : value);
  }
  if (seed) cfg["seed"] = *seed;
  if (!cfg.contains("seed")) cfg["seed"] = 0;
  return cfg;
}

std::uint64_t global_seed(const nlohmann::json& cfg) { return config_value<std::uint64_t>(cfg, "seed", 0); }

nlohmann::json seeded_section(const nlohmann::json& cfg, const std::string& name) {
  nlohmann::json s = nlohmann::json::object();
  if (const auto* p = find_config_path(cfg, name)) {
    if (!p->is_object()) throw ValidationError("config section [" + name + "] must be a table");
    s = *p;
  }
  if (!s.contains("seed")) s["seed"] = global_seed(cfg);
  return s;
}

std::string require_string(const nlohmann::json& cfg, const std::string& dotted) {
  const auto* v = find_config_path(cfg, dotted);
  if (!v || !v->is_string() || v->get<std::string>().empty())
    throw InvalidArgument("config key '" + dotted + "' is required");
  return v->get<std::string>();
}

nlohmann::json ConfigOptions::resolve() const {
  return resolve_config(file ? std::optional<fs::path>(*file) : std::nullopt, sets, seed);
}

void add_config_options(CLI::App& app, ConfigOptions& o, bool file_required) {
  auto* c = app.add_option("--config", o.file, "TOML or JSON config file");
  if (file_required) c->required();
  app.add_option("--set", o.sets, "Override a config value, e.g. --set train.epochs=5")->take_all();
  app.add_option("--seed", o.seed, "Global seed (overrides the config)");
}

fs::path sidecar_path(const fs::path& artifact) { return fs::path(artifact.string() + ".meta.json"); }

void write_sidecar(const Context& ctx, const fs::path& artifact, const std::string& command,
                   const nlohmann::json& config, std::uint64_t seed, const nlohmann::json& extra) {
  nlohmann::ordered_json j;
  j["format"] = "emoface-run";
  j["command"] = command;
  j["argv"] = ctx.args;
  j["cwd"] = fs::current_path().string();
  j["artifact"] = artifact.filename().string();
  j["config"] = config;
  j["config_hash"] = config_hash(config);
  j["seed"] = seed;
  for (const auto& [k, v] : extra.items()) j[k] = v;
  write_file(sidecar_path(artifact), j.dump(2) + "\n");
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
  std::string s;
  for (const auto& l : lines) s += l + "\n";
  ensure_parent(path);
  write_file(path, s);
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::vector<std::string> out;
  std::istringstream is(read_file(path));
  for (std::string line; std::getline(is, line);) {
    const auto t = trim(line);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

SplitStore load_split_store(const nlohmann::json& cfg, std::ostream& warn) {
  const auto split_seed = config_value<std::uint64_t>(cfg, "data.split_seed", global_seed(cfg));
  SplitStore s{tead::TEADStore::load(require_string(cfg, "data.store"), split_seed), tead::TEADStore(), tead::TEADStore(), {}};
  s.split = tead::split_dataset(s.all, config_value<double>(cfg, "data.split_fraction", 0.9));
  if (s.split.warning) warn << "warning: " << *s.split.warning << "\n";
  s.train = s.all.subset(s.split.train);
  s.test = s.all.subset(s.split.test);
  return s;
}

std::function<std::optional<std::size_t>(std::string_view)> prefix_groups(const tead::TEADStore& store) {
  auto prefix = [](std::string_view id) {
    const auto dash = id.rfind('-');
    return std::string(dash == std::string_view::npos ? id : id.substr(0, dash));
  };
  auto index = std::make_shared<std::map<std::string, std::size_t>>();
  for (const auto& q : store.records()) index->emplace(prefix(q.id), index->size());
  return [index, prefix](std::string_view id) -> std::optional<std::size_t> {
    const auto it = index->find(prefix(id));
    if (it == index->end()) return std::nullopt;
    return it->second;
  };
}

std::vector<double> parse_reals(std::string_view text) {
  const auto t = trim(text);
  std::vector<double> out;
  if (!t.empty() && t.front() == '[') {
    try {
      return nlohmann::json::parse(t).get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(std::string("bad JSON array: ") + e.what());
    }
  }
  std::string s(t);
  for (auto& c : s)
    if (c == ',') c = ' ';
  for (const auto& tok : split_whitespace(s)) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) throw ValidationError("not a number: '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

void ensure_parent(const fs::path& file) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
}

}  // namespace emoface::cli
