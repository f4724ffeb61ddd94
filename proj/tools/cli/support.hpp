#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "emoface/common/error.hpp"
#include "emoface/tead/store.hpp"

namespace emoface::cli {

namespace fs = std::filesystem;

/// Wrong combination of flags that CLI11 cannot express; exits with 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// A directional or pass/fail verdict that came out negative; exits with 1.
class CheckFailed : public Error {
 public:
  using Error::Error;
};

struct Context {
  std::vector<std::string> args;
  std::ostream& out;
  std::ostream& err;
};

/// Config file (TOML or JSON) merged with `--set a.b=value` overrides and a
/// `--seed` override. Values in --set are parsed as JSON when they parse,
/// otherwise kept as strings. The top-level "seed" is always present.
nlohmann::json resolve_config(const std::optional<fs::path>& file, const std::vector<std::string>& sets,
                              const std::optional<std::uint64_t>& seed);

std::uint64_t global_seed(const nlohmann::json& cfg);

/// cfg[name] as an object, with "seed" defaulting to the global seed.
nlohmann::json seeded_section(const nlohmann::json& cfg, const std::string& name);

/// Required string value; throws InvalidArgument naming the key.
std::string require_string(const nlohmann::json& cfg, const std::string& dotted);

/// Shared options for commands that take a config file.
struct ConfigOptions {
  std::optional<std::string> file;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  nlohmann::json resolve() const;
};
void add_config_options(CLI::App& app, ConfigOptions& o, bool file_required);

/// `<artifact>.meta.json`
fs::path sidecar_path(const fs::path& artifact);

/// Writes the reproducibility sidecar for `artifact`: the command line and
/// working directory (enough for `emoface rerun`), the resolved config, its
/// hash and the seed, plus `extra` fields.
void write_sidecar(const Context& ctx, const fs::path& artifact, const std::string& command,
                   const nlohmann::json& config, std::uint64_t seed,
                   const nlohmann::json& extra = nlohmann::json::object());

void write_lines(const fs::path& path, const std::vector<std::string>& lines);
std::vector<std::string> read_lines(const fs::path& path);

/// A TEAD store split as configured by `data.store`, `data.split_fraction`
/// (default 0.9) and `data.split_seed` (default: the global seed).
struct SplitStore {
  tead::TEADStore all;
  tead::TEADStore train;
  tead::TEADStore test;
  tead::DatasetSplit split;
};
SplitStore load_split_store(const nlohmann::json& cfg, std::ostream& warn);

/// Group of a record: its id up to the last '-', numbered in order of first
/// appearance in `store` ("joy-007" and "joy-012" share a group).
std::function<std::optional<std::size_t>(std::string_view)> prefix_groups(const tead::TEADStore& store);

/// Reals separated by commas or whitespace, or a JSON array.
std::vector<double> parse_reals(std::string_view text);

void ensure_parent(const fs::path& file);

// Command registration.
void add_data_commands(CLI::App& app, Context& ctx);
void add_tead_commands(CLI::App& app, Context& ctx);
void add_train_commands(CLI::App& app, Context& ctx);
void add_infer_command(CLI::App& app, Context& ctx);
void add_eval_commands(CLI::App& app, Context& ctx);
void add_verify_commands(CLI::App& app, Context& ctx);

}  // namespace emoface::cli
