#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace emoface::eval {

/// One reproducible number: rerunning with `seed` and the config that hashes
/// to `config_hash` on `dataset` regenerates `value`.
struct EvalReport {
  std::string metric;
  double value = 0.0;
  std::string dataset;
  std::string config_hash;
  std::uint64_t seed = 0;
};

/// A directional claim checked against measured reports.
struct DirectionalCheck {
  std::string claim;
  bool passed = false;
};

/// Columns metric,value,dataset,config_hash,seed; values at round-trip
/// precision.
std::string reports_csv(const std::vector<EvalReport>& reports);
nlohmann::ordered_json reports_json(const std::vector<EvalReport>& reports,
                                    const std::vector<DirectionalCheck>& checks = {});
/// Writes `<prefix>.csv` and `<prefix>.json`.
void write_reports(const std::filesystem::path& prefix, const std::vector<EvalReport>& reports,
                   const std::vector<DirectionalCheck>& checks = {});

}  // namespace emoface::eval
