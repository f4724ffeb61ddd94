#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "emoface/tead/records.hpp"

namespace emoface::tead {

/// One JSONL line: {"id": str, "t": str, "e": [str], "b": [52 reals], "s": str}.
nlohmann::ordered_json quadruple_to_json(const Quadruple& q);
/// Throws ValidationError carrying `line` on any schema or invariant failure.
Quadruple quadruple_from_json(const nlohmann::json& j, std::size_t line = 0);

/// Ordered, validated collection of quadruples with unique ids.
class TEADStore {
 public:
  explicit TEADStore(std::uint64_t split_seed = 0) : split_seed_(split_seed) {}

  /// Validates and appends; throws ValidationError on a duplicate id.
  void add(Quadruple q);

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const std::vector<Quadruple>& records() const { return records_; }
  const Quadruple& operator[](std::size_t i) const { return records_.at(i); }
  const Quadruple* find(const std::string& id) const;

  std::uint64_t split_seed() const { return split_seed_; }
  void set_split_seed(std::uint64_t s) { split_seed_ = s; }

  /// Records restricted to `ids`, in the order given.
  TEADStore subset(const std::vector<std::string>& ids) const;

  std::string to_jsonl() const;
  /// Every line is validated; the first failure throws ValidationError
  /// naming its 1-based line number.
  static TEADStore from_jsonl(std::string_view text, std::uint64_t split_seed = 0);
  static TEADStore load(const std::filesystem::path& path, std::uint64_t split_seed = 0);
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<Quadruple> records_;
  std::unordered_map<std::string, std::size_t> index_;
  std::uint64_t split_seed_;
};

struct DatasetSplit {
  std::vector<std::string> train;
  std::vector<std::string> test;
  /// Set when rounding left one side empty (e.g. a single record).
  std::optional<std::string> warning;
};

/// Seeded shuffle of the ids, then the first round(fraction * N) go to train.
/// Throws InvalidArgument unless 0 < fraction < 1.
DatasetSplit split_dataset(const TEADStore& store, double train_fraction);

}  // namespace emoface::tead
