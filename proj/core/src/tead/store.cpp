#include "emoface/tead/store.hpp"

#include <algorithm>
#include <cmath>

#include "emoface/common/error.hpp"
#include "emoface/common/rng.hpp"
#include "emoface/common/text.hpp"

namespace emoface::tead {

nlohmann::ordered_json quadruple_to_json(const Quadruple& q) {
  nlohmann::ordered_json j;
  j["id"] = q.id;
  j["t"] = q.transcript;
  j["e"] = q.tags;
  j["b"] = std::vector<double>(q.blendshapes.values().begin(), q.blendshapes.values().end());
  j["s"] = q.situation;
  return j;
}

Quadruple quadruple_from_json(const nlohmann::json& j, std::size_t line) {
  if (!j.is_object()) throw ValidationError("record is not a JSON object", line);
  for (const char* key : {"id", "t", "e", "b", "s"})
    if (!j.contains(key)) throw ValidationError(std::string("missing field '") + key + "'", line);
  try {
    Quadruple q{j["id"].get<std::string>(), j["t"].get<std::string>(),
                j["e"].get<std::vector<std::string>>(),
                facs::BlendshapeWeights(j["b"].get<std::vector<double>>()),
                j["s"].get<std::string>()};
    validate_quadruple(q, line);
    return q;
  } catch (const ValidationError&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad field type: ") + e.what(), line);
  } catch (const Error& e) {
    throw ValidationError(e.what(), line);
  }
}

void TEADStore::add(Quadruple q) {
  validate_quadruple(q);
  if (index_.count(q.id)) throw ValidationError("duplicate id '" + q.id + "'");
  index_.emplace(q.id, records_.size());
  records_.push_back(std::move(q));
}

const Quadruple* TEADStore::find(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &records_[it->second];
}

TEADStore TEADStore::subset(const std::vector<std::string>& ids) const {
  TEADStore out(split_seed_);
  for (const auto& id : ids) {
    const auto* q = find(id);
    if (!q) throw InvalidArgument("unknown id '" + id + "'");
    out.add(*q);
  }
  return out;
}

std::string TEADStore::to_jsonl() const {
  std::string out;
  for (const auto& q : records_) {
    out += quadruple_to_json(q).dump();
    out += '\n';
  }
  return out;
}

TEADStore TEADStore::from_jsonl(std::string_view text, std::uint64_t split_seed) {
  TEADStore store(split_seed);
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    if (trim(raw).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    Quadruple q = quadruple_from_json(j, line_no);
    if (store.index_.count(q.id)) throw ValidationError("duplicate id '" + q.id + "'", line_no);
    store.add(std::move(q));
  }
  return store;
}

TEADStore TEADStore::load(const std::filesystem::path& path, std::uint64_t split_seed) {
  return from_jsonl(read_file(path), split_seed);
}

void TEADStore::save(const std::filesystem::path& path) const { write_file(path, to_jsonl()); }

DatasetSplit split_dataset(const TEADStore& store, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw InvalidArgument("train fraction must lie strictly between 0 and 1");
  std::vector<std::string> ids;
  ids.reserve(store.size());
  for (const auto& q : store.records()) ids.push_back(q.id);
  Rng rng(store.split_seed());
  std::shuffle(ids.begin(), ids.end(), rng.engine());

  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(ids.size())));
  DatasetSplit split;
  split.train.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.test.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train), ids.end());
  if (!ids.empty() && (split.train.empty() || split.test.empty()))
    split.warning = "split of " + std::to_string(ids.size()) + " record(s) at fraction " +
                    std::to_string(train_fraction) + " leaves " +
                    (split.test.empty() ? "the test" : "the train") + " side empty";
  return split;
}

}  // namespace emoface::tead
